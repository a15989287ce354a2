"""The generation loop shared by every algorithm."""

from __future__ import annotations

import random
import time

from ..operators import EditSpace
from .algorithms import (
    NSGA3_DIVISIONS,
    SearchContext,
    das_dennis,
    final_front,
    hill_climb,
    initial_population,
    nsga2_step,
    nsga3_step,
    spea2_select,
    spea2_step,
)
from .core import Evaluator, RunRecord, SearchConfig, SearchError


def _snapshot(pop: list) -> list:
    return [ind.to_dict() for ind in pop]


def run_search(config: SearchConfig, benchmark) -> RunRecord:
    """Run one seeded search on ``benchmark`` (anything with ``name``,
    ``program`` and ``fixtures``) and return its record.

    Raises SearchError if the original program fails its own tests.
    """
    t0 = time.perf_counter()
    program = benchmark.program
    evaluator = Evaluator(program, benchmark.fixtures, config)
    try:
        space = EditSpace(program)
        if not space.kinds():
            raise SearchError("program has nothing to edit")
        ctx = SearchContext(config, program, evaluator, random.Random(config.seed), space)
        if config.algorithm == "hillclimb":
            rec = _run_hillclimb(ctx)
        else:
            rec = _run_evolutionary(ctx)
    finally:
        evaluator.close()
    rec.benchmark = benchmark.name
    rec.baseline = evaluator.baseline
    rec.wall_seconds = time.perf_counter() - t0
    return rec


def _run_evolutionary(ctx: SearchContext) -> RunRecord:
    cfg, ev = ctx.config, ctx.evaluator
    pop = initial_population(ctx)
    snapshots = [_snapshot(pop)]
    ref_dirs = das_dennis(len(cfg.objectives), NSGA3_DIVISIONS)
    archive: list = []
    if cfg.algorithm == "spea2":
        archive, _ = spea2_select(pop, cfg.population_size, ctx.names)
        snapshots = [_snapshot(archive)]
    for _ in range(1, cfg.generations):
        if ev.remaining <= 0 or not pop:
            break
        if cfg.algorithm == "nsga2":
            pop = nsga2_step(ctx, pop)
        elif cfg.algorithm == "nsga3":
            pop = nsga3_step(ctx, pop, ref_dirs)
        else:
            pop, archive = spea2_step(ctx, pop, archive)
        snapshots.append(_snapshot(archive if cfg.algorithm == "spea2" else pop))
    survivors = archive if cfg.algorithm == "spea2" else pop
    front = final_front(survivors, ctx.names)
    return RunRecord(cfg, "", snapshots, ev.used, 0.0,
                     [(ind.patch, ind.summary) for ind in front],
                     all_invalid=not front, front_samples=[list(ind.fitness) for ind in front])


def _run_hillclimb(ctx: SearchContext) -> RunRecord:
    ev = ctx.evaluator
    best, trace, current = hill_climb(ctx)
    ok = best is not None and best.valid
    front = [(best.patch, best.summary)] if ok else []
    snaps = [_snapshot([best])] if best is not None else []
    return RunRecord(ctx.config, "", snaps, ev.used, 0.0, front, all_invalid=not front,
                     trace=trace, front_samples=[list(best.fitness)] if ok else [])
