"""NSGA-II, NSGA-III, SPEA2 and the single-objective hill climber.

All four share the variation scheme: binary tournament, one-child crossover
with probability ``crossover_rate``, then mutation with probability
``mutation_rate``. Invalid individuals are dominated by every valid one.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..minilang import ast as A
from ..operators import EditSpace, crossover, mutate
from ..patch import Patch, serialize
from .core import Evaluator, Individual, SearchConfig
from .pareto import crowding_distance, dominates, fast_nondominated_sort

NSGA3_DIVISIONS = 12


@dataclass
class SearchContext:
    config: SearchConfig
    program: A.Program
    evaluator: Evaluator
    rng: random.Random
    space: EditSpace

    @property
    def names(self) -> tuple:
        return self.config.objectives

    def points(self, pop) -> list:
        return [ind.objectives(self.names) for ind in pop]


# -- shared pieces --


def rank_fronts(pop: list, names) -> list:
    """Non-dominated fronts of ``pop`` (as index lists); all invalid members form a last front."""
    valid = [i for i, ind in enumerate(pop) if ind.valid]
    invalid = [i for i, ind in enumerate(pop) if not ind.valid]
    pts = [pop[i].objectives(names) for i in valid]
    fronts = [[valid[j] for j in f] for f in fast_nondominated_sort(pts)]
    if invalid:
        fronts.append(invalid)
    return fronts


def _front_crowding(pop: list, front: list, names) -> list:
    if not pop[front[0]].valid:
        return [0.0] * len(front)
    return crowding_distance([pop[i].objectives(names) for i in front])


def _coin(rng: random.Random, a: int, b: int) -> int:
    return a if rng.random() < 0.5 else b


def variation(ctx: SearchContext, pool: list, tournament: Callable[[], int], n: int) -> list:
    """``n`` offspring patches bred from ``pool`` using ``tournament`` to pick parents."""
    cfg, rng = ctx.config, ctx.rng
    kids = []
    for _ in range(n):
        if rng.random() < cfg.crossover_rate:
            a = pool[tournament()].patch
            b = pool[tournament()].patch
            child = crossover(a, b)
        else:
            child = pool[tournament()].patch
        if rng.random() < cfg.mutation_rate:
            child = mutate(child, ctx.program, rng, ctx.space)
        kids.append(child)
    return kids


def breed(ctx: SearchContext, pool: list, tournament, n: int) -> list:
    patches = variation(ctx, pool, tournament, n)
    return [ind for ind in ctx.evaluator.evaluate(patches) if ind is not None]


def initial_population(ctx: SearchContext) -> list:
    """``population_size`` patches, each holding a single random edit."""
    patches = [Patch((ctx.space.draw(ctx.rng),)) for _ in range(ctx.config.population_size)]
    return [ind for ind in ctx.evaluator.evaluate(patches) if ind is not None]


# -- NSGA-II --


def nsga2_rank(pop: list, names) -> tuple:
    """Per-member (front rank, crowding distance)."""
    rank = [0] * len(pop)
    crowd = [0.0] * len(pop)
    for r, front in enumerate(rank_fronts(pop, names)):
        for i, d in zip(front, _front_crowding(pop, front, names)):
            rank[i] = r
            crowd[i] = d
    return rank, crowd


def nsga2_tournament(rng: random.Random, rank: list, crowd: list) -> Callable[[], int]:
    def pick() -> int:
        a, b = rng.randrange(len(rank)), rng.randrange(len(rank))
        if rank[a] != rank[b]:
            return a if rank[a] < rank[b] else b
        if crowd[a] != crowd[b]:
            return a if crowd[a] > crowd[b] else b
        return _coin(rng, a, b)

    return pick


def nsga2_survival(pop: list, n: int, names) -> list:
    chosen: list = []
    for front in rank_fronts(pop, names):
        if len(chosen) + len(front) <= n:
            chosen.extend(front)
            continue
        dist = _front_crowding(pop, front, names)
        order = sorted(range(len(front)), key=lambda j: -dist[j])
        chosen.extend(front[j] for j in order[: n - len(chosen)])
        break
    return [pop[i] for i in chosen]


def nsga2_step(ctx: SearchContext, parents: list) -> list:
    rank, crowd = nsga2_rank(parents, ctx.names)
    kids = breed(ctx, parents, nsga2_tournament(ctx.rng, rank, crowd), ctx.config.population_size)
    return nsga2_survival(parents + kids, ctx.config.population_size, ctx.names)


# -- NSGA-III --


def das_dennis(m: int, h: int) -> list:
    """Structured reference directions: all points on the unit simplex with step 1/h."""
    if m < 1 or h < 1:
        raise ValueError("need m >= 1 and h >= 1")
    dirs = []
    for bars in itertools.combinations(range(h + m - 1), m - 1):
        parts, prev = [], -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(h + m - 2 - prev)
        dirs.append(tuple(p / h for p in parts))
    return dirs


def nsga3_normalize(points: np.ndarray) -> np.ndarray:
    """Translate by the ideal point and scale by extreme-point hyperplane intercepts."""
    m = points.shape[1]
    ideal = points.min(axis=0)
    f = points - ideal
    extremes = []
    for j in range(m):
        w = np.full(m, 1e-6)
        w[j] = 1.0
        asf = (f / w).max(axis=1)
        extremes.append(f[int(np.argmin(asf))])
    e = np.array(extremes)
    intercepts = None
    try:
        b = np.linalg.solve(e, np.ones(m))
        if np.all(b > 1e-12):
            intercepts = 1.0 / b
            if not np.all(np.isfinite(intercepts)) or np.any(intercepts <= 1e-10):
                intercepts = None
    except np.linalg.LinAlgError:
        intercepts = None
    if intercepts is None:
        intercepts = f.max(axis=0)
    intercepts = np.where(intercepts > 1e-10, intercepts, 1.0)
    return f / intercepts


def nsga3_associate(normed: np.ndarray, ref_dirs: np.ndarray) -> tuple:
    """Nearest reference line (index) and perpendicular distance per point."""
    unit = ref_dirs / np.linalg.norm(ref_dirs, axis=1, keepdims=True)
    proj = normed @ unit.T  # (n, r)
    sq = (normed ** 2).sum(axis=1, keepdims=True) - proj ** 2
    dist = np.sqrt(np.clip(sq, 0.0, None))
    niche = dist.argmin(axis=1)
    return niche, dist[np.arange(len(normed)), niche]


def nsga3_survival(pop: list, n: int, names, ref_dirs, rng: random.Random) -> list:
    fronts = rank_fronts(pop, names)
    chosen: list = []
    last: list = []
    for front in fronts:
        if len(chosen) + len(front) <= n:
            chosen.extend(front)
            if len(chosen) == n:
                break
            continue
        last = front
        break
    if not last:
        return [pop[i] for i in chosen]
    k = n - len(chosen)
    if not pop[last[0]].valid:
        return [pop[i] for i in chosen + last[:k]]
    members = [i for i in chosen if pop[i].valid] + last
    pts = np.array([pop[i].objectives(names) for i in members], dtype=float)
    niche, dist = nsga3_associate(nsga3_normalize(pts), np.asarray(ref_dirs, dtype=float))
    n_sel = len(members) - len(last)
    counts = [0] * len(ref_dirs)
    for j in range(n_sel):
        counts[niche[j]] += 1
    pending: dict = {}
    for j in range(n_sel, len(members)):
        pending.setdefault(int(niche[j]), []).append(j)
    open_refs = set(range(len(ref_dirs)))
    picked = []
    while k > 0:
        low = min(counts[r] for r in open_refs)
        cands = sorted(r for r in open_refs if counts[r] == low)
        r = cands[rng.randrange(len(cands))]
        bucket = pending.get(r, [])
        if not bucket:
            open_refs.discard(r)
            continue
        if counts[r] == 0:
            j = min(bucket, key=lambda x: (dist[x], x))
        else:
            j = bucket[rng.randrange(len(bucket))]
        bucket.remove(j)
        picked.append(members[j])
        counts[r] += 1
        k -= 1
    return [pop[i] for i in chosen + picked]


def nsga3_tournament(rng: random.Random, rank: list) -> Callable[[], int]:
    def pick() -> int:
        a, b = rng.randrange(len(rank)), rng.randrange(len(rank))
        if rank[a] != rank[b]:
            return a if rank[a] < rank[b] else b
        return _coin(rng, a, b)

    return pick


def nsga3_step(ctx: SearchContext, parents: list, ref_dirs) -> list:
    rank, _ = nsga2_rank(parents, ctx.names)
    kids = breed(ctx, parents, nsga3_tournament(ctx.rng, rank), ctx.config.population_size)
    return nsga3_survival(parents + kids, ctx.config.population_size, ctx.names, ref_dirs, ctx.rng)


# -- SPEA2 --


def _normalized_points(pop: list, names) -> list:
    valid = [ind.objectives(names) for ind in pop if ind.valid]
    if not valid:
        return [None] * len(pop)
    lo = [min(c) for c in zip(*valid)]
    hi = [max(c) for c in zip(*valid)]
    out = []
    for ind in pop:
        if not ind.valid:
            out.append(None)
            continue
        v = ind.objectives(names)
        out.append(tuple((x - a) / (b - a) if b > a else 0.0 for x, a, b in zip(v, lo, hi)))
    return out


def spea2_fitness(pop: list, names) -> list:
    """Total fitness R + D per member (lower is better; < 1 iff non-dominated)."""
    n = len(pop)
    pts = [ind.objectives(names) if ind.valid else None for ind in pop]

    def dom(i, j):
        if pts[i] is None:
            return False
        return pts[j] is None or dominates(pts[i], pts[j])

    beats = [[j for j in range(n) if j != i and dom(i, j)] for i in range(n)]
    strength = [len(b) for b in beats]
    raw = [0] * n
    for i in range(n):
        for j in beats[i]:
            raw[j] += strength[i]
    k = max(1, math.isqrt(n))
    norm = _normalized_points(pop, names)
    total = []
    for i in range(n):
        if norm[i] is None:
            total.append(raw[i] + 0.0)
            continue
        ds = sorted(math.dist(norm[i], norm[j]) for j in range(n) if j != i and norm[j] is not None)
        sigma = ds[min(k, len(ds)) - 1] if ds else 0.0
        total.append(raw[i] + 1.0 / (sigma + 2.0))
    return total


def spea2_select(pop: list, n: int, names) -> tuple:
    """Environmental selection: the new archive and its members' fitness."""
    fit = spea2_fitness(pop, names)
    keep = [i for i in range(len(pop)) if fit[i] < 1.0]
    if len(keep) < n:
        rest = sorted((i for i in range(len(pop)) if fit[i] >= 1.0), key=lambda i: (fit[i], i))
        keep.extend(rest[: n - len(keep)])
    elif len(keep) > n:
        norm = _normalized_points(pop, names)
        dist = {(i, j): math.dist(norm[i], norm[j]) for i in keep for j in keep}
        while len(keep) > n:
            profiles = [sorted(dist[i, j] for j in keep if j != i) for i in keep]
            worst = min(range(len(keep)), key=lambda x: (profiles[x], x))
            keep.pop(worst)
    keep.sort()
    return [pop[i] for i in keep], [fit[i] for i in keep]


def spea2_tournament(rng: random.Random, fit: list) -> Callable[[], int]:
    def pick() -> int:
        a, b = rng.randrange(len(fit)), rng.randrange(len(fit))
        if fit[a] != fit[b]:
            return a if fit[a] < fit[b] else b
        return _coin(rng, a, b)

    return pick


def spea2_step(ctx: SearchContext, parents: list, archive: list) -> tuple:
    """One generation: breed from ``archive`` and select the next archive.

    Returns (offspring population, next archive). Mating fitness is computed
    within the archive; an empty archive falls back to ``parents``.
    """
    pool = archive or parents
    fit = spea2_fitness(pool, ctx.names)
    kids = breed(ctx, pool, spea2_tournament(ctx.rng, fit), ctx.config.population_size)
    nxt, _ = spea2_select(kids + archive, ctx.config.population_size, ctx.names)
    return kids, nxt


# -- hill climbing --


def hill_climb(ctx: SearchContext) -> tuple:
    """Returns (best individual, accepted-move trace, last current individual)."""
    cfg, ev = ctx.config, ctx.evaluator
    obj = cfg.objectives[0]

    def score(ind: Individual):
        return ind.objectives((obj,))[0]

    empty = ev.evaluate([Patch()])[0]
    current = best = empty
    trace = []
    if current is None:
        return None, trace, None
    rejections = 0
    proposals = 0
    cap = 50 * cfg.evaluation_budget + 1000
    while ev.remaining > 0 and proposals < cap:
        proposals += 1
        cand = ev.evaluate([mutate(current.patch, ctx.program, ctx.rng, ctx.space)])[0]
        if cand is None:
            break
        if cand.valid and (not current.valid or score(cand) < score(current)):
            current = cand
            rejections = 0
            trace.append({"event": "accept", "patch": serialize(cand.patch),
                          "fitness": cand.summary.to_dict()})
            if not best.valid or score(cand) < score(best):
                best = cand
        else:
            rejections += 1
            if rejections >= cfg.restart_after:
                current = empty
                rejections = 0
                trace.append({"event": "restart"})
    return best, trace, current


def final_front(pop: list, names) -> list:
    """Mutually non-dominated valid members, one per distinct patch, in a stable order."""
    valid = [ind for ind in pop if ind.valid]
    seen: dict = {}
    for ind in valid:
        seen.setdefault(serialize(ind.patch), ind)
    uniq = list(seen.values())
    pts = [ind.objectives(names) for ind in uniq]
    front = [uniq[i] for i in fast_nondominated_sort(pts)[0]] if uniq else []
    return sorted(front, key=lambda ind: (ind.objectives(names), serialize(ind.patch)))
