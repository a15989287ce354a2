"""Command-line front end: ``run``, ``analyze``, ``apply`` and ``validate``.

Exit codes: 0 success, 1 usage error, 2 validation or manifest drift,
3 patch application or type-check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import bench
from .interp import Multiplicative, apply_noise
from .minilang import MiniLangError, parse, pretty_print
from .patch import PatchSyntaxError, apply, read_patch
from .search import ALGORITHMS, RunRecord, SearchConfig, run_search
from .stats import OBJECTIVES, compare_runs

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_APPLY = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    """One experiment matrix. JSON keys mirror the field names::

        {"benchmarks": ["B1-redundant-stmt"], "algorithms": ["nsga2"],
         "seeds": [0, 1], "search": {"evaluation_budget": 400},
         "hillclimb_objective": "steps", "out": "runs"}

    ``seeds`` may also be a string ``"a..b"`` (inclusive).
    """

    benchmarks: list = field(default_factory=lambda: bench.available())
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    seeds: list = field(default_factory=lambda: list(range(20)))
    search: dict = field(default_factory=dict)
    hillclimb_objective: str = "steps"
    out: str = "runs"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"benchmarks", "algorithms", "seeds", "search", "hillclimb_objective", "out"}
        extra = set(d) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**d)
        if isinstance(cfg.seeds, str):
            cfg.seeds = parse_seed_range(cfg.seeds)
        bad = [a for a in cfg.algorithms if a not in ALGORITHMS]
        if bad:
            raise UsageError(f"unknown algorithms: {bad}")
        for k in ("algorithm", "seed"):
            if k in cfg.search:
                raise UsageError(f"'search.{k}' is set per run; use 'algorithms'/'seeds'")
        return cfg

    def search_config(self, algorithm: str, seed: int) -> SearchConfig:
        over = dict(self.search)
        if algorithm == "hillclimb":
            over["objectives"] = (self.hillclimb_objective,)
        return SearchConfig(algorithm=algorithm, seed=seed, **over)


def parse_seed_range(text: str) -> list:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise UsageError(f"seed range must look like 'a..b', got {text!r}") from None
    if hi < lo:
        raise UsageError(f"empty seed range {text!r}")
    return list(range(lo, hi + 1))


def record_stem(benchmark: str, algorithm: str, seed: int) -> str:
    return f"{benchmark}_{algorithm}_{seed}"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _run_one(job: tuple) -> tuple:
    name, config_dict, out = job
    b = bench.load(name, check=False)
    rec = run_search(SearchConfig.from_dict(config_dict), b)
    stem = record_stem(b.name, rec.config.algorithm, rec.config.seed)
    _atomic_write(Path(out) / f"{stem}.json", rec.to_json())
    _atomic_write(Path(out) / "timing" / f"{stem}.json",
                  json.dumps({"wall_seconds": rec.wall_seconds}, sort_keys=True) + "\n")
    return stem, rec.evaluations_used, len(rec.front)


def cmd_run(cfg: ExperimentConfig, out: Path, jobs: int = 1, log=print) -> list:
    """Validate every benchmark, then write one record per (benchmark, algorithm, seed)."""
    names = [bench.resolve_name(n) for n in cfg.benchmarks]
    for n in names:
        bench.load(n)  # any drift aborts before a single run starts
    matrix = [(n, cfg.search_config(a, s).to_dict(), str(out))
              for n in names for a in cfg.algorithms for s in cfg.seeds]
    out.mkdir(parents=True, exist_ok=True)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_run_one, matrix))
    else:
        done = [_run_one(j) for j in matrix]
    for stem, used, size in done:
        log(f"{stem}: {used} evaluations, front of {size}")
    return [s for s, _, _ in done]


def load_records(run_dir: Path) -> list:
    records = []
    for p in sorted(Path(run_dir).glob("*.json")):
        if p.name == "report.json":
            continue
        d = json.loads(p.read_text(encoding="utf-8"))
        if "schema" not in d or "front" not in d:
            continue
        timing = p.parent / "timing" / p.name
        wall = json.loads(timing.read_text())["wall_seconds"] if timing.exists() else 0.0
        records.append(RunRecord.from_dict(d, wall))
    return records


def baseline_samples(rec: RunRecord) -> list:
    cfg = rec.config
    noise = Multiplicative(cfg.noise_sigma, cfg.seed) if cfg.noise_sigma else None
    return apply_noise(rec.baseline, cfg.repeats, noise, "baseline")


def cmd_analyze(run_dir: Path, out: Optional[Path] = None) -> dict:
    records = load_records(run_dir)
    if not records:
        raise UsageError(f"no run records in {run_dir}")
    out = Path(out or run_dir)
    groups: dict = {}
    for r in records:
        groups.setdefault(r.benchmark, []).append(r)
    reports = {}
    for name in sorted(groups):
        recs = groups[name]
        oracles = []
        try:
            oracles = [o.fitness for o in bench.load(name, check=False).oracles]
        except bench.UnknownBenchmark:
            pass
        reports[name] = compare_runs(recs, baseline_samples(recs[0]), oracles)
    _atomic_write(out / "report.json", json.dumps(reports, indent=1, sort_keys=True) + "\n")
    _write_tables(reports, out)
    return reports


def _csv(path: Path, header: list, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    return "" if x is None else x


def _write_tables(reports: dict, out: Path) -> None:
    hv, eff, imp, cost = [], [], [], []
    for name, rep in reports.items():
        fronts = []
        for algo, a in rep["algorithms"].items():
            h = a["hv"]
            hv.append([name, algo, a["runs"], _fmt(h["median"]), _fmt(h["mean"]), _fmt(h["union"])])
            row = [name, algo]
            for o in OBJECTIVES:
                row += [_fmt(a["effects"][o]["A"]), a["effects"][o]["label"]]
            eff.append(row)
            row = [name, algo, a["runs"], _fmt(a["rediscovered"])]
            row += [a["improvements"][o] for o in OBJECTIVES] + [a["improvements"]["any"]]
            row += [_fmt(a["best_improvement_pct"][o]) for o in OBJECTIVES]
            imp.append(row)
            w = a["wall_seconds"]
            cost.append([name, algo, a["runs"], _fmt(w["min"]), _fmt(w["median"]), _fmt(w["max"]),
                         _fmt(w["mean"]), sum(a["evaluations_used"])])
            fronts += [[algo] + [_fmt(v) for v in p] for p in a["union_front"]]
        _csv(out / "fronts" / f"{name}.csv", ["algorithm", *OBJECTIVES], fronts)
    _csv(out / "hv.csv", ["benchmark", "algorithm", "runs", "hv_median", "hv_mean", "hv_union"], hv)
    _csv(out / "effects.csv", ["benchmark", "algorithm"]
         + [f"{k}_{o}" for o in OBJECTIVES for k in ("A", "label")], eff)
    _csv(out / "improvements.csv", ["benchmark", "algorithm", "runs", "rediscovered"]
         + [f"improved_{o}" for o in OBJECTIVES] + ["improved_any"]
         + [f"best_pct_{o}" for o in OBJECTIVES], imp)
    _csv(out / "cost.csv", ["benchmark", "algorithm", "runs", "wall_min", "wall_median", "wall_max",
                            "wall_mean", "evaluations_total"], cost)


def cmd_apply(program_path: Path, patch_path: Path, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    prog = parse(Path(program_path).read_text(encoding="utf-8"))
    patch = read_patch(patch_path)
    rep = apply(patch, prog)
    if not rep.ok:
        err.write(json.dumps({"validity_stage": rep.validity_stage, "error": rep.error,
                              "noop_edits": rep.noop_edits}, indent=1) + "\n")
        return EXIT_APPLY
    if rep.noop_edits:
        err.write(f"note: no-op edits at positions {rep.noop_edits}\n")
    out.write(pretty_print(rep.program))
    return EXIT_OK


def cmd_validate(names: list, out=None) -> int:
    out = out or sys.stdout
    for n in names or bench.available():
        b = bench.load(n)
        out.write(f"{b.name}: pass {json.dumps(b.baseline.to_dict(), sort_keys=True)}\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mogi", description="Multi-objective genetic improvement workbench.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run searches and write one record per (benchmark, algorithm, seed)")
    r.add_argument("--config", type=Path, help="experiment config JSON")
    r.add_argument("--out", type=Path, help="output directory (overrides config)")
    r.add_argument("--jobs", type=int, default=1, help="parallel runs")
    r.add_argument("--seed-range", help="inclusive seed range a..b (overrides config)")
    a = sub.add_parser("analyze", help="aggregate a run directory into report tables")
    a.add_argument("run_dir", type=Path)
    a.add_argument("--out", type=Path, help="report directory (default: the run directory)")
    ap = sub.add_parser("apply", help="print a patched program")
    ap.add_argument("program", type=Path)
    ap.add_argument("patch", type=Path)
    v = sub.add_parser("validate", help="check benchmarks against their manifests")
    v.add_argument("benchmarks", nargs="*", help="names (default: all)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            raw = json.loads(args.config.read_text(encoding="utf-8")) if args.config else {}
            cfg = ExperimentConfig.from_dict(raw)
            if args.seed_range:
                cfg.seeds = parse_seed_range(args.seed_range)
            if args.jobs < 1:
                raise UsageError("--jobs must be at least 1")
            cmd_run(cfg, Path(args.out or cfg.out), args.jobs)
            return EXIT_OK
        if args.command == "analyze":
            cmd_analyze(args.run_dir, args.out)
            return EXIT_OK
        if args.command == "apply":
            return cmd_apply(args.program, args.patch)
        return cmd_validate(args.benchmarks)
    except (UsageError, bench.UnknownBenchmark, FileNotFoundError, PatchSyntaxError,
            json.JSONDecodeError, TypeError, ValueError) as e:
        print(f"mogi: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except bench.ManifestDrift as e:
        print(f"mogi: drift: {e}", file=sys.stderr)
        return EXIT_INVALID
    except MiniLangError as e:
        print(f"mogi: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_APPLY if args.command == "apply" else EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
