"""Run the default experiment matrix and analyze it.

Every benchmark, every algorithm, seeds 0..19, 400 evaluations per run
(population 40 over 10 generations). Records land in ``<out>/``, and the
report tables are written next to them.

    python scripts/run_experiments.py --out runs --jobs 4
    python scripts/run_experiments.py --benchmarks B3 B5 --seeds 0..4
"""

import argparse
import json
import time
from pathlib import Path

from mogi import bench
from mogi.cli import ExperimentConfig, cmd_analyze, cmd_run, parse_seed_range


def main(argv=None):
    ap = argparse.ArgumentParser(description="Run and analyze the experiment matrix.")
    ap.add_argument("--out", type=Path, default=Path("runs"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--benchmarks", nargs="*", help="names or B<n> prefixes (default: all)")
    ap.add_argument("--algorithms", nargs="*", help="default: nsga2 nsga3 spea2 hillclimb")
    ap.add_argument("--seeds", default="0..19", help="inclusive range a..b")
    ap.add_argument("--budget", type=int, help="evaluation budget override")
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(out=str(args.out))
    if args.benchmarks:
        cfg.benchmarks = [bench.resolve_name(b) for b in args.benchmarks]
    if args.algorithms:
        cfg = ExperimentConfig.from_dict({**vars(cfg), "algorithms": args.algorithms})
    cfg.seeds = parse_seed_range(args.seeds)
    if args.budget:
        cfg.search["evaluation_budget"] = args.budget

    t0 = time.perf_counter()
    cmd_run(cfg, args.out, args.jobs)
    reports = cmd_analyze(args.out)
    print(f"{len(cfg.benchmarks) * len(cfg.algorithms) * len(cfg.seeds)} runs "
          f"in {time.perf_counter() - t0:.1f} s")
    for name, rep in reports.items():
        for algo, a in rep["algorithms"].items():
            print(f"{name:22s} {algo:9s} rediscovered {a['rediscovered']}/{a['runs']}  "
                  f"improved {a['improvements']['any']}/{a['runs']}  "
                  f"HV median {a['hv']['median']:.3f}  "
                  f"union front {json.dumps(a['union_front'])}")


if __name__ == "__main__":
    main()
