"""Regenerate the seeded-run goldens under tests/golden.

Writes digests.json (record digests for one benchmark and seed), the small
sample_run/ directory of records and sample_report.json, the report computed
from it. Run after an intentional change to search behaviour, then review the
diff.

    python scripts/freeze_goldens.py
"""

import argparse
import json
import shutil
from pathlib import Path

from mogi import bench
from mogi.cli import ExperimentConfig, baseline_samples, cmd_run, load_records
from mogi.search import SearchConfig, run_search
from mogi.stats import compare_runs

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "tests" / "golden"
GOLDEN = GOLDEN_DIR / "digests.json"
SAMPLE = ExperimentConfig(benchmarks=["B2-repeated-call"], algorithms=["nsga2", "hillclimb"],
                          seeds=[0, 1, 2], search={"evaluation_budget": 80})


def freeze_sample(golden_dir: Path = GOLDEN_DIR) -> None:
    run_dir = golden_dir / "sample_run"
    shutil.rmtree(run_dir, ignore_errors=True)
    cmd_run(SAMPLE, run_dir)
    recs = load_records(run_dir)
    oracles = [o.fitness for o in bench.load(recs[0].benchmark).oracles]
    report = compare_runs(recs, baseline_samples(recs[0]), oracles)
    (golden_dir / "sample_report.json").write_text(
        json.dumps(report, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--benchmark", default="B1")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", type=Path, default=GOLDEN)
    args = ap.parse_args(argv)
    b = bench.load(args.benchmark)
    digests = {}
    for algo in ("nsga2", "nsga3", "spea2"):
        rec = run_search(SearchConfig(algorithm=algo, seed=args.seed), b)
        digests[f"{b.name}/{algo}/{args.seed}"] = rec.digest()
        print(f"{b.name} {algo} seed {args.seed}: {rec.digest()}")
    args.out.write_text(json.dumps(digests, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    freeze_sample(args.out.parent)


if __name__ == "__main__":
    main()
