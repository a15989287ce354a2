"""Recompute every benchmark manifest from the files in its directory.

Only for corpus construction: run it after editing a benchmark, then review
the diff. Loading a benchmark never writes; it fails on any drift instead.

    python scripts/freeze_manifests.py            # all benchmarks
    python scripts/freeze_manifests.py B3 B5      # selected ones
"""

import argparse
import json

from mogi import bench

DESCRIPTIONS = {
    "B1-redundant-stmt": "A list is allocated and then immediately re-initialised; "
                         "the first allocation is dead.",
    "B2-repeated-call": "A pure scoring call is evaluated twice with identical arguments "
                        "inside one function.",
    "B3-config-resolve": "The display name is resolved (with a download) separately by "
                         "several views; caching it in a field trades memory for time.",
    "B4-loop-invariant": "A buffer that never changes is re-allocated on every loop iteration.",
    "B5-repeated-fetch": "The same feed URL is downloaded on every loop iteration.",
    "B6-redundant-guard": "An early return for an empty list duplicates what the loop "
                          "already does.",
}


def main(argv=None):
    ap = argparse.ArgumentParser(description="Recompute benchmark manifests.")
    ap.add_argument("benchmarks", nargs="*", help="names or B<n> prefixes (default: all)")
    args = ap.parse_args(argv)
    names = [bench.resolve_name(n) for n in args.benchmarks] or bench.available()
    for name in names:
        m = bench.freeze_manifest(bench.CORPUS_DIR / name, DESCRIPTIONS.get(name))
        print(f"{name}: baseline {json.dumps(m['baseline'], sort_keys=True)}, "
              f"{len(m['oracles'])} oracle(s)")
        bench.load(name)  # the fresh manifest must validate


if __name__ == "__main__":
    main()
