"""The benchmark corpus: programs with seeded performance defects, their
fixtures, and hand-derived oracle patches with recorded fitness.

Layout per benchmark::

    benchmarks/<name>/program.mini     program plus its test_ functions
    benchmarks/<name>/fixtures.json    fetch responses and builtin step costs
    benchmarks/<name>/manifest.json    baseline, oracles, cache-target inventories
    benchmarks/<name>/oracle/*.patch   oracle patches

``load`` re-derives every manifest value and fails loudly on any drift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .interp import FitnessVector, Fixtures, execute
from .minilang import ast as A
from .minilang import parse
from .operators import CacheTarget, class_cache_targets, method_cache_targets
from .patch import Copy, Delete, Patch, Replace, apply, read_patch, serialize

CORPUS_DIR = Path(__file__).parent / "benchmarks"
MEASURE_BUDGET = 10**9


class UnknownBenchmark(KeyError):
    pass


class ManifestDrift(Exception):
    """A manifest value disagrees with what the program actually does."""

    def __init__(self, bench: str, fieldname: str, recorded, measured):
        self.bench = bench
        self.field = fieldname
        self.recorded = recorded
        self.measured = measured
        super().__init__(f"{bench}: manifest field {fieldname!r} records {recorded!r} "
                         f"but measured {measured!r}")


@dataclass
class Oracle:
    name: str
    patch: Patch
    fitness: FitnessVector


@dataclass
class Benchmark:
    name: str
    path: Path
    source: str
    program: A.Program
    fixtures: Fixtures
    manifest: dict
    baseline: FitnessVector
    oracles: list = field(default_factory=list)

    @property
    def description(self) -> str:
        return self.manifest.get("description", "")


def available(root: Optional[Path] = None) -> list:
    root = Path(root or CORPUS_DIR)
    return sorted(p.name for p in root.iterdir() if (p / "program.mini").is_file())


def resolve_name(name: str, root: Optional[Path] = None) -> str:
    """Full benchmark name from either the full name or its ``B<n>`` prefix."""
    names = available(root)
    if name in names:
        return name
    hits = [n for n in names if n.split("-", 1)[0] == name]
    if len(hits) == 1:
        return hits[0]
    raise UnknownBenchmark(f"unknown benchmark {name!r}; known: {', '.join(names)}")


def _targets_json(ts: list) -> list:
    return [{"call": t.call, "function": t.enclosing_function,
             "occurrences": list(t.occurrence_ids)} for t in ts]


def cache_inventory(p: A.Program) -> dict:
    return {"method": _targets_json(method_cache_targets(p)),
            "class": _targets_json(class_cache_targets(p))}


def _edit_ids(e) -> list:
    t = type(e)
    if t is Delete:
        return [e.target]
    if t is Copy:
        return [e.source, e.dest_block]
    if t is Replace:
        return [e.source, e.target]
    return [e.call]


def targeted_functions(p: A.Program, patch: Patch) -> list:
    """Names of the functions containing any node an edit of ``patch`` names."""
    owners = {}
    for fn in p.functions:
        for n in A.walk(fn.body):
            nid = getattr(n, "id", None)
            if nid is not None:
                owners[nid] = fn.name
    names = []
    for e in patch.edits:
        for nid in _edit_ids(e):
            fn = owners.get(nid)
            if fn is not None and fn not in names:
                names.append(fn)
    return names


def statement_ids(fn: A.Function) -> set:
    return {n.id for n in A.walk(fn.body) if isinstance(n, A.STMT_TYPES) and n.id is not None}


def measure_fitness(p: A.Program, fx: Fixtures) -> FitnessVector:
    return execute(p, fx, MEASURE_BUDGET).fitness()


def _check(bench: str, fieldname: str, recorded, measured) -> None:
    if recorded != measured:
        raise ManifestDrift(bench, fieldname, recorded, measured)


def validate(b: Benchmark) -> None:
    """Re-check every manifest invariant of ``b``; raises ManifestDrift on the first mismatch."""
    run = execute(b.program, b.fixtures, MEASURE_BUDGET, track_coverage=True)
    _check(b.name, "baseline.passes", True, run.report.passed)
    _check(b.name, "baseline", b.manifest["baseline"], run.fitness().to_dict())
    _check(b.name, "cache_targets", b.manifest["cache_targets"], cache_inventory(b.program))
    recorded = {o["file"]: o for o in b.manifest["oracles"]}
    on_disk = sorted(p.name for p in (b.path / "oracle").glob("*.patch"))
    _check(b.name, "oracles", sorted(recorded), on_disk)
    for o in b.oracles:
        rep = apply(o.patch, b.program)
        _check(b.name, f"oracles.{o.name}.applies", True, rep.ok)
        _check(b.name, f"oracles.{o.name}.noop_edits", [], rep.noop_edits)
        got = execute(rep.program, b.fixtures, MEASURE_BUDGET)
        _check(b.name, f"oracles.{o.name}.passes", True, got.report.passed)
        _check(b.name, f"oracles.{o.name}.fitness", recorded[o.name]["fitness"], got.fitness().to_dict())
        if not (got.fitness().steps < run.fitness().steps
                or got.fitness().peak_bytes < run.fitness().peak_bytes
                or got.fitness().net_bytes < run.fitness().net_bytes):
            raise ManifestDrift(b.name, f"oracles.{o.name}.improves", "improvement", "none")
        for fname in targeted_functions(b.program, o.patch):
            missing = sorted(statement_ids(b.program.function(fname)) - run.covered)
            _check(b.name, f"coverage.{fname}", [], missing)


def load(name: str, root: Optional[Path] = None, check: bool = True) -> Benchmark:
    """Load and (by default) validate one benchmark."""
    root = Path(root or CORPUS_DIR)
    full = resolve_name(name, root)
    path = root / full
    source = (path / "program.mini").read_text(encoding="utf-8")
    program = parse(source)
    fixtures = Fixtures.load(path / "fixtures.json")
    manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
    oracles = []
    for o in manifest.get("oracles", []):
        patch = read_patch(path / "oracle" / o["file"])
        oracles.append(Oracle(o["file"], patch, FitnessVector.from_dict(o["fitness"])))
    b = Benchmark(full, path, source, program, fixtures, manifest,
                  FitnessVector.from_dict(manifest["baseline"]), oracles)
    if check:
        validate(b)
    return b


def load_all(root: Optional[Path] = None, check: bool = True) -> list:
    return [load(n, root, check) for n in available(root)]


def freeze_manifest(path: Path, description: Optional[str] = None) -> dict:
    """Recompute and write ``manifest.json`` for the benchmark in ``path``.

    Used when building the corpus; ``load`` never writes.
    """
    path = Path(path)
    program = parse((path / "program.mini").read_text(encoding="utf-8"))
    fixtures = Fixtures.load(path / "fixtures.json")
    mpath = path / "manifest.json"
    old = json.loads(mpath.read_text(encoding="utf-8")) if mpath.exists() else {}
    oracles = []
    for f in sorted((path / "oracle").glob("*.patch")):
        patch = read_patch(f)
        rep = apply(patch, program)
        if not rep.ok:
            raise ValueError(f"{f.name}: {rep.error}")
        oracles.append({"file": f.name, "edits": serialize(patch).splitlines(),
                        "fitness": measure_fitness(rep.program, fixtures).to_dict()})
    manifest = {
        "name": path.name,
        "description": description if description is not None else old.get("description", ""),
        "baseline": measure_fitness(program, fixtures).to_dict(),
        "oracles": oracles,
        "cache_targets": cache_inventory(program),
    }
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def cache_target_from_json(d: dict, scope: str) -> CacheTarget:
    return CacheTarget(d["call"], d["function"], tuple(d["occurrences"]), scope)


__all__ = [
    "Benchmark", "CORPUS_DIR", "ManifestDrift", "Oracle", "UnknownBenchmark", "available",
    "cache_inventory", "freeze_manifest", "load", "load_all", "resolve_name", "validate",
]
