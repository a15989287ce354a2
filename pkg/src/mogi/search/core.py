"""Search plumbing: configuration, individuals, the cached fitness evaluator and
the serializable run record."""

from __future__ import annotations

import hashlib
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from ..interp import INVALID, FitnessVector, Fixtures, Multiplicative, apply_noise, execute
from ..minilang import ast as A
from ..minilang import parse, pretty_print
from ..patch import Patch, apply, parse_patch, serialize

ALGORITHMS = ("nsga2", "nsga3", "spea2", "hillclimb")
OBJECTIVE_FIELDS = {"steps": "steps", "memory": "peak_bytes", "net": "net_bytes"}
STEP_BUDGET_FACTOR = 10


class SearchError(Exception):
    pass


@dataclass
class SearchConfig:
    algorithm: str = "nsga2"
    population_size: int = 40
    generations: int = 10
    mutation_rate: float = 0.5
    crossover_rate: float = 0.2
    evaluation_budget: int = 400
    repeats: int = 1
    seed: int = 0
    objectives: tuple = ("steps", "memory", "net")
    noise_sigma: float = 0.0
    workers: int = 1
    restart_after: int = 50

    def __post_init__(self):
        self.objectives = tuple(self.objectives)
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        bad = [o for o in self.objectives if o not in OBJECTIVE_FIELDS]
        if bad or not self.objectives or len(set(self.objectives)) != len(self.objectives):
            raise ValueError(f"objectives must be distinct names from {sorted(OBJECTIVE_FIELDS)}")
        if self.algorithm == "hillclimb" and len(self.objectives) != 1:
            raise ValueError("hillclimb takes exactly one objective")
        if self.algorithm != "hillclimb" and len(self.objectives) < 2:
            raise ValueError("multi-objective algorithms need at least two objectives")
        for name in ("population_size", "generations", "evaluation_budget"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["objectives"] = list(self.objectives)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        return cls(**d)


@dataclass
class Individual:
    patch: Patch
    fitness: list  # FitnessVector samples, one per repeat
    summary: FitnessVector
    valid: bool

    def objectives(self, names) -> tuple:
        return tuple(getattr(self.summary, OBJECTIVE_FIELDS[n]) for n in names)

    def to_dict(self) -> dict:
        return {"patch": serialize(self.patch), "valid": self.valid,
                "summary": self.summary.to_dict() if self.valid else None}


def summarize(samples: list) -> FitnessVector:
    if not samples or not all(s.valid for s in samples):
        return INVALID
    cols = zip(*(s.values() for s in samples))
    return FitnessVector(*(statistics.median(c) for c in cols))


def evaluate_patch(program: A.Program, fx: Fixtures, step_budget: int, patch: Patch) -> FitnessVector:
    """Noise-free fitness of ``patch``: INVALID unless it type-checks and passes every test."""
    rep = apply(patch, program)
    if not rep.ok:
        return INVALID
    return execute(rep.program, fx, step_budget).fitness()


# Worker-process state for parallel evaluation.
_W: dict = {}


def _worker_init(source: str, fx: dict, step_budget: int, file: str) -> None:
    _W["program"] = parse(source)
    _W["fx"] = Fixtures.from_dict(fx)
    _W["budget"] = step_budget
    _W["file"] = file


def _worker_eval(text: str) -> FitnessVector:
    patch = parse_patch(text)
    return evaluate_patch(_W["program"], _W["fx"], _W["budget"], patch)


class Evaluator:
    """Fitness oracle with a per-run cache keyed by patch text and a hard budget.

    Cache hits are free. When a batch needs more fresh evaluations than the
    budget has left, the excess patches are dropped (returned as ``None``).
    """

    def __init__(self, program: A.Program, fx: Fixtures, config: SearchConfig,
                 step_budget: Optional[int] = None):
        self.program = program
        self.fx = fx
        self.config = config
        self.budget = config.evaluation_budget
        self.noise = Multiplicative(config.noise_sigma, config.seed) if config.noise_sigma else None
        if step_budget is None:
            base = execute(program, fx, 10**12)
            if not base.report.passed:
                raise SearchError("the original program fails its own tests; refusing to search")
            step_budget = max(1, STEP_BUDGET_FACTOR * base.steps)
            self.baseline = base.fitness()
        else:
            self.baseline = evaluate_patch(program, fx, step_budget, Patch())
        self.step_budget = step_budget
        self.cache: dict = {}
        self.used = 0
        self.suite_runs = 0
        self._pool = None
        if config.workers > 1:
            self._pool = ProcessPoolExecutor(
                max_workers=config.workers, initializer=_worker_init,
                initargs=(pretty_print(program), fx.to_dict(), step_budget, "program.mini"))

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def _individual(self, patch: Patch, base: FitnessVector) -> Individual:
        if not base.valid:
            samples = [INVALID] * self.config.repeats
        else:
            samples = apply_noise(base, self.config.repeats, self.noise, serialize(patch))
        return Individual(patch, samples, summarize(samples), base.valid)

    def evaluate(self, patches: list) -> list:
        """Individuals for ``patches`` in order; ``None`` where the budget ran out."""
        out: list = [None] * len(patches)
        fresh_keys: list = []
        fresh_patch: dict = {}
        for p in patches:
            k = serialize(p)
            if k not in self.cache and k not in fresh_patch:
                if len(fresh_keys) >= self.remaining:
                    continue
                fresh_keys.append(k)
                fresh_patch[k] = p
        if self._pool is not None and len(fresh_keys) > 1:
            bases = list(self._pool.map(_worker_eval, fresh_keys))
        else:
            bases = [evaluate_patch(self.program, self.fx, self.step_budget, fresh_patch[k])
                     for k in fresh_keys]
        for k, base in zip(fresh_keys, bases):
            self.cache[k] = self._individual(fresh_patch[k], base)
            self.used += 1
            # one suite execution per fresh evaluation (repeats only vary the noise draw)
            self.suite_runs += 1
        for i, p in enumerate(patches):
            ind = self.cache.get(serialize(p))
            if ind is not None:
                out[i] = Individual(p, ind.fitness, ind.summary, ind.valid)
        return out


@dataclass
class RunRecord:
    config: SearchConfig
    benchmark: str
    generations: list  # per generation: list of Individual.to_dict()
    evaluations_used: int
    wall_seconds: float
    front: list  # list of (Patch, FitnessVector)
    baseline: Optional[FitnessVector] = None
    all_invalid: bool = False
    trace: list = field(default_factory=list)  # hill climbing: accepted moves
    front_samples: list = field(default_factory=list)  # per front member: FitnessVector samples

    def to_dict(self) -> dict:
        """JSON-ready dict. ``wall_seconds`` and the worker count are left out so the
        record is reproducible and independent of parallelism."""
        config = self.config.to_dict()
        config.pop("workers")
        return {
            "schema": 1,
            "benchmark": self.benchmark,
            "config": config,
            "evaluations_used": self.evaluations_used,
            "baseline": self.baseline.to_dict() if self.baseline else None,
            "all_invalid": self.all_invalid,
            "front": [{"patch": serialize(p), "fitness": f.to_dict(),
                       "samples": [s.to_dict() for s in samples]}
                      for (p, f), samples in zip(self.front, self._samples())],
            "generations": self.generations,
            "trace": self.trace,
        }

    def _samples(self) -> list:
        if len(self.front_samples) == len(self.front):
            return self.front_samples
        return [[f] for _, f in self.front]

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, d: dict, wall_seconds: float = 0.0) -> "RunRecord":
        front = [(parse_patch(e["patch"]), FitnessVector.from_dict(e["fitness"])) for e in d["front"]]
        base = FitnessVector.from_dict(d["baseline"]) if d.get("baseline") else None
        samples = [[FitnessVector.from_dict(s) for s in e.get("samples", [e["fitness"]])]
                   for e in d["front"]]
        return cls(SearchConfig.from_dict(d["config"]), d["benchmark"], d["generations"],
                   d["evaluations_used"], wall_seconds, front, base, d.get("all_invalid", False),
                   d.get("trace", []), samples)

    @classmethod
    def from_json(cls, text: str, wall_seconds: float = 0.0) -> "RunRecord":
        return cls.from_dict(json.loads(text), wall_seconds)
