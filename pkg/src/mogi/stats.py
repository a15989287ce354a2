"""Statistics for comparing runs: Mann-Whitney U, Vargha-Delaney A, Pareto
fronts, normalized hypervolume, and the per-benchmark run comparison."""

from __future__ import annotations

import bisect
import enum
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .interp import FitnessVector

EXACT_MAX_N = 8
OBJECTIVES = FitnessVector.OBJECTIVES


# -- Mann-Whitney U --


@dataclass(frozen=True)
class MWResult:
    u: float
    p: float
    improved: bool
    exact: bool


def _midranks_doubled(values: Sequence[float]) -> list:
    """Twice the (1-based) midrank of each value, as integers."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r2 = (i + 1) + (j + 1)  # doubled midrank of positions i..j
        for k in range(i, j + 1):
            ranks[order[k]] = r2
        i = j + 1
    return ranks


def _exact_p(ranks2: list, n_a: int, observed: int) -> float:
    """Two-sided exact p of the doubled rank sum ``observed`` over all C(N, n_a) splits."""
    n = len(ranks2)
    centre = n_a * (n + 1)  # doubled expected rank sum
    dev = abs(observed - centre)
    # ways[k][s] = number of k-subsets with doubled rank sum s
    ways = [Counter() for _ in range(n_a + 1)]
    ways[0][0] = 1
    for r in ranks2:
        for k in range(min(n_a, n) - 1, -1, -1):
            for s, c in ways[k].items():
                ways[k + 1][s + r] += c
    total = math.comb(n, n_a)
    extreme = sum(c for s, c in ways[n_a].items() if abs(s - centre) >= dev)
    return extreme / total


def _approx_p(u: float, a_vals, b_vals) -> float:
    n_a, n_b = len(a_vals), len(b_vals)
    n = n_a + n_b
    ties = Counter(list(a_vals) + list(b_vals)).values()
    tie_term = sum(t**3 - t for t in ties) / (n * (n - 1))
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return 1.0
    z = (abs(u - n_a * n_b / 2.0) - 0.5) / math.sqrt(var)
    if z <= 0:
        return 1.0
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def mann_whitney_u(a: Sequence[float], b: Sequence[float], alpha: float = 0.05,
                   exact: Optional[bool] = None) -> MWResult:
    """Two-sided Mann-Whitney U test of ``a`` (baseline) against ``b`` (candidate).

    ``u`` counts pairs with a > b (ties count one half). The exact rank-sum
    distribution is used when both samples have at most 8 values, the normal
    approximation with tie and continuity corrections otherwise; ``exact``
    forces either path. ``improved`` means significant and lower median in ``b``.
    """
    if len(a) < 3 or len(b) < 3:
        raise ValueError("Mann-Whitney U needs at least 3 values per sample")
    pooled = list(a) + list(b)
    ranks2 = _midranks_doubled(pooled)
    n_a = len(a)
    r_a2 = sum(ranks2[:n_a])
    u = r_a2 / 2.0 - n_a * (n_a + 1) / 2.0
    if len(set(pooled)) == 1:
        return MWResult(u, 1.0, False, True)
    use_exact = (len(a) <= EXACT_MAX_N and len(b) <= EXACT_MAX_N) if exact is None else exact
    p = _exact_p(ranks2, n_a, r_a2) if use_exact else _approx_p(u, a, b)
    improved = p < alpha and statistics.median(b) < statistics.median(a)
    return MWResult(u, p, improved, use_exact)


# -- Vargha-Delaney A --


class EffectLabel(str, enum.Enum):
    N = "N"
    S = "S"
    M = "M"
    L = "L"


EFFECT_THRESHOLDS = ((0.06, EffectLabel.N), (0.14, EffectLabel.S), (0.21, EffectLabel.M))


def effect_label(a_measure: float) -> EffectLabel:
    d = abs(a_measure - 0.5)
    for limit, label in EFFECT_THRESHOLDS:
        if d < limit:
            return label
    return EffectLabel.L


def vargha_delaney_a(a: Sequence[float], b: Sequence[float]) -> tuple:
    """(A, label) where A = P(x > y) + 0.5 P(x = y), x from ``a`` and y from ``b``.

    Counted through a merge over sorted samples, O((n + m) log(n + m)).
    """
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    ys = sorted(b)
    greater = ties = 0
    for x in a:
        lo = bisect.bisect_left(ys, x)
        hi = bisect.bisect_right(ys, x)
        greater += lo
        ties += hi - lo
    value = (greater + 0.5 * ties) / (len(a) * len(b))
    return value, effect_label(value)


# -- Pareto utilities --


def _dominates(p, q) -> bool:
    return all(x <= y for x, y in zip(p, q)) and any(x < y for x, y in zip(p, q))


def pareto_front(points: Sequence[Sequence[float]]) -> list:
    """Distinct non-dominated points (as tuples), sorted."""
    uniq = sorted({tuple(p) for p in points})
    if uniq and len({len(p) for p in uniq}) != 1:
        raise ValueError("points differ in arity")
    return [p for p in uniq if not any(_dominates(q, p) for q in uniq)]


# -- hypervolume --


@dataclass(frozen=True)
class HVResult:
    raw: float
    normalized: float
    reference: tuple
    bounds: tuple  # per objective (best, worst)
    dims: tuple = field(default=())  # objectives kept for normalization (range > 0)


def _hv(points: list, ref: tuple) -> float:
    """Volume dominated by ``points`` (each strictly below ``ref``) up to ``ref``."""
    if not points:
        return 0.0
    m = len(ref)
    if m == 1:
        return ref[0] - min(p[0] for p in points)
    if m == 2:
        vol, best_y = 0.0, ref[1]
        pts = sorted(points)
        for i, (x, y) in enumerate(pts):
            best_y = min(best_y, y)
            nxt = pts[i + 1][0] if i + 1 < len(pts) else ref[0]
            vol += (nxt - x) * (ref[1] - best_y)
        return vol
    pts = sorted(points, key=lambda p: p[-1])
    vol = 0.0
    for i, p in enumerate(pts):
        nxt = pts[i + 1][-1] if i + 1 < len(pts) else ref[-1]
        if nxt > p[-1]:
            vol += (nxt - p[-1]) * _hv([q[:-1] for q in pts[: i + 1]], ref[:-1])
    return vol


def hypervolume_raw(points: Sequence[Sequence[float]], reference: Sequence[float]) -> float:
    ref = tuple(float(r) for r in reference)
    inside = [tuple(float(x) for x in p) for p in points
              if len(p) == len(ref) and all(x < r for x, r in zip(p, ref))]
    return _hv(pareto_front(inside), ref)


def hypervolume(points: Sequence[Sequence[float]], reference: Optional[Sequence[float]] = None,
                bounds: Optional[Sequence[tuple]] = None) -> HVResult:
    """Exact dominated hypervolume, raw and normalized.

    ``bounds`` gives per-objective (best, worst); by default best is the
    minimum over ``points`` and worst is ``reference`` (or the maximum over
    ``points``). Normalization maps best to 0 and worst to 1, so the
    reference becomes the all-ones point. Objectives whose best equals their
    worst carry no information and are left out of the normalized volume.
    """
    pts = [tuple(float(x) for x in p) for p in points]
    if not pts:
        m = len(reference) if reference is not None else (len(bounds) if bounds else 0)
        ref = tuple(reference) if reference is not None else tuple(b[1] for b in bounds or ())
        return HVResult(0.0, 0.0, ref, tuple(bounds or ()), tuple(range(m)))
    m = len(pts[0])
    if bounds is None:
        worst = tuple(reference) if reference is not None else tuple(max(c) for c in zip(*pts))
        best = tuple(min(c) for c in zip(*pts))
        bounds = tuple(zip(best, worst))
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    ref = tuple(reference) if reference is not None else tuple(hi for _, hi in bounds)
    raw = hypervolume_raw(pts, ref)
    dims = tuple(k for k in range(m) if bounds[k][1] > bounds[k][0])
    if not dims:
        return HVResult(raw, 0.0, tuple(ref), bounds, dims)
    normed = [tuple((p[k] - bounds[k][0]) / (bounds[k][1] - bounds[k][0]) for k in dims) for p in pts]
    norm = hypervolume_raw(normed, (1.0,) * len(dims))
    return HVResult(raw, min(1.0, max(0.0, norm)), tuple(ref), bounds, dims)


# -- comparing runs --


def _median(xs):
    return statistics.median(xs) if xs else None


def improved_over(baseline: Sequence[float], candidate: Sequence[float], alpha: float = 0.05) -> bool:
    """Mann-Whitney improvement when both samples have 3+ values, else a strict median drop."""
    if len(baseline) >= 3 and len(candidate) >= 3:
        return mann_whitney_u(baseline, candidate, alpha).improved
    return statistics.median(candidate) < statistics.median(baseline)


def _weakly_dominates(p, q) -> bool:
    return all(x <= y for x, y in zip(p, q))


def compare_runs(records: list, baseline: Sequence[FitnessVector], oracles: Sequence[FitnessVector] = (),
                 alpha: float = 0.05) -> dict:
    """Aggregate the runs of one benchmark, grouped by algorithm.

    ``baseline`` holds the original program's fitness samples. Records may
    carry per-front-member samples in ``front_samples``; otherwise each front
    member contributes its summary as a single sample.
    """
    if not records:
        raise ValueError("no records to compare")
    benches = {r.benchmark for r in records}
    if len(benches) != 1:
        raise ValueError(f"records mix benchmarks: {sorted(benches)}")
    if not baseline:
        raise ValueError("baseline samples are required")
    base_cols = {o: [getattr(s, o) for s in baseline] for o in OBJECTIVES}
    base_med = {o: statistics.median(v) for o, v in base_cols.items()}
    base_pt = tuple(base_med[o] for o in OBJECTIVES)

    every = [base_pt] + [f.values() for r in records for _, f in r.front]
    bounds = tuple((min(c), max(c)) for c in zip(*every))
    reference = tuple(hi for _, hi in bounds)

    by_algo: dict = {}
    for r in records:
        by_algo.setdefault(r.config.algorithm, []).append(r)

    out = {
        "benchmark": next(iter(benches)),
        "baseline": dict(zip(OBJECTIVES, base_pt)),
        "bounds": {o: list(b) for o, b in zip(OBJECTIVES, bounds)},
        "algorithms": {},
    }
    for algo in sorted(by_algo):
        runs = sorted(by_algo[algo], key=lambda r: r.config.seed)
        counts = {o: 0 for o in OBJECTIVES}
        counts["any"] = 0
        best_vals = {o: [] for o in OBJECTIVES}
        best_pct = {o: None for o in OBJECTIVES}
        hv_runs = []
        rediscovered = 0
        for r in runs:
            pts = [f.values() for _, f in r.front]
            samples = getattr(r, "front_samples", None) or [[f] for _, f in r.front]
            any_imp = False
            for k, o in enumerate(OBJECTIVES):
                if not pts:
                    best_vals[o].append(base_med[o])
                    continue
                j = min(range(len(pts)), key=lambda i: (pts[i][k], pts[i]))
                cand = [getattr(s, o) for s in samples[j]]
                best_vals[o].append(pts[j][k])
                if improved_over(base_cols[o], cand, alpha):
                    counts[o] += 1
                    any_imp = True
                if base_med[o] > 0:
                    pct = 100.0 * (base_med[o] - pts[j][k]) / base_med[o]
                    best_pct[o] = pct if best_pct[o] is None else max(best_pct[o], pct)
            counts["any"] += any_imp
            hv_runs.append(hypervolume(pts, reference, bounds).normalized if pts else 0.0)
            if any(_weakly_dominates(p, o.values()) for p in pts for o in oracles):
                rediscovered += 1
        union = pareto_front([f.values() for r in runs for _, f in r.front])
        effects = {}
        for o in OBJECTIVES:
            a, label = vargha_delaney_a(base_cols[o], best_vals[o])
            effects[o] = {"A": a, "label": label.value}
        walls = [r.wall_seconds for r in runs]
        out["algorithms"][algo] = {
            "runs": len(runs),
            "seeds": [r.config.seed for r in runs],
            "improvements": counts,
            "best_improvement_pct": best_pct,
            "rediscovered": rediscovered if oracles else None,
            "hv": {"per_run": hv_runs, "median": _median(hv_runs),
                   "mean": statistics.fmean(hv_runs) if hv_runs else None,
                   "union": hypervolume(union, reference, bounds).normalized if union else 0.0},
            "effects": effects,
            "union_front": [list(p) for p in union],
            "wall_seconds": {"min": min(walls), "median": _median(walls), "max": max(walls),
                             "mean": statistics.fmean(walls)},
            "evaluations_used": [r.evaluations_used for r in runs],
        }
    return out
