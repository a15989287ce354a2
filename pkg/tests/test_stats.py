import itertools
import json
import random
import statistics

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from mogi import bench
from mogi.cli import baseline_samples, load_records
from mogi.interp import FitnessVector
from mogi.patch import Delete, Patch
from mogi.search import RunRecord, SearchConfig
from mogi.stats import (
    EffectLabel, compare_runs, effect_label, hypervolume, hypervolume_raw, mann_whitney_u,
    pareto_front, vargha_delaney_a,
)

from conftest import GOLDEN

samples = st.lists(st.integers(0, 30), min_size=3, max_size=12)


# -- Mann-Whitney --


def test_mw_identical_samples():
    r = mann_whitney_u([5, 5, 5, 5], [5, 5, 5, 5])
    assert r.p == 1.0 and not r.improved


def test_mw_complete_separation_3v3():
    r = mann_whitney_u([10, 11, 12], [1, 2, 3])
    assert r.exact and r.p == pytest.approx(0.1) and r.u == 9
    assert r.improved is False  # p = 0.1 is not below 0.05
    assert mann_whitney_u([10, 11, 12], [1, 2, 3], alpha=0.2).improved


def test_mw_needs_three_values():
    with pytest.raises(ValueError):
        mann_whitney_u([1, 2], [3, 4, 5])


def enumerated_p(a, b):
    """Two-sided p by listing every split of the pooled sample (ties count one half)."""
    pooled = list(a) + list(b)
    n_a, n_b = len(a), len(b)

    def twice_u(idx):
        xs = [pooled[i] for i in idx]
        ys = [pooled[i] for i in range(len(pooled)) if i not in idx]
        return sum(2 * (x > y) + (x == y) for x in xs for y in ys)

    centre = n_a * n_b
    obs = abs(twice_u(range(n_a)) - centre)
    splits = list(itertools.combinations(range(len(pooled)), n_a))
    extreme = sum(abs(twice_u(set(s)) - centre) >= obs for s in splits)
    return extreme / len(splits)


def test_mw_exact_matches_enumeration():
    rng = random.Random(77)
    cases = 0
    for n_a in range(3, 7):
        for n_b in range(3, 7):
            for _ in range(32):
                a = [rng.randint(0, 9) for _ in range(n_a)]
                b = [rng.randint(0, 9) for _ in range(n_b)]
                if len(set(a + b)) == 1:
                    continue
                assert mann_whitney_u(a, b).p == enumerated_p(a, b)
                cases += 1
    assert cases >= 500


def test_mw_approximation_close_to_exact_at_moderate_sizes():
    rng = random.Random(5)
    worst = 0.0
    for _ in range(500):
        n_a, n_b = rng.randint(10, 14), rng.randint(10, 14)
        a = [rng.randint(0, 40) for _ in range(n_a)]
        b = [rng.randint(0, 40) for _ in range(n_b)]
        ex = mann_whitney_u(a, b, exact=True).p
        ap = mann_whitney_u(a, b, exact=False).p
        worst = max(worst, abs(ex - ap))
    assert worst <= 0.02


@given(samples, samples)
def test_mw_symmetric(a, b):
    assume(len(set(a + b)) > 1)
    assert mann_whitney_u(a, b).p == pytest.approx(mann_whitney_u(b, a).p)


@given(samples, samples)
def test_mw_p_in_unit_interval(a, b):
    r = mann_whitney_u(a, b)
    assert 0.0 <= r.p <= 1.0
    if r.improved:
        assert statistics.median(b) < statistics.median(a)


# -- Vargha-Delaney --


def brute_a(a, b):
    return sum((x > y) + 0.5 * (x == y) for x in a for y in b) / (len(a) * len(b))


def test_vda_examples():
    assert vargha_delaney_a([3, 1, 2], [1, 2, 3]) == (0.5, EffectLabel.N)
    assert vargha_delaney_a([4, 5, 6], [1, 2, 3]) == (1.0, EffectLabel.L)
    assert vargha_delaney_a([1, 2, 3], [4, 5, 6])[0] == 0.0


@pytest.mark.parametrize("a, label", [(0.5, "N"), (0.559, "N"), (0.56, "S"), (0.64, "M"),
                                      (0.72, "L"), (0.2, "L"), (0.43, "S")])
def test_effect_thresholds(a, label):
    assert effect_label(a).value == label


def test_vda_matches_pair_counting():
    rng = random.Random(9)
    for _ in range(300):
        a = [rng.randint(0, 15) for _ in range(20)]
        b = [rng.randint(0, 15) for _ in range(20)]
        assert vargha_delaney_a(a, b)[0] == pytest.approx(brute_a(a, b))


@given(st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=20, unique=True),
       st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=20, unique=True))
def test_vda_complement_and_monotone_invariance(a, b):
    assume(not set(a) & set(b))
    va = vargha_delaney_a(a, b)[0]
    assert va + vargha_delaney_a(b, a)[0] == pytest.approx(1.0)
    f = lambda x: 3 * x + 7  # noqa: E731
    assert vargha_delaney_a([f(x) for x in a], [f(y) for y in b])[0] == pytest.approx(va)


# -- Pareto fronts --


def test_pareto_examples():
    assert pareto_front([(1, 2, 3)]) == [(1, 2, 3)]
    assert pareto_front([(1, 2), (2, 1), (3, 3)]) == [(1, 2), (2, 1)]
    assert pareto_front([(1, 1), (1, 1)]) == [(1, 1)]


def test_pareto_matches_brute_force():
    rng = random.Random(31)
    for _ in range(300):
        pts = [tuple(rng.randint(0, 5) for _ in range(3)) for _ in range(rng.randint(1, 25))]
        brute = sorted({p for p in pts if not any(
            all(x <= y for x, y in zip(q, p)) and q != p for q in pts)})
        assert pareto_front(pts) == brute


@given(st.lists(st.tuples(*[st.integers(0, 9)] * 3), max_size=30))
def test_pareto_idempotent(pts):
    assert pareto_front(pareto_front(pts)) == pareto_front(pts)


# -- hypervolume --


def test_hv_examples():
    r = hypervolume([(0.5, 0.5, 0.5)], (1, 1, 1), bounds=((0, 1),) * 3)
    assert r.raw == 0.125 and r.normalized == 0.125
    assert hypervolume_raw([(0, 1, 1), (1, 0, 1), (1, 1, 0)], (1, 1, 1)) == 0.0
    assert hypervolume([], (1, 1, 1)).raw == 0.0
    assert hypervolume_raw([(2, 0, 0)], (1, 1, 1)) == 0.0


def test_hv_normalization_maps_reference_to_ones():
    r = hypervolume([(10, 100, 5)], (20, 300, 10), bounds=((0, 20), (100, 300), (0, 10)))
    assert r.raw == 10 * 200 * 5
    assert r.normalized == pytest.approx(0.5 * 1.0 * 0.5)


def test_hv_drops_zero_range_objectives():
    r = hypervolume([(1, 5, 0), (2, 4, 0)], (3, 6, 0), bounds=((1, 3), (4, 6), (0, 0)))
    assert r.dims == (0, 1)
    assert r.normalized == pytest.approx(0.5 * 1.0 + 0.5 * 0.5)


def monte_carlo_hv(pts, n=10**6, seed=0):
    u = np.random.default_rng(seed).random((n, 3))
    hit = np.zeros(n, dtype=bool)
    for p in pts:
        hit |= np.all(u >= np.asarray(p), axis=1)
    return hit.mean()


def random_front(rng, k):
    return [tuple(rng.random() for _ in range(3)) for _ in range(k)]


def test_hv_matches_monte_carlo():
    rng = random.Random(123)
    for i in range(20):
        pts = random_front(rng, rng.randint(1, 12))
        assert abs(hypervolume_raw(pts, (1, 1, 1)) - monte_carlo_hv(pts, 2 * 10**5, i)) <= 0.01


@given(st.lists(st.tuples(*[st.floats(0, 1)] * 3), max_size=12), st.tuples(*[st.floats(0, 1)] * 3))
def test_hv_monotone(pts, extra):
    base = hypervolume_raw(pts, (1, 1, 1))
    assert hypervolume_raw(pts + [extra], (1, 1, 1)) >= base - 1e-12
    front = pareto_front(pts)
    assert hypervolume_raw(front, (1, 1, 1)) == pytest.approx(base, abs=1e-12)


# -- compare_runs --


BASE = FitnessVector(100, 50, 10)


def record(seed, points, algo="nsga2", bench="Bx", wall=1.0):
    front = [(Patch((Delete(i + 1),)), FitnessVector(*p)) for i, p in enumerate(points)]
    return RunRecord(SearchConfig(algorithm=algo, seed=seed), bench, [], 5, wall, front, BASE)


def test_compare_runs_baseline_only():
    rep = compare_runs([record(s, [BASE.values()]) for s in range(3)], [BASE])
    a = rep["algorithms"]["nsga2"]
    assert a["improvements"] == {"steps": 0, "peak_bytes": 0, "net_bytes": 0, "any": 0}
    assert a["hv"]["per_run"] == [0.0, 0.0, 0.0]


def test_compare_runs_dominating_record():
    rep = compare_runs([record(0, [(50, 25, 5)])], [BASE], oracles=[FitnessVector(60, 30, 10)])
    a = rep["algorithms"]["nsga2"]
    assert a["improvements"]["steps"] == 1 and a["improvements"]["any"] == 1
    assert a["effects"]["steps"] == {"A": 1.0, "label": "L"}
    assert a["best_improvement_pct"]["steps"] == pytest.approx(50.0)
    assert a["rediscovered"] == 1
    assert a["hv"]["per_run"] == [1.0]


def test_compare_runs_groups_algorithms_and_rejects_mixed_benchmarks():
    recs = [record(0, [(90, 60, 10)]), record(1, [(80, 40, 10)], algo="spea2")]
    rep = compare_runs(recs, [BASE])
    assert sorted(rep["algorithms"]) == ["nsga2", "spea2"]
    assert rep["bounds"]["steps"] == [80, 100]
    with pytest.raises(ValueError):
        compare_runs([record(0, []), record(1, [], bench="By")], [BASE])


def test_compare_runs_golden_report():
    recs = load_records(GOLDEN / "sample_run")
    oracles = [o.fitness for o in bench.load(recs[0].benchmark, check=False).oracles]
    report = compare_runs(recs, baseline_samples(recs[0]), oracles)
    expected = json.loads((GOLDEN / "sample_report.json").read_text())
    assert json.loads(json.dumps(report)) == expected
