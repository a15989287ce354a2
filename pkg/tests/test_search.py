import json
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import mogi.search.core as core
from mogi.interp import FitnessVector
from mogi.patch import Delete, Patch
from mogi.search import Evaluator, Individual, RunRecord, SearchConfig, SearchError, run_search
from mogi.search.algorithms import (
    das_dennis, final_front, nsga2_survival, nsga3_associate,
    nsga3_normalize, nsga3_survival, spea2_fitness, spea2_select,
)
from mogi.search.pareto import crowding_distance, dominates, fast_nondominated_sort

from conftest import GOLDEN
from helpers import fx, prog

NAMES = ("steps", "memory", "net")


def ind(*vals, valid=True, tag=""):
    f = FitnessVector(*(list(vals) + [0] * (3 - len(vals))), valid=valid)
    return Individual(Patch((Delete(hash((vals, tag)) % 10**6),)), [f], f, valid)


# -- dominance and sorting --


def test_dominates_examples():
    assert dominates((1, 1, 1), (2, 2, 2))
    assert not dominates((1, 2, 3), (1, 2, 3))
    assert not dominates((1, 3, 1), (2, 2, 2)) and not dominates((2, 2, 2), (1, 3, 1))
    with pytest.raises(ValueError):
        dominates((1, 2), (1, 2, 3))


def _as_sets(points, fronts):
    return [sorted(points[i] for i in f) for f in fronts]


def test_sort_examples():
    pts = [(1, 2), (2, 1), (2, 2)]
    assert _as_sets(pts, fast_nondominated_sort(pts)) == [[(1, 2), (2, 1)], [(2, 2)]]
    same = [(3, 3, 3)] * 5
    assert fast_nondominated_sort(same) == [[0, 1, 2, 3, 4]]
    assert fast_nondominated_sort([]) == []


def _brute_fronts(points):
    left = set(range(len(points)))
    fronts = []
    while left:
        f = sorted(i for i in left if not any(dominates(points[j], points[i]) for j in left))
        fronts.append(f)
        left -= set(f)
    return fronts


def test_sort_matches_brute_force():
    rng = random.Random(2024)
    for _ in range(200):
        n = rng.randint(1, 64)
        pts = [tuple(rng.randint(0, 6) for _ in range(3)) for _ in range(n)]
        got = [sorted(f) for f in fast_nondominated_sort(pts)]
        assert got == _brute_fronts(pts)


@given(st.lists(st.tuples(*[st.integers(0, 9)] * 3), min_size=1, max_size=30))
def test_every_point_in_exactly_one_front(pts):
    fronts = fast_nondominated_sort(pts)
    flat = sorted(i for f in fronts for i in f)
    assert flat == list(range(len(pts)))


# -- crowding --


def test_crowding_examples():
    assert crowding_distance([(1, 2), (2, 1)]) == [math.inf, math.inf]
    d = crowding_distance([(0, 2), (1, 1), (2, 0)])
    assert d[0] == d[2] == math.inf and d[1] == pytest.approx(2.0)
    dup = crowding_distance([(1, 1), (1, 1), (1, 1), (1, 1)])
    assert all(math.isinf(x) or x == 0.0 for x in dup)
    assert dup.count(0.0) == 2


# -- survival --


def test_nsga2_elitism_on_dominating_individual():
    champ = ind(1, 1, 1, tag="champ")
    pop = [champ] + [ind(5 + i, 9 - i, 5, tag=str(i)) for i in range(9)]
    assert champ in nsga2_survival(pop, 3, NAMES)


def test_invalid_members_are_dropped_first():
    pop = [ind(9, 9, 9), ind(0, 0, 0, valid=False), ind(8, 8, 8)]
    kept = nsga2_survival(pop, 2, NAMES)
    assert all(x.valid for x in kept)


def test_das_dennis_counts():
    assert sorted(das_dennis(3, 1)) == [(0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0)]
    dirs = das_dennis(3, 12)
    assert len(dirs) == 91
    assert all(abs(sum(d) - 1) < 1e-12 for d in dirs)
    assert len(das_dennis(2, 4)) == 5


def test_nsga3_association_to_axes():
    pts = np.array([[1.0, 0.0, 0.0], [0.0, 0.9, 0.1], [0.1, 0.0, 1.0]])
    niche, dist = nsga3_associate(pts, np.eye(3))
    assert list(niche) == [0, 1, 2]
    assert dist[0] == pytest.approx(0.0)


def test_nsga3_normalize_maps_extremes_to_unit_intercepts():
    pts = np.array([[10.0, 0.0, 0.0], [0.0, 20.0, 0.0], [0.0, 0.0, 30.0], [5.0, 5.0, 5.0]])
    out = nsga3_normalize(pts)
    assert np.allclose(out[:3], np.eye(3))


def test_nsga3_all_selected_when_capacity_allows():
    pop = [ind(10, 0, 0, tag="a"), ind(0, 10, 0, tag="b"), ind(0, 0, 10, tag="c")]
    kept = nsga3_survival(pop, 3, NAMES, das_dennis(3, 1), random.Random(0))
    assert sorted(map(id, kept)) == sorted(map(id, pop))


def test_nsga3_spreads_across_niches():
    pop = [ind(10, 0, 0, tag="a"), ind(9, 1, 0, tag="a2"), ind(0, 10, 0, tag="b"), ind(0, 0, 10, tag="c")]
    kept = nsga3_survival(pop, 3, NAMES, das_dennis(3, 1), random.Random(0))
    assert {x.summary.peak_bytes for x in kept} >= {10}
    assert {x.summary.net_bytes for x in kept} >= {10}


def test_spea2_fitness_examples():
    (f,) = spea2_fitness([ind(1, 1, 1)], NAMES)
    assert f < 1.0
    trio = [ind(1, 3, 0, tag="a"), ind(2, 2, 0, tag="b"), ind(3, 1, 0, tag="c")]
    fs = spea2_fitness(trio, NAMES)
    assert all(x < 1.0 for x in fs)  # R = 0, only density differs
    dominated = spea2_fitness(trio + [ind(4, 4, 1)], NAMES)
    assert dominated[3] >= 3  # dominated by three members of strength 1 each


def test_spea2_archive_truncation_keeps_extremes():
    pop = [ind(i, 10 - i, 0, tag=str(i)) for i in range(11)]
    archive, fit = spea2_select(pop, 4, NAMES)
    vals = sorted(a.summary.steps for a in archive)
    assert len(archive) == 4 and vals[0] == 0 and vals[-1] == 10
    assert all(f < 1 for f in fit)


def test_spea2_archive_fills_with_dominated():
    pop = [ind(1, 1, 1), ind(2, 2, 2), ind(3, 3, 3), ind(0, 0, 0, valid=False)]
    archive, _ = spea2_select(pop, 3, NAMES)
    assert [a.summary.steps for a in archive] == [1, 2, 3]


def test_final_front_dedups_and_filters():
    a = ind(1, 2, 0, tag="a")
    twin = Individual(a.patch, a.fitness, a.summary, True)
    front = final_front([a, twin, ind(2, 1, 0), ind(3, 3, 3), ind(0, 0, 0, valid=False)], NAMES)
    assert [x.summary.values() for x in front] == [(1, 2, 0), (2, 1, 0)]


# -- whole runs --


def _cfg(**kw):
    base = dict(population_size=10, generations=3, evaluation_budget=60, seed=3)
    base.update(kw)
    return SearchConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(algorithm="hillclimb")
    with pytest.raises(ValueError):
        SearchConfig(objectives=("steps",))
    with pytest.raises(ValueError):
        SearchConfig(algorithm="moead")
    assert SearchConfig.from_dict(SearchConfig().to_dict()) == SearchConfig()
    d = SearchConfig()
    assert d.population_size * d.generations == d.evaluation_budget


def test_budget_40_one_generation(corpus):
    rec = run_search(SearchConfig(generations=1, evaluation_budget=40), corpus["B1"])
    assert len(rec.generations) == 1 and len(rec.generations[0]) <= 40
    assert rec.evaluations_used <= 40


@pytest.mark.parametrize("algo", ["nsga2", "nsga3", "spea2"])
def test_zero_rates_give_clones(corpus, algo):
    rec = run_search(_cfg(algorithm=algo, mutation_rate=0.0, crossover_rate=0.0), corpus["B2"])
    first = {g["patch"] for g in rec.generations[0]}
    for gen in rec.generations[1:]:
        assert {g["patch"] for g in gen} <= first
    assert rec.evaluations_used == len(first)


@pytest.mark.parametrize("algo", ["nsga2", "nsga3"])
def test_elitism_across_generations(corpus, algo):
    rec = run_search(SearchConfig(algorithm=algo, seed=5), corpus["B2"])
    best = None
    for gen in rec.generations:
        vals = [g["summary"] for g in gen if g["valid"]]
        cur = tuple(min(v[o] for v in vals) for o in FitnessVector.OBJECTIVES)
        if best is not None:
            assert all(c <= b for c, b in zip(cur, best))
        best = cur


@pytest.mark.parametrize("algo", ["nsga2", "nsga3", "spea2", "hillclimb"])
def test_budget_and_front_validity(corpus, algo):
    objs = ("steps",) if algo == "hillclimb" else NAMES
    cfg = SearchConfig(algorithm=algo, objectives=objs, evaluation_budget=120, seed=1)
    rec = run_search(cfg, corpus["B3"])
    assert rec.evaluations_used <= cfg.evaluation_budget
    pts = [tuple(getattr(f, core.OBJECTIVE_FIELDS[o]) for o in objs) for _, f in rec.front]
    assert all(f.valid for _, f in rec.front)
    assert not any(dominates(p, q) for p in pts for q in pts)


def test_evaluator_cache_and_truncation(corpus):
    b = corpus["B1"]
    ev = Evaluator(b.program, b.fixtures, SearchConfig(evaluation_budget=3, repeats=2))
    ps = [Patch((Delete(i),)) for i in (2, 3, 4, 5)]
    out = ev.evaluate(ps + [ps[0]])
    assert [x is None for x in out] == [False, False, False, True, False]
    assert ev.used == 3 and ev.suite_runs <= 3 * 2
    assert ev.evaluate([ps[1]])[0] is not None and ev.used == 3


def test_hill_climb_budget_one(corpus):
    b = corpus["B2"]
    rec = run_search(SearchConfig(algorithm="hillclimb", objectives=("steps",), evaluation_budget=1), b)
    assert rec.front == [(Patch(), b.baseline)]
    assert rec.evaluations_used == 1


def test_hill_climb_trace_is_monotone(corpus):
    rec = run_search(SearchConfig(algorithm="hillclimb", objectives=("steps",), seed=4), corpus["B2"])
    last = math.inf
    for ev in rec.trace:
        if ev["event"] == "restart":
            last = math.inf
            continue
        assert ev["fitness"]["steps"] < last
        last = ev["fitness"]["steps"]
    assert any(ev["event"] == "accept" for ev in rec.trace)


def test_hill_climb_reaches_oracle_on_b2(corpus):
    b = corpus["B2"]
    target = b.oracles[0].fitness.steps
    hits = 0
    for seed in range(20):
        rec = run_search(SearchConfig(algorithm="hillclimb", objectives=("steps",), seed=seed), b)
        hits += bool(rec.front) and rec.front[0][1].steps <= target
    assert hits >= 15


def test_refuses_failing_original():
    class Broken:
        name = "broken"
        program = prog("fn f() -> int { return 1; }\nfn test_f() { assert f() == 2; }")
        fixtures = fx()

    with pytest.raises(SearchError):
        run_search(SearchConfig(), Broken())


def test_all_invalid_population(corpus, monkeypatch):
    # the original is measured separately, so every candidate can fail
    monkeypatch.setattr(core, "evaluate_patch", lambda *args: core.INVALID)
    rec = run_search(_cfg(), corpus["B1"])
    assert rec.front == [] and rec.all_invalid
    assert json.loads(rec.to_json())["all_invalid"] is True


def test_determinism_and_worker_independence(corpus):
    b = corpus["B5"]
    one = run_search(_cfg(seed=9), b)
    again = run_search(_cfg(seed=9), b)
    two = run_search(_cfg(seed=9, workers=2), b)
    assert one.to_json() == again.to_json() == two.to_json()


def test_record_round_trip(corpus):
    rec = run_search(_cfg(), corpus["B2"])
    back = RunRecord.from_json(rec.to_json())
    assert back.to_json() == rec.to_json()
    assert "wall_seconds" not in rec.to_json()


@pytest.mark.parametrize("algo", ["nsga2", "nsga3", "spea2"])
def test_golden_digests(corpus, algo):
    golden = json.loads((GOLDEN / "digests.json").read_text())
    rec = run_search(SearchConfig(algorithm=algo, seed=7), corpus["B1"])
    assert rec.digest() == golden[f"B1-redundant-stmt/{algo}/7"]
