import pytest

from mogi.interp import (
    HARNESS_STEPS, INVALID, Fixtures, Multiplicative, Outcome, execute, measure, run_tests, sizeof,
)
from mogi.patch import apply, parse_patch

from helpers import fx, prog

BIG = 10**6


def outcome(src, fixtures=None, budget=BIG):
    rep = run_tests(prog(src), fixtures or Fixtures(), budget)
    return rep.results[0].outcome


def test_passing_assertion():
    assert outcome("fn test_a() { assert 1 + 1 == 2; }") is Outcome.PASS


def test_infinite_loop_hits_budget():
    assert outcome("fn test_a() { while (true) { } }", budget=500) is Outcome.BUDGET_EXCEEDED


def test_failures_are_outcomes():
    assert outcome("fn test_a() { assert 1 == 2; }") is Outcome.ASSERT_FAIL
    assert outcome("fn test_a() { var a: array<int> = [1]; assert a[3] == 0; }") is Outcome.RUNTIME_ERROR
    assert outcome("fn test_a() { var s: optional<int> = null; assert s! == 0; }") is Outcome.RUNTIME_ERROR
    assert outcome('fn test_a() { assert fetch("nope") == ""; }') is Outcome.RUNTIME_ERROR
    assert outcome("fn test_a() { assert 1 / 0 == 0; }") is Outcome.RUNTIME_ERROR


def test_unbounded_recursion_is_a_runtime_error():
    src = "fn f(n: int) -> int { return f(n + 1); }\nfn test_a() { assert f(0) == 0; }"
    assert outcome(src) is Outcome.RUNTIME_ERROR


def test_budget_rejects_non_positive():
    with pytest.raises(ValueError):
        run_tests(prog("fn test_a() { }"), Fixtures(), 0)


def test_empty_test_costs_only_harness_overhead():
    [f] = measure(prog("fn test_a() { }"), Fixtures())
    assert f.steps == HARNESS_STEPS
    assert f.net_bytes == 0


def test_fetch_counts_url_and_response_bytes():
    src = 'fn test_a() { var x: string = fetch("u"); var y: string = fetch("u"); assert x == y; }'
    [f] = measure(prog(src), fx(u="abc"))
    assert f.net_bytes == 2 * (1 + 3)


def test_builtin_step_costs_come_from_fixtures():
    src = 'fn test_a() { var x: string = fetch("u"); }'
    [default] = measure(prog(src), fx(u=""))
    [cheap] = measure(prog(src), Fixtures({"u": ""}, {"fetch": 1}))
    assert default.steps - cheap.steps == 999


def test_corpus_b1_passes_and_matches_manifest(corpus):
    b = corpus["B1"]
    assert run_tests(b.program, b.fixtures, BIG).passed
    assert measure(b.program, b.fixtures)[0] == b.baseline


def test_value_sizes():
    assert sizeof(5) == 8
    assert sizeof(True) == 1
    assert sizeof("abc") == 19
    assert sizeof((1, 2, 3)) == 16 + 24
    assert sizeof(None) == 8


def test_locals_die_at_scope_exit():
    one = "fn test_a() { if (true) { var a: array<int> = alloc(100); } }"
    two = one.replace("} }", "} if (true) { var b: array<int> = alloc(100); } }")
    [p1] = measure(prog(one), Fixtures())
    [p2] = measure(prog(two), Fixtures())
    assert p1.peak_bytes == p2.peak_bytes
    both = "fn test_a() { var a: array<int> = alloc(100); var b: array<int> = alloc(100); }"
    [p3] = measure(prog(both), Fixtures())
    assert p3.peak_bytes > p1.peak_bytes


def test_fields_are_fresh_per_test():
    src = """
var n: int = 0;
fn bump() { n = n + 1; }
fn test_a() { bump(); assert n == 1; }
fn test_b() { bump(); assert n == 1; }
"""
    assert run_tests(prog(src), Fixtures(), BIG).passed


def test_int_arithmetic_wraps_at_64_bits():
    src = "fn test_a() { var x: int = 9223372036854775807; assert x + 1 == -9223372036854775807 - 1; }"
    assert outcome(src) is Outcome.PASS


def test_division_truncates_toward_zero():
    assert outcome("fn test_a() { assert -7 / 2 == -3; assert -7 % 2 == -1; }") is Outcome.PASS


def test_measure_is_deterministic_without_noise(corpus):
    b = corpus["B3"]
    a = measure(b.program, b.fixtures, repeats=5)
    assert len(set(a)) == 1
    assert a == measure(b.program, b.fixtures, repeats=5)


def test_noise_is_seeded_and_positive(corpus):
    b = corpus["B2"]
    noise = Multiplicative(0.1, seed=3)
    a = measure(b.program, b.fixtures, repeats=10, noise=noise, seed="x")
    again = measure(b.program, b.fixtures, repeats=10, noise=noise, seed="x")
    assert a == again
    assert len({s.steps for s in a}) > 1
    assert all(s.steps > 0 and s.peak_bytes > 0 for s in a)


def test_measure_requires_passing_tests():
    with pytest.raises(ValueError):
        measure(prog("fn test_a() { assert false; }"), Fixtures())


def test_failing_suite_has_invalid_fitness():
    run = execute(prog("fn test_a() { assert false; }"), Fixtures(), BIG)
    assert run.fitness() == INVALID and not run.fitness().valid


def test_caching_a_repeated_fetch_trades_memory_for_network(corpus):
    b = corpus["B5"]
    rep = apply(parse_patch("CACHE_CLASS program.mini:7"), b.program)
    [after] = measure(rep.program, b.fixtures)
    assert after.net_bytes < b.baseline.net_bytes
    assert after.steps < b.baseline.steps
    assert after.peak_bytes >= b.baseline.peak_bytes


def test_coverage_tracks_executed_statements():
    p = prog("fn f(x: int) -> int { if (x > 0) { return 1; } return 0; }\nfn test_a() { assert f(1) == 1; }")
    run = execute(p, Fixtures(), BIG, track_coverage=True)
    ret0 = [s for s in p.functions[0].body.stmts][-1]
    assert ret0.id not in run.covered
    assert p.functions[0].body.stmts[0].id in run.covered
