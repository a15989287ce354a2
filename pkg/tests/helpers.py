"""Shared test programs and small utilities."""

from mogi.interp import Fixtures
from mogi.minilang import parse

# The same pure call twice in one method.
TWICE_IN_METHOD = """
fn foo(a: int, b: int, c: int) -> int {
    return a * b + c;
}

fn bar(a: int, b: int, c: int) -> int {
    var x: int = foo(a, b, c);
    var y: int = foo(a, b, c);
    return x + y;
}

fn test_bar() {
    assert bar(2, 3, 4) == 20;
}
"""

# One call site per method; two methods share the call.
SHARED_ACROSS_METHODS = """
fn a() -> int {
    return 41;
}

fn b() -> int {
    var x: int = a();
    return x + 1;
}

fn c() -> int {
    return a() * 2;
}

fn test_bc() {
    assert b() == 42;
    assert c() == 82;
}
"""


def prog(src: str):
    return parse(src)


def fx(**responses) -> Fixtures:
    return Fixtures(dict(responses))
