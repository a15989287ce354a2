"""Deterministic instrumented interpreter and unit-test harness.

Cost model (all counts are per test, summed over the suite):

* every statement execution costs 1 step, except blocks, which cost nothing;
* every expression node costs 1 step, except builtin calls, which cost
  ``Fixtures.step_costs[name]`` (defaults: fetch 1000, alloc 10, others 1);
* each test pays ``HARNESS_STEPS`` for being invoked, plus the cost of
  evaluating the field initializers for its fresh state.

Memory model: live bytes are the summed sizes of every value currently bound
to a variable (fields, parameters, locals). A value returned by a call or
produced by a builtin is counted transiently at the moment it is created.
Sizes: int 8, bool 1, null 8, string 16 + len, array 16 + sum of element sizes.

Network model: each ``fetch(url)`` adds ``len(url) + len(response)`` bytes.
"""

from __future__ import annotations

import enum
import json
import math
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .minilang import ast as A

HARNESS_STEPS = 1
MAX_CALL_DEPTH = 200
HOST_RECURSION_LIMIT = 12000
DEFAULT_STEP_COSTS = {"fetch": 1000, "alloc": 10}

_INT_MIN = -(2**63)
_INT_MAX = 2**63 - 1


class Outcome(str, enum.Enum):
    PASS = "pass"
    ASSERT_FAIL = "assert-fail"
    RUNTIME_ERROR = "runtime-error"
    BUDGET_EXCEEDED = "step-budget-exceeded"


@dataclass
class Fixtures:
    responses: dict = field(default_factory=dict)
    step_costs: dict = field(default_factory=dict)

    def cost(self, builtin: str) -> int:
        return self.step_costs.get(builtin, DEFAULT_STEP_COSTS.get(builtin, 1))

    @classmethod
    def from_dict(cls, d: dict) -> "Fixtures":
        return cls(dict(d.get("responses", {})), dict(d.get("step_costs", {})))

    @classmethod
    def load(cls, path) -> "Fixtures":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {"responses": dict(self.responses), "step_costs": dict(self.step_costs)}


@dataclass(frozen=True)
class FitnessVector:
    steps: float
    peak_bytes: float
    net_bytes: float
    valid: bool = True

    OBJECTIVES = ("steps", "peak_bytes", "net_bytes")

    def values(self) -> tuple:
        return (self.steps, self.peak_bytes, self.net_bytes)

    def to_dict(self) -> dict:
        return {"steps": self.steps, "peak_bytes": self.peak_bytes,
                "net_bytes": self.net_bytes, "valid": self.valid}

    @classmethod
    def from_dict(cls, d: dict) -> "FitnessVector":
        return cls(d["steps"], d["peak_bytes"], d["net_bytes"], d.get("valid", True))


INVALID = FitnessVector(0, 0, 0, valid=False)


@dataclass
class TestResult:
    name: str
    outcome: Outcome
    steps: int
    message: str = ""
    peak: int = 0
    net: int = 0


@dataclass
class TestReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.outcome is Outcome.PASS for r in self.results)

    def outcome(self, name: str) -> Outcome:
        for r in self.results:
            if r.name == name:
                return r.outcome
        raise KeyError(name)


@dataclass
class SuiteRun:
    """One execution of the whole suite, with the raw counters."""

    report: TestReport
    steps: int
    peak_bytes: int
    net_bytes: int
    covered: Optional[set] = None

    def fitness(self) -> FitnessVector:
        if not self.report.passed:
            return INVALID
        return FitnessVector(self.steps, self.peak_bytes, self.net_bytes)


# -- errors used for control flow inside a test --


class MiniRuntimeError(Exception):
    pass


class _AssertFailed(Exception):
    pass


class _BudgetExceeded(Exception):
    pass


def sizeof(v) -> int:
    t = type(v)
    if t is int:
        return 8
    if t is bool:
        return 1
    if t is str:
        return 16 + len(v)
    if t is tuple:
        if v and type(v[0]) is int:
            return 16 + 8 * len(v)
        return 16 + sum(sizeof(x) for x in v)
    return 8  # null


def _wrap(x: int) -> int:
    if _INT_MIN <= x <= _INT_MAX:
        return x
    return ((x - _INT_MIN) % 2**64) + _INT_MIN


def _default(t: A.Type):
    if t == A.INT:
        return 0
    if t == A.BOOL:
        return False
    if t == A.STRING:
        return ""
    if t.is_array:
        return ()
    return None


class Interpreter:
    """Executes tests of one program. Not thread-safe; create one per worker."""

    def __init__(self, program: A.Program, fixtures: Fixtures, step_budget: int,
                 track_coverage: bool = False):
        self.program = program
        self.fx = fixtures
        self.budget = step_budget
        self.funcs = {fn.name: fn for fn in program.functions}
        self.covered: Optional[set] = set() if track_coverage else None
        self._costs = {name: fixtures.cost(name) for name in ("fetch", "alloc", "len", "str", "push")}
        self._stmt = {
            A.Block: self._block, A.VarDecl: self._vardecl, A.Assign: self._assign,
            A.If: self._if, A.While: self._while, A.For: self._for,
            A.ExprStmt: self._exprstmt, A.Return: self._return, A.Assert: self._assert,
        }
        self._expr = {
            A.IntLit: self._lit, A.BoolLit: self._lit, A.StrLit: self._lit,
            A.NullLit: self._null, A.Var: self._var, A.ArrayLit: self._arraylit,
            A.Unary: self._unary, A.Binary: self._binary, A.Call: self._call,
            A.Index: self._index, A.Unwrap: self._unwrap,
        }

    # -- harness --

    def run_suite(self) -> SuiteRun:
        results = []
        total = peak = net = 0
        old_limit = sys.getrecursionlimit()
        # each mini-language call nests roughly ten host frames
        sys.setrecursionlimit(max(old_limit, HOST_RECURSION_LIMIT))
        try:
            for fn in self.program.functions:
                if not fn.is_test:
                    continue
                results.append(self._run_test(fn))
        finally:
            sys.setrecursionlimit(old_limit)
        for res in results:
            total += res.steps
        peak = max((r.peak for r in results), default=0)
        net = sum(r.net for r in results)
        return SuiteRun(TestReport(results), total, peak, net, self.covered)

    def _run_test(self, fn: A.Function) -> TestResult:
        self.steps = HARNESS_STEPS
        self.live = 0
        self.peak = 0
        self.net = 0
        self.depth = 0
        self.fields = {}
        outcome, msg = Outcome.PASS, ""
        try:
            for f in self.program.fields:
                v = _default(f.type)
                self.fields[f.name] = v
                self._grow(sizeof(v))
            for f in self.program.fields:
                if f.init is not None:
                    v = self.eval(f.init, {})
                    self.live += sizeof(v) - sizeof(self.fields[f.name])
                    self.fields[f.name] = v
                    if self.live > self.peak:
                        self.peak = self.live
            self._enter(fn.body, {})
            if self.steps > self.budget:
                raise _BudgetExceeded()
        except _AssertFailed as e:
            outcome, msg = Outcome.ASSERT_FAIL, str(e)
        except _BudgetExceeded:
            outcome, msg = Outcome.BUDGET_EXCEEDED, f"more than {self.budget} steps"
        except MiniRuntimeError as e:
            outcome, msg = Outcome.RUNTIME_ERROR, str(e)
        except RecursionError:
            outcome, msg = Outcome.RUNTIME_ERROR, "host recursion limit reached"
        return TestResult(fn.name, outcome, self.steps, msg, self.peak, self.net)

    def _grow(self, n: int) -> None:
        self.live += n
        if self.live > self.peak:
            self.peak = self.live

    def _transient(self, v) -> None:
        s = self.live + sizeof(v)
        if s > self.peak:
            self.peak = s

    # -- statements --

    def exec(self, s, env):
        self.steps += 1
        if self.steps > self.budget:
            raise _BudgetExceeded()
        if self.covered is not None:
            self.covered.add(s.id)
        return self._stmt[type(s)](s, env)

    def _block(self, b: A.Block, env):
        declared = None
        result = None
        for s in b.stmts:
            t = type(s)
            if t is A.Block:
                if self.covered is not None:
                    self.covered.add(s.id)
                result = self._block(s, env)
            else:
                result = self.exec(s, env)
                if t is A.VarDecl:
                    if declared is None:
                        declared = []
                    declared.append(s.name)
            if result is not None:
                break
        if declared:
            for name in declared:
                self.live -= sizeof(env.pop(name))
        return result

    def _vardecl(self, s: A.VarDecl, env):
        v = self.eval(s.init, env)
        env[s.name] = v
        self._grow(sizeof(v))

    def _store(self, name: str, v, env) -> None:
        scope = env if name in env else self.fields
        self.live += sizeof(v) - sizeof(scope[name])
        scope[name] = v
        if self.live > self.peak:
            self.peak = self.live

    def _assign(self, s: A.Assign, env):
        if s.index is None:
            self._store(s.name, self.eval(s.value, env), env)
            return None
        arr = env[s.name] if s.name in env else self.fields[s.name]
        i = self.eval(s.index, env)
        v = self.eval(s.value, env)
        if not 0 <= i < len(arr):
            raise MiniRuntimeError(f"index {i} out of bounds for length {len(arr)}")
        self._store(s.name, arr[:i] + (v,) + arr[i + 1:], env)
        return None

    def _if(self, s: A.If, env):
        if self.eval(s.cond, env):
            return self._enter(s.then, env)
        if s.orelse is not None:
            return self._enter(s.orelse, env)
        return None

    def _enter(self, b: A.Block, env):
        if self.covered is not None:
            self.covered.add(b.id)
        return self._block(b, env)

    def _while(self, s: A.While, env):
        while self.eval(s.cond, env):
            if self.steps > self.budget:
                raise _BudgetExceeded()
            r = self._enter(s.body, env)
            if r is not None:
                return r
        return None

    def _for(self, s: A.For, env):
        init = s.init
        declared = type(init) is A.VarDecl
        self.exec(init, env)
        result = None
        while self.eval(s.cond, env):
            if self.steps > self.budget:
                raise _BudgetExceeded()
            result = self._enter(s.body, env)
            if result is not None:
                break
            self.exec(s.update, env)
        if declared:
            self.live -= sizeof(env.pop(init.name))
        return result

    def _exprstmt(self, s: A.ExprStmt, env):
        self.eval(s.expr, env)

    def _return(self, s: A.Return, env):
        return (None if s.value is None else self.eval(s.value, env),)

    def _assert(self, s: A.Assert, env):
        if not self.eval(s.cond, env):
            line, col = s.pos
            raise _AssertFailed(f"assertion failed at {line}:{col}")

    # -- expressions --

    def eval(self, e, env):
        return self._expr[type(e)](e, env)

    def _lit(self, e, env):
        self.steps += 1
        return e.value

    def _null(self, e, env):
        self.steps += 1
        return None

    def _var(self, e: A.Var, env):
        self.steps += 1
        name = e.name
        if name in env:
            return env[name]
        return self.fields[name]

    def _arraylit(self, e: A.ArrayLit, env):
        self.steps += 1
        return tuple(self.eval(x, env) for x in e.items)

    def _unary(self, e: A.Unary, env):
        self.steps += 1
        v = self.eval(e.operand, env)
        return _wrap(-v) if e.op == "-" else not v

    def _binary(self, e: A.Binary, env):
        self.steps += 1
        op = e.op
        if op == "&&":
            return self.eval(e.left, env) and self.eval(e.right, env)
        if op == "||":
            return self.eval(e.left, env) or self.eval(e.right, env)
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        if op == "+":
            return a + b if type(a) is str else _wrap(a + b)
        if op == "-":
            return _wrap(a - b)
        if op == "*":
            return _wrap(a * b)
        if op == "<":
            return a < b
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if b == 0:
            raise MiniRuntimeError("division by zero")
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        return _wrap(q) if op == "/" else _wrap(a - b * q)

    def _index(self, e: A.Index, env):
        self.steps += 1
        arr = self.eval(e.target, env)
        i = self.eval(e.index, env)
        if not 0 <= i < len(arr):
            raise MiniRuntimeError(f"index {i} out of bounds for length {len(arr)}")
        return arr[i]

    def _unwrap(self, e: A.Unwrap, env):
        self.steps += 1
        v = self.eval(e.operand, env)
        if v is None:
            raise MiniRuntimeError("unwrap of null")
        return v

    def _call(self, e: A.Call, env):
        fn = self.funcs.get(e.callee)
        if fn is None:
            return self._builtin(e, env)
        self.steps += 1
        args = [self.eval(a, env) for a in e.args]
        if self.depth >= MAX_CALL_DEPTH:
            raise MiniRuntimeError(f"call depth exceeds {MAX_CALL_DEPTH}")
        frame = {}
        for p, v in zip(fn.params, args):
            frame[p.name] = v
            self._grow(sizeof(v))
        self.depth += 1
        r = self._enter(fn.body, frame)
        self.depth -= 1
        for v in frame.values():
            self.live -= sizeof(v)
        if r is None:
            if fn.ret != A.VOID:
                raise MiniRuntimeError(f"{fn.name} finished without returning a value")
            return None
        v = r[0]
        self._transient(v)
        return v

    def _builtin(self, e: A.Call, env):
        name = e.callee
        self.steps += self._costs[name]
        args = [self.eval(a, env) for a in e.args]
        if name == "fetch":
            url = args[0]
            resp = self.fx.responses.get(url)
            if resp is None:
                raise MiniRuntimeError(f"no fixture response for url {url!r}")
            self.net += len(url) + len(resp)
            self._transient(resp)
            return resp
        if name == "alloc":
            n = args[0]
            if n < 0:
                raise MiniRuntimeError("negative allocation size")
            if n > 1_000_000:
                raise MiniRuntimeError("allocation too large")
            v = (0,) * n
            self._transient(v)
            return v
        if name == "len":
            return len(args[0])
        if name == "str":
            return str(args[0])
        v = args[0] + (args[1],)
        self._transient(v)
        return v


# -- public API --


def execute(p: A.Program, fx: Fixtures, step_budget: int, track_coverage: bool = False) -> SuiteRun:
    """Run the suite once and return the report together with raw counters."""
    return Interpreter(p, fx, step_budget, track_coverage).run_suite()


def run_tests(p: A.Program, fx: Fixtures, step_budget: int) -> TestReport:
    if step_budget <= 0:
        raise ValueError("step_budget must be positive")
    return execute(p, fx, step_budget).report


@dataclass(frozen=True)
class Multiplicative:
    """Seeded log-normal measurement noise: each sample is scaled by exp(N(0, sigma))."""

    sigma: float
    seed: int = 0


def apply_noise(base: FitnessVector, repeats: int, noise: Optional[Multiplicative], seed=0) -> list:
    if noise is None or noise.sigma == 0:
        return [base] * repeats
    rng = random.Random(f"noise:{noise.seed}:{seed}")
    out = []
    for _ in range(repeats):
        vals = [v * math.exp(rng.gauss(0.0, noise.sigma)) for v in base.values()]
        out.append(FitnessVector(*(max(v, 0.0) for v in vals)))
    return out


def measure(p: A.Program, fx: Fixtures, repeats: int = 1, noise: Optional[Multiplicative] = None,
            seed=0, step_budget: int = 10**9) -> list:
    """Fitness samples for a program whose tests pass.

    The interpreter is deterministic, so the suite is executed once and the
    noise model (if any) is applied per repeat.
    """
    run = execute(p, fx, step_budget)
    if not run.report.passed:
        raise ValueError("measure() requires a program whose tests pass")
    return apply_noise(run.fitness(), repeats, noise, seed)
