"""Static checks: declaration before use, no shadowing, call arity/types, boolean
conditions. Annotates every expression node's ``ty`` slot as a side effect."""

from __future__ import annotations

from . import ast as A
from .errors import TypeCheckError

BUILTINS = ("fetch", "alloc", "len", "str", "push")


def assignable(src: A.Type, dst: A.Type) -> bool:
    if src == dst:
        return True
    if dst.is_optional:
        return src == A.NULL or src == dst.arg
    return False


def _valid_value_type(t: A.Type) -> bool:
    if t in (A.INT, A.BOOL, A.STRING):
        return True
    if t.is_array:
        return _valid_value_type(t.arg)
    if t.is_optional:
        return _valid_value_type(t.arg) and not t.arg.is_optional
    return False


class _Checker:
    def __init__(self, prog: A.Program):
        self.prog = prog
        self.funcs: dict[str, A.Function] = {}
        self.fields: dict[str, A.Type] = {}
        self.scopes: list[dict[str, A.Type]] = []
        self.current: A.Function | None = None

    def fail(self, msg: str, node) -> None:
        line, col = getattr(node, "pos", (0, 0))
        raise TypeCheckError(msg, line, col)

    # -- names --

    def lookup(self, name: str, node) -> A.Type:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if name in self.fields:
            return self.fields[name]
        self.fail(f"undeclared variable {name!r}", node)

    def declare(self, name: str, ty: A.Type, node) -> None:
        if name in self.fields or any(name in s for s in self.scopes):
            self.fail(f"redeclaration of {name!r}", node)
        self.scopes[-1][name] = ty

    # -- program --

    def check(self) -> None:
        for fn in self.prog.functions:
            if fn.name in self.funcs:
                self.fail(f"duplicate function {fn.name!r}", fn)
            if fn.name in BUILTINS:
                self.fail(f"function {fn.name!r} shadows a builtin", fn)
            self.funcs[fn.name] = fn
        for f in self.prog.fields:
            if not _valid_value_type(f.type):
                self.fail(f"invalid field type {f.type}", f)
            if f.name in self.fields:
                self.fail(f"redeclaration of field {f.name!r}", f)
            if f.init is not None:
                t = self.expr(f.init)
                if not assignable(t, f.type):
                    self.fail(f"cannot initialize {f.type} field {f.name!r} with {t}", f.init)
            self.fields[f.name] = f.type
        for fn in self.prog.functions:
            self.function(fn)

    def function(self, fn: A.Function) -> None:
        self.current = fn
        if fn.ret != A.VOID and not _valid_value_type(fn.ret):
            self.fail(f"invalid return type {fn.ret}", fn)
        if fn.is_test and (fn.params or fn.ret != A.VOID):
            self.fail(f"test function {fn.name!r} must take no parameters and return nothing", fn)
        self.scopes = [{}]
        for p in fn.params:
            if not _valid_value_type(p.type):
                self.fail(f"invalid parameter type {p.type}", fn)
            self.declare(p.name, p.type, fn)
        self.block(fn.body)
        self.scopes = []
        self.current = None

    # -- statements --

    def block(self, b: A.Block) -> None:
        self.scopes.append({})
        for s in b.stmts:
            self.stmt(s)
        self.scopes.pop()

    def cond(self, e, what: str) -> None:
        t = self.expr(e)
        if t != A.BOOL:
            self.fail(f"{what} must be bool, got {t}", e)

    def stmt(self, s) -> None:
        t = type(s)
        if t is A.Block:
            self.block(s)
        elif t is A.VarDecl:
            if not _valid_value_type(s.type):
                self.fail(f"invalid variable type {s.type}", s)
            vt = self.expr(s.init)
            if not assignable(vt, s.type):
                self.fail(f"cannot initialize {s.type} variable {s.name!r} with {vt}", s)
            self.declare(s.name, s.type, s)
        elif t is A.Assign:
            target = self.lookup(s.name, s)
            if s.index is not None:
                if not target.is_array:
                    self.fail(f"{s.name!r} is not an array", s)
                if self.expr(s.index) != A.INT:
                    self.fail("array index must be int", s.index)
                target = target.arg
            vt = self.expr(s.value)
            if not assignable(vt, target):
                self.fail(f"cannot assign {vt} to {target}", s)
        elif t is A.If:
            self.cond(s.cond, "if condition")
            self.block(s.then)
            if s.orelse is not None:
                self.block(s.orelse)
        elif t is A.While:
            self.cond(s.cond, "while condition")
            self.block(s.body)
        elif t is A.For:
            self.scopes.append({})
            self.stmt(s.init)
            self.cond(s.cond, "for condition")
            self.stmt(s.update)
            self.block(s.body)
            self.scopes.pop()
        elif t is A.ExprStmt:
            self.expr(s.expr, allow_void=True)
        elif t is A.Return:
            ret = self.current.ret
            if s.value is None:
                if ret != A.VOID:
                    self.fail(f"missing return value in {self.current.name!r}", s)
            else:
                if ret == A.VOID:
                    self.fail(f"void function {self.current.name!r} returns a value", s)
                vt = self.expr(s.value)
                if not assignable(vt, ret):
                    self.fail(f"cannot return {vt} from function returning {ret}", s)
        elif t is A.Assert:
            self.cond(s.cond, "assert condition")
        else:  # pragma: no cover
            self.fail(f"unknown statement {s!r}", s)

    # -- expressions --

    def expr(self, e, allow_void: bool = False) -> A.Type:
        ty = self._expr(e)
        if ty == A.VOID and not allow_void:
            self.fail("void value used in expression", e)
        e.ty = ty
        return ty

    def _expr(self, e) -> A.Type:
        t = type(e)
        if t is A.IntLit:
            return A.INT
        if t is A.BoolLit:
            return A.BOOL
        if t is A.StrLit:
            return A.STRING
        if t is A.NullLit:
            return A.NULL
        if t is A.Var:
            return self.lookup(e.name, e)
        if t is A.ArrayLit:
            if not e.items:
                self.fail("empty array literal has no element type", e)
            first = self.expr(e.items[0])
            if not _valid_value_type(first):
                self.fail(f"invalid array element type {first}", e)
            for item in e.items[1:]:
                if self.expr(item) != first:
                    self.fail("array literal elements differ in type", item)
            return A.array_of(first)
        if t is A.Unary:
            ot = self.expr(e.operand)
            want = A.INT if e.op == "-" else A.BOOL
            if ot != want:
                self.fail(f"operator {e.op!r} expects {want}, got {ot}", e)
            return want
        if t is A.Binary:
            return self.binary(e)
        if t is A.Call:
            return self.call(e)
        if t is A.Index:
            tt = self.expr(e.target)
            if not tt.is_array:
                self.fail(f"cannot index {tt}", e)
            if self.expr(e.index) != A.INT:
                self.fail("array index must be int", e.index)
            return tt.arg
        if t is A.Unwrap:
            ot = self.expr(e.operand)
            if not ot.is_optional:
                self.fail(f"cannot unwrap non-optional {ot}", e)
            return ot.arg
        self.fail(f"unknown expression {e!r}", e)  # pragma: no cover

    def binary(self, e: A.Binary) -> A.Type:
        lt = self.expr(e.left)
        rt = self.expr(e.right)
        op = e.op
        if op in ("&&", "||"):
            if lt != A.BOOL or rt != A.BOOL:
                self.fail(f"operator {op!r} expects bool operands", e)
            return A.BOOL
        if op in ("==", "!="):
            ok = lt == rt or (lt == A.NULL and rt.is_optional) or (rt == A.NULL and lt.is_optional)
            if not ok:
                self.fail(f"cannot compare {lt} with {rt}", e)
            return A.BOOL
        if op == "+" and lt == A.STRING and rt == A.STRING:
            return A.STRING
        if lt != A.INT or rt != A.INT:
            self.fail(f"operator {op!r} expects int operands, got {lt} and {rt}", e)
        return A.BOOL if op in ("<", "<=", ">", ">=") else A.INT

    def call(self, e: A.Call) -> A.Type:
        name = e.callee
        if name in BUILTINS:
            return self.builtin(e)
        fn = self.funcs.get(name)
        if fn is None:
            self.fail(f"undefined function {name!r}", e)
        if fn.is_test:
            self.fail(f"test function {name!r} cannot be called", e)
        if len(e.args) != len(fn.params):
            self.fail(f"{name!r} expects {len(fn.params)} arguments, got {len(e.args)}", e)
        for arg, p in zip(e.args, fn.params):
            at = self.expr(arg)
            if not assignable(at, p.type):
                self.fail(f"argument {p.name!r} of {name!r} expects {p.type}, got {at}", arg)
        return fn.ret

    def builtin(self, e: A.Call) -> A.Type:
        name, args = e.callee, e.args
        arity = 2 if name == "push" else 1
        if len(args) != arity:
            self.fail(f"{name!r} expects {arity} arguments, got {len(args)}", e)
        types = [self.expr(a) for a in args]
        if name == "fetch":
            if types[0] != A.STRING:
                self.fail("fetch expects a string url", e)
            return A.STRING
        if name == "alloc":
            if types[0] != A.INT:
                self.fail("alloc expects an int size", e)
            return A.array_of(A.INT)
        if name == "len":
            if types[0] != A.STRING and not types[0].is_array:
                self.fail(f"len expects a string or array, got {types[0]}", e)
            return A.INT
        if name == "str":
            if types[0] != A.INT:
                self.fail("str expects an int", e)
            return A.STRING
        # push
        if not types[0].is_array or types[1] != types[0].arg:
            self.fail(f"push expects array<T> and T, got {types[0]} and {types[1]}", e)
        return types[0]


def typecheck(prog: A.Program) -> A.Program:
    """Check ``prog`` in place; raises :class:`TypeCheckError` on the first problem."""
    _Checker(prog).check()
    return prog

