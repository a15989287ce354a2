"""Canonical pretty printer. ``parse(pretty_print(p))`` is structurally equal to ``p``."""

from __future__ import annotations

from . import ast as A
from .parser import BINARY_LEVEL

INDENT = "    "
_POSTFIX_LEVEL = 100
_UNARY_LEVEL = 50

_ESC = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _quote(s: str) -> str:
    return '"' + "".join(_ESC.get(c, c) for c in s) + '"'


def _level(e) -> int:
    t = type(e)
    if t is A.Binary:
        return BINARY_LEVEL[e.op]
    if t is A.Unary:
        return _UNARY_LEVEL
    return _POSTFIX_LEVEL


def expr_text(e) -> str:
    t = type(e)
    if t is A.IntLit:
        return str(e.value)
    if t is A.BoolLit:
        return "true" if e.value else "false"
    if t is A.StrLit:
        return _quote(e.value)
    if t is A.NullLit:
        return "null"
    if t is A.Var:
        return e.name
    if t is A.Call:
        return f"{e.callee}({', '.join(expr_text(a) for a in e.args)})"
    if t is A.ArrayLit:
        return "[" + ", ".join(expr_text(a) for a in e.items) + "]"
    if t is A.Binary:
        lvl = BINARY_LEVEL[e.op]
        left = expr_text(e.left)
        if _level(e.left) < lvl:
            left = f"({left})"
        right = expr_text(e.right)
        # left-associative: an equal-level right operand needs parentheses
        if _level(e.right) <= lvl:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if t is A.Unary:
        inner = expr_text(e.operand)
        if _level(e.operand) < _UNARY_LEVEL:
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if t is A.Index:
        target = expr_text(e.target)
        if _level(e.target) < _POSTFIX_LEVEL:
            target = f"({target})"
        return f"{target}[{expr_text(e.index)}]"
    if t is A.Unwrap:
        inner = expr_text(e.operand)
        if _level(e.operand) < _POSTFIX_LEVEL:
            inner = f"({inner})"
        return f"{inner}!"
    raise TypeError(f"not an expression: {e!r}")


def _simple(s) -> str:
    """Text of a statement that fits on one line, without the trailing ';'."""
    t = type(s)
    if t is A.VarDecl:
        return f"var {s.name}: {s.type} = {expr_text(s.init)}"
    if t is A.Assign:
        target = s.name if s.index is None else f"{s.name}[{expr_text(s.index)}]"
        return f"{target} = {expr_text(s.value)}"
    raise TypeError(f"not a simple statement: {s!r}")


def _block_lines(b: A.Block, depth: int, out: list) -> None:
    for s in b.stmts:
        _stmt_lines(s, depth, out)


def _stmt_lines(s, depth: int, out: list) -> None:
    pad = INDENT * depth
    t = type(s)
    if t is A.VarDecl or t is A.Assign:
        out.append(f"{pad}{_simple(s)};")
    elif t is A.ExprStmt:
        out.append(f"{pad}{expr_text(s.expr)};")
    elif t is A.Return:
        out.append(f"{pad}return;" if s.value is None else f"{pad}return {expr_text(s.value)};")
    elif t is A.Assert:
        out.append(f"{pad}assert {expr_text(s.cond)};")
    elif t is A.Block:
        out.append(f"{pad}{{")
        _block_lines(s, depth + 1, out)
        out.append(f"{pad}}}")
    elif t is A.If:
        out.append(f"{pad}if ({expr_text(s.cond)}) {{")
        _block_lines(s.then, depth + 1, out)
        if s.orelse is None:
            out.append(f"{pad}}}")
        else:
            out.append(f"{pad}}} else {{")
            _block_lines(s.orelse, depth + 1, out)
            out.append(f"{pad}}}")
    elif t is A.While:
        out.append(f"{pad}while ({expr_text(s.cond)}) {{")
        _block_lines(s.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif t is A.For:
        head = f"{_simple(s.init)}; {expr_text(s.cond)}; {_simple(s.update)}"
        out.append(f"{pad}for ({head}) {{")
        _block_lines(s.body, depth + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def stmt_text(s, depth: int = 0) -> str:
    out: list = []
    _stmt_lines(s, depth, out)
    return "\n".join(out)


def pretty_print(p: A.Program) -> str:
    chunks = []
    if p.fields:
        lines = []
        for f in p.fields:
            init = "" if f.init is None else f" = {expr_text(f.init)}"
            lines.append(f"var {f.name}: {f.type}{init};")
        chunks.append("\n".join(lines))
    for fn in p.functions:
        params = ", ".join(f"{prm.name}: {prm.type}" for prm in fn.params)
        ret = "" if fn.ret == A.VOID else f" -> {fn.ret}"
        out = [f"fn {fn.name}({params}){ret} {{"]
        _block_lines(fn.body, 1, out)
        out.append("}")
        chunks.append("\n".join(out))
    if not chunks:
        return ""
    return "\n\n".join(chunks) + "\n"
