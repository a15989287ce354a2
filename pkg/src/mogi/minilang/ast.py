"""AST node definitions for the mini-language.

Statement nodes and call expressions carry an ``id`` slot. IDs are assigned by
:func:`mogi.minilang.ids.assign_ids` in a single pre-order walk; nodes created
by program transformations carry ``id=None`` until the program is re-numbered.

Blocks are statements (as in Java's ``BlockStmt``), so a Copy edit can name its
destination block by ID.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Type:
    name: str
    arg: Optional["Type"] = None

    def __str__(self) -> str:
        if self.arg is None:
            return self.name
        return f"{self.name}<{self.arg}>"

    @property
    def is_optional(self) -> bool:
        return self.name == "optional"

    @property
    def is_array(self) -> bool:
        return self.name == "array"


INT = Type("int")
BOOL = Type("bool")
STRING = Type("string")
VOID = Type("void")
NULL = Type("null")


def array_of(elem: Type) -> Type:
    return Type("array", elem)


def optional_of(inner: Type) -> Type:
    return Type("optional", inner)


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


def _ty():
    return field(default=None, compare=False, repr=False)


# -- expressions -------------------------------------------------------------


@dataclass
class IntLit:
    value: int
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class BoolLit:
    value: bool
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class StrLit:
    value: str
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class NullLit:
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class Var:
    name: str
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class ArrayLit:
    items: list
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class Unary:
    op: str
    operand: "Expr"
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class Call:
    callee: str
    args: list
    id: Optional[int] = None
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class Index:
    target: "Expr"
    index: "Expr"
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


@dataclass
class Unwrap:
    """Postfix ``e!``: read the value held by an optional, failing on null."""

    operand: "Expr"
    pos: tuple = _pos()
    ty: Optional[Type] = _ty()


Expr = Union[IntLit, BoolLit, StrLit, NullLit, Var, ArrayLit, Unary, Binary, Call, Index, Unwrap]


# -- statements --------------------------------------------------------------


@dataclass
class Block:
    stmts: list
    id: Optional[int] = None
    pos: tuple = _pos()


@dataclass
class VarDecl:
    name: str
    type: Type
    init: Expr
    id: Optional[int] = None
    pos: tuple = _pos()


@dataclass
class Assign:
    name: str
    index: Optional[Expr]
    value: Expr
    id: Optional[int] = None
    pos: tuple = _pos()


@dataclass
class If:
    cond: Expr
    then: Block
    orelse: Optional[Block] = None
    id: Optional[int] = None
    pos: tuple = _pos()


@dataclass
class While:
    cond: Expr
    body: Block
    id: Optional[int] = None
    pos: tuple = _pos()


@dataclass
class For:
    init: Union[VarDecl, Assign]
    cond: Expr
    update: Assign
    body: Block
    id: Optional[int] = None
    pos: tuple = _pos()


@dataclass
class ExprStmt:
    expr: Expr
    id: Optional[int] = None
    pos: tuple = _pos()


@dataclass
class Return:
    value: Optional[Expr] = None
    id: Optional[int] = None
    pos: tuple = _pos()


@dataclass
class Assert:
    cond: Expr
    id: Optional[int] = None
    pos: tuple = _pos()


Stmt = Union[Block, VarDecl, Assign, If, While, For, ExprStmt, Return, Assert]
STMT_TYPES = (Block, VarDecl, Assign, If, While, For, ExprStmt, Return, Assert)


# -- top level ---------------------------------------------------------------


@dataclass
class Param:
    name: str
    type: Type


@dataclass
class Field:
    name: str
    type: Type
    init: Optional[Expr] = None
    pos: tuple = _pos()


@dataclass
class Function:
    name: str
    params: list
    ret: Type
    body: Block
    pos: tuple = _pos()

    @property
    def is_test(self) -> bool:
        return self.name.startswith("test_")


@dataclass
class Program:
    fields: list = field(default_factory=list)
    functions: list = field(default_factory=list)

    def function(self, name: str) -> Optional[Function]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None

    @property
    def tests(self) -> list:
        return [fn for fn in self.functions if fn.is_test]


# -- traversal ---------------------------------------------------------------


def child_exprs(e) -> list:
    """Direct sub-expressions of ``e`` in source order."""
    t = type(e)
    if t is Call:
        return e.args
    if t is Binary:
        return [e.left, e.right]
    if t is Unary or t is Unwrap:
        return [e.operand]
    if t is Index:
        return [e.target, e.index]
    if t is ArrayLit:
        return e.items
    return []


def stmt_children(s) -> list:
    """Direct children (expressions and statements) of ``s`` in source order."""
    t = type(s)
    if t is Block:
        return s.stmts
    if t is VarDecl:
        return [s.init]
    if t is Assign:
        return [s.index, s.value] if s.index is not None else [s.value]
    if t is If:
        return [s.cond, s.then] if s.orelse is None else [s.cond, s.then, s.orelse]
    if t is While:
        return [s.cond, s.body]
    if t is For:
        return [s.init, s.cond, s.update, s.body]
    if t is ExprStmt:
        return [s.expr]
    if t is Return:
        return [] if s.value is None else [s.value]
    if t is Assert:
        return [s.cond]
    raise TypeError(f"not a statement: {s!r}")


def walk(node) -> Iterator:
    """Pre-order walk over statements and expressions below ``node`` (inclusive)."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        kids = stmt_children(n) if isinstance(n, STMT_TYPES) else child_exprs(n)
        stack.extend(reversed(kids))


def walk_program(p: Program) -> Iterator:
    """Pre-order walk of the whole program: field initializers, then function bodies."""
    for f in p.fields:
        if f.init is not None:
            yield from walk(f.init)
    for fn in p.functions:
        yield from walk(fn.body)
