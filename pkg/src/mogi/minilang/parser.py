"""Lexer and recursive-descent parser. The grammar is in docs/grammar.ebnf."""

from __future__ import annotations

import re
from typing import NamedTuple

from . import ast as A
from .errors import ParseError

KEYWORDS = {
    "var", "fn", "if", "else", "while", "for", "return", "assert",
    "true", "false", "null",
}
TYPE_NAMES = {"int", "bool", "string", "array", "optional"}

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>->|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){}\[\],;:])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class Token(NamedTuple):
    kind: str  # "int", "ident", "kw", "string", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unescape(lit: str, line: int, col: int) -> str:
    out = []
    i = 1
    while i < len(lit) - 1:
        c = lit[i]
        if c == "\\":
            nxt = lit[i + 1]
            if nxt not in _ESCAPES:
                raise ParseError(f"bad escape \\{nxt}", line, col + i)
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


# binary operator precedence, loosest first
PRECEDENCE = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]
BINARY_LEVEL = {op: i for i, ops in enumerate(PRECEDENCE) for op in ops}


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    # -- token helpers --

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw", "ident")

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in TYPE_NAMES:
            self.error("expected identifier")
        return self.advance()

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", t.line, t.col)

    # -- top level --

    def program(self) -> A.Program:
        prog = A.Program()
        while self.tok.kind != "eof":
            if self.at("var"):
                prog.fields.append(self.field_decl())
            elif self.at("fn"):
                prog.functions.append(self.function())
            else:
                self.error("expected 'var' or 'fn'")
        return prog

    def field_decl(self) -> A.Field:
        start = self.expect("var")
        name = self.expect_ident().text
        self.expect(":")
        ty = self.type_()
        init = None
        if self.at("="):
            self.advance()
            init = self.expr()
        self.expect(";")
        return A.Field(name, ty, init, pos=(start.line, start.col))

    def function(self) -> A.Function:
        start = self.expect("fn")
        name = self.expect_ident().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pname = self.expect_ident().text
                self.expect(":")
                params.append(A.Param(pname, self.type_()))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        ret = A.VOID
        if self.at("->"):
            self.advance()
            ret = self.type_()
        body = self.block()
        return A.Function(name, params, ret, body, pos=(start.line, start.col))

    def type_(self) -> A.Type:
        t = self.tok
        if t.kind != "ident" or t.text not in TYPE_NAMES:
            self.error("expected type")
        self.advance()
        if t.text in ("array", "optional"):
            self.expect("<")
            inner = self.type_()
            self.expect(">")
            return A.Type(t.text, inner)
        return A.Type(t.text)

    # -- statements --

    def block(self) -> A.Block:
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            stmts.append(self.statement())
        self.advance()
        return A.Block(stmts, pos=(start.line, start.col))

    def statement(self):
        t = self.tok
        pos = (t.line, t.col)
        if self.at("{"):
            return self.block()
        if self.at("var"):
            s = self.var_decl()
            self.expect(";")
            return s
        if self.at("if"):
            return self.if_stmt()
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return A.While(cond, self.block(), pos=pos)
        if self.at("for"):
            self.advance()
            self.expect("(")
            init = self.var_decl() if self.at("var") else self.assignment()
            self.expect(";")
            cond = self.expr()
            self.expect(";")
            update = self.assignment()
            self.expect(")")
            return A.For(init, cond, update, self.block(), pos=pos)
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return A.Return(value, pos=pos)
        if self.at("assert"):
            self.advance()
            cond = self.expr()
            self.expect(";")
            return A.Assert(cond, pos=pos)
        s = self.assign_or_expr()
        self.expect(";")
        return s

    def var_decl(self) -> A.VarDecl:
        start = self.expect("var")
        name = self.expect_ident().text
        self.expect(":")
        ty = self.type_()
        self.expect("=")
        init = self.expr()
        return A.VarDecl(name, ty, init, pos=(start.line, start.col))

    def if_stmt(self) -> A.If:
        start = self.expect("if")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.block()
        orelse = None
        if self.at("else"):
            self.advance()
            if self.at("if"):
                t = self.tok
                orelse = A.Block([self.if_stmt()], pos=(t.line, t.col))
            else:
                orelse = self.block()
        return A.If(cond, then, orelse, pos=(start.line, start.col))

    def assignment(self) -> A.Assign:
        s = self.assign_or_expr()
        if not isinstance(s, A.Assign):
            raise ParseError("expected assignment", *s.pos)
        return s

    def assign_or_expr(self):
        t = self.tok
        pos = (t.line, t.col)
        e = self.expr()
        if self.at("="):
            self.advance()
            value = self.expr()
            if isinstance(e, A.Var):
                return A.Assign(e.name, None, value, pos=pos)
            if isinstance(e, A.Index) and isinstance(e.target, A.Var):
                return A.Assign(e.target.name, e.index, value, pos=pos)
            raise ParseError("invalid assignment target", *pos)
        return A.ExprStmt(e, pos=pos)

    # -- expressions --

    def expr(self, level: int = 0):
        if level == len(PRECEDENCE):
            return self.unary()
        left = self.expr(level + 1)
        ops = PRECEDENCE[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            t = self.advance()
            right = self.expr(level + 1)
            left = A.Binary(t.text, left, right, pos=(t.line, t.col))
        return left

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in ("-", "!"):
            self.advance()
            return A.Unary(t.text, self.unary(), pos=(t.line, t.col))
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while True:
            t = self.tok
            if self.at("["):
                self.advance()
                idx = self.expr()
                self.expect("]")
                e = A.Index(e, idx, pos=(t.line, t.col))
            elif self.at("!"):
                self.advance()
                e = A.Unwrap(e, pos=(t.line, t.col))
            else:
                return e

    def primary(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "int":
            self.advance()
            v = int(t.text)
            if v > INT_MAX:
                raise ParseError("integer literal out of range", *pos)
            return A.IntLit(v, pos=pos)
        if t.kind == "string":
            self.advance()
            return A.StrLit(_unescape(t.text, t.line, t.col), pos=pos)
        if t.kind == "kw" and t.text in ("true", "false"):
            self.advance()
            return A.BoolLit(t.text == "true", pos=pos)
        if t.kind == "kw" and t.text == "null":
            self.advance()
            return A.NullLit(pos=pos)
        if t.kind == "ident" and t.text not in TYPE_NAMES:
            self.advance()
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if not self.at(","):
                            break
                        self.advance()
                self.expect(")")
                return A.Call(t.text, args, pos=pos)
            return A.Var(t.text, pos=pos)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("["):
            self.advance()
            items = []
            if not self.at("]"):
                while True:
                    items.append(self.expr())
                    if not self.at(","):
                        break
                    self.advance()
            self.expect("]")
            return A.ArrayLit(items, pos=pos)
        self.error("expected expression")


def parse_syntax(source: str) -> A.Program:
    """Parse without type checking or ID assignment."""
    return Parser(source).program()
