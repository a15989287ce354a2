"""Patches: ordered edit lists with a text format and sequential application.

Text format, one edit per line::

    DELETE <file>:<id>
    COPY <file>:<src> -> <file>:<block>:<index>
    REPLACE <file>:<src> -> <file>:<target>
    CACHE_METHOD <file>:<call>
    CACHE_CLASS <file>:<call>

All IDs refer to the original program. An edit whose node is gone by the time
it is applied (or that names the wrong kind of node) is recorded as a no-op.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .minilang import ast as A
from .minilang.errors import TypeCheckError
from .minilang.ids import clear_ids
from .minilang.typecheck import typecheck

DEFAULT_FILE = "program.mini"


@dataclass(frozen=True)
class Delete:
    target: int


@dataclass(frozen=True)
class Copy:
    source: int
    dest_block: int
    index: int


@dataclass(frozen=True)
class Replace:
    source: int
    target: int


@dataclass(frozen=True)
class CacheMethod:
    call: int


@dataclass(frozen=True)
class CacheClass:
    call: int


Edit = Union[Delete, Copy, Replace, CacheMethod, CacheClass]
EDIT_KINDS = (Delete, Copy, Replace, CacheMethod, CacheClass)


@dataclass(frozen=True)
class Patch:
    edits: tuple = ()
    file: str = DEFAULT_FILE

    def __post_init__(self):
        if not isinstance(self.edits, tuple):
            object.__setattr__(self, "edits", tuple(self.edits))

    def __len__(self) -> int:
        return len(self.edits)

    def __iter__(self):
        return iter(self.edits)

    def key(self) -> str:
        return serialize(self)


# -- text format --


class PatchSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


def edit_text(e: Edit, file: str = DEFAULT_FILE) -> str:
    t = type(e)
    if t is Delete:
        return f"DELETE {file}:{e.target}"
    if t is Copy:
        return f"COPY {file}:{e.source} -> {file}:{e.dest_block}:{e.index}"
    if t is Replace:
        return f"REPLACE {file}:{e.source} -> {file}:{e.target}"
    if t is CacheMethod:
        return f"CACHE_METHOD {file}:{e.call}"
    if t is CacheClass:
        return f"CACHE_CLASS {file}:{e.call}"
    raise TypeError(f"not an edit: {e!r}")


def serialize(patch: Patch) -> str:
    return "\n".join(edit_text(e, patch.file) for e in patch.edits)


_FILE = r"(\S+?)"
_N = r"(\d+)"
_LINE_RES = {
    "DELETE": re.compile(rf"DELETE {_FILE}:{_N}"),
    "COPY": re.compile(rf"COPY {_FILE}:{_N} -> {_FILE}:{_N}:{_N}"),
    "REPLACE": re.compile(rf"REPLACE {_FILE}:{_N} -> {_FILE}:{_N}"),
    "CACHE_METHOD": re.compile(rf"CACHE_METHOD {_FILE}:{_N}"),
    "CACHE_CLASS": re.compile(rf"CACHE_CLASS {_FILE}:{_N}"),
}


def parse_patch(text: str) -> Patch:
    """Inverse of :func:`serialize`. Blank lines and ``#`` comment lines are skipped."""
    edits = []
    file: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        op = line.split(" ", 1)[0]
        rx = _LINE_RES.get(op)
        m = rx.fullmatch(line) if rx else None
        if m is None:
            raise PatchSyntaxError(f"malformed edit {line!r}", lineno)
        g = m.groups()
        if op == "DELETE":
            files, e = [g[0]], Delete(int(g[1]))
        elif op == "COPY":
            files, e = [g[0], g[2]], Copy(int(g[1]), int(g[3]), int(g[4]))
        elif op == "REPLACE":
            files, e = [g[0], g[2]], Replace(int(g[1]), int(g[3]))
        elif op == "CACHE_METHOD":
            files, e = [g[0]], CacheMethod(int(g[1]))
        else:
            files, e = [g[0]], CacheClass(int(g[1]))
        for f in files:
            if file is None:
                file = f
            elif f != file:
                raise PatchSyntaxError(f"edit refers to {f!r} but patch targets {file!r}", lineno)
        edits.append(e)
    return Patch(tuple(edits), file or DEFAULT_FILE)


def read_patch(path) -> Patch:
    with open(path, encoding="utf-8") as fh:
        return parse_patch(fh.read())


def write_patch(patch: Patch, path) -> None:
    text = serialize(patch)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n" if text else "")


# -- application --


@dataclass
class ApplyReport:
    program: Optional[A.Program]
    noop_edits: list = field(default_factory=list)
    validity_stage: str = "typechecked"  # "parsed" | "typechecked" | "failed"
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.validity_stage != "failed"


class Locator:
    """Where each addressable node currently sits in a (working) program.

    Only nodes in non-test functions are addressable by edits.
    """

    def __init__(self, prog: A.Program):
        self.members: dict = {}  # stmt id -> (block, stmt)
        self.blocks: dict = {}  # block id -> block
        self.calls: dict = {}  # call id -> (call, function)
        for fn in prog.functions:
            if fn.is_test:
                continue
            self._scan_block(fn.body, fn)

    def _scan_block(self, b: A.Block, fn) -> None:
        if b.id is not None:
            self.blocks[b.id] = b
        for s in b.stmts:
            if s.id is not None:
                self.members[s.id] = (b, s)
            self._scan_stmt(s, fn)

    def _scan_stmt(self, s, fn) -> None:
        if type(s) is A.Block:
            self._scan_block(s, fn)
            return
        for child in A.stmt_children(s):
            if type(child) is A.Block:
                self._scan_block(child, fn)
            elif isinstance(child, A.STMT_TYPES):
                self._scan_stmt(child, fn)
            else:
                for n in A.walk(child):
                    if type(n) is A.Call and n.id is not None:
                        self.calls[n.id] = (n, fn)


def _fresh_copy(node):
    dup = copy.deepcopy(node)
    clear_ids(dup)
    return dup


def _index_of(block: A.Block, stmt) -> int:
    for i, s in enumerate(block.stmts):
        if s is stmt:
            return i
    raise LookupError("statement not in block")


def apply_edit_inplace(prog: A.Program, e: Edit) -> bool:
    """Apply one edit to ``prog`` in place. Returns False if it was a no-op."""
    from . import operators

    loc = Locator(prog)
    t = type(e)
    if t is Delete:
        hit = loc.members.get(e.target)
        if hit is None:
            return False
        block, stmt = hit
        del block.stmts[_index_of(block, stmt)]
        return True
    if t is Copy:
        src = loc.members.get(e.source)
        dest = loc.blocks.get(e.dest_block)
        if src is None or dest is None:
            return False
        idx = min(max(e.index, 0), len(dest.stmts))
        dest.stmts.insert(idx, _fresh_copy(src[1]))
        return True
    if t is Replace:
        src = loc.members.get(e.source)
        tgt = loc.members.get(e.target)
        if src is None or tgt is None:
            return False
        dup = _fresh_copy(src[1])
        block, stmt = tgt
        block.stmts[_index_of(block, stmt)] = dup
        return True
    if t is CacheMethod or t is CacheClass:
        hit = loc.calls.get(e.call)
        if hit is None:
            return False
        call, fn = hit
        try:
            if t is CacheMethod:
                operators.method_cache_inplace(prog, fn, call)
            else:
                operators.class_cache_inplace(prog, call)
        except operators.CacheRejected:
            return False
        return True
    raise TypeError(f"not an edit: {e!r}")


def apply(patch: Patch, p: A.Program) -> ApplyReport:
    """Apply ``patch`` to a working copy of ``p``; the input is left untouched."""
    work = copy.deepcopy(p)
    noops = []
    for i, e in enumerate(patch.edits):
        if not apply_edit_inplace(work, e):
            noops.append(i)
    try:
        typecheck(work)
    except TypeCheckError as err:
        return ApplyReport(work, noops, "failed", str(err))
    return ApplyReport(work, noops, "typechecked")
