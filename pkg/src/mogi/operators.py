"""Variation operators: the two caching transforms and their target finders,
patch mutation, patch crossover, and random edit generation.

Two calls are "the same" for caching when they have the same callee and
token-identical argument expressions. Test functions are never searched or
rewritten; they are the validity oracle.
"""

from __future__ import annotations

import copy
import dataclasses
import random
from dataclasses import dataclass
from typing import Iterator, Optional

from .minilang import ast as A
from .minilang.ids import clear_ids
from .minilang.printer import expr_text
from .patch import CacheClass, CacheMethod, Copy, Delete, Patch, Replace

CACHE_PREFIX = "cachedVar"

_BUILTIN_RETURNS = {"fetch": A.STRING, "str": A.STRING, "len": A.INT, "alloc": A.array_of(A.INT)}


class CacheRejected(Exception):
    """A caching transform does not apply to the requested call."""


@dataclass(frozen=True)
class CacheTarget:
    call: int
    enclosing_function: str
    occurrence_ids: tuple
    scope: str  # "method" | "class"


def call_key(call: A.Call) -> tuple:
    return (call.callee, tuple(expr_text(a) for a in call.args))


def iter_calls(fn: A.Function) -> Iterator[tuple]:
    """Yield ``(call, block, member)`` for each call in ``fn`` in pre-order, where
    ``member`` is the nearest enclosing statement that sits directly in ``block``."""

    def in_block(b: A.Block):
        for s in b.stmts:
            yield from in_member(s, b, s)

    def in_member(s, block, member):
        if type(s) is A.Block:
            yield from in_block(s)
            return
        for child in A.stmt_children(s):
            if type(child) is A.Block:
                yield from in_block(child)
            elif isinstance(child, A.STMT_TYPES):
                yield from in_member(child, block, member)
            else:
                for n in A.walk(child):
                    if type(n) is A.Call:
                        yield n, block, member

    yield from in_block(fn.body)


def _improvable(prog: A.Program):
    return [fn for fn in prog.functions if not fn.is_test]


# -- finders --


def method_cache_targets(p: A.Program) -> list:
    """Per function, calls whose identical twin was already seen earlier."""
    out = []
    for fn in _improvable(p):
        seen: dict = {}
        cachable: dict = {}
        for call, _, _ in iter_calls(fn):
            k = call_key(call)
            if k in seen:
                cachable.setdefault(k, None)
            else:
                seen[k] = []
            seen[k].append(call.id)
        for k in cachable:
            ids = tuple(seen[k])
            out.append(CacheTarget(ids[0], fn.name, ids, "method"))
    return out


def class_cache_targets(p: A.Program) -> list:
    """Every call in every function, grouped program-wide by callee and arguments."""
    groups: dict = {}
    first_fn: dict = {}
    for fn in _improvable(p):
        for call, _, _ in iter_calls(fn):
            k = call_key(call)
            if k not in groups:
                groups[k] = []
                first_fn[k] = fn.name
            groups[k].append(call.id)
    return [CacheTarget(ids[0], first_fn[k], tuple(ids), "class") for k, ids in groups.items()]


# -- transforms --


def _names(prog: A.Program) -> set:
    names = {f.name for f in prog.fields}
    for fn in prog.functions:
        names.add(fn.name)
        names.update(prm.name for prm in fn.params)
        for n in A.walk(fn.body):
            if type(n) is A.VarDecl:
                names.add(n.name)
    return names


def fresh_cache_name(prog: A.Program) -> str:
    used = _names(prog)
    k = 1
    while f"{CACHE_PREFIX}{k}" in used:
        k += 1
    return f"{CACHE_PREFIX}{k}"


def return_type(prog: A.Program, call: A.Call) -> Optional[A.Type]:
    if call.ty is not None:
        return call.ty
    fn = prog.function(call.callee)
    if fn is not None:
        return fn.ret
    return _BUILTIN_RETURNS.get(call.callee)


def _substitute(root, replacements: dict) -> None:
    """Swap expression nodes (keyed by ``id(node)``) for new ones, anywhere below ``root``."""
    stack = [root]
    while stack:
        node = stack.pop()
        for f in dataclasses.fields(node):
            if f.name in ("pos", "ty", "id"):
                continue
            val = getattr(node, f.name)
            if isinstance(val, list):
                for i, item in enumerate(val):
                    if id(item) in replacements:
                        val[i] = replacements[id(item)]
                    elif dataclasses.is_dataclass(item):
                        stack.append(item)
            elif id(val) in replacements:
                setattr(node, f.name, replacements[id(val)])
            elif dataclasses.is_dataclass(val) and not isinstance(val, A.Type):
                stack.append(val)


def _fresh(node):
    dup = copy.deepcopy(node)
    clear_ids(dup)
    return dup


def _insert_before(block: A.Block, member, new_stmt) -> None:
    for i, s in enumerate(block.stmts):
        if s is member:
            block.stmts.insert(i, new_stmt)
            return
    raise LookupError("statement not in block")


def method_cache_inplace(prog: A.Program, fn: A.Function, call: A.Call) -> str:
    """Cache ``call`` in a local declared just before its first occurrence in ``fn``."""
    key = call_key(call)
    occ = [(c, b, m) for c, b, m in iter_calls(fn) if call_key(c) == key]
    if len(occ) < 2:
        raise CacheRejected("in-method caching needs at least two occurrences")
    ty = return_type(prog, call)
    if ty is None or ty == A.VOID:
        raise CacheRejected("call has no value to cache")
    name = fresh_cache_name(prog)
    first_call, block, member = occ[0]
    decl = A.VarDecl(name, ty, _fresh(first_call))
    _substitute(fn.body, {id(c): A.Var(name) for c, _, _ in occ})
    _insert_before(block, member, decl)
    return name


def class_cache_inplace(prog: A.Program, call: A.Call) -> str:
    """Cache ``call`` in a new optional field filled behind a null guard."""
    key = call_key(call)
    for f in prog.fields:
        if f.init is not None and any(n is call for n in A.walk(f.init)):
            raise CacheRejected("call sits in a field initializer")
    ty = return_type(prog, call)
    if ty is None or ty == A.VOID or ty.is_optional:
        raise CacheRejected("call has no value that fits an optional field")
    occ = []
    for fn in _improvable(prog):
        occ.extend((fn, c, b, m) for c, b, m in iter_calls(fn) if call_key(c) == key)
    if not any(c is call for _, c, _, _ in occ):
        raise CacheRejected("call is not in an improvable function")
    name = fresh_cache_name(prog)
    template = _fresh(call)
    guarded = []
    for fn, c, block, member in occ:
        _substitute(fn.body, {id(c): A.Unwrap(A.Var(name))})
        if not any(m is member for _, m in guarded):
            guarded.append((block, member))
    for block, member in guarded:
        guard = A.If(
            A.Binary("==", A.Var(name), A.NullLit()),
            A.Block([A.Assign(name, None, copy.deepcopy(template))]),
        )
        _insert_before(block, member, guard)
    prog.fields.append(A.Field(name, A.optional_of(ty), A.NullLit()))
    return name


def _find_call(prog: A.Program, call_id: int):
    for fn in prog.functions:
        for c, _, _ in iter_calls(fn):
            if c.id == call_id:
                return fn, c
    raise CacheRejected(f"no call with id {call_id}")


def apply_method_cache(p: A.Program, t: CacheTarget) -> A.Program:
    """Return a copy of ``p`` with ``t`` cached in a local (raises CacheRejected)."""
    if t.scope != "method" or len(t.occurrence_ids) < 2:
        raise CacheRejected("not an in-method target with two or more occurrences")
    work = copy.deepcopy(p)
    fn, call = _find_call(work, t.call)
    method_cache_inplace(work, fn, call)
    return work


def apply_class_cache(p: A.Program, t: CacheTarget) -> A.Program:
    """Return a copy of ``p`` with ``t`` cached in a guarded field (raises CacheRejected)."""
    if t.scope != "class":
        raise CacheRejected("not a class-scope target")
    work = copy.deepcopy(p)
    _, call = _find_call(work, t.call)
    class_cache_inplace(work, call)
    return work


# -- random edits, mutation, crossover --


KINDS = ("delete", "copy", "replace", "cache_method", "cache_class")


class EditSpace:
    """Every valid edit target of one (original) program, precomputed."""

    def __init__(self, p: A.Program):
        members, slots = [], []
        for fn in _improvable(p):
            for n in A.walk(fn.body):
                if type(n) is A.Block:
                    slots.extend((n.id, i) for i in range(len(n.stmts) + 1))
                    members.extend(s.id for s in n.stmts)
        self.members = members
        self.slots = slots
        self.method_calls = [t.call for t in method_cache_targets(p) if self._cachable(p, t, False)]
        self.class_calls = [t.call for t in class_cache_targets(p) if self._cachable(p, t, True)]

    @staticmethod
    def _cachable(p, t: CacheTarget, optional_field: bool) -> bool:
        call = next(c for fn in p.functions for c, _, _ in iter_calls(fn) if c.id == t.call)
        ty = return_type(p, call)
        if ty is None or ty == A.VOID:
            return False
        return not (optional_field and ty.is_optional)

    def kinds(self) -> list:
        avail = []
        if self.members:
            avail += ["delete", "replace"]
            if self.slots:
                avail.append("copy")
        if self.method_calls:
            avail.append("cache_method")
        if self.class_calls:
            avail.append("cache_class")
        return [k for k in KINDS if k in avail]

    def draw(self, rng: random.Random):
        kinds = self.kinds()
        if not kinds:
            raise ValueError("program has no editable statements")
        kind = rng.choice(kinds)
        if kind == "delete":
            return Delete(rng.choice(self.members))
        if kind == "copy":
            src = rng.choice(self.members)
            block, idx = rng.choice(self.slots)
            return Copy(src, block, idx)
        if kind == "replace":
            return Replace(rng.choice(self.members), rng.choice(self.members))
        if kind == "cache_method":
            return CacheMethod(rng.choice(self.method_calls))
        return CacheClass(rng.choice(self.class_calls))


def random_edit(p: A.Program, rng: random.Random, space: Optional[EditSpace] = None):
    return (space or EditSpace(p)).draw(rng)


def mutate(patch: Patch, p: A.Program, rng: random.Random, space: Optional[EditSpace] = None) -> Patch:
    """Add a random edit or remove an existing one, each with probability 1/2."""
    if not patch.edits or rng.random() < 0.5:
        return Patch(patch.edits + (random_edit(p, rng, space),), patch.file)
    i = rng.randrange(len(patch.edits))
    return Patch(patch.edits[:i] + patch.edits[i + 1:], patch.file)


def crossover(a: Patch, b: Patch) -> Patch:
    return Patch(a.edits + b.edits, a.file)
