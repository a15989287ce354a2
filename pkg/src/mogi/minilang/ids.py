"""Node-ID assignment and lookup.

IDs are dense from 0 and assigned in one pre-order walk: field initializers
first, then each function body. Statements (blocks included) and call
expressions receive IDs; other expressions do not.
"""

from __future__ import annotations

import enum

from . import ast as A


class NodeKind(str, enum.Enum):
    STATEMENT = "statement"
    CALL = "call-expression"
    ABSENT = "absent"


def _numbered(p: A.Program):
    for n in A.walk_program(p):
        if isinstance(n, A.STMT_TYPES) or type(n) is A.Call:
            yield n


def assign_ids(p: A.Program) -> A.Program:
    """Renumber every statement and call in ``p`` in place; returns ``p``."""
    for i, n in enumerate(_numbered(p)):
        n.id = i
    return p


def clear_ids(node) -> None:
    """Set ``id=None`` on ``node`` and everything below it (fresh, unaddressable copies)."""
    for n in A.walk(node):
        if hasattr(n, "id"):
            n.id = None


def id_index(p: A.Program) -> dict:
    """Map NodeId -> node for every addressable node currently in ``p``."""
    return {n.id: n for n in _numbered(p) if n.id is not None}


def node_kind(p: A.Program, node_id: int) -> NodeKind:
    n = id_index(p).get(node_id)
    if n is None:
        return NodeKind.ABSENT
    return NodeKind.CALL if type(n) is A.Call else NodeKind.STATEMENT


def node_count(p: A.Program) -> int:
    return sum(1 for _ in _numbered(p))
