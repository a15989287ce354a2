"""The mini-language standing in for app source code: parser, checker, printer, IDs."""

from . import ast
from .ast import Program, Function, Type
from .errors import MiniLangError, ParseError, TypeCheckError
from .ids import NodeKind, assign_ids, clear_ids, id_index, node_count, node_kind
from .parser import parse_syntax
from .printer import expr_text, pretty_print, stmt_text
from .typecheck import typecheck


def parse(source: str) -> Program:
    """Parse and type-check ``source``, then number its nodes.

    Raises ParseError for syntax problems and TypeCheckError for semantic ones;
    both carry ``line`` and ``col``.
    """
    prog = parse_syntax(source)
    typecheck(prog)
    return assign_ids(prog)


__all__ = [
    "ast", "Program", "Function", "Type",
    "MiniLangError", "ParseError", "TypeCheckError",
    "NodeKind", "assign_ids", "clear_ids", "id_index", "node_count", "node_kind",
    "parse", "parse_syntax", "pretty_print", "expr_text", "stmt_text", "typecheck",
]
