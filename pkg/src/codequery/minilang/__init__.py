"""The fixture language queries operate on: parser, AST, printer, node ids."""

from .nodes import (  # noqa: F401
    DECLARATION_KINDS,
    EXPRESSION_KINDS,
    KIND_GROUPS,
    STATEMENT_KINDS,
    Node,
    NodeKind,
    Program,
    Span,
    kind_matches,
    same_tree,
)
from .parser import parse_program, parse_source, parse_statement  # noqa: F401
from .printer import pretty_print, print_node  # noqa: F401
from .build import (  # noqa: F401
    insert_statements,
    make_int,
    make_print_stmt,
    make_ref,
    make_string,
)
