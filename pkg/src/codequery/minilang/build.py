"""Programmatic tree construction and structural edits.

Edits never mutate an indexed Program in place: the edited tree is
pretty-printed and reparsed, so spans and node ids of the result are
always consistent.
"""

from __future__ import annotations

import copy

from ..errors import NotAMethod
from .nodes import Node, NodeKind, Program, STATEMENT_KINDS
from .parser import parse_program
from .printer import pretty_print


def make_int(value: int) -> Node:
    return Node(NodeKind.IntLiteral, text=str(value))


def make_string(value: str) -> Node:
    return Node(NodeKind.StringLiteral, text=value)


def make_ref(name: str) -> Node:
    return Node(NodeKind.ReferenceExpression, name=name)


def make_print_stmt(args) -> Node:
    args = list(args)
    return Node(NodeKind.PrintStatement, args, ["arg"] * len(args))


def insert_statements(program: Program, method: Node, stmts) -> Program:
    """New Program with stmts prepended to the method's body."""
    if method.kind != NodeKind.Method:
        raise NotAMethod(f"{method.id} is not a method")
    stmts = list(stmts)
    for s in stmts:
        if s.kind not in STATEMENT_KINDS:
            raise NotAMethod(f"cannot insert a {s.kind.value} into a method body")
    edited = {method.id: stmts}
    return apply_front_insertions(program, edited)


def apply_front_insertions(program: Program, insertions: dict) -> Program:
    """Prepend statements to several method bodies in one rebuild.

    insertions maps method NodeId -> list of statement Nodes (in order).
    """
    new_roots = []
    for root in program.roots:
        new_roots.append(_rebuild(root, insertions))
    texts = pretty_print(Program(new_roots, dict(program.sources)))
    return parse_program(texts)


def _rebuild(node: Node, insertions: dict) -> Node:
    if node.id in insertions and node.kind == NodeKind.Method:
        stmts = [copy.deepcopy(s) for s in insertions[node.id]]
        params = node.children_with_role("param")
        body = node.children_with_role("body")
        children = params + stmts + body
        roles = ["param"] * len(params) + ["body"] * (len(stmts) + len(body))
        return Node(NodeKind.Method, children, roles, name=node.name, span=node.span)
    if not node.children:
        return node
    children = [_rebuild(c, insertions) for c in node.children]
    return Node(
        node.kind, children, list(node.roles), name=node.name, text=node.text, span=node.span
    )
