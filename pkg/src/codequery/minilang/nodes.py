"""AST node structure, node identity, and the program index.

Node ids are hierarchical paths: declarations get their dot-qualified name
(``a.P.rest``), everything else extends the nearest declaration with
role steps and zero-based ordinals (``a.P.rest/body[2]/then[0]``).
Reparsing unchanged text yields identical ids.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

from ..errors import NotADeclaration, UnknownNodeId


class NodeKind(str, Enum):
    Module = "Module"
    NameImport = "NameImport"
    Class = "Class"
    Method = "Method"
    Parameter = "Parameter"
    Block = "Block"
    DeclarationStatement = "DeclarationStatement"
    ExpressionStatement = "ExpressionStatement"
    IfStatement = "IfStatement"
    LoopStatement = "LoopStatement"
    ReturnStatement = "ReturnStatement"
    PrintStatement = "PrintStatement"
    CallExpression = "CallExpression"
    ReferenceExpression = "ReferenceExpression"
    BinaryExpression = "BinaryExpression"
    IntLiteral = "IntLiteral"
    StringLiteral = "StringLiteral"


STATEMENT_KINDS = frozenset(
    {
        NodeKind.DeclarationStatement,
        NodeKind.ExpressionStatement,
        NodeKind.IfStatement,
        NodeKind.LoopStatement,
        NodeKind.ReturnStatement,
        NodeKind.PrintStatement,
    }
)

EXPRESSION_KINDS = frozenset(
    {
        NodeKind.CallExpression,
        NodeKind.ReferenceExpression,
        NodeKind.BinaryExpression,
        NodeKind.IntLiteral,
        NodeKind.StringLiteral,
    }
)

# Abstract groups accepted wherever a kind name is expected.
KIND_GROUPS = {
    "Statement": STATEMENT_KINDS,
    "Expression": EXPRESSION_KINDS,
}

# Kinds whose ids are their qualified names.
DECLARATION_KINDS = frozenset(
    {NodeKind.Module, NodeKind.Class, NodeKind.Method, NodeKind.Parameter}
)


def kind_matches(node_kind: NodeKind, wanted: str) -> bool:
    if wanted in KIND_GROUPS:
        return node_kind in KIND_GROUPS[wanted]
    return node_kind.value == wanted


def valid_kind_name(name: str) -> bool:
    return name in KIND_GROUPS or name in NodeKind.__members__


@dataclass(frozen=True)
class Span:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def contains_pos(self, line: int, col: int) -> bool:
        if (line, col) < (self.start_line, self.start_col):
            return False
        return (line, col) <= (self.end_line, self.end_col)

    def overlaps_lines(self, start: int, end: int) -> bool:
        return self.start_line <= end and start <= self.end_line


@dataclass(eq=False)
class Node:
    """One AST node.  Treated as immutable once a Program is built."""

    kind: NodeKind
    children: list["Node"] = field(default_factory=list)
    roles: list[str] = field(default_factory=list)
    name: Optional[str] = None
    text: Optional[str] = None  # literal value or binary operator
    span: Optional[Span] = None
    id: Optional[str] = None

    def child(self, role: str, index: int = 0) -> Optional["Node"]:
        k = 0
        for c, r in zip(self.children, self.roles):
            if r == role:
                if k == index:
                    return c
                k += 1
        return None

    def children_with_role(self, role: str) -> list["Node"]:
        return [c for c, r in zip(self.children, self.roles) if r == role]

    def walk(self) -> Iterator["Node"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def __repr__(self):
        return f"<{self.kind.value} {self.name or self.id or ''}>"


def same_tree(a: Node, b: Node) -> bool:
    """Structural equality ignoring spans and ids."""
    if a.kind != b.kind or a.name != b.name or a.text != b.text:
        return False
    if a.roles != b.roles or len(a.children) != len(b.children):
        return False
    return all(same_tree(x, y) for x, y in zip(a.children, b.children))


_STEP = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]")


@dataclass
class Program:
    """A parsed program: file roots plus id and parent indexes."""

    roots: list[Node]
    sources: dict  # path -> text
    index: dict = field(default_factory=dict)  # NodeId -> Node
    parents: dict = field(default_factory=dict)  # NodeId -> NodeId | None

    @staticmethod
    def build(roots: list[Node], sources: dict) -> "Program":
        p = Program(roots=roots, sources=sources)
        for root in roots:
            _assign_ids(root, None, p)
        return p

    def resolve(self, node_id: str) -> Node:
        node = self.index.get(node_id)
        if node is None:
            raise UnknownNodeId(f"no node with id {node_id!r}")
        return node

    def parent(self, node: Node) -> Optional[Node]:
        pid = self.parents.get(node.id)
        return self.index[pid] if pid is not None else None

    def enclosing(self, node: Node, kind: NodeKind) -> Optional[Node]:
        cur = self.parent(node)
        while cur is not None:
            if cur.kind == kind:
                return cur
            cur = self.parent(cur)
        return None

    def nodes_of_kind(self, kind_name: str, scope: Optional[Node] = None) -> list[Node]:
        roots = [scope] if scope is not None else self.roots
        out = []
        for r in roots:
            for n in r.walk():
                if kind_matches(n.kind, kind_name):
                    out.append(n)
        return out

    def node_at(self, file: str, line: int, col: int) -> Optional[Node]:
        """Innermost node whose span contains the position."""
        best = None
        for root in self.roots:
            if root.span.file != file:
                continue
            node = root
            if not node.span.contains_pos(line, col):
                continue
            while True:
                inner = None
                for c in node.children:
                    if c.span and c.span.contains_pos(line, col):
                        inner = c
                        break
                if inner is None:
                    break
                node = inner
            best = node
        return best

    def file_lines(self, path: str) -> list[str]:
        return self.sources[path].split("\n")

    def qualified_name(self, node: Node) -> str:
        if node.kind not in DECLARATION_KINDS:
            raise NotADeclaration(f"{node.kind.value} has no qualified name")
        parts = [node.name]
        cur = self.parent(node)
        while cur is not None:
            if cur.kind in DECLARATION_KINDS:
                parts.append(cur.name)
            cur = self.parent(cur)
        return ".".join(reversed(parts))


def _assign_ids(node: Node, parent: Optional[Node], program: Program) -> None:
    if parent is None:
        node.id = node.name  # file root is a module
    elif node.kind in DECLARATION_KINDS:
        node.id = f"{parent.id}.{node.name}"
    else:
        # Ordinal counts preceding siblings sharing this node's role.
        role = parent.roles[parent.children.index(node)]
        ordinal = 0
        for c, r in zip(parent.children, parent.roles):
            if c is node:
                break
            if r == role:
                ordinal += 1
        node.id = f"{parent.id}/{role}[{ordinal}]"
    program.index[node.id] = node
    program.parents[node.id] = parent.id if parent is not None else None
    for c in node.children:
        _assign_ids(c, node, program)
