"""Recursive-descent parser for the fixture language.

One top-level module per file.  The grammar also ships in prose form as
docs/grammar.ebnf.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from .nodes import Node, NodeKind, Program, Span

KEYWORDS = {"module", "class", "import", "var", "if", "else", "while", "return", "print"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|[+\-*/<>=(){};,.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # string | int | ident | keyword | op | eof
    value: str
    line: int
    col: int

    @property
    def end_col(self) -> int:
        return self.col + max(len(self.value), 1) - 1


def tokenize(text: str, file: str) -> list[Token]:
    tokens = []
    pos = 0
    line = 1
    col = 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", file, line, col)
        value = m.group()
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            if kind == "ident" and value in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.tokens = tokenize(text, file)
        self.i = 0

    # --- token plumbing ---

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (value is None or t.value == value)

    def expect(self, kind: str, value: str | None = None) -> Token:
        t = self.peek()
        if not self.at(kind, value):
            wanted = value or kind
            raise ParseError(
                f"expected {wanted!r}, found {t.value or t.kind!r}", self.file, t.line, t.col
            )
        return self.next()

    def error(self, message: str) -> ParseError:
        t = self.peek()
        return ParseError(message, self.file, t.line, t.col)

    def span_from(self, start: Token, end: Token) -> Span:
        return Span(self.file, start.line, start.col, end.line, end.col)

    def last(self) -> Token:
        return self.tokens[self.i - 1]

    # --- grammar ---

    def parse_file(self) -> Node:
        root = self.parse_module()
        if not self.at("eof"):
            raise self.error("expected end of file (one top-level module per file)")
        return root

    def parse_module(self) -> Node:
        start = self.expect("keyword", "module")
        name = self.expect("ident").value
        self.expect("op", "{")
        children, roles = [], []
        while not self.at("op", "}"):
            if self.at("keyword", "module"):
                children.append(self.parse_module())
            elif self.at("keyword", "class"):
                children.append(self.parse_class())
            else:
                raise self.error("expected 'module' or 'class'")
            roles.append("member")
        end = self.expect("op", "}")
        return Node(
            NodeKind.Module, children, roles, name=name, span=self.span_from(start, end)
        )

    def parse_class(self) -> Node:
        start = self.expect("keyword", "class")
        name = self.expect("ident").value
        self.expect("op", "{")
        children, roles = [], []
        while not self.at("op", "}"):
            if self.at("keyword", "import"):
                children.append(self.parse_import())
                roles.append("import")
            elif self.at("ident"):
                children.append(self.parse_method())
                roles.append("member")
            else:
                raise self.error("expected 'import' or a method")
        end = self.expect("op", "}")
        return Node(
            NodeKind.Class, children, roles, name=name, span=self.span_from(start, end)
        )

    def parse_import(self) -> Node:
        start = self.expect("keyword", "import")
        ref = self.parse_reference_chain()
        end = self.expect("op", ";")
        dotted = dotted_name(ref)
        return Node(
            NodeKind.NameImport,
            [ref],
            ["name"],
            name=dotted,
            span=self.span_from(start, end),
        )

    def parse_method(self) -> Node:
        start = self.expect("ident")
        name = start.value
        self.expect("op", "(")
        children, roles = [], []
        if not self.at("op", ")"):
            while True:
                p = self.expect("ident")
                children.append(
                    Node(
                        NodeKind.Parameter,
                        name=p.value,
                        span=self.span_from(p, p),
                    )
                )
                roles.append("param")
                if self.at("op", ","):
                    self.next()
                    continue
                break
        self.expect("op", ")")
        self.expect("op", "{")
        while not self.at("op", "}"):
            children.append(self.parse_statement())
            roles.append("body")
        end = self.expect("op", "}")
        return Node(
            NodeKind.Method, children, roles, name=name, span=self.span_from(start, end)
        )

    def parse_block(self) -> Node:
        start = self.expect("op", "{")
        children, roles = [], []
        while not self.at("op", "}"):
            children.append(self.parse_statement())
            roles.append("body")
        end = self.expect("op", "}")
        return Node(NodeKind.Block, children, roles, span=self.span_from(start, end))

    def parse_statement(self) -> Node:
        t = self.peek()
        if t.kind == "keyword":
            if t.value == "var":
                return self.parse_var()
            if t.value == "if":
                return self.parse_if()
            if t.value == "while":
                return self.parse_while()
            if t.value == "return":
                return self.parse_return()
            if t.value == "print":
                return self.parse_print()
            raise self.error(f"unexpected keyword {t.value!r}")
        return self.parse_expression_statement()

    def parse_var(self) -> Node:
        start = self.expect("keyword", "var")
        name = self.expect("ident").value
        self.expect("op", "=")
        init = self.parse_expression()
        end = self.expect("op", ";")
        return Node(
            NodeKind.DeclarationStatement,
            [init],
            ["init"],
            name=name,
            span=self.span_from(start, end),
        )

    def parse_if(self) -> Node:
        start = self.expect("keyword", "if")
        self.expect("op", "(")
        cond = self.parse_expression()
        self.expect("op", ")")
        then = self.parse_block()
        children = [cond, then]
        roles = ["cond", "then"]
        if self.at("keyword", "else"):
            self.next()
            children.append(self.parse_block())
            roles.append("else")
        end = self.last()
        return Node(
            NodeKind.IfStatement, children, roles, span=self.span_from(start, end)
        )

    def parse_while(self) -> Node:
        start = self.expect("keyword", "while")
        self.expect("op", "(")
        cond = self.parse_expression()
        self.expect("op", ")")
        body = self.parse_block()
        end = self.last()
        return Node(
            NodeKind.LoopStatement,
            [cond, body],
            ["cond", "body"],
            span=self.span_from(start, end),
        )

    def parse_return(self) -> Node:
        start = self.expect("keyword", "return")
        children, roles = [], []
        if not self.at("op", ";"):
            children.append(self.parse_expression())
            roles.append("value")
        end = self.expect("op", ";")
        return Node(
            NodeKind.ReturnStatement, children, roles, span=self.span_from(start, end)
        )

    def parse_print(self) -> Node:
        start = self.expect("keyword", "print")
        self.expect("op", "(")
        children, roles = [], []
        if not self.at("op", ")"):
            while True:
                children.append(self.parse_expression())
                roles.append("arg")
                if self.at("op", ","):
                    self.next()
                    continue
                break
        self.expect("op", ")")
        end = self.expect("op", ";")
        return Node(
            NodeKind.PrintStatement, children, roles, span=self.span_from(start, end)
        )

    def parse_expression_statement(self) -> Node:
        start = self.peek()
        expr = self.parse_expression()
        if self.at("op", "=") and expr.kind == NodeKind.ReferenceExpression:
            self.next()
            rhs = self.parse_expression()
            last = self.last()
            expr = Node(
                NodeKind.BinaryExpression,
                [expr, rhs],
                ["lhs", "rhs"],
                text="=",
                span=self.span_from(start, last),
            )
        end = self.expect("op", ";")
        return Node(
            NodeKind.ExpressionStatement,
            [expr],
            ["expr"],
            span=self.span_from(start, end),
        )

    # Precedence: comparison < additive < multiplicative < primary.
    _COMPARE = {"==", "!=", "<", ">", "<=", ">="}

    def parse_expression(self) -> Node:
        return self.parse_binary(0)

    _LEVELS = [_COMPARE, {"+", "-"}, {"*", "/"}]

    def parse_binary(self, level: int) -> Node:
        if level >= len(self._LEVELS):
            return self.parse_primary()
        start = self.peek()
        left = self.parse_binary(level + 1)
        while self.peek().kind == "op" and self.peek().value in self._LEVELS[level]:
            op = self.next().value
            right = self.parse_binary(level + 1)
            left = Node(
                NodeKind.BinaryExpression,
                [left, right],
                ["lhs", "rhs"],
                text=op,
                span=self.span_from(start, self.last()),
            )
        return left

    def parse_primary(self) -> Node:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Node(NodeKind.IntLiteral, text=t.value, span=self.span_from(t, t))
        if t.kind == "string":
            self.next()
            return Node(NodeKind.StringLiteral, text=t.value[1:-1], span=self.span_from(t, t))
        if t.kind == "op" and t.value == "(":
            self.next()
            inner = self.parse_expression()
            self.expect("op", ")")
            return inner
        if t.kind == "ident":
            ref = self.parse_reference_chain()
            if self.at("op", "("):
                self.next()
                children = [ref]
                roles = ["callee"]
                if not self.at("op", ")"):
                    while True:
                        children.append(self.parse_expression())
                        roles.append("arg")
                        if self.at("op", ","):
                            self.next()
                            continue
                        break
                end = self.expect("op", ")")
                return Node(
                    NodeKind.CallExpression,
                    children,
                    roles,
                    span=self.span_from(t, end),
                )
            return ref
        raise self.error(f"expected an expression, found {t.value or t.kind!r}")

    def parse_reference_chain(self) -> Node:
        start = self.expect("ident")
        node = Node(
            NodeKind.ReferenceExpression, name=start.value, span=self.span_from(start, start)
        )
        while self.at("op", ".") and self.peek(1).kind == "ident":
            self.next()
            seg = self.expect("ident")
            node = Node(
                NodeKind.ReferenceExpression,
                [node],
                ["prefix"],
                name=seg.value,
                span=self.span_from(start, seg),
            )
        return node


def dotted_name(ref: Node) -> str:
    """Flatten a ReferenceExpression chain to its dotted text."""
    parts = []
    cur = ref
    while cur is not None:
        parts.append(cur.name)
        cur = cur.child("prefix")
    return ".".join(reversed(parts))


def parse_source(path: str, text: str) -> Node:
    return _Parser(text, path).parse_file()


def parse_program(sources) -> Program:
    """Parse (path, text) pairs into an indexed Program."""
    roots = []
    source_map = {}
    for path, text in sources:
        roots.append(parse_source(path, text))
        source_map[path] = text
    return Program.build(roots, source_map)


def parse_statement(text: str) -> Node:
    """Parse a single statement; used by the script edit protocol."""
    p = _Parser(text, "<statement>")
    stmt = p.parse_statement()
    if not p.at("eof"):
        raise p.error("trailing text after statement")
    return stmt
