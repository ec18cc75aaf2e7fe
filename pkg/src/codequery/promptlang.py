"""The query-prompt language.

Grammar:
    pipeline := stage ('|' stage)*
    stage    := NAME arg* | group
    group    := ('minus')? '{' pipeline (';' pipeline)+ '}'

A group without the minus keyword is joining (union of branch outputs);
a minus group subtracts every other branch from its first one.  A group
in the middle of a pipeline feeds each branch the upstream output,
duplicated.  Arguments are uninterpreted tokens; each query parses its
own flags.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .engine import QueryNetwork
from .errors import (
    DuplicateAlias,
    PromptSyntaxError,
    SelfReferentialAlias,
    UnknownQuery,
)


@dataclass(frozen=True)
class Invocation:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Group:
    kind: str  # "join" | "minus"
    branches: tuple  # of pipelines (tuples of stages)


@dataclass(frozen=True)
class PromptAst:
    pipeline: tuple  # of stages


_PROMPT_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<punct>[|{};])
  | (?P<word>(?:[^\s|{};"]|"(?:[^"\\]|\\.)*")+)
    """,
    re.VERBOSE,
)

_QUOTED_SPAN = re.compile(r'"(?:[^"\\]|\\.)*"')


def _unquote_word(raw: str) -> str:
    def repl(m):
        return m.group()[1:-1].replace('\\"', '"').replace("\\\\", "\\")

    return _QUOTED_SPAN.sub(repl, raw)

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _PROMPT_TOKEN.match(text, pos)
        if not m:
            raise PromptSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "punct":
            tokens.append((m.group(), m.group(), pos))
        elif m.lastgroup == "word":
            tokens.append(("word", _unquote_word(m.group()), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _PromptParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        if t[0] != "end":
            self.i += 1
        return t

    def parse(self) -> PromptAst:
        pipeline = self.parse_pipeline()
        kind, _val, pos = self.peek()
        if kind != "end":
            raise PromptSyntaxError("unexpected trailing input", pos)
        return PromptAst(pipeline)

    def parse_pipeline(self) -> tuple:
        stages = [self.parse_stage()]
        while self.peek()[0] == "|":
            self.next()
            stages.append(self.parse_stage())
        return tuple(stages)

    def parse_stage(self):
        kind, val, pos = self.peek()
        if kind == "{" or (kind == "word" and val == "minus" and self.tokens[self.i + 1][0] == "{"):
            return self.parse_group()
        if kind != "word":
            raise PromptSyntaxError("expected a query name or group", pos)
        if not _NAME.fullmatch(val):
            raise PromptSyntaxError(f"bad query name {val!r}", pos)
        self.next()
        args = []
        while self.peek()[0] == "word":
            args.append(self.next()[1])
        return Invocation(val, tuple(args))

    def parse_group(self) -> Group:
        kind = "join"
        tkind, val, _pos = self.peek()
        if tkind == "word" and val == "minus":
            self.next()
            kind = "minus"
        self.next()  # '{'
        branches = [self.parse_pipeline()]
        while self.peek()[0] == ";":
            self.next()
            branches.append(self.parse_pipeline())
        tkind, _val, pos = self.peek()
        if tkind != "}":
            raise PromptSyntaxError("expected ';' or '}'", pos)
        self.next()
        if len(branches) < 2:
            raise PromptSyntaxError("a group needs at least two branches", pos)
        return Group(kind, tuple(branches))


def parse_prompt(text: str) -> PromptAst:
    return _PromptParser(text).parse()


# --- serialization ---

_SAFE_ARG = re.compile(r"[^\s|{};\"]+")


def _render_arg(arg: str) -> str:
    if _SAFE_ARG.fullmatch(arg):
        return arg
    return '"' + arg.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render_stage(stage) -> str:
    if isinstance(stage, Invocation):
        return " ".join([stage.name] + [_render_arg(a) for a in stage.args])
    prefix = "minus" if stage.kind == "minus" else ""
    body = " ; ".join(_render_pipeline(b) for b in stage.branches)
    return f"{prefix}{{ {body} }}"


def _render_pipeline(pipeline) -> str:
    return " | ".join(_render_stage(s) for s in pipeline)


def serialize_prompt(ast: PromptAst) -> str:
    """Canonical text; parse_prompt(serialize_prompt(a)) == a."""
    return _render_pipeline(ast.pipeline)


# --- aliases ---

class AliasTable:
    def __init__(self):
        self._aliases = {}

    def define(self, name: str, body: str):
        if not _NAME.fullmatch(name):
            raise PromptSyntaxError(f"bad alias name {name!r}", 0)
        if name in self._aliases:
            raise DuplicateAlias(f"alias {name!r} already defined")
        parse_prompt(body)  # must parse
        self._aliases[name] = body
        try:
            self._check_acyclic(name)
        except SelfReferentialAlias:
            del self._aliases[name]
            raise

    def _check_acyclic(self, start: str):
        def walk(pipeline, stack):
            for stage in pipeline:
                if isinstance(stage, Group):
                    for b in stage.branches:
                        walk(b, stack)
                elif stage.name in self._aliases:
                    if stage.name in stack:
                        raise SelfReferentialAlias(
                            f"alias {stage.name!r} expands through itself"
                        )
                    walk(parse_prompt(self._aliases[stage.name]).pipeline, stack | {stage.name})

        walk(parse_prompt(self._aliases[start]).pipeline, {start})

    def get(self, name: str):
        return self._aliases.get(name)

    def names(self):
        return sorted(self._aliases)

    # toml-style key/value persistence: name = "prompt text"
    @staticmethod
    def load(path) -> "AliasTable":
        table = AliasTable()
        path = Path(path)
        if path.is_file():
            for line in path.read_text().splitlines():
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                name, _eq, rest = line.partition("=")
                body = rest.strip()
                if body.startswith('"') and body.endswith('"'):
                    body = body[1:-1].replace('\\"', '"').replace("\\\\", "\\")
                table._aliases[name.strip()] = body
        return table

    def save(self, path):
        lines = []
        for name, body in sorted(self._aliases.items()):
            escaped = body.replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'{name} = "{escaped}"')
        Path(path).write_text("".join(line + "\n" for line in lines))


def expand(table: AliasTable, ast: PromptAst) -> PromptAst:
    """Splice alias pipelines in place of their name stages, transitively."""

    def expand_pipeline(pipeline, seen):
        out = []
        for stage in pipeline:
            if isinstance(stage, Group):
                out.append(
                    Group(
                        stage.kind,
                        tuple(expand_pipeline(b, seen) for b in stage.branches),
                    )
                )
                continue
            body = table.get(stage.name)
            if body is not None and not stage.args:
                if stage.name in seen:
                    raise SelfReferentialAlias(
                        f"alias {stage.name!r} expands through itself"
                    )
                inner = parse_prompt(body).pipeline
                out.extend(expand_pipeline(inner, seen | {stage.name}))
            else:
                out.append(stage)
        return tuple(out)

    return PromptAst(expand_pipeline(ast.pipeline, set()))


def validate(ast: PromptAst, registry) -> None:
    """Every invocation must name a registered query (aliases expanded first)."""

    def walk(pipeline):
        for stage in pipeline:
            if isinstance(stage, Group):
                for b in stage.branches:
                    walk(b)
            elif registry.lookup(stage.name) is None:
                raise UnknownQuery(f"unknown query {stage.name!r}")

    walk(ast.pipeline)


# --- lowering ---

def to_network(ast: PromptAst) -> QueryNetwork:
    net = QueryNetwork()
    _lower_pipeline(net, ast.pipeline, None)
    return net


def _lower_pipeline(net: QueryNetwork, pipeline, upstream):
    for stage in pipeline:
        if isinstance(stage, Invocation):
            node = net.add_node("query", stage.name, stage.args)
            if upstream is not None:
                net.connect(upstream, node, 0)
            upstream = node
        else:
            branch_outs = [
                _lower_pipeline(net, branch, upstream) for branch in stage.branches
            ]
            merge = net.add_node(stage.kind)
            for port, out in enumerate(branch_outs):
                net.connect(out, merge, port)
            upstream = merge
    return upstream
