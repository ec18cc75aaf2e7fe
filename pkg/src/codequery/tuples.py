"""Tuple sets: the value format every query consumes and produces.

A tuple is a tagged, ordered list of named values; a tuple set is an
unordered, duplicate-free collection of tuples.  Values are strings,
integers, reals, or references to AST nodes.  The canonical text form
(`tag: (name: value, ...)`, one tuple per line, sorted) round-trips
through ``parse`` and is what the CLI prints in text mode.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .errors import (
    DuplicateElementName,
    EmptyTuple,
    InvalidIdentifier,
    TupleSyntaxError,
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

TEXT = "string"
INT = "int"
REAL = "real"
NODE = "node"


def is_identifier(s: str) -> bool:
    return bool(_IDENT.fullmatch(s))


class Value:
    """One tuple element value; exactly one of the four kinds."""

    __slots__ = ("kind", "raw")

    def __init__(self, kind: str, raw):
        if kind not in (TEXT, INT, REAL, NODE):
            raise ValueError(f"bad value kind: {kind}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "raw", raw)

    def __setattr__(self, name, value):
        raise AttributeError("Value is immutable")

    @staticmethod
    def text(s: str) -> "Value":
        return Value(TEXT, str(s))

    @staticmethod
    def integer(i: int) -> "Value":
        return Value(INT, int(i))

    @staticmethod
    def real(x: float) -> "Value":
        return Value(REAL, float(x))

    @staticmethod
    def node(node_id: str) -> "Value":
        return Value(NODE, str(node_id))

    def _key(self):
        # Reals compare on their canonical decimal rendering, which also
        # sidesteps int/float cross-kind hash collisions.
        if self.kind == REAL:
            return (self.kind, repr(self.raw))
        return (self.kind, self.raw)

    def __eq__(self, other):
        return isinstance(other, Value) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Value({self.kind}, {self.raw!r})"

    def render(self) -> str:
        """Canonical text rendering used by serialize()."""
        if self.kind == TEXT:
            return _quote(self.raw)
        if self.kind == REAL:
            return repr(self.raw)
        return str(self.raw)


def _quote(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


@dataclass(frozen=True)
class Tuple:
    """A tagged tuple of named values.  Build via make_tuple()."""

    tag: str
    elements: tuple  # of (name, Value) pairs

    def names(self):
        return tuple(name for name, _ in self.elements)

    def get(self, name: str) -> Optional[Value]:
        for n, v in self.elements:
            if n == name:
                return v
        return None

    def values_of_kind(self, kind: str):
        return [v for _, v in self.elements if v.kind == kind]

    def render(self) -> str:
        inner = ", ".join(f"{n}: {v.render()}" for n, v in self.elements)
        return f"{self.tag}: ({inner})"

    def sort_key(self):
        return (
            self.tag,
            self.names(),
            tuple(v.render() for _, v in self.elements),
        )


def make_tuple(elements, tag: Optional[str] = None) -> Tuple:
    """Build a tuple; the tag defaults to the first element's name."""
    elems = tuple((name, value) for name, value in elements)
    if not elems:
        raise EmptyTuple("a tuple needs at least one element")
    seen = set()
    for name, value in elems:
        if not is_identifier(name):
            raise InvalidIdentifier(f"bad element name: {name!r}")
        if name in seen:
            raise DuplicateElementName(f"element {name!r} appears twice")
        seen.add(name)
        if not isinstance(value, Value):
            raise TypeError(f"element {name!r} is not a Value")
    if tag is None:
        tag = elems[0][0]
    elif not is_identifier(tag):
        raise InvalidIdentifier(f"bad tag: {tag!r}")
    return Tuple(tag, elems)


class TupleSet:
    """Immutable duplicate-free set of tuples."""

    __slots__ = ("_tuples",)

    def __init__(self, tuples: Iterable[Tuple] = ()):
        object.__setattr__(self, "_tuples", frozenset(tuples))

    def __setattr__(self, name, value):
        raise AttributeError("TupleSet is immutable")

    def __iter__(self) -> Iterator[Tuple]:
        return iter(self._tuples)

    def __len__(self) -> int:
        return len(self._tuples)

    def __contains__(self, t: Tuple) -> bool:
        return t in self._tuples

    def __eq__(self, other):
        return isinstance(other, TupleSet) and self._tuples == other._tuples

    def __hash__(self):
        return hash(self._tuples)

    def __repr__(self):
        return f"TupleSet({sorted(self._tuples, key=Tuple.sort_key)!r})"

    def sorted(self):
        return sorted(self._tuples, key=Tuple.sort_key)

    def with_tag(self, tag: str) -> "TupleSet":
        return TupleSet(t for t in self._tuples if t.tag == tag)

    def add(self, t: Tuple) -> "TupleSet":
        return TupleSet(self._tuples | {t})


EMPTY = TupleSet()


def union(a: TupleSet, b: TupleSet) -> TupleSet:
    return TupleSet(a._tuples | b._tuples)


def union_all(sets) -> TupleSet:
    out = frozenset()
    for s in sets:
        out = out | s._tuples
    return TupleSet(out)


def subtract(first: TupleSet, rest) -> TupleSet:
    removed = frozenset()
    for s in rest:
        removed = removed | s._tuples
    return TupleSet(first._tuples - removed)


def serialize(ts: TupleSet) -> str:
    """Deterministic canonical text; empty set serializes to empty text."""
    lines = [t.render() for t in ts.sorted()]
    return "\n".join(lines) + ("\n" if lines else "")


# --- parsing of the canonical text form ---

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<punct>[():,])
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<real>-?(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|-?\d+[eE][+-]?\d+)
  | (?P<int>-?\d+)
  | (?P<ref>[A-Za-z_][A-Za-z0-9_.\[\]/]*)
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "r": "\r", "t": "\t", '"': '"', "\\": "\\"}


def _unquote(s: str, line: int, col: int) -> str:
    body = s[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            i += 1
            esc = body[i]
            if esc not in _ESCAPES:
                raise TupleSyntaxError(f"bad escape \\{esc}", line, col)
            out.append(_ESCAPES[esc])
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def _tokenize_line(text: str, lineno: int):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TupleSyntaxError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(("eol", "", len(text) + 1))
    return tokens


def _parse_line(text: str, lineno: int) -> Tuple:
    tokens = _tokenize_line(text, lineno)
    i = 0

    def expect(kind, what):
        nonlocal i
        tkind, tval, tcol = tokens[i]
        if tkind != kind and not (kind == "punct" and tkind == "punct" and tval == what):
            raise TupleSyntaxError(f"expected {what}", lineno, tcol)
        if kind == "punct" and tval != what:
            raise TupleSyntaxError(f"expected {what}", lineno, tcol)
        i += 1
        return tval, tcol

    tag, tagcol = expect("ref", "tag")
    if not is_identifier(tag):
        raise TupleSyntaxError(f"bad tag {tag!r}", lineno, tagcol)
    expect("punct", ":")
    expect("punct", "(")
    elements = []
    while True:
        name, namecol = expect("ref", "element name")
        if not is_identifier(name):
            raise TupleSyntaxError(f"bad element name {name!r}", lineno, namecol)
        expect("punct", ":")
        kind, val, col = tokens[i]
        i += 1
        if kind == "string":
            value = Value.text(_unquote(val, lineno, col))
        elif kind == "int":
            value = Value.integer(int(val))
        elif kind == "real":
            value = Value.real(float(val))
        elif kind == "ref":
            value = Value.node(val)
        else:
            raise TupleSyntaxError("expected a value", lineno, col)
        elements.append((name, value))
        kind, val, col = tokens[i]
        if kind == "punct" and val == ",":
            i += 1
            continue
        if kind == "punct" and val == ")":
            i += 1
            break
        raise TupleSyntaxError("expected ',' or ')'", lineno, col)
    kind, _, col = tokens[i]
    if kind != "eol":
        raise TupleSyntaxError("trailing text after tuple", lineno, col)
    try:
        return make_tuple(elements, tag=tag)
    except (DuplicateElementName, InvalidIdentifier) as e:
        raise TupleSyntaxError(str(e), lineno, 1)


def parse(text: str) -> TupleSet:
    """Inverse of serialize() on canonical text; tolerant of blank lines."""
    tuples = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        tuples.append(_parse_line(line.strip(), lineno))
    return TupleSet(tuples)


# Convenience constructors used throughout the query layer.

def node_tuple(node_id: str) -> Tuple:
    return make_tuple([("node", Value.node(node_id))])


def node_set(node_ids) -> TupleSet:
    return TupleSet(node_tuple(n) for n in node_ids)
