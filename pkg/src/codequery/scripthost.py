"""External script queries: discovery, JSON protocol, subprocess execution.

A script query is a standalone executable.  The host writes exactly one
JSON request document to its standard input, closes it, and reads one
JSON response document from standard output.  Both streams are serviced
concurrently (communicate), so arbitrarily large payloads cannot
deadlock.  The schema is frozen in docs/script-protocol.md.

Scripts never touch source files.  A script that wants to mutate the
program emits ``edit:`` tuples; the host parses the embedded code,
rebuilds the program, and writes the corpus back atomically.
"""

from __future__ import annotations

import json
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .builtins import write_corpus
from .engine import OPERATOR, QueryResult
from .errors import (
    CodeQueryError,
    ProtocolError,
    ScriptCrash,
    ScriptTimeout,
)
from .minilang import parse_statement
from .minilang.build import apply_front_insertions
from .tuples import (
    INT,
    NODE,
    REAL,
    TEXT,
    TupleSet,
    Value,
    make_tuple,
    union_all,
)

DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class ScriptQuery:
    name: str
    path: str
    interpreter: tuple  # command line prefix, e.g. the python executable

    def command(self):
        return list(self.interpreter) + [self.path]


@dataclass
class Discovery:
    scripts: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def _interpreter_for(path: Path) -> tuple:
    """Shebang line if present, else the running python."""
    try:
        first = path.read_text(errors="replace").split("\n", 1)[0]
    except OSError:
        first = ""
    if first.startswith("#!"):
        return tuple(first[2:].strip().split())
    return (sys.executable,)


def discover(script_dir) -> Discovery:
    """One ScriptQuery per script file, sorted by name.

    Files starting with an underscore or a dot are helpers, not queries.
    Unreadable entries are skipped with a warning.
    """
    result = Discovery()
    root = Path(script_dir)
    if not root.is_dir():
        return result
    for path in sorted(root.iterdir()):
        if not path.is_file():
            continue
        if path.name.startswith(("_", ".")):
            continue
        try:
            interpreter = _interpreter_for(path)
        except OSError as e:
            result.warnings.append(f"skipped unreadable script {path.name}: {e}")
            continue
        result.scripts.append(ScriptQuery(path.stem, str(path), interpreter))
    result.scripts.sort(key=lambda s: s.name)
    return result


# --- tuple JSON encoding ---

def encode_tuple_set(ts: TupleSet) -> list:
    out = []
    for t in ts.sorted():
        out.append(
            {
                "tag": t.tag,
                "elements": [
                    {"name": name, "kind": v.kind, "value": v.raw}
                    for name, v in t.elements
                ],
            }
        )
    return out


def _decode_value(kind, raw) -> Value:
    if kind == TEXT:
        if not isinstance(raw, str):
            raise ProtocolError(f"string value is {type(raw).__name__}")
        return Value.text(raw)
    if kind == INT:
        if not isinstance(raw, int) or isinstance(raw, bool):
            raise ProtocolError(f"int value is {type(raw).__name__}")
        return Value.integer(raw)
    if kind == REAL:
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ProtocolError(f"real value is {type(raw).__name__}")
        return Value.real(float(raw))
    if kind == NODE:
        if not isinstance(raw, str):
            raise ProtocolError(f"node value is {type(raw).__name__}")
        return Value.node(raw)
    raise ProtocolError(f"unknown value kind {kind!r}")


def decode_tuple_set(data) -> TupleSet:
    if not isinstance(data, list):
        raise ProtocolError("tuple set is not a JSON array")
    tuples = []
    for rec in data:
        if not isinstance(rec, dict) or "tag" not in rec or "elements" not in rec:
            raise ProtocolError(f"malformed tuple record: {rec!r}")
        elements = []
        for el in rec["elements"]:
            if not isinstance(el, dict) or {"name", "kind", "value"} - set(el):
                raise ProtocolError(f"malformed element record: {el!r}")
            elements.append((el["name"], _decode_value(el["kind"], el["value"])))
        try:
            tuples.append(make_tuple(elements, tag=rec["tag"]))
        except CodeQueryError as e:
            raise ProtocolError(str(e))
    return TupleSet(tuples)


# --- requests ---

def ast_summary(program) -> list:
    """Flat (id, kind, name, parentId, span) rows for the whole program.

    Scripts that need tree structure rebuild it from the parentId links.
    """
    rows = []
    for root in program.roots:
        for node in root.walk():
            parent = program.parents.get(node.id)
            span = node.span
            rows.append(
                [
                    node.id,
                    node.kind.value,
                    node.name,
                    parent,
                    [span.file, span.start_line, span.start_col,
                     span.end_line, span.end_col],
                ]
            )
    return rows


def make_request(ctx, args, inputs) -> dict:
    return {
        "context": ctx.context_node,
        "args": list(args),
        "input": encode_tuple_set(union_all(inputs) if inputs else TupleSet()),
        "astSummary": ast_summary(ctx.program) if ctx.program else [],
    }


def invoke(script: ScriptQuery, request: dict, timeout: float = DEFAULT_TIMEOUT):
    """Run one request through a script process; returns (TupleSet, warnings)."""
    try:
        proc = subprocess.Popen(
            script.command(),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as e:
        raise ScriptCrash(f"{script.name}: cannot start: {e}")
    try:
        stdout, stderr = proc.communicate(json.dumps(request), timeout=timeout)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        raise ScriptTimeout(f"{script.name}: no response within {timeout} s")
    if proc.returncode != 0:
        raise ScriptCrash(
            f"{script.name}: exit status {proc.returncode}: {stderr.strip()}"
        )
    try:
        response = json.loads(stdout)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"{script.name}: response is not JSON: {e}")
    if not isinstance(response, dict) or "output" not in response:
        raise ProtocolError(f"{script.name}: response lacks an output field")
    if response.get("error"):
        raise ScriptCrash(f"{script.name}: {response['error']}")
    warnings = response.get("warnings", [])
    if not isinstance(warnings, list):
        raise ProtocolError(f"{script.name}: warnings is not an array")
    return decode_tuple_set(response["output"]), [str(w) for w in warnings]


# --- edit tuples ---

def apply_edits(ctx, ts: TupleSet) -> TupleSet:
    """Apply edit: tuples to the program; returns the set without them."""
    edits = ts.with_tag("edit")
    if not len(edits):
        return ts
    staged = {}  # method id -> [(index, statement)]
    for t in edits.sorted():
        op = t.get("op")
        if op is None or op.raw != "insertPrintFront":
            raise ProtocolError(f"unsupported edit operation in {t.render()}")
        node = t.get("node")
        code = t.get("code")
        if node is None or node.kind != NODE or code is None or code.kind != TEXT:
            raise ProtocolError(f"malformed edit tuple {t.render()}")
        index = t.get("index")
        position = index.raw if index is not None else 0
        method = ctx.program.resolve(node.raw)
        staged.setdefault(method.id, []).append((position, code.raw))
    insertions = {}
    for method_id, entries in staged.items():
        insertions[method_id] = [
            parse_statement(code) for _pos, code in sorted(entries)
        ]
    mutated = apply_front_insertions(ctx.program, insertions)
    write_corpus(ctx, mutated)
    return TupleSet(t for t in ts if t.tag != "edit")


# --- registration ---

def make_script_impl(script: ScriptQuery, timeout: float = DEFAULT_TIMEOUT):
    def impl(ctx, args, inputs):
        output, warnings = invoke(script, make_request(ctx, args, inputs), timeout)
        output = apply_edits(ctx, output)
        return QueryResult(output=output, warnings=warnings)

    return impl


def register_scripts(registry, script_dir, timeout: float = DEFAULT_TIMEOUT):
    """Make every script in script_dir invokable; builtins shadow scripts."""
    found = discover(script_dir)
    registry.warnings.extend(found.warnings)
    for script in found.scripts:
        registry.register_shadowable(
            script.name, OPERATOR, make_script_impl(script, timeout)
        )
    return found
