"""The built-in query set.

Resource access: ast, callgraph, changes, issues, importCSV,
insertArgPrinting.  Operators: select, join, reachable.  Visualizations:
table, highlight, arrows, messages, heatmap, toGraphFile.

Conventions that make the documented pipelines compose: change tuples
name their node element ``ast`` and their commit-id element ``id``;
commit tuples carry id/author/message; plain node sets use a single
``node`` element.
"""

from __future__ import annotations

import csv
import math
import os
import re
from pathlib import Path

from . import history as H
from .codemodel import build_call_graph, call_graph_tuples
from .engine import (
    OPERATOR,
    QueryResult,
    Registry,
    RenderPlan,
    RESOURCE,
    VISUALIZATION,
)
from .errors import (
    BadRegex,
    EmptyHeader,
    FlagError,
    InputFileNotFound,
    MalformedMessage,
    MissingSelector,
    MissingStart,
    NoMethodContext,
    NoNodeElement,
    NoNumericElement,
    NoRepository,
    NotAMethodNode,
    NotARelation,
    UnknownKind,
    UnknownNodeId,
    WriteFailure,
)
from .minilang import NodeKind, make_print_stmt, make_ref, make_string, pretty_print
from .minilang.build import apply_front_insertions
from .minilang.nodes import valid_kind_name
from .render import plain_value, render_dot
from .tuples import (
    EMPTY,
    INT,
    NODE,
    REAL,
    TupleSet,
    Value,
    make_tuple,
    node_set,
    union_all,
)


def parse_flags(args, spec):
    """Split args into flags (per spec: name -> number of values) and positionals."""
    flags = {}
    positionals = []
    i = 0
    while i < len(args):
        arg = args[i]
        if arg.startswith("-") and not re.fullmatch(r"-\d+(\.\d+)?", arg):
            name = arg
            if name not in spec:
                raise FlagError(f"unknown flag {name}")
            nvalues = spec[name]
            values = args[i + 1 : i + 1 + nvalues]
            if len(values) < nvalues:
                raise FlagError(f"flag {name} needs {nvalues} value(s)")
            if nvalues == 0:
                flags[name] = True
            elif nvalues == 1:
                flags[name] = values[0]
            else:
                flags[name] = tuple(values)
            i += 1 + nvalues
        else:
            positionals.append(arg)
            i += 1
    return flags, positionals


def _single_input(inputs) -> TupleSet:
    return union_all(inputs) if inputs else EMPTY


def _first_node_ref(t):
    refs = t.values_of_kind(NODE)
    return refs[0].raw if refs else None


# --- resource access ---

def q_ast(ctx, args, inputs):
    flags, positionals = parse_flags(
        args, {"-type": 1, "-topLevel": 0, "-global": 0, "-name": 1}
    )
    if positionals:
        raise FlagError(f"unexpected argument {positionals[0]!r}")
    kind = flags.get("-type", "Statement")
    if not valid_kind_name(kind):
        raise UnknownKind(f"unknown node kind {kind!r}")
    scope = None
    if "-global" not in flags and ctx.context_node:
        scope = ctx.program.resolve(ctx.context_node)
    nodes = ctx.program.nodes_of_kind(kind, scope=scope)
    if "-topLevel" in flags:
        nodes = [
            n
            for n in nodes
            if (parent := ctx.program.parent(n)) is not None
            and parent.kind == NodeKind.Method
        ]
    if "-name" in flags:
        try:
            rx = re.compile(flags["-name"])
        except re.error as e:
            raise BadRegex(str(e))
        nodes = [n for n in nodes if n.name and rx.search(n.name)]
    return QueryResult(output=node_set(n.id for n in nodes))


def q_callgraph(ctx, args, inputs):
    flags, _ = parse_flags(args, {"-global": 0, "-nodes": 0})
    if "-global" in flags:
        graph = build_call_graph(ctx.program)
    else:
        if not ctx.context_node:
            raise NoMethodContext("callgraph needs a method context (or -global)")
        node = ctx.program.resolve(ctx.context_node)
        method = node if node.kind == NodeKind.Method else ctx.program.enclosing(
            node, NodeKind.Method
        )
        if method is None:
            raise NoMethodContext(f"context {ctx.context_node} is not inside a method")
        graph = build_call_graph(ctx.program, method)
    warnings = list(graph.warnings)
    if "-nodes" in flags:
        return QueryResult(output=node_set(graph.nodes), warnings=warnings)
    return QueryResult(output=call_graph_tuples(graph), warnings=warnings)


def q_changes(ctx, args, inputs):
    flags, _ = parse_flags(
        args, {"-c": 1, "-between": 2, "-nodes": 0, "-intermediate": 0}
    )
    if "-nodes" in flags and "-intermediate" in flags:
        raise FlagError("-nodes and -intermediate cannot be combined")
    if ctx.history is None:
        raise NoRepository("no repository configured (use --repo)")
    if "-between" in flags:
        older = H.resolve_ref(ctx.history, flags["-between"][0])
        newer = H.resolve_ref(ctx.history, flags["-between"][1])
        per_commit = [(newer, H.changes_between(ctx.history, older, newer))]
    else:
        n = int(flags.get("-c", "5"))
        commits = H.last_commits(ctx.history, n)
        per_commit = H.changes_for_commits(ctx.history, commits)

    input_set = _single_input(inputs)
    change_tuples = []
    commits_with_changes = []
    for commit, records in per_commit:
        if inputs:
            # Intersect: an input node qualifies when a change overlaps it.
            found = set()
            for t in input_set:
                ref = _first_node_ref(t)
                if ref is None:
                    continue
                try:
                    node = ctx.program.resolve(ref)
                except UnknownNodeId:
                    continue
                for rec in records:
                    if rec.file == node.span.file and any(
                        node.span.overlaps_lines(s, e) for s, e in rec.ranges
                    ):
                        found.add(ref)
                        break
            commit_changes = TupleSet(
                make_tuple(
                    [("id", Value.text(commit.id)), ("ast", Value.node(ref))],
                    tag="change",
                )
                for ref in found
            )
        else:
            commit_changes = H.map_changes_to_nodes(ctx.program, records)
        if len(commit_changes):
            commits_with_changes.append(commit)
        change_tuples.extend(commit_changes)

    changes = TupleSet(change_tuples)
    if "-nodes" in flags:
        return QueryResult(
            output=node_set(t.get("ast").raw for t in changes)
        )
    if "-intermediate" in flags:
        return QueryResult(
            output=union_all([changes, H.commit_tuples(commits_with_changes)])
        )
    return QueryResult(output=changes)


def q_issues(ctx, args, inputs):
    flags, _ = parse_flags(args, {"-n": 1})
    if ctx.issues is None:
        raise NoRepository("no issue fixture configured")
    if "-n" in flags:
        issues = [ctx.issues.lookup(int(flags["-n"]))]
    else:
        issues = ctx.issues.all_issues()
    return QueryResult(
        output=TupleSet(
            make_tuple(
                [
                    ("number", Value.integer(i.number)),
                    ("title", Value.text(i.title)),
                    ("body", Value.text(i.body)),
                ],
                tag="issue",
            )
            for i in issues
        )
    )


def _parse_cell(cell: str) -> Value:
    if re.fullmatch(r"-?\d+", cell):
        return Value.integer(int(cell))
    try:
        return Value.real(float(cell))
    except ValueError:
        return Value.text(cell)


def q_import_csv(ctx, args, inputs):
    flags, positionals = parse_flags(args, {"-tag": 1, "-node": 1})
    if len(positionals) != 1:
        raise FlagError("importCSV needs exactly one file path")
    path = Path(positionals[0])
    if not path.is_file() and ctx.corpus_dir:
        candidate = Path(ctx.corpus_dir) / positionals[0]
        if candidate.is_file():
            path = candidate
    if not path.is_file():
        raise InputFileNotFound(f"no such file: {positionals[0]}")
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or not rows[0] or not any(h.strip() for h in rows[0]):
        raise EmptyHeader(f"{path} has no header row")
    header = [h.strip() for h in rows[0]]
    node_col = flags.get("-node")
    if node_col is not None and node_col not in header:
        raise FlagError(f"-node column {node_col!r} not in header")
    tuples = []
    skipped = 0
    for row in rows[1:]:
        if not row:
            continue
        elements = []
        unresolvable = False
        for name, cell in zip(header, row):
            if name == node_col:
                try:
                    node = ctx.program.resolve(cell.strip())
                    elements.append((name, Value.node(node.id)))
                except UnknownNodeId:
                    unresolvable = True
                    break
            else:
                elements.append((name, _parse_cell(cell.strip())))
        if unresolvable:
            skipped += 1
            continue
        tuples.append(make_tuple(elements, tag=flags.get("-tag")))
    warnings = [f"skipped {skipped} row(s) with unresolvable nodes"] if skipped else []
    return QueryResult(output=TupleSet(tuples), warnings=warnings)


# --- operators ---

_PREDICATE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)([=~])(.*)", re.DOTALL)


def q_select(ctx, args, inputs):
    flags, positionals = parse_flags(args, {"-t": 1})
    conditions = []
    for p in positionals:
        m = _PREDICATE.fullmatch(p)
        if not m:
            raise FlagError(f"bad predicate {p!r} (use KEY=VALUE or KEY~REGEX)")
        key, op, rhs = m.groups()
        if op == "~":
            try:
                rhs = re.compile(rhs)
            except re.error as e:
                raise BadRegex(str(e))
        conditions.append((key, op, rhs))
    out = []
    for t in _single_input(inputs):
        if "-t" in flags and t.tag != flags["-t"]:
            continue
        ok = True
        for key, op, rhs in conditions:
            v = t.get(key)
            if v is None:
                ok = False
                break
            rendered = plain_value(v)
            if op == "=" and rendered != rhs:
                ok = False
                break
            if op == "~" and not rhs.search(rendered):
                ok = False
                break
        if ok:
            out.append(t)
    return QueryResult(output=TupleSet(out))


def _parse_selectors(positionals):
    selectors = []
    for token in positionals:
        for part in token.split(","):
            part = part.strip()
            if not part:
                continue
            if "." in part:
                tag, elem = part.split(".", 1)
                selectors.append((tag, elem))
            else:
                selectors.append((None, part))
    return selectors


def q_join(ctx, args, inputs):
    flags, positionals = parse_flags(args, {"-as": 1})
    selectors = _parse_selectors(positionals)
    if not selectors:
        raise FlagError("join needs selectors like tag.element")
    input_set = _single_input(inputs)
    groups = {}
    for t in input_set:
        groups.setdefault(t.tag, []).append(t)

    # A bare selector binds to the one input tag carrying that element.
    resolved = []
    for tag, elem in selectors:
        if tag is None:
            candidates = sorted(
                g for g, ts in groups.items()
                if any(t.get(elem) is not None for t in ts)
            )
            if len(candidates) != 1:
                raise MissingSelector(
                    f"element {elem!r} is not uniquely attributable to one tag"
                )
            tag = candidates[0]
        resolved.append((tag, elem))

    tags = []
    for tag, _elem in resolved:
        if tag not in tags:
            tags.append(tag)
    if len(tags) < 2:
        raise FlagError("join needs selectors over at least two distinct tags")
    for tag, elem in resolved:
        members = groups.get(tag, [])
        if members and all(t.get(elem) is None for t in members):
            raise MissingSelector(f"element {elem!r} absent from every {tag!r} tuple")

    out_tag = flags.get("-as", "_".join(tags))
    out = []

    def consistent(combo):
        for i in range(len(combo)):
            for j in range(i + 1, len(combo)):
                a, b = combo[i], combo[j]
                shared = set(a.names()) & set(b.names())
                for name in shared:
                    if a.get(name) != b.get(name):
                        return False
        return True

    def product(i, combo):
        if i == len(tags):
            if consistent(combo):
                by_tag = dict(zip(tags, combo))
                elements = []
                for tag, elem in resolved:
                    v = by_tag[tag].get(elem)
                    if v is None:
                        return
                    elements.append((elem, v))
                out.append(make_tuple(elements, tag=out_tag))
            return
        for t in groups.get(tags[i], []):
            product(i + 1, combo + [t])

    product(0, [])
    return QueryResult(output=TupleSet(out))


def _relation_edges(input_set):
    edges = []
    others = []
    for t in input_set:
        refs = t.values_of_kind(NODE)
        if len(refs) == 2:
            edges.append((refs[0].raw, refs[1].raw))
        else:
            others.append(t)
    return edges, others


def _reachable_from(edges, start):
    succ = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
    seen = set()
    frontier = list(succ.get(start, ()))
    while frontier:
        cur = frontier.pop()
        if cur in seen:
            continue
        seen.add(cur)
        frontier.extend(succ.get(cur, ()))
    return seen


def q_reachable(ctx, args, inputs):
    flags, _ = parse_flags(args, {"-self": 0, "-from": 1})
    input_set = _single_input(inputs)
    edges, others = _relation_edges(input_set)
    if not edges:
        if len(input_set) == 0:
            return QueryResult(output=EMPTY)
        raise NotARelation("reachable needs relation tuples (two node references)")
    all_nodes = sorted({n for e in edges for n in e})
    if "-self" in flags:
        keep = {n for n in all_nodes if n in _reachable_from(edges, n)}
    else:
        start = flags.get("-from")
        if start is None and ctx.context_node:
            candidates = {ctx.context_node}
            node = None
            try:
                node = ctx.program.resolve(ctx.context_node)
            except UnknownNodeId:
                pass
            if node is not None:
                method = node if node.kind == NodeKind.Method else ctx.program.enclosing(
                    node, NodeKind.Method
                )
                if method is not None:
                    candidates.add(method.id)
            start = next((c for c in sorted(candidates) if c in all_nodes), None)
        if start is None:
            raise MissingStart("reachable needs -self, -from, or a context in the relation")
        keep = _reachable_from(edges, start)
    passed = [t for t in others if (_first_node_ref(t) in keep)]
    return QueryResult(output=union_all([node_set(keep), TupleSet(passed)]))


# --- visualizations ---

def q_table(ctx, args, inputs):
    parse_flags(args, {})
    ts = _single_input(inputs)
    return QueryResult(output=EMPTY, plan=RenderPlan("table", ts))


def q_highlight(ctx, args, inputs):
    flags, _ = parse_flags(args, {"-color": 1})
    ts = _single_input(inputs)
    for t in ts:
        if not t.values_of_kind(NODE):
            raise NoNodeElement(f"tuple {t.render()} has no node reference")
    return QueryResult(
        output=EMPTY,
        plan=RenderPlan("highlight", ts, {"color": flags.get("-color")}),
    )


def q_arrows(ctx, args, inputs):
    parse_flags(args, {})
    ts = _single_input(inputs)
    for t in ts:
        if len(t.values_of_kind(NODE)) != 2:
            raise NotARelation(f"tuple {t.render()} is not a relation tuple")
    return QueryResult(output=EMPTY, plan=RenderPlan("arrows", ts))


def q_messages(ctx, args, inputs):
    parse_flags(args, {})
    ts = _single_input(inputs)
    for t in ts:
        message = t.get("message")
        anchor = t.get("ast")
        if message is None or message.kind != "string":
            raise MalformedMessage(f"tuple {t.render()} lacks a text 'message' element")
        if anchor is None or anchor.kind != NODE:
            raise MalformedMessage(f"tuple {t.render()} lacks a node 'ast' element")
    return QueryResult(output=EMPTY, plan=RenderPlan("messages", ts))


def heat_entries(ts: TupleSet):
    """(node id, value) per tuple: first noderef and first numeric element."""
    entries = []
    for t in ts.sorted():
        refs = t.values_of_kind(NODE)
        nums = [v for _, v in t.elements if v.kind in (INT, REAL)]
        if not refs:
            raise NoNodeElement(f"tuple {t.render()} has no node reference")
        if not nums:
            raise NoNumericElement(f"tuple {t.render()} has no numeric element")
        value = float(nums[0].raw)
        if not math.isfinite(value):
            raise NoNumericElement(f"non-finite heat value in {t.render()}")
        entries.append((refs[0].raw, value))
    return entries


def heat_buckets(entries):
    """Map values to color buckets 0 (green) .. 9 (red); equal values -> 0."""
    if not entries:
        return {}
    values = [v for _, v in entries]
    lo, hi = min(values), max(values)
    if hi == lo:
        return {n: 0 for n, _ in entries}
    # The maximum maps to 9 directly: rounding in the quotient can land a
    # hair under 1.0 and would otherwise floor into bucket 8.
    return {
        n: 9 if v == hi else min(9, math.floor(9 * (v - lo) / (hi - lo)))
        for n, v in entries
    }


def q_heatmap(ctx, args, inputs):
    parse_flags(args, {})
    ts = _single_input(inputs)
    buckets = heat_buckets(heat_entries(ts))
    return QueryResult(
        output=EMPTY, plan=RenderPlan("heatmap", ts, {"buckets": buckets})
    )


def q_to_graph_file(ctx, args, inputs):
    flags, positionals = parse_flags(args, {})
    if len(positionals) != 1:
        raise FlagError("toGraphFile needs an output path")
    ts = _single_input(inputs)
    for t in ts:
        if len(t.values_of_kind(NODE)) != 2:
            raise NotARelation(f"tuple {t.render()} is not a relation tuple")
    try:
        Path(positionals[0]).write_text(render_dot(ts))
    except OSError as e:
        raise WriteFailure(str(e))
    return QueryResult(
        output=EMPTY,
        plan=RenderPlan("note", EMPTY, {"text": f"graph written to {positionals[0]}"}),
    )


# --- mutation ---

def arg_printing_statements(method):
    """One print naming the method, then one per parameter."""
    stmts = [make_print_stmt([make_string(method.name)])]
    for param in method.children_with_role("param"):
        stmts.append(make_print_stmt([make_string(param.name), make_ref(param.name)]))
    return stmts


def write_corpus(ctx, program):
    """Write a rebuilt program over the corpus, all files or none."""
    if ctx.corpus_dir is None:
        raise WriteFailure("no writable corpus directory configured")
    staged = []
    try:
        for path, text in pretty_print(program):
            target = Path(ctx.corpus_dir) / path
            tmp = target.with_suffix(target.suffix + ".tmp")
            tmp.write_text(text)
            staged.append((tmp, target))
        for tmp, target in staged:
            os.replace(tmp, target)
    except OSError as e:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise WriteFailure(str(e))
    ctx.program = program


def q_insert_arg_printing(ctx, args, inputs):
    parse_flags(args, {})
    input_set = _single_input(inputs)
    insertions = {}
    for t in input_set:
        ref = _first_node_ref(t)
        if ref is None:
            raise NotAMethodNode(f"tuple {t.render()} has no node reference")
        node = ctx.program.resolve(ref)
        if node.kind != NodeKind.Method:
            raise NotAMethodNode(f"{ref} is not a method")
        insertions[node.id] = arg_printing_statements(node)
    if not insertions:
        return QueryResult(output=EMPTY)
    mutated = apply_front_insertions(ctx.program, insertions)
    write_corpus(ctx, mutated)
    return QueryResult(output=node_set(insertions))


def register_builtins(registry: Registry) -> Registry:
    registry.register("ast", RESOURCE, q_ast)
    registry.register("callgraph", RESOURCE, q_callgraph)
    registry.register("changes", RESOURCE, q_changes)
    registry.register("issues", RESOURCE, q_issues)
    registry.register("importCSV", RESOURCE, q_import_csv)
    registry.register("insertArgPrinting", RESOURCE, q_insert_arg_printing)
    registry.register("select", OPERATOR, q_select)
    registry.register("join", OPERATOR, q_join)
    registry.register("reachable", OPERATOR, q_reachable)
    registry.register("table", VISUALIZATION, q_table)
    registry.register("highlight", VISUALIZATION, q_highlight)
    registry.register("arrows", VISUALIZATION, q_arrows)
    registry.register("messages", VISUALIZATION, q_messages)
    registry.register("heatmap", VISUALIZATION, q_heatmap)
    registry.register("toGraphFile", VISUALIZATION, q_to_graph_file)
    return registry
