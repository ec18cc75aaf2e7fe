"""Text renderers for query results.

Every renderer is deterministic: rows and files are emitted in canonical
order so documented example commands are byte-stable across runs.
"""

from __future__ import annotations

from .errors import FormatUnsupported
from .tuples import NODE, TupleSet

ANSI_COLORS = {
    "red": "31",
    "green": "32",
    "yellow": "33",
    "blue": "34",
    "magenta": "35",
    "cyan": "36",
}

# Red-green spectrum for heat buckets 0 (green) .. 9 (red).
HEAT_COLORS = ["32", "32", "32", "33", "33", "33", "33", "31", "31", "31"]


def _colorize(text, code, enabled):
    if not enabled or not code:
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def plain_value(value) -> str:
    """Unquoted rendering used in tables and predicates."""
    if value.kind == "string":
        return value.raw
    if value.kind == "real":
        return repr(value.raw)
    return str(value.raw)


def render_table(ts: TupleSet) -> str:
    tuples = ts.sorted()
    tags = sorted({t.tag for t in tuples})
    columns = []
    for t in tuples:
        for name in t.names():
            if name not in columns:
                columns.append(name)
    show_tag = len(tags) > 1
    header = (["tag"] if show_tag else []) + columns
    rows = []
    for t in tuples:
        row = [t.tag] if show_tag else []
        for c in columns:
            v = t.get(c)
            row.append(plain_value(v) if v is not None else "")
        rows.append(row)
    if not columns:
        return "(empty table)\n"
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _node_refs(ts: TupleSet):
    refs = set()
    for t in ts:
        for v in t.values_of_kind(NODE):
            refs.add(v.raw)
    return refs


def render_highlight(ts: TupleSet, program, color=None, use_color=False) -> str:
    """Source listing with every referenced node's lines marked."""
    marked = {}  # file -> set of line numbers
    for ref in _node_refs(ts):
        node = program.resolve(ref)
        lines = marked.setdefault(node.span.file, set())
        lines.update(range(node.span.start_line, node.span.end_line + 1))
    code = ANSI_COLORS.get(color or "yellow")
    out = []
    for path in sorted(marked):
        out.append(f"=== {path} ===")
        for i, text in enumerate(program.file_lines(path), start=1):
            if i in marked[path]:
                out.append(_colorize(f"{i:4} > {text}", code, use_color))
            else:
                out.append(f"{i:4}   {text}")
    return "\n".join(out) + "\n" if out else "(nothing to highlight)\n"


def _edges(ts: TupleSet):
    edges = []
    for t in ts.sorted():
        refs = t.values_of_kind(NODE)
        if len(refs) == 2:
            edges.append((refs[0].raw, refs[1].raw))
    return edges


def render_arrows(ts: TupleSet) -> str:
    """Adjacency listing of a relation."""
    lines = [f"{a} -> {b}" for a, b in _edges(ts)]
    return "\n".join(lines) + "\n" if lines else "(empty relation)\n"


def render_dot(ts: TupleSet) -> str:
    edges = _edges(ts)
    nodes = sorted({n for e in edges for n in e} | _node_refs(ts))
    lines = ["digraph g {"]
    for n in nodes:
        lines.append(f'    "{n}";')
    for a, b in edges:
        lines.append(f'    "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_messages(ts: TupleSet, program) -> str:
    """Each message anchored at its node's file:line."""
    rows = []
    for t in ts.sorted():
        message = t.get("message")
        anchor = t.get("ast")
        node = program.resolve(anchor.raw)
        first_line = message.raw.split("\n")[0] if message else ""
        rows.append(f"{node.span.file}:{node.span.start_line}: {first_line}")
        for extra in (message.raw.split("\n")[1:] if message else []):
            rows.append(f"    {extra}")
    return "\n".join(rows) + "\n" if rows else "(no messages)\n"


def render_heatmap(ts: TupleSet, program, buckets: dict, use_color=False) -> str:
    """Annotated listing: each heat entry's lines carry its color bucket."""
    by_file = {}
    for node_id, bucket in buckets.items():
        node = program.resolve(node_id)
        by_file.setdefault(node.span.file, []).append((node, bucket))
    out = []
    for path in sorted(by_file):
        out.append(f"=== {path} ===")
        line_bucket = {}
        for node, bucket in by_file[path]:
            for ln in range(node.span.start_line, node.span.end_line + 1):
                line_bucket[ln] = bucket
        for i, text in enumerate(program.file_lines(path), start=1):
            if i in line_bucket:
                b = line_bucket[i]
                mark = f"[{b}]"
                out.append(
                    _colorize(f"{i:4} {mark:>4} {text}", HEAT_COLORS[b], use_color)
                )
            else:
                out.append(f"{i:4}      {text}")
    return "\n".join(out) + "\n" if out else "(empty heatmap)\n"


def render_plan(plan, program, fmt="text", use_color=False) -> str:
    """Render one RenderPlan in the requested output format."""
    if fmt == "json":
        from .scripthost import encode_tuple_set
        import json

        return json.dumps(encode_tuple_set(plan.payload), indent=2, sort_keys=True) + "\n"
    if fmt == "dot":
        if plan.renderer != "arrows":
            raise FormatUnsupported(f"dot output unsupported for {plan.renderer}")
        return render_dot(plan.payload)
    if fmt != "text":
        raise FormatUnsupported(f"unknown format {fmt!r}")
    r = plan.renderer
    if r == "table":
        return render_table(plan.payload)
    if r == "highlight":
        return render_highlight(
            plan.payload, program, plan.options.get("color"), use_color
        )
    if r == "arrows":
        return render_arrows(plan.payload)
    if r == "messages":
        return render_messages(plan.payload, program)
    if r == "heatmap":
        return render_heatmap(
            plan.payload, program, plan.options.get("buckets", {}), use_color
        )
    if r == "note":
        return plan.options.get("text", "") + "\n"
    raise FormatUnsupported(f"unknown renderer {r!r}")
