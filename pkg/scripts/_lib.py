"""Shared plumbing for the bundled script queries.

Each script reads one JSON request from standard input and writes one
JSON response to standard output.  Responses are always emitted with
sorted keys, compact separators, and records in canonical order, so a
given request maps to exactly one byte sequence.
"""

import json
import sys


def read_request():
    return json.load(sys.stdin)


def canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def respond(output, warnings=None, error=None):
    records = sorted(output, key=canonical)
    sys.stdout.write(
        canonical({"output": records, "error": error, "warnings": warnings or []})
    )


def fail(message):
    respond([], error=message)
    sys.exit(0)


def element(name, kind, value):
    return {"name": name, "kind": kind, "value": value}


def record(tag, elements):
    return {"tag": tag, "elements": elements}


def tuple_elements(rec):
    """name -> (kind, value) for one encoded tuple."""
    return {el["name"]: (el["kind"], el["value"]) for el in rec["elements"]}


def node_refs(rec):
    return [el["value"] for el in rec["elements"] if el["kind"] == "node"]


class Ast:
    """The flattened program summary, reassembled into a walkable tree."""

    def __init__(self, summary):
        self.rows = {}
        self.children = {}
        for node_id, kind, name, parent_id, span in summary:
            self.rows[node_id] = (kind, name, parent_id, span)
            self.children.setdefault(parent_id, []).append(node_id)

    def kind(self, node_id):
        return self.rows[node_id][0]

    def name(self, node_id):
        return self.rows[node_id][1]

    def parent(self, node_id):
        return self.rows[node_id][2]

    def children_of(self, node_id):
        return self.children.get(node_id, [])

    def children_of_kind(self, node_id, kind):
        return [c for c in self.children_of(node_id) if self.kind(c) == kind]

    def package_of(self, node_id):
        """Dot-joined names of the enclosing modules, outermost first."""
        parts = []
        cur = node_id if self.kind(node_id) == "Module" else self.parent(node_id)
        while cur is not None:
            if self.kind(cur) == "Module":
                parts.append(self.name(cur))
            cur = self.parent(cur)
        return ".".join(reversed(parts))
