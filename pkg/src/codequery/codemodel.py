"""Semantic layer: name resolution, static call graph, package dependencies.

Calls resolve by name only.  An unqualified call binds to a method of the
enclosing class, then to a uniquely named method anywhere in the enclosing
module, then to a globally unique method name.  Dotted calls resolve as
absolute qualified names, or relative to an enclosing module.  Unresolved
or ambiguous call sites become warnings, never errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .minilang import Node, NodeKind, Program
from .minilang.parser import dotted_name
from .tuples import TupleSet, Value, make_tuple


@dataclass(frozen=True)
class CallGraph:
    edges: frozenset  # of (caller NodeId, callee NodeId)
    nodes: frozenset  # method NodeIds appearing in the graph
    warnings: tuple = ()

    def successors(self, node_id):
        return {b for a, b in self.edges if a == node_id}


@dataclass
class PackageDeps:
    class_package: dict  # Class NodeId -> package name ("" for top level)
    imports: dict  # Class NodeId -> set of imported package names
    warnings: list = field(default_factory=list)


def package_of(program: Program, node: Node) -> str:
    """Dot-joined enclosing module names, innermost last."""
    parts = []
    cur = program.parent(node)
    while cur is not None:
        if cur.kind == NodeKind.Module:
            parts.append(cur.name)
        cur = program.parent(cur)
    if node.kind == NodeKind.Module:
        parts.insert(0, node.name)
    return ".".join(reversed(parts))


def _method_table(program: Program):
    """Maps for resolution: by class, by simple name, by qualified name."""
    by_class = {}
    by_name = {}
    by_qname = {}
    for m in program.nodes_of_kind("Method"):
        cls = program.enclosing(m, NodeKind.Class)
        by_class.setdefault(cls.id, {})[m.name] = m
        by_name.setdefault(m.name, []).append(m)
        by_qname[program.qualified_name(m)] = m
    return by_class, by_name, by_qname


def resolve_call(program: Program, call: Node, tables=None):
    """Resolve a CallExpression to a Method node, or None."""
    by_class, by_name, by_qname = tables or _method_table(program)
    callee = call.child("callee")
    name = dotted_name(callee)
    if "." in name:
        if name in by_qname:
            return by_qname[name]
        # Relative to enclosing modules, innermost first.
        module = program.enclosing(call, NodeKind.Module)
        while module is not None:
            q = f"{program.qualified_name(module)}.{name}"
            if q in by_qname:
                return by_qname[q]
            module = program.enclosing(module, NodeKind.Module)
        return None
    cls = program.enclosing(call, NodeKind.Class)
    if cls is not None and name in by_class.get(cls.id, {}):
        return by_class[cls.id][name]
    module = program.enclosing(call, NodeKind.Module)
    if module is not None:
        prefix = program.qualified_name(module) + "."
        in_module = [m for m in by_name.get(name, []) if m.id.startswith(prefix)]
        if len(in_module) == 1:
            return in_module[0]
        if len(in_module) > 1:
            return None  # ambiguous within the module
    candidates = by_name.get(name, [])
    if len(candidates) == 1:
        return candidates[0]
    return None


def build_call_graph(program: Program, root: Node | None = None) -> CallGraph:
    """All resolved call edges, or the transitive callee graph of root."""
    tables = _method_table(program)
    edges = set()
    warnings = []
    out_edges = {}
    for method in program.nodes_of_kind("Method"):
        for node in method.walk():
            if node.kind != NodeKind.CallExpression:
                continue
            target = resolve_call(program, node, tables)
            if target is None:
                warnings.append(
                    f"unresolved call {dotted_name(node.child('callee'))!r} at {node.id}"
                )
                continue
            out_edges.setdefault(method.id, set()).add(target.id)
    if root is None:
        for a, succs in out_edges.items():
            for b in succs:
                edges.add((a, b))
        nodes = {n for e in edges for n in e}
        return CallGraph(frozenset(edges), frozenset(nodes), tuple(warnings))
    # Rooted: edges reachable by following callee edges from root.
    seen = {root.id}
    frontier = [root.id]
    while frontier:
        cur = frontier.pop()
        for callee in out_edges.get(cur, ()):
            edges.add((cur, callee))
            if callee not in seen:
                seen.add(callee)
                frontier.append(callee)
    return CallGraph(frozenset(edges), frozenset(seen), tuple(warnings))


def call_graph_tuples(graph: CallGraph) -> TupleSet:
    return TupleSet(
        make_tuple(
            [("caller", Value.node(a)), ("callee", Value.node(b))], tag="calls"
        )
        for a, b in graph.edges
    )


def package_deps(program: Program) -> PackageDeps:
    """Per-class package membership and imported packages.

    The imported package is the dotted prefix of the imported name (all
    segments except the final class segment); trailing separators are
    stripped everywhere.
    """
    class_package = {}
    imports = {}
    for cls in program.nodes_of_kind("Class"):
        class_package[cls.id] = package_of(program, cls)
        pkgs = set()
        for imp in cls.children_with_role("import"):
            prefix = imp.name.rsplit(".", 1)[0] if "." in imp.name else ""
            if prefix:
                pkgs.add(prefix)
        imports[cls.id] = pkgs
    return PackageDeps(class_package, imports)
