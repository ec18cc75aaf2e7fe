"""Query execution: registry, network validation, sequential dataflow runs.

A network is a DAG of query invocations plus joining/subtracting merge
nodes.  Queries run exactly once, in topological order; each output is
duplicated to all consumers.  Terminal outputs that no query consumed get
a visualization chosen from the structure of the tuple set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import CycleError, CodeQueryError, DuplicateQueryName, QueryError
from .tuples import EMPTY, NODE, TupleSet, subtract, union_all

RESOURCE = "resource"
OPERATOR = "operator"
VISUALIZATION = "visualization"


@dataclass
class RenderPlan:
    renderer: str  # messages | arrows | highlight | table | heatmap | ...
    payload: TupleSet
    options: dict = field(default_factory=dict)


@dataclass
class QueryResult:
    output: TupleSet = EMPTY
    plan: Optional[RenderPlan] = None
    warnings: list = field(default_factory=list)


@dataclass
class ExecutionContext:
    program: object = None
    context_node: Optional[str] = None  # NodeId of the prompt's cursor node
    history: object = None
    issues: object = None
    script_dir: Optional[str] = None
    corpus_dir: Optional[str] = None


@dataclass(frozen=True)
class Registration:
    name: str
    kind: str  # resource | operator | visualization
    arity: int  # declared number of inputs
    impl: Callable  # (ctx, args, inputs) -> QueryResult


class Registry:
    def __init__(self):
        self._queries = {}
        self.warnings = []

    def register(self, name, kind, impl, arity=1):
        if name in self._queries:
            raise DuplicateQueryName(f"query {name!r} already registered")
        self._queries[name] = Registration(name, kind, arity, impl)

    def register_shadowable(self, name, kind, impl, arity=1):
        """Used by script discovery: builtins shadow scripts, with a warning."""
        if name in self._queries:
            self.warnings.append(
                f"script query {name!r} shadowed by a built-in of the same name"
            )
            return
        self._queries[name] = Registration(name, kind, arity, impl)

    def lookup(self, name) -> Optional[Registration]:
        return self._queries.get(name)

    def names(self):
        return sorted(self._queries)


# --- network ---

@dataclass
class NetNode:
    id: int
    kind: str  # "query" | "join" | "minus"
    name: str = ""  # query name for kind == "query"
    args: list = field(default_factory=list)


@dataclass
class QueryNetwork:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)  # (from_id, to_id, port)

    def add_node(self, kind, name="", args=None) -> NetNode:
        node = NetNode(len(self.nodes), kind, name, list(args or []))
        self.nodes.append(node)
        return node

    def connect(self, src: NetNode, dst: NetNode, port: int = 0):
        self.edges.append((src.id, dst.id, port))

    def incoming(self, node_id):
        return sorted(
            ((f, p) for f, t, p in self.edges if t == node_id), key=lambda e: e[1]
        )

    def consumers(self, node_id):
        return [t for f, t, _ in self.edges if f == node_id]

    def topological_order(self):
        indeg = {n.id: 0 for n in self.nodes}
        for _f, t, _p in self.edges:
            indeg[t] += 1
        ready = sorted(i for i, d in indeg.items() if d == 0)
        order = []
        while ready:
            cur = ready.pop(0)
            order.append(cur)
            for f, t, _p in self.edges:
                if f == cur:
                    indeg[t] -= 1
                    if indeg[t] == 0:
                        ready.append(t)
            ready.sort()
        if len(order) != len(self.nodes):
            raise CycleError("query network contains a cycle")
        return order


@dataclass
class SinkOutput:
    node_id: int
    name: str
    output: TupleSet
    plan: RenderPlan
    warnings: list = field(default_factory=list)


def auto_select(ts: TupleSet) -> RenderPlan:
    """Choose a renderer from the structure of the result."""
    tuples = list(ts)
    if any(t.tag == "message" for t in tuples):
        return RenderPlan("messages", ts)
    if tuples and all(len(t.values_of_kind(NODE)) == 2 for t in tuples):
        return RenderPlan("arrows", ts)
    if tuples and all(
        len(t.elements) == 1 and len(t.values_of_kind(NODE)) == 1 for t in tuples
    ):
        return RenderPlan("highlight", ts)
    return RenderPlan("table", ts)


def validate(net: QueryNetwork, registry: Registry):
    net.topological_order()  # raises CycleError
    from .errors import UnknownQuery

    for node in net.nodes:
        if node.kind == "query":
            reg = registry.lookup(node.name)
            if reg is None:
                raise UnknownQuery(f"unknown query {node.name!r}")
            for _f, port in net.incoming(node.id):
                if port >= max(reg.arity, 1):
                    raise QueryError(
                        node.name, f"input port {port} exceeds declared arity {reg.arity}"
                    )


def execute(net: QueryNetwork, ctx: ExecutionContext, registry: Registry):
    """Run the network; returns one SinkOutput per terminal result."""
    validate(net, registry)
    outputs = {}
    suppressed = {}  # node_id -> True when output came only from visualizations
    plans = {}
    warnings = {}
    for node_id in net.topological_order():
        node = net.nodes[node_id]
        inputs = []
        for src, _port in net.incoming(node_id):
            assert src in outputs, "input not populated before invocation"
            inputs.append(outputs[src])
        if node.kind == "join":
            outputs[node_id] = union_all(inputs)
            suppressed[node_id] = bool(inputs) and all(
                suppressed[src] for src, _ in net.incoming(node_id)
            )
            continue
        if node.kind == "minus":
            first = inputs[0] if inputs else EMPTY
            outputs[node_id] = subtract(first, inputs[1:])
            suppressed[node_id] = bool(inputs) and all(
                suppressed[src] for src, _ in net.incoming(node_id)
            )
            continue
        reg = registry.lookup(node.name)
        try:
            result = reg.impl(ctx, list(node.args), inputs)
        except CodeQueryError as e:
            raise QueryError(node.name, str(e))
        outputs[node_id] = result.output
        suppressed[node_id] = reg.kind == VISUALIZATION
        if result.plan is not None:
            plans[node_id] = result.plan
        if result.warnings:
            warnings[node_id] = list(result.warnings)
    sinks = []
    for node in net.nodes:
        node_warnings = warnings.get(node.id, [])
        if node.id in plans:
            sinks.append(
                SinkOutput(node.id, node.name, outputs[node.id], plans[node.id], node_warnings)
            )
        elif not net.consumers(node.id) and not suppressed[node.id]:
            sinks.append(
                SinkOutput(
                    node.id,
                    node.name or node.kind,
                    outputs[node.id],
                    auto_select(outputs[node.id]),
                    node_warnings,
                )
            )
        elif node_warnings:
            sinks.append(
                SinkOutput(node.id, node.name or node.kind, EMPTY, None, node_warnings)
            )
    return sinks
