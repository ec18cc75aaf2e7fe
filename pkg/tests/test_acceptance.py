"""End-to-end acceptance checks, one numbered criterion per test.

Each test prints a single pass line on success; pytest reports the
failures.  Budgets are wall-clock upper bounds checked inside the test.
"""

import json
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from codequery import builtins as B
from codequery import history as H
from codequery import promptlang as P
from codequery import scripthost as S
from codequery.cli import Session
from codequery.codemodel import package_of, resolve_call
from codequery.engine import (
    ExecutionContext,
    QueryResult,
    Registry,
    RenderPlan,
    auto_select,
    execute,
    OPERATOR,
    RESOURCE,
    VISUALIZATION,
)
from codequery.minilang import NodeKind, parse_program, print_node
from codequery.tuples import (
    EMPTY,
    TupleSet,
    Value,
    make_tuple,
    node_set,
    serialize,
    union_all,
)

from conftest import FIXTURES
from test_history import materialize_git

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"
EXAMPLES = Path(__file__).resolve().parent.parent / "docs" / "protocol-examples"


@pytest.fixture
def report(capfd):
    def _report(number, title):
        with capfd.disabled():
            print(f"acceptance {number:2d} ({title}): PASS")

    return _report


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds
        self.start = time.monotonic()

    def check(self):
        elapsed = time.monotonic() - self.start
        assert elapsed < self.seconds, f"took {elapsed:.1f}s, budget {self.seconds}s"


def run_pipeline(text, ctx, registry=None):
    registry = registry or B.register_builtins(Registry())
    net = P.to_network(P.parse_prompt(text))
    return execute(net, ctx, registry)


def node(n):
    return Value.node(n)


def text(s):
    return Value.text(s)


def test_01_tuple_listing_fidelity(report):
    budget = Budget(1)
    getters_implicit = TupleSet(
        [make_tuple([("node", node("getAge"))]), make_tuple([("node", node("getAddress"))])]
    )
    getters_explicit = TupleSet(
        [
            make_tuple([("node", node("getAge"))], tag="node"),
            make_tuple([("node", node("getAddress"))], tag="node"),
        ]
    )
    # Tag defaulting: the explicitly tagged listing is the same set.
    assert getters_implicit == getters_explicit
    assert serialize(getters_implicit) == (
        "node: (node: getAddress)\nnode: (node: getAge)\n"
    )

    calls = TupleSet(
        make_tuple([("caller", node(a)), ("callee", node(b))], tag="calls")
        for a, b in [("rest", "watchTV"), ("rest", "sleep"), ("sleep", "dream")]
    )
    assert set(serialize(calls).splitlines()) == {
        "calls: (caller: rest, callee: watchTV)",
        "calls: (caller: rest, callee: sleep)",
        "calls: (caller: sleep, callee: dream)",
    }

    merged = union_all([getters_implicit, calls])
    assert len(merged) == 5
    assert set(serialize(merged).splitlines()) == (
        set(serialize(calls).splitlines()) | set(serialize(getters_implicit).splitlines())
    )

    mixed = union_all(
        [
            calls,
            TupleSet(
                [
                    make_tuple([("commit", text("bcdef01")), ("author", text("John"))]),
                    make_tuple(
                        [("commit", text("bcdef01")), ("node", node("sleep"))],
                        tag="changes",
                    ),
                ]
            ),
        ]
    )
    lines = set(serialize(mixed).splitlines())
    assert 'commit: (commit: "bcdef01", author: "John")' in lines
    assert 'changes: (commit: "bcdef01", node: sleep)' in lines
    assert len(lines) == 5
    budget.check()
    report(1, "tuple exchange format fidelity")


def changed_methods_oracle(program, history, n):
    """Line-by-line span scan over the last n commits' change ranges."""
    changed = set()
    for _commit, records in H.changes_for_commits(history, H.last_commits(history, n)):
        for rec in records:
            for method in program.nodes_of_kind("Method"):
                if method.span.file != rec.file:
                    continue
                for s, e in rec.ranges:
                    for line in range(s, e + 1):
                        if method.span.start_line <= line <= method.span.end_line:
                            changed.add(method.id)
    return changed


def callee_closure_oracle(program, start_id):
    """DFS over individually re-resolved call sites."""
    seen = {start_id}
    stack = [start_id]
    while stack:
        method = program.resolve(stack.pop())
        for n in method.walk():
            if n.kind != NodeKind.CallExpression:
                continue
            target = resolve_call(program, n)
            if target and target.id not in seen:
                seen.add(target.id)
                stack.append(target.id)
    return seen


def test_02_focused_callgraph_changes_pipeline(corpus, report):
    budget = Budget(2)
    history = H.FixtureHistory(FIXTURES / "history")
    ctx = ExecutionContext(
        program=corpus, context_node="a.P.rest", history=history
    )
    (sink,) = run_pipeline("callgraph -nodes | changes -c 5 -nodes", ctx)
    assert sink.output == node_set(["a.P.sleep"])
    oracle = callee_closure_oracle(corpus, "a.P.rest") & changed_methods_oracle(
        corpus, history, 5
    )
    assert sink.output == node_set(oracle)
    budget.check()
    report(2, "focused call graph x recent changes")


def closure(edges):
    reach = set(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(reach):
            for c, d in list(reach):
                if b == c and (a, d) not in reach:
                    reach.add((a, d))
                    changed = True
    return reach


def test_03_recursive_and_changed(report):
    budget = Budget(30)
    root = FIXTURES / "history_recursive"
    program = parse_program([("Main.mini", (root / "6" / "Main.mini").read_text())])
    ctx = ExecutionContext(program=program, history=H.FixtureHistory(root))
    (sink,) = run_pipeline(
        "callgraph -global | reachable -self | changes -c 5 -nodes", ctx
    )
    assert sink.output == node_set(["a.P.loop"])

    # The cycle detector against a cubic transitive-closure oracle.
    rng = random.Random(1003)
    mismatches = 0
    for _ in range(1000):
        n = rng.randint(1, 15)
        edges = {
            (rng.randrange(n), rng.randrange(n))
            for _ in range(rng.randint(0, 2 * n))
        }
        if not edges:
            continue
        ts = TupleSet(
            make_tuple([("caller", node(f"v{a}")), ("callee", node(f"v{b}"))], tag="calls")
            for a, b in edges
        )
        got = B.q_reachable(ExecutionContext(), ["-self"], [ts]).output
        want = node_set(f"v{a}" for a, b in closure(edges) if a == b)
        if got != want:
            mismatches += 1
    assert mismatches == 0
    budget.check()
    report(3, "recursive-and-recently-changed methods")


def native_instability(program):
    """Per-package I = Ce / (Ce + Ca), counting every import edge."""
    efferent, afferent, packages = {}, {}, set()
    for cls in program.nodes_of_kind("Class"):
        pkg = package_of(program, cls)
        packages.add(pkg)
        for imp in cls.children_with_role("import"):
            target = imp.name.rsplit(".", 1)[0] if "." in imp.name else ""
            if not target or target == pkg:
                continue
            packages.add(target)
            efferent[pkg] = efferent.get(pkg, 0) + 1
            afferent[target] = afferent.get(target, 0) + 1
    out = {}
    for pkg in packages:
        e, a = efferent.get(pkg, 0), afferent.get(pkg, 0)
        out[pkg] = e / (e + a) if e + a > 0 else 1.0
    return out


def script_instability(program):
    query = S.ScriptQuery("instability", str(SCRIPTS / "instability.py"), (sys.executable,))
    ctx = ExecutionContext(program=program)
    classes = node_set(n.id for n in program.nodes_of_kind("Class"))
    request = S.make_request(ctx, [], [classes])
    out, _ = S.invoke(query, request)
    return {t.get("package").raw: t.get("instability").raw for t in out}


def random_package_fixture(rng):
    n_pkgs = rng.randint(2, 5)
    names = [f"p{i}" for i in range(n_pkgs)]
    sources = []
    for name in names:
        body = []
        for c in range(rng.randint(1, 3)):
            imports = "".join(
                f" import {rng.choice([t for t in names if t != name])}.K;"
                for _ in range(rng.randint(0, 2))
            )
            body.append(f"    class C{c} {{{imports} m() {{}} }}")
        sources.append((f"{name}.mini", f"module {name} {{\n" + "\n".join(body) + "\n}\n"))
    return parse_program(sources)


def test_04_instability_metric(packages, report):
    budget = Budget(5)
    # Two-package fixture: both through the script and the native formula.
    assert script_instability(packages) == {"a": 1.0, "b": 0.0}
    assert native_instability(packages) == {"a": 1.0, "b": 0.0}
    rng = random.Random(1004)
    for _ in range(5):
        program = random_package_fixture(rng)
        assert script_instability(program) == native_instability(program)
    budget.check()
    report(4, "package instability metric")


MUTATION_SRC = (
    "module p {\n"
    "    class K {\n"
    "        f(x, y) {\n"
    "            return x + y;\n"
    "        }\n"
    "        g(a) {\n"
    "            print(a);\n"
    "        }\n"
    "        h() {}\n"
    "    }\n"
    "}\n"
)


def test_05_argument_printing_mutation(tmp_path, report):
    budget = Budget(2)
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    (corpus_dir / "p.mini").write_text(MUTATION_SRC)
    program = parse_program([("p.mini", MUTATION_SRC)])
    before_g = print_node(program.resolve("p.K.g"), 0)
    ctx = ExecutionContext(program=program, corpus_dir=str(corpus_dir))

    result = B.q_insert_arg_printing(ctx, [], [node_set(["p.K.f", "p.K.h"])])
    assert result.output == node_set(["p.K.f", "p.K.h"])

    after = parse_program([("p.mini", (corpus_dir / "p.mini").read_text())])
    # Untouched method identical after print-normalization.
    assert print_node(after.resolve("p.K.g"), 0) == before_g
    # k parameters -> k+1 leading prints.
    for method_id, params in [("p.K.f", 2), ("p.K.h", 0)]:
        body = after.resolve(method_id).children_with_role("body")
        leading = 0
        for stmt in body:
            if stmt.kind != NodeKind.PrintStatement:
                break
            leading += 1
        assert leading == params + 1
    budget.check()
    report(5, "argument-printing mutation")


def random_prompt_ast(rng, depth=0):
    stages = []
    for _ in range(rng.randint(1, 3)):
        if depth < 2 and rng.random() < 0.3:
            branches = tuple(
                random_prompt_ast(rng, depth + 1).pipeline
                for _ in range(rng.randint(2, 3))
            )
            stages.append(P.Group(rng.choice(["join", "minus"]), branches))
        else:
            name = "q" + "".join(rng.choice("abcdef") for _ in range(3))
            args = tuple(
                "".join(rng.choice("xyz-=~.,0123") for _ in range(rng.randint(1, 5)))
                for _ in range(rng.randint(0, 3))
            )
            stages.append(P.Invocation(name, args))
    return P.PromptAst(tuple(stages))


def test_06_prompt_topology_and_roundtrip(report):
    budget = Budget(10)
    observed = {}

    def make(name, out=None):
        def impl(ctx, args, inputs):
            observed[name] = union_all(inputs) if inputs else EMPTY
            return QueryResult(output=out if out is not None else observed[name])

        return impl

    reg = Registry()
    reg.register("foo", RESOURCE, make("foo", node_set(["f"])))
    reg.register("bar", RESOURCE, make("bar", node_set(["b"])))
    reg.register("foobar", RESOURCE, make("foobar", node_set(["fb"])))
    reg.register("baz", OPERATOR, make("baz"))
    reg.register("queryX", OPERATOR, make("queryX"))
    for name in ("vis1", "vis2"):
        def vis(ctx, args, inputs, _name=name):
            observed[_name] = union_all(inputs)
            return QueryResult(output=EMPTY, plan=RenderPlan("table", observed[_name]))

        reg.register(name, VISUALIZATION, vis)

    prompt = "{ {foo ; bar} | baz ; foobar } | queryX | {vis1 ; vis2}"
    execute(P.to_network(P.parse_prompt(prompt)), ExecutionContext(), reg)
    assert observed["baz"] == node_set(["f", "b"])
    assert observed["queryX"] == node_set(["f", "b", "fb"])
    assert observed["vis1"] == observed["vis2"] == observed["queryX"]

    rng = random.Random(1006)
    failures = sum(
        1
        for _ in range(1000)
        if P.parse_prompt(P.serialize_prompt(ast := random_prompt_ast(rng))) != ast
    )
    assert failures == 0
    budget.check()
    report(6, "prompt lowering and round-trip")


def test_07_renderer_auto_selection(report):
    def rel(*pairs):
        return TupleSet(
            make_tuple([("a", node(x)), ("b", node(y))], tag="calls") for x, y in pairs
        )

    def nodes(*ids):
        return node_set(ids)

    def msg(anchor):
        return make_tuple([("message", text("hi")), ("ast", node(anchor))])

    cases = [
        (rel(("a", "b")), "arrows"),
        (rel(("a", "b"), ("b", "c")), "arrows"),
        (rel(("a", "a")), "arrows"),
        (rel(("a", "b"), ("c", "d"), ("e", "f")), "arrows"),
        (nodes("a"), "highlight"),
        (nodes("a", "b"), "highlight"),
        (nodes("a", "b", "c"), "highlight"),
        (nodes("x"), "highlight"),
        (TupleSet([msg("a")]), "messages"),
        (TupleSet([msg("a"), msg("b")]), "messages"),
        (union_all([TupleSet([msg("a")]), rel(("a", "b"))]), "messages"),
        (union_all([TupleSet([msg("a")]), nodes("z")]), "messages"),
        (TupleSet(), "table"),
        (TupleSet([make_tuple([("x", Value.integer(1))])]), "table"),
        (TupleSet([make_tuple([("s", text("t"))])]), "table"),
        (TupleSet([make_tuple([("n", node("a")), ("w", Value.integer(2))])]), "table"),
        (union_all([nodes("a"), rel(("a", "b"))]), "table"),
        (TupleSet([make_tuple([("x", Value.real(0.5))])]), "table"),
        (union_all([nodes("a"), TupleSet([make_tuple([("k", text("v"))])])]), "table"),
        (
            TupleSet(
                [make_tuple([("a", node("x")), ("b", node("y")), ("c", text("t"))])]
            ),
            "arrows",
        ),
    ]
    assert len(cases) == 20
    for ts, expected in cases:
        for _ in range(3):  # deterministic
            assert auto_select(ts).renderer == expected
    report(7, "automatic renderer selection")


def brute_force_join(left, right, on):
    out = set()
    for a in left:
        for b in right:
            if all(a.get(k) == b.get(k) for k in on if a.get(k) and b.get(k)):
                shared_ok = all(
                    a.get(k) == b.get(k)
                    for k in set(a.names()) & set(b.names())
                )
                if shared_ok:
                    out.add((a, b))
    return out


def test_08_join_oracle(report):
    budget = Budget(10)
    rng = random.Random(1008)
    mismatches = 0
    for _ in range(500):
        left = TupleSet(
            make_tuple(
                [("k", Value.integer(rng.randint(0, 4))),
                 ("x", Value.integer(rng.randint(0, 6)))],
                tag="l",
            )
            for _ in range(rng.randint(0, 20))
        )
        right = TupleSet(
            make_tuple(
                [("k", Value.integer(rng.randint(0, 4))),
                 ("y", Value.integer(rng.randint(0, 6)))],
                tag="r",
            )
            for _ in range(rng.randint(0, 20))
        )
        both = union_all([left, right])
        got = B.q_join(ExecutionContext(), ["l.k,l.x,r.y"], [both]).output
        want = {
            (a.get("k").raw, a.get("x").raw, b.get("y").raw)
            for a, b in brute_force_join(left, right, ["k"])
        }
        got_rows = {(t.get("k").raw, t.get("x").raw, t.get("y").raw) for t in got}
        if got_rows != want:
            mismatches += 1
    assert mismatches == 0

    # The documented selector string, straight from the prompt.
    ast = P.parse_prompt("join change.id,commit.message,ast -as data")
    (stage,) = ast.pipeline
    both = union_all(
        [
            TupleSet(
                [
                    make_tuple(
                        [("id", text("c1")), ("ast", node("a.P.sleep"))], tag="change"
                    )
                ]
            ),
            TupleSet(
                [
                    make_tuple(
                        [("id", text("c1")), ("author", text("John")),
                         ("message", text("Fix #12"))],
                        tag="commit",
                    )
                ]
            ),
        ]
    )
    out = B.q_join(ExecutionContext(), list(stage.args), [both]).output
    (t,) = out
    assert t.tag == "data"
    assert t.get("message").raw == "Fix #12"
    assert t.get("ast").raw == "a.P.sleep"
    budget.check()
    report(8, "join operator oracle")


def test_09_commit_issue_explanation(report):
    session = Session(
        FIXTURES / "corpus",
        repo_dir=FIXTURES / "history",
        scripts_dir=SCRIPTS,
    )
    issues = str(FIXTURES / "issues.json")
    chunks, _warnings = session.run_prompt(
        "ast -type Statement -topLevel | changes -intermediate "
        f"| join change.id,commit.message,ast -as data | associatedBugs {issues}"
    )
    (rendered,) = chunks
    linked = [
        line for line in rendered.splitlines() if "Issue #12" in line
    ]
    assert len(linked) == 1
    assert "Fix #12 sleep timing" in linked[0]
    assert "Crash on save" in linked[0]
    assert linked[0].startswith("Main.mini:8:")
    report(9, "commit and issue explanation pipeline")


def test_10_history_backend_equivalence(tmp_path, report):
    budget = Budget(20)
    histories = [FIXTURES / "history", FIXTURES / "history_recursive"]
    third = tmp_path / "hist"
    texts = ["m\na\nb\n", "m\nA\nb\nc\n", "m\nA\nc\n"]
    (third).mkdir()
    (third / "log.txt").write_text("h1|A|one|\nh2|B|two|h1\nh3|C|three|h2\n")
    for i, body in enumerate(texts):
        d = third / str(i)
        d.mkdir()
        (d / "f.mini").write_text(body)
    histories.append(third)

    for i, root in enumerate(histories):
        fixture = H.FixtureHistory(root)
        git = materialize_git(fixture, tmp_path / f"repo{i}")
        f_commits, g_commits = fixture.commits(), git.commits()
        assert [(c.author, c.message) for c in f_commits] == [
            (c.author, c.message) for c in g_commits
        ]
        f_changes = H.changes_for_commits(fixture, f_commits)
        g_changes = H.changes_for_commits(git, g_commits)
        for (_, frecs), (_, grecs) in zip(f_changes, g_changes):
            assert [(r.file, r.ranges) for r in frecs] == [
                (r.file, r.ranges) for r in grecs
            ]
    budget.check()
    report(10, "history backend equivalence")


def test_11_profile_heatmap(corpus, report):
    budget = Budget(2)
    ctx = ExecutionContext(program=corpus, corpus_dir=str(FIXTURES))
    imported = B.q_import_csv(ctx, ["profile.csv", "-node", "method"], [])
    (sink_result,) = [B.q_heatmap(ctx, [], [imported.output])]
    buckets = sink_result.plan.options["buckets"]
    assert buckets == {"a.P.rest": 0, "a.P.sleep": 4, "a.P.dream": 9}

    rng = random.Random(1011)
    for _ in range(1000):
        entries = [
            (f"n{i}", rng.uniform(-1e6, 1e6)) for i in range(rng.randint(1, 12))
        ]
        buckets = B.heat_buckets(entries)
        values = dict(entries)
        for n1, v1 in entries:
            for n2, v2 in entries:
                if v1 <= v2:
                    assert buckets[n1] <= buckets[n2]
        assert all(0 <= b <= 9 for b in buckets.values())
    budget.check()
    report(11, "profile heatmap bucketing")


def test_12_script_protocol_conformance(corpus, tmp_path, report):
    budget = Budget(30)
    # Frozen example documents reproduce byte for byte.
    names = sorted(p.stem.replace(".request", "") for p in EXAMPLES.glob("*.request.json"))
    assert len(names) == 6
    for name in names:
        request = (EXAMPLES / f"{name}.request.json").read_bytes()
        expected = (EXAMPLES / f"{name}.response.json").read_bytes()
        cwd = (EXAMPLES / f"{name}.cwd").read_text().strip()
        workdir = tmp_path if cwd == "<tmp>" else EXAMPLES.parent.parent
        proc = subprocess.run(
            [sys.executable, str(SCRIPTS / f"{name}.py")],
            input=request, capture_output=True, cwd=workdir,
        )
        assert proc.returncode == 0 and proc.stdout == expected, name

    # The script filter agrees with the native one on the whole corpus.
    statements = node_set(n.id for n in corpus.nodes_of_kind("Statement"))
    query = S.ScriptQuery("elsefilter", str(SCRIPTS / "elsefilter.py"), (sys.executable,))
    ctx = ExecutionContext(program=corpus)
    out, _ = S.invoke(query, S.make_request(ctx, [], [statements]))
    native = TupleSet(
        t
        for t in statements
        if (n := corpus.resolve(t.get("node").raw)).kind == NodeKind.IfStatement
        and n.child("else") is not None
        and n.child("else").children
    )
    assert out == native

    # A 10 MB payload round-trips without deadlock.
    echo = tmp_path / "echo.py"
    echo.write_text(
        "import json, sys\n"
        "req = json.load(sys.stdin)\n"
        'json.dump({"output": req["input"], "error": None, "warnings": []}, sys.stdout)\n'
    )
    big = TupleSet(
        make_tuple([("node", node(f"n{i:06d}")), ("pad", text("x" * 80))])
        for i in range(80_000)
    )
    request = {"context": None, "args": [],
               "input": S.encode_tuple_set(big), "astSummary": []}
    assert len(json.dumps(request)) > 10_000_000
    out, _ = S.invoke(S.ScriptQuery("echo", str(echo), (sys.executable,)), request)
    assert out == big
    budget.check()
    report(12, "script protocol conformance")
