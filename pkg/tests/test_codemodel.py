from codequery import codemodel as cm
from codequery.minilang import parse_program

REST_EDGES = {
    ("a.P.rest", "a.P.watchTV"),
    ("a.P.rest", "a.P.sleep"),
    ("a.P.sleep", "a.P.dream"),
}


class TestCallGraph:
    def test_rooted_rest(self, corpus):
        g = cm.build_call_graph(corpus, corpus.resolve("a.P.rest"))
        assert set(g.edges) == REST_EDGES

    def test_rooted_leaf(self, corpus):
        g = cm.build_call_graph(corpus, corpus.resolve("a.P.dream"))
        assert set(g.edges) == set()
        # The root itself stays in the node set.
        assert "a.P.dream" in g.nodes

    def test_global_includes_self_loop(self, corpus):
        g = cm.build_call_graph(corpus)
        assert ("a.P.loop", "a.P.loop") in g.edges
        assert ("a.P.spin", "a.P.spin") in g.edges

    def test_rooted_subset_of_global(self, corpus):
        g_all = cm.build_call_graph(corpus)
        for method in corpus.nodes_of_kind("Method"):
            g = cm.build_call_graph(corpus, method)
            assert set(g.edges) <= set(g_all.edges)

    def test_unresolved_becomes_warning(self):
        p = parse_program([("x.mini", "module m { class C { f() { ghost(); } } }")])
        g = cm.build_call_graph(p)
        assert g.edges == frozenset()
        assert len(g.warnings) == 1

    def test_qualified_call(self):
        src = (
            "module m { class A { f() { m.B.g(); B.g(); } } "
            "class B { g() {} } }"
        )
        p = parse_program([("x.mini", src)])
        g = cm.build_call_graph(p)
        assert set(g.edges) == {("m.A.f", "m.B.g")}

    def test_ambiguous_unqualified_warns(self):
        src = (
            "module m { class A { f() { g(); } } "
            "class B { g() {} } class C { g() {} } }"
        )
        p = parse_program([("x.mini", src)])
        g = cm.build_call_graph(p)
        assert g.edges == frozenset()
        assert g.warnings

    def test_tuples_injective(self, corpus):
        g = cm.build_call_graph(corpus)
        ts = cm.call_graph_tuples(g)
        assert len(ts) == len(g.edges)
        assert all(t.tag == "calls" for t in ts)


class TestPackageDeps:
    def test_packages_fixture(self, packages):
        deps = cm.package_deps(packages)
        assert deps.class_package["a.C1"] == "a"
        assert deps.class_package["b.X"] == "b"
        assert deps.imports["a.C1"] == {"b"}
        assert deps.imports["b.X"] == set()

    def test_nested_modules(self):
        src = "module a { module b { class C { import x.y.Z; m() {} } } }"
        p = parse_program([("x.mini", src)])
        deps = cm.package_deps(p)
        assert deps.class_package["a.b.C"] == "a.b"
        assert deps.imports["a.b.C"] == {"x.y"}

    def test_import_count_totals(self, corpus, packages):
        for prog in (corpus, packages):
            deps = cm.package_deps(prog)
            total = sum(len(v) for v in deps.imports.values())
            n_imports = len(
                [
                    n
                    for n in prog.nodes_of_kind("NameImport")
                    if "." in n.name
                ]
            )
            assert total == n_imports
