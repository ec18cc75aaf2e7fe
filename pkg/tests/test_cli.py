import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from codequery import cli
from codequery.cli import Session, main

from conftest import FIXTURES

CORPUS = str(FIXTURES / "corpus")
HISTORY = str(FIXTURES / "history")
RECURSIVE = str(FIXTURES / "history_recursive")


def run_main(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRunOnce:
    def test_callgraph_table(self, capsys):
        code, out, _ = run_main(
            capsys, "run", "callgraph | table", "--corpus", CORPUS,
            "--at", "Main.mini:3:9",
        )
        assert code == 0
        rows = [l for l in out.splitlines() if l and not l.startswith(("caller", "-"))]
        assert len(rows) == 3
        assert any("a.P.rest" in r and "a.P.sleep" in r for r in rows)

    def test_focus_by_node_id(self, capsys):
        code, out, _ = run_main(
            capsys, "run", "callgraph", "--corpus", CORPUS, "--at", "a.P.rest"
        )
        assert code == 0
        assert "a.P.rest -> a.P.sleep" in out

    def test_unknown_query(self, capsys):
        code, _, err = run_main(capsys, "run", "nosuchquery", "--corpus", CORPUS)
        assert code == 1
        assert "nosuchquery" in err

    def test_recursive_and_changed(self, capsys):
        code, out, _ = run_main(
            capsys,
            "run",
            "callgraph -global | reachable -self | changes -c 5 -nodes",
            "--corpus", RECURSIVE + "/6",
            "--repo", RECURSIVE,
        )
        assert code == 0
        # Only the recursive-and-changed method's lines are marked.
        assert "  13 > " in out
        assert "  16 > " not in out  # spin: recursive but unchanged
        assert "   8 > " not in out  # sleep: changed but not recursive

    def test_changed_in_last_five(self, capsys):
        code, out, _ = run_main(
            capsys,
            "run", "callgraph -nodes | changes -c 5 -nodes",
            "--corpus", CORPUS, "--repo", HISTORY, "--at", "a.P.rest",
        )
        assert code == 0
        lines = [l for l in out.splitlines() if ">" in l]
        assert any("sleep()" in l for l in lines)

    def test_missing_query_is_usage_error(self):
        with pytest.raises(SystemExit) as e:
            main(["run"])
        assert e.value.code == 2

    def test_bad_format_is_usage_error(self):
        with pytest.raises(SystemExit) as e:
            main(["run", "callgraph", "--format", "pdf"])
        assert e.value.code == 2

    def test_bad_corpus(self, capsys):
        code, _, err = run_main(capsys, "run", "callgraph", "--corpus", "/nonexistent")
        assert code == 1
        assert "error" in err

    def test_query_error_exit_code(self, capsys):
        code, _, err = run_main(
            capsys, "run", "ast -type Widget", "--corpus", CORPUS
        )
        assert code == 1
        assert "Widget" in err


class TestFormats:
    def test_json(self, capsys):
        code, out, _ = run_main(
            capsys, "run", "callgraph -global | table", "--corpus", CORPUS,
            "--format", "json",
        )
        assert code == 0
        data = json.loads(out)
        assert all(rec["tag"] == "calls" for rec in data)

    def test_dot(self, capsys):
        code, out, _ = run_main(
            capsys, "run", "callgraph -global | arrows", "--corpus", CORPUS,
            "--format", "dot",
        )
        assert code == 0
        assert out.startswith("digraph")
        assert '"a.P.rest" -> "a.P.sleep";' in out

    def test_dot_unsupported_for_table(self, capsys):
        code, _, err = run_main(
            capsys, "run", "callgraph -global | table", "--corpus", CORPUS,
            "--format", "dot",
        )
        assert code == 1
        assert "dot" in err

    def test_byte_stable(self, capsys):
        argv = ["run", "callgraph -global | table", "--corpus", CORPUS]
        _, first, _ = run_main(capsys, *argv)
        _, second, _ = run_main(capsys, *argv)
        assert first == second


class TestSession:
    def test_innermost_focus(self):
        s = Session(CORPUS)
        s.set_focus("Main.mini:4:13")
        node = s.program.resolve(s.focus)
        assert node.span.contains_pos(4, 13)
        assert not any(
            c.span and c.span.contains_pos(4, 13) for c in node.children
        )

    def test_reload_clears_dangling_focus(self, tmp_path):
        src = tmp_path / "M.mini"
        src.write_text("module m { class C { f() {} } }\n")
        s = Session(tmp_path)
        s.set_focus("m.C.f")
        src.write_text("module m { class C { g() {} } }\n")
        s.reload()
        assert s.focus is None
        assert any("focus" in w for w in s.warnings)

    def test_alias_persists(self, tmp_path):
        store = tmp_path / "aliases"
        s = Session(CORPUS, alias_path=store)
        s.define_alias("g", "callgraph -global -nodes")
        again = Session(CORPUS, alias_path=store)
        chunks, _ = again.run_prompt("g | table")
        assert chunks


def repl_args(*extra):
    # An absent scripts directory keeps the REPL hermetic: nothing from
    # a real ./scripts can shadow or extend the registry under test.
    parser = cli._build_parser()
    return parser.parse_args(
        ["repl", "--corpus", CORPUS, "--scripts", "/nonexistent", *extra]
    )


def drive(capsys, lines, *extra):
    code = cli.repl(repl_args(*extra), stdin=io.StringIO("".join(l + "\n" for l in lines)))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRepl:
    def test_quit(self, capsys):
        code, _, err = drive(capsys, [":quit"])
        assert code == 0
        assert err == ""

    def test_eof_exits(self, capsys):
        code, _, _ = drive(capsys, [])
        assert code == 0

    def test_focus_then_query(self, capsys):
        _, out, err = drive(capsys, [":focus a.P.rest", "callgraph", ":quit"])
        assert err == ""
        assert "a.P.rest -> a.P.sleep" in out

    def test_alias_then_use(self, capsys):
        _, out, err = drive(
            capsys, [":alias g = callgraph -nodes", ":focus a.P.rest", "g | table", ":quit"]
        )
        assert err == ""
        assert "a.P.sleep" in out

    def test_format_switch(self, capsys):
        _, out, _ = drive(
            capsys, [":format json", "callgraph -global | table", ":quit"]
        )
        payload = out.split("> ")[2]
        json.loads(payload)

    def test_errors_keep_loop_alive(self, capsys):
        _, out, err = drive(
            capsys,
            ["nosuchquery", ":focus zz.not.there", ":format pdf", "a | | b",
             ":focus a.P.rest", "callgraph", ":quit"],
        )
        assert err.count("error:") == 4
        assert "a.P.rest -> a.P.sleep" in out

    def test_bad_alias_syntax(self, capsys):
        _, _, err = drive(capsys, [":alias broken", ":quit"])
        assert "usage" in err

    @given(
        st.lists(
            st.text(
                alphabet=st.characters(blacklist_categories=["Cs"]),
                max_size=200,
            ).map(lambda s: s.replace("\n", " ").replace("\r", " ")),
            max_size=6,
        )
    )
    @settings(max_examples=25, deadline=None)
    def test_survives_fuzzed_lines(self, lines):
        session_lines = [l for l in lines if l.strip() != ":quit"] + [":quit"]
        stdin = io.StringIO("".join(l + "\n" for l in session_lines))
        assert cli.repl(repl_args(), stdin=stdin) == 0
