"""Regenerate the example documents under docs/protocol-examples/.

Each bundled script gets one request document and the byte-exact
response it produces.  Requests embed AST summaries built from the
bundled fixtures, so regeneration is deterministic.  Scripts with file
arguments use paths relative to the directory named in the matching
`*.cwd` file (repository-root-relative).

Run from the repository root:  python3 tools/gen_protocol_examples.py
"""

import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from codequery.minilang import parse_program  # noqa: E402
from codequery.scripthost import ast_summary  # noqa: E402

OUT = ROOT / "docs" / "protocol-examples"

BRANCHY = """\
module m {
    class C {
        f(x) {
            if (x > 0) {
                print("pos");
            } else {
                print("neg");
            }
            if (x == 0) {
                print("zero");
            }
        }
    }
}
"""


def load(dirname):
    return parse_program(
        [(p.name, p.read_text()) for p in sorted((ROOT / dirname).glob("*.mini"))]
    )


def node_tuple(node_id):
    return {
        "tag": "node",
        "elements": [{"name": "node", "kind": "node", "value": node_id}],
    }


def calls_tuple(caller, callee):
    return {
        "tag": "calls",
        "elements": [
            {"name": "caller", "kind": "node", "value": caller},
            {"name": "callee", "kind": "node", "value": callee},
        ],
    }


def requests():
    packages = load("fixtures/packages")
    corpus = load("fixtures/corpus")
    branchy = parse_program([("m.mini", BRANCHY)])
    yield "instability", ".", {
        "context": None,
        "args": [],
        "input": [node_tuple("a.C1"), node_tuple("b.X")],
        "astSummary": ast_summary(packages),
    }
    yield "elsefilter", ".", {
        "context": None,
        "args": [],
        "input": [
            node_tuple("m.C.f/body[0]"),
            node_tuple("m.C.f/body[1]"),
        ],
        "astSummary": ast_summary(branchy),
    }
    yield "associatedBugs", ".", {
        "context": None,
        "args": ["fixtures/issues.json"],
        "input": [
            {
                "tag": "data",
                "elements": [
                    {"name": "id", "kind": "string", "value": "bcdef01"},
                    {
                        "name": "message",
                        "kind": "string",
                        "value": "Fix #12 sleep timing",
                    },
                    {"name": "ast", "kind": "node", "value": "a.P.sleep"},
                ],
            }
        ],
        "astSummary": [],
    }
    yield "insertArgPrinting", ".", {
        "context": None,
        "args": [],
        "input": [node_tuple("a.C1.m")],
        "astSummary": ast_summary(packages),
    }
    yield "toHtmlGraph", "<tmp>", {
        "context": None,
        "args": ["example-graph.html"],
        "input": [
            calls_tuple("a.P.rest", "a.P.sleep"),
            calls_tuple("a.P.rest", "a.P.watchTV"),
            calls_tuple("a.P.sleep", "a.P.dream"),
        ],
        "astSummary": [],
    }
    yield "importProfileCSV", ".", {
        "context": None,
        "args": ["fixtures/profile.csv", "prof"],
        "input": [],
        "astSummary": ast_summary(corpus),
    }


def main():
    import tempfile

    OUT.mkdir(parents=True, exist_ok=True)
    for name, cwd, request in requests():
        request_text = json.dumps(request, indent=2, sort_keys=True) + "\n"
        if cwd == "<tmp>":
            workdir = tempfile.mkdtemp()
        else:
            workdir = ROOT
        proc = subprocess.run(
            [sys.executable, str(ROOT / "scripts" / f"{name}.py")],
            input=request_text,
            capture_output=True,
            text=True,
            cwd=workdir,
            check=True,
        )
        (OUT / f"{name}.request.json").write_text(request_text)
        (OUT / f"{name}.response.json").write_text(proc.stdout)
        (OUT / f"{name}.cwd").write_text(cwd + "\n")
        print(f"{name}: {len(proc.stdout)} response bytes")


if __name__ == "__main__":
    main()
