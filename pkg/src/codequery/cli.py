"""Command line entry point: one-shot query runner and interactive REPL.

Exit codes: 0 success, 1 query or corpus error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from . import promptlang as P
from .builtins import register_builtins
from .engine import ExecutionContext, Registry, execute
from .errors import CodeQueryError, UnknownNodeId
from .history import IssueProvider, open_history
from .minilang import parse_program
from .render import render_plan
from .scripthost import register_scripts

FORMATS = ("text", "json", "dot")

_POSITION = re.compile(r"(.+):(\d+):(\d+)$")


class UsageError(Exception):
    pass


class Session:
    """All state behind one prompt: corpus, providers, aliases, focus."""

    def __init__(
        self,
        corpus_dir,
        repo_dir=None,
        scripts_dir=None,
        alias_path=None,
        issues_path=None,
        output_format="text",
        use_color=False,
    ):
        self.corpus_dir = Path(corpus_dir)
        self.repo_dir = Path(repo_dir) if repo_dir else None
        self.scripts_dir = Path(scripts_dir) if scripts_dir else None
        self.alias_path = Path(alias_path) if alias_path else None
        self.issues_path = Path(issues_path) if issues_path else None
        self.output_format = output_format
        self.use_color = use_color
        self.focus = None
        self.warnings = []
        self.program = None
        self.history = None
        self.issues = None
        self.aliases = (
            P.AliasTable.load(self.alias_path) if self.alias_path else P.AliasTable()
        )
        self.registry = register_builtins(Registry())
        if self.scripts_dir:
            register_scripts(self.registry, self.scripts_dir)
        self.warnings.extend(self.registry.warnings)
        self.reload()

    def reload(self):
        sources = [
            (p.name, p.read_text())
            for p in sorted(self.corpus_dir.glob("*.mini"))
        ]
        if not sources:
            raise CodeQueryError(f"no .mini sources under {self.corpus_dir}")
        self.program = parse_program(sources)
        if self.repo_dir:
            self.history = open_history(self.repo_dir)
        issues_path = self.issues_path
        if issues_path is None:
            for candidate in (
                self.corpus_dir / "issues.json",
                self.corpus_dir.parent / "issues.json",
            ):
                if candidate.is_file():
                    issues_path = candidate
                    break
        self.issues = IssueProvider(issues_path) if issues_path else None
        if self.focus and self.focus not in self.program.index:
            self.warnings.append(f"focus {self.focus} no longer resolves; cleared")
            self.focus = None

    def set_focus(self, spec: str):
        """NODEID, or FILE:LINE:COL resolving to the innermost node there."""
        m = _POSITION.fullmatch(spec)
        if m:
            node = self.program.node_at(m.group(1), int(m.group(2)), int(m.group(3)))
            if node is None:
                raise UnknownNodeId(f"no node at {spec}")
            self.focus = node.id
        else:
            self.focus = self.program.resolve(spec).id

    def run_prompt(self, text: str):
        """Execute one prompt line; returns (rendered chunks, warnings)."""
        ast = P.expand(self.aliases, P.parse_prompt(text))
        P.validate(ast, self.registry)
        net = P.to_network(ast)
        ctx = ExecutionContext(
            program=self.program,
            context_node=self.focus,
            history=self.history,
            issues=self.issues,
            script_dir=str(self.scripts_dir) if self.scripts_dir else None,
            corpus_dir=str(self.corpus_dir),
        )
        sinks = execute(net, ctx, self.registry)
        if ctx.program is not self.program:  # a mutation query rewrote the corpus
            self.program = ctx.program
        chunks = []
        warnings = []
        for sink in sinks:
            warnings.extend(sink.warnings)
            if sink.plan is None:
                continue
            if self.output_format == "json" and sink.plan.renderer == "note":
                continue
            chunks.append(self.render(sink))
        return chunks, warnings

    def render(self, sink) -> str:
        return render_plan(
            sink.plan,
            self.program,
            fmt=self.output_format,
            use_color=self.use_color,
        )

    def define_alias(self, name: str, body: str):
        self.aliases.define(name, body)
        if self.alias_path:
            self.alias_path.parent.mkdir(parents=True, exist_ok=True)
            self.aliases.save(self.alias_path)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codequery", description="Composable code-information queries."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--corpus", default=".", help="directory of .mini sources")
        p.add_argument("--repo", default=None, help="history directory (git or fixture)")
        p.add_argument(
            "--scripts",
            default=os.environ.get("CODEQUERY_SCRIPTS", "./scripts"),
            help="directory of script queries",
        )
        p.add_argument("--issues", default=None, help="issue fixture (JSON)")
        p.add_argument("--aliases", default=None, help="alias store file")
        p.add_argument(
            "--at", default=None, metavar="FILE:LINE:COL|NODEID", help="query context"
        )
        p.add_argument("--format", default="text", choices=FORMATS)
        p.add_argument("--no-color", action="store_true")

    run = sub.add_parser("run", help="execute one query line")
    common(run)
    run.add_argument("query", help="prompt text")

    repl = sub.add_parser("repl", help="interactive prompt")
    common(repl)
    return parser


def _make_session(args) -> Session:
    scripts = args.scripts if args.scripts and Path(args.scripts).is_dir() else None
    use_color = sys.stdout.isatty() and not args.no_color
    session = Session(
        corpus_dir=args.corpus,
        repo_dir=args.repo,
        scripts_dir=scripts,
        alias_path=args.aliases,
        issues_path=args.issues,
        output_format=args.format,
        use_color=use_color,
    )
    if args.at:
        session.set_focus(args.at)
    return session


def _emit(chunks, warnings, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    for w in warnings:
        print(f"warning: {w}", file=err)
    for chunk in chunks:
        out.write(chunk)


def run_once(args) -> int:
    try:
        session = _make_session(args)
        chunks, warnings = session.run_prompt(args.query)
    except CodeQueryError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    _emit(chunks, session.warnings + warnings)
    return 0


_REPL_HELP = """\
commands:
  :focus NODEID|FILE:LINE:COL   set the query context
  :alias NAME = TEXT            define and store an alias
  :reload                       re-read the corpus from disk
  :format text|json|dot         switch the output format
  :quit                         leave
anything else runs as a query line.
"""


def _repl_command(session: Session, line: str) -> bool:
    """Handle one colon command; returns False when the loop should stop."""
    parts = line.split(None, 1)
    cmd, rest = parts[0], parts[1] if len(parts) > 1 else ""
    if cmd == ":quit":
        return False
    if cmd == ":help":
        print(_REPL_HELP, end="")
    elif cmd == ":focus":
        if not rest:
            print(f"focus: {session.focus or '(none)'}")
        else:
            session.set_focus(rest.strip())
    elif cmd == ":alias":
        name, eq, body = rest.partition("=")
        if not eq or not name.strip() or not body.strip():
            raise CodeQueryError("usage: :alias NAME = TEXT")
        session.define_alias(name.strip(), body.strip())
    elif cmd == ":reload":
        session.reload()
    elif cmd == ":format":
        if rest.strip() not in FORMATS:
            raise CodeQueryError(f"format must be one of {', '.join(FORMATS)}")
        session.output_format = rest.strip()
    else:
        raise CodeQueryError(f"unknown command {cmd} (try :help)")
    return True


def repl(args, stdin=None) -> int:
    try:
        session = _make_session(args)
    except CodeQueryError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    _emit([], session.warnings)
    session.warnings = []
    stdin = stdin or sys.stdin
    while True:
        try:
            print("> ", end="", flush=True)
            line = stdin.readline()
        except KeyboardInterrupt:
            print()
            continue
        if not line:
            break
        line = line.strip()
        if not line:
            continue
        try:
            if line.startswith(":"):
                if not _repl_command(session, line):
                    break
            else:
                chunks, warnings = session.run_prompt(line)
                _emit(chunks, warnings)
        except CodeQueryError as e:
            print(f"error: {e}", file=sys.stderr)
        except Exception as e:  # malformed input must not kill the loop
            print(f"error: {e}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_once(args)
    return repl(args)


if __name__ == "__main__":
    sys.exit(main())
