"""Version-history and issue-tracker providers.

Two interchangeable history backends: a plain-text fixture format
(log.txt plus numbered snapshot folders) and a real git repository
driven through the git executable.  Both expose the same operations;
diffs are always computed here from file snapshots so the two backends
produce identical change records.
"""

from __future__ import annotations

import difflib
import json
import re
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import AmbiguousPrefix, NoRepository, UnknownIssue, UnknownRef
from .minilang import Program
from .tuples import TupleSet, Value, make_tuple

ISSUE_REF = re.compile(r"#(\d+)")


@dataclass(frozen=True)
class Commit:
    id: str
    author: str
    message: str
    parent: Optional[str]


@dataclass(frozen=True)
class ChangeRecord:
    commit_id: str
    file: str
    ranges: tuple  # of (start_line, end_line), 1-based inclusive, in the newer file


class FixtureHistory:
    """Backend over a directory of numbered snapshots plus log.txt.

    log.txt holds one commit per line, oldest first: id|author|message|parent.
    Snapshot folder N holds the full file tree after commit N.
    """

    def __init__(self, root):
        self.root = Path(root)
        log = self.root / "log.txt"
        if not log.is_file():
            raise NoRepository(f"no log.txt under {self.root}")
        self._commits = []
        self._snapshot_dirs = {}
        for i, line in enumerate(log.read_text().splitlines()):
            if not line.strip():
                continue
            cid, author, message, parent = line.split("|", 3)
            self._commits.append(Commit(cid, author, message, parent or None))
            self._snapshot_dirs[cid] = self.root / str(i)
        if not self._commits:
            raise NoRepository(f"empty history under {self.root}")

    def commits(self):
        """All commits, newest first."""
        return list(reversed(self._commits))

    def snapshot(self, commit: Commit) -> dict:
        d = self._snapshot_dirs[commit.id]
        out = {}
        for path in sorted(d.rglob("*")):
            if path.is_file():
                out[str(path.relative_to(d))] = path.read_text()
        return out


class GitHistory:
    """Backend shelling out to git; see docs/vcs-backend.md."""

    def __init__(self, root):
        self.root = Path(root)
        if not (self.root / ".git").exists():
            raise NoRepository(f"{self.root} is not a git repository")
        try:
            out = self._git("log", "--reverse", "--format=%H%x1f%an%x1f%s%x1f%P")
        except subprocess.CalledProcessError:
            raise NoRepository(f"no commits in {self.root}")
        self._commits = []
        for line in out.splitlines():
            cid, author, message, parents = line.split("\x1f")
            parent = parents.split()[0] if parents else None
            self._commits.append(Commit(cid, author, message, parent))
        if not self._commits:
            raise NoRepository(f"no commits in {self.root}")

    def _git(self, *args) -> str:
        proc = subprocess.run(
            ["git", *args],
            cwd=self.root,
            capture_output=True,
            text=True,
            check=True,
        )
        return proc.stdout

    def commits(self):
        return list(reversed(self._commits))

    def snapshot(self, commit: Commit) -> dict:
        files = self._git("ls-tree", "-r", "--name-only", commit.id).splitlines()
        return {f: self._git("show", f"{commit.id}:{f}") for f in files}

    def rev_parse(self, ref: str) -> Optional[str]:
        try:
            return self._git("rev-parse", "--verify", ref + "^{commit}").strip()
        except subprocess.CalledProcessError:
            return None


def last_commits(provider, n: int):
    """Up to n most recent commits, newest first."""
    return provider.commits()[:n]


def resolve_ref(provider, ref: str) -> Commit:
    """Commit for an id prefix, HEAD~k relative ref, or backend ref name."""
    commits = provider.commits()
    m = re.fullmatch(r"HEAD~(\d+)", ref)
    if ref == "HEAD":
        return commits[0]
    if m:
        k = int(m.group(1))
        if k >= len(commits):
            raise UnknownRef(f"history has only {len(commits)} commits")
        return commits[k]
    matches = [c for c in commits if c.id.startswith(ref)]
    if len(matches) == 1:
        return matches[0]
    if len(matches) > 1:
        raise AmbiguousPrefix(f"{ref!r} matches {len(matches)} commits")
    resolved = getattr(provider, "rev_parse", lambda _: None)(ref)
    if resolved:
        for c in commits:
            if c.id == resolved:
                return c
    raise UnknownRef(f"unknown ref {ref!r}")


def _diff_ranges(old_lines, new_lines):
    """Changed ranges against the new version of one file."""
    ranges = []
    sm = difflib.SequenceMatcher(a=old_lines, b=new_lines, autojunk=False)
    for op, _i1, _i2, j1, j2 in sm.get_opcodes():
        if op == "equal":
            continue
        if j1 == j2:  # pure deletion: mark the deletion point
            if not new_lines:
                continue
            line = min(max(j1 + 1, 1), len(new_lines))
            ranges.append((line, line))
        else:
            ranges.append((j1 + 1, j2))
    return _merge_ranges(ranges)


def _merge_ranges(ranges):
    out = []
    for start, end in sorted(ranges):
        if out and start <= out[-1][1] + 1:
            out[-1] = (out[-1][0], max(out[-1][1], end))
        else:
            out.append((start, end))
    return tuple(out)


def changes_between(provider, older: Commit, newer: Commit):
    """Per-file line changes, expressed against newer's contents."""
    old = provider.snapshot(older)
    new = provider.snapshot(newer)
    records = []
    for path in sorted(new):
        new_lines = new[path].splitlines()
        if path not in old:
            if new_lines:
                records.append(
                    ChangeRecord(newer.id, path, ((1, len(new_lines)),))
                )
            continue
        ranges = _diff_ranges(old[path].splitlines(), new_lines)
        if ranges:
            records.append(ChangeRecord(newer.id, path, ranges))
    return records


def changes_for_commits(provider, commits):
    """(commit, records-vs-parent) for each commit; root diffs against empty."""
    by_id = {c.id: c for c in provider.commits()}
    out = []
    for c in commits:
        if c.parent and c.parent in by_id:
            records = changes_between(provider, by_id[c.parent], c)
        else:
            empty = Commit("0" * 7, "", "", None)
            snap = provider.snapshot(c)
            records = [
                ChangeRecord(c.id, path, ((1, len(text.splitlines())),))
                for path, text in sorted(snap.items())
                if text.splitlines()
            ]
        out.append((c, records))
    return out


def map_changes_to_nodes(
    program: Program, records, granularity: str = "Method"
) -> TupleSet:
    """change:(id, ast) tuples for granularity nodes overlapping a change."""
    tuples = []
    for rec in records:
        for node in program.nodes_of_kind(granularity):
            if node.span.file != rec.file:
                continue
            if any(node.span.overlaps_lines(s, e) for s, e in rec.ranges):
                tuples.append(
                    make_tuple(
                        [("id", Value.text(rec.commit_id)), ("ast", Value.node(node.id))],
                        tag="change",
                    )
                )
    return TupleSet(tuples)


def commit_tuples(commits) -> TupleSet:
    return TupleSet(
        make_tuple(
            [
                ("id", Value.text(c.id)),
                ("author", Value.text(c.author)),
                ("message", Value.text(c.message)),
            ],
            tag="commit",
        )
        for c in commits
    )


def issues_referenced(message: str):
    """All #<digits> references, in order, duplicates preserved."""
    return [int(n) for n in ISSUE_REF.findall(message)]


@dataclass(frozen=True)
class Issue:
    number: int
    title: str
    body: str


class IssueProvider:
    """Issue fixture: a JSON file with number/title/body records."""

    def __init__(self, path):
        self.path = Path(path)
        self._issues = {}
        if self.path.is_file():
            for rec in json.loads(self.path.read_text()):
                self._issues[int(rec["number"])] = Issue(
                    int(rec["number"]), rec["title"], rec.get("body", "")
                )

    def lookup(self, number: int) -> Issue:
        issue = self._issues.get(number)
        if issue is None:
            raise UnknownIssue(f"no issue #{number}")
        return issue

    def all_issues(self):
        return [self._issues[n] for n in sorted(self._issues)]


def open_history(path):
    """Pick a backend: git when a .git directory exists, else fixture."""
    root = Path(path)
    if (root / ".git").exists():
        return GitHistory(root)
    return FixtureHistory(root)
