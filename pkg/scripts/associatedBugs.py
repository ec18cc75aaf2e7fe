"""Build HTML message bubbles linking commits to their referenced issues.

Input tuples need a text "message" element (the commit message) and a
node "ast" element (where to anchor the bubble).  The issue fixture, a
JSON file of number/title/body records, is the first argument.  Issue
numbers are the #n references found in the message; unknown numbers are
skipped with a warning.
"""

import html
import json
import re

import _lib

ISSUE_REF = re.compile(r"#(\d+)")


def main():
    req = _lib.read_request()
    if not req["args"]:
        _lib.fail("associatedBugs needs the issue fixture path as an argument")
    try:
        with open(req["args"][0]) as f:
            issues = {int(rec["number"]): rec for rec in json.load(f)}
    except (OSError, ValueError) as e:
        _lib.fail("cannot read issue fixture: %s" % e)

    output = []
    warnings = []
    for rec in req["input"]:
        elements = _lib.tuple_elements(rec)
        if "message" not in elements or "ast" not in elements:
            continue
        _kind, message = elements["message"]
        _kind, anchor = elements["ast"]
        parts = ["<b>%s</b>" % html.escape(message)]
        for number in sorted({int(n) for n in ISSUE_REF.findall(message)}):
            issue = issues.get(number)
            if issue is None:
                warnings.append("issue #%d not in fixture; skipped" % number)
                continue
            parts.append(
                "<br>Issue #%d: %s" % (number, html.escape(issue["title"]))
            )
        output.append(
            _lib.record(
                "message",
                [
                    _lib.element("message", "string", "".join(parts)),
                    _lib.element("ast", "node", anchor),
                    _lib.element("type", "string", "info"),
                ],
            )
        )
    _lib.respond(output, warnings=warnings)


if __name__ == "__main__":
    main()
