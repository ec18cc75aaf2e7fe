"""Read a profiling CSV and emit one tuple per row.

First row is the header.  Cells parse as int, then real, then text;
a cell naming a node in the program summary becomes a node reference.
The file path is the first argument, an optional tag the second.
"""

import csv
import re

import _lib

INT = re.compile(r"-?\d+$")


def parse_cell(cell, known_ids):
    cell = cell.strip()
    if cell in known_ids:
        return "node", cell
    if INT.match(cell):
        return "int", int(cell)
    try:
        return "real", float(cell)
    except ValueError:
        return "string", cell


def main():
    req = _lib.read_request()
    if not req["args"]:
        _lib.fail("importProfileCSV needs a file path as an argument")
    tag = req["args"][1] if len(req["args"]) > 1 else None
    known_ids = {row[0] for row in req["astSummary"]}

    try:
        with open(req["args"][0], newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        _lib.fail("cannot read csv: %s" % e)
    if not rows or not any(h.strip() for h in rows[0]):
        _lib.fail("csv has no header row")

    header = [h.strip() for h in rows[0]]
    output = []
    for row in rows[1:]:
        if not row:
            continue
        elements = []
        for name, cell in zip(header, row):
            kind, value = parse_cell(cell, known_ids)
            elements.append(_lib.element(name, kind, value))
        output.append(_lib.record(tag or header[0], elements))
    _lib.respond(output)


if __name__ == "__main__":
    main()
