"""Script twin of the native argument-printing mutation.

For each input method node this emits edit tuples prepending one print
statement naming the method, then one per parameter printing its name
and value.  The host applies the edits; the surviving output is the set
of mutated method nodes.
"""

import _lib


def main():
    req = _lib.read_request()
    ast = _lib.Ast(req["astSummary"])

    output = []
    methods = set()
    for rec in req["input"]:
        for ref in _lib.node_refs(rec):
            if ref not in ast.rows or ast.kind(ref) != "Method":
                _lib.fail("%s is not a method" % ref)
            methods.add(ref)

    for method in sorted(methods):
        statements = ['print("%s");' % ast.name(method)]
        for param in ast.children_of_kind(method, "Parameter"):
            statements.append('print("%s", %s);' % (ast.name(param), ast.name(param)))
        for index, code in enumerate(statements):
            output.append(
                _lib.record(
                    "edit",
                    [
                        _lib.element("op", "string", "insertPrintFront"),
                        _lib.element("node", "node", method),
                        _lib.element("index", "int", index),
                        _lib.element("code", "string", code),
                    ],
                )
            )
        output.append(
            _lib.record("node", [_lib.element("node", "node", method)])
        )
    _lib.respond(output)


if __name__ == "__main__":
    main()
