"""Keep only tuples whose node is an if statement with a non-empty else.

The summary rows carry no role labels, but node ids do: an else branch
is the block child whose id ends in "/else[0]".
"""

import _lib


def has_nonempty_else(ast, node_id):
    if node_id not in ast.rows or ast.kind(node_id) != "IfStatement":
        return False
    for child in ast.children_of(node_id):
        if child.endswith("/else[0]") and ast.children_of(child):
            return True
    return False


def main():
    req = _lib.read_request()
    ast = _lib.Ast(req["astSummary"])
    output = [
        rec
        for rec in req["input"]
        if any(has_nonempty_else(ast, ref) for ref in _lib.node_refs(rec))
    ]
    _lib.respond(output)


if __name__ == "__main__":
    main()
