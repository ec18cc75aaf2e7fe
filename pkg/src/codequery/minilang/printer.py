"""Pretty-printer: emits canonical source whose reparse equals the tree."""

from __future__ import annotations

from .nodes import Node, NodeKind

INDENT = "    "


def pretty_print(program) -> list:
    """Render every file root; returns (path, text) pairs."""
    return [(root.span.file, print_node(root) + "\n") for root in program.roots]


def print_node(node: Node, depth: int = 0) -> str:
    pad = INDENT * depth
    k = node.kind
    if k == NodeKind.Module:
        body = "\n".join(print_node(c, depth + 1) for c in node.children)
        inner = f"\n{body}\n{pad}" if node.children else ""
        return f"{pad}module {node.name} {{{inner}}}"
    if k == NodeKind.Class:
        body = "\n".join(print_node(c, depth + 1) for c in node.children)
        inner = f"\n{body}\n{pad}" if node.children else ""
        return f"{pad}class {node.name} {{{inner}}}"
    if k == NodeKind.NameImport:
        return f"{pad}import {node.name};"
    if k == NodeKind.Method:
        params = ", ".join(p.name for p in node.children_with_role("param"))
        stmts = node.children_with_role("body")
        body = "\n".join(print_node(s, depth + 1) for s in stmts)
        inner = f"\n{body}\n{pad}" if stmts else ""
        return f"{pad}{node.name}({params}) {{{inner}}}"
    if k in (NodeKind.Block,):
        stmts = node.children_with_role("body")
        body = "\n".join(print_node(s, depth + 1) for s in stmts)
        return f"{{\n{body}\n{pad}}}" if stmts else "{}"
    if k == NodeKind.DeclarationStatement:
        return f"{pad}var {node.name} = {print_expr(node.child('init'))};"
    if k == NodeKind.ExpressionStatement:
        expr = node.child("expr")
        if expr.kind == NodeKind.BinaryExpression and expr.text == "=":
            lhs = print_expr(expr.child("lhs"))
            rhs = print_expr(expr.child("rhs"))
            return f"{pad}{lhs} = {rhs};"
        return f"{pad}{print_expr(expr)};"
    if k == NodeKind.IfStatement:
        out = f"{pad}if ({print_expr(node.child('cond'))}) "
        out += _print_block_inline(node.child("then"), depth)
        els = node.child("else")
        if els is not None:
            out += " else " + _print_block_inline(els, depth)
        return out
    if k == NodeKind.LoopStatement:
        out = f"{pad}while ({print_expr(node.child('cond'))}) "
        return out + _print_block_inline(node.child("body"), depth)
    if k == NodeKind.ReturnStatement:
        value = node.child("value")
        return f"{pad}return {print_expr(value)};" if value else f"{pad}return;"
    if k == NodeKind.PrintStatement:
        args = ", ".join(print_expr(a) for a in node.children_with_role("arg"))
        return f"{pad}print({args});"
    raise ValueError(f"cannot print {k.value} as a statement")


def _print_block_inline(block: Node, depth: int) -> str:
    pad = INDENT * depth
    stmts = block.children_with_role("body")
    if not stmts:
        return "{}"
    body = "\n".join(print_node(s, depth + 1) for s in stmts)
    return f"{{\n{body}\n{pad}}}"


def print_expr(node: Node, parent_binary: bool = False) -> str:
    k = node.kind
    if k == NodeKind.IntLiteral:
        return node.text
    if k == NodeKind.StringLiteral:
        return f'"{node.text}"'
    if k == NodeKind.ReferenceExpression:
        prefix = node.child("prefix")
        return f"{print_expr(prefix)}.{node.name}" if prefix else node.name
    if k == NodeKind.CallExpression:
        callee = print_expr(node.child("callee"))
        args = ", ".join(print_expr(a) for a in node.children_with_role("arg"))
        return f"{callee}({args})"
    if k == NodeKind.BinaryExpression:
        lhs = print_expr(node.child("lhs"), parent_binary=True)
        rhs = print_expr(node.child("rhs"), parent_binary=True)
        s = f"{lhs} {node.text} {rhs}"
        # Nested binaries are always parenthesized; precedence stays explicit.
        return f"({s})" if parent_binary else s
    raise ValueError(f"cannot print {k.value} as an expression")
