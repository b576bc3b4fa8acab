from __future__ import annotations

from .lexer import escape
from .nodes import (
    CONSTRUCTOR, Assign, Binary, Call, ExprStmt, FieldAssign, FieldRef, If,
    Literal, MethodDecl, Name, Return, SubjectUnit, Throw, Unary, VarDecl,
    While,
)

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY = 7


def format_literal(value, kind: str) -> str:
    if kind == "bool":
        return "true" if value else "false"
    if kind == "string":
        return f'"{escape(value)}"'
    if kind == "float":
        return repr(float(value))
    return str(int(value))


def print_expr(e, parent_prec: int = 0) -> str:
    if isinstance(e, Literal):
        return format_literal(e.value, e.lit_kind)
    if isinstance(e, Name):
        return e.name
    if isinstance(e, FieldRef):
        return f"this.{e.name}"
    if isinstance(e, Call):
        target = "this" if e.target is None else e.target
        return f"{target}.{e.method}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = print_expr(e.operand, _UNARY)
        if isinstance(e.operand, (Binary,)) or inner.startswith("-") or inner.startswith("!"):
            inner = f"({print_expr(e.operand)})"
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        left = print_expr(e.left, prec)
        right = print_expr(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"not an expression: {e!r}")


def _stmts(stmts, indent: int, out: list) -> None:
    for s in stmts:
        _stmt(s, indent, out)


def _stmt(s, indent: int, out: list) -> None:
    pad = "  " * indent
    if isinstance(s, VarDecl):
        out.append(f"{pad}var {s.name}: {s.var_kind} = {print_expr(s.init)};")
    elif isinstance(s, Assign):
        out.append(f"{pad}{s.name} = {print_expr(s.value)};")
    elif isinstance(s, FieldAssign):
        out.append(f"{pad}this.{s.name} = {print_expr(s.value)};")
    elif isinstance(s, If):
        out.append(f"{pad}if ({print_expr(s.cond)}) {{")
        _stmts(s.then, indent + 1, out)
        node = s
        while node.orelse is not None and len(node.orelse) == 1 and isinstance(node.orelse[0], If):
            node = node.orelse[0]
            out.append(f"{pad}}} else if ({print_expr(node.cond)}) {{")
            _stmts(node.then, indent + 1, out)
        if node.orelse is not None:
            out.append(f"{pad}}} else {{")
            _stmts(node.orelse, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, While):
        out.append(f"{pad}while ({print_expr(s.cond)}) {{")
        _stmts(s.body, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, Return):
        out.append(f"{pad}return;" if s.value is None else f"{pad}return {print_expr(s.value)};")
    elif isinstance(s, Throw):
        out.append(f'{pad}throw "{escape(s.message)}";')
    elif isinstance(s, ExprStmt):
        out.append(f"{pad}{print_expr(s.call)};")
    else:
        raise TypeError(f"not a statement: {s!r}")


def _decl(d: MethodDecl, out: list) -> None:
    params = ", ".join(f"{p.name}: {p.kind}" for p in d.params)
    if d.name == CONSTRUCTOR:
        head = f"  constructor({params})"
    else:
        ret = f": {d.ret}" if d.ret is not None else ""
        head = f"  method {d.name}({params}){ret}"
    if not d.body:
        out.append(f"{head} {{}}")
        return
    out.append(f"{head} {{")
    _stmts(d.body, 2, out)
    out.append("  }")


def print_subject(unit: SubjectUnit) -> str:
    out = [f"unit {unit.name} {{"]
    for f in unit.fields:
        prefix = "public " if f.public else ""
        out.append(f"  {prefix}field {f.name}: {f.kind};")
    if unit.fields:
        out.append("")
    _decl(unit.constructor, out)
    for m in unit.methods:
        out.append("")
        _decl(m, out)
    out.append("}")
    return "\n".join(out) + "\n"
