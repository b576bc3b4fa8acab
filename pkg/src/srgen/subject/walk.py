"""Preorder traversal and path addressing over subject ASTs.

A path is a tuple of steps from a SubjectUnit (or a statement list) down to a
node; each step is an attribute name or a list index. Mutants use paths as
their location, so paths must be stable under printing and re-parsing.
"""
from __future__ import annotations

from .nodes import (
    Assign, Binary, Call, ExprStmt, FieldAssign, FieldRef, If, Literal,
    MethodDecl, Name, Return, SubjectUnit, Throw, Unary, VarDecl, While,
)

CHILDREN = {
    Literal: (), Name: (), FieldRef: (), Throw: (),
    Call: ("args",),
    Binary: ("left", "right"),
    Unary: ("operand",),
    VarDecl: ("init",),
    Assign: ("value",),
    FieldAssign: ("value",),
    If: ("cond", "then", "orelse"),
    While: ("cond", "body"),
    Return: ("value",),
    ExprStmt: ("call",),
    MethodDecl: ("body",),
}


def walk(node, path=()):
    """Yield (path, node) in preorder. Lists are traversed, not yielded."""
    if isinstance(node, list):
        for i, child in enumerate(node):
            yield from walk(child, path + (i,))
        return
    if node is None:
        return
    if isinstance(node, SubjectUnit):
        yield from walk(node.constructor, path + ("constructor",))
        for i, m in enumerate(node.methods):
            yield from walk(m, path + ("methods", i))
        return
    yield path, node
    for attr in CHILDREN[type(node)]:
        yield from walk(getattr(node, attr), path + (attr,))


def iter_nodes(root):
    for _, node in walk(root):
        yield node


def get_at(root, path):
    node = root
    for step in path:
        node = node[step] if isinstance(step, int) else getattr(node, step)
    return node


def set_at(root, path, value) -> None:
    parent = get_at(root, path[:-1])
    step = path[-1]
    if isinstance(step, int):
        parent[step] = value
    else:
        setattr(parent, step, value)


def enclosing_declaration(unit: SubjectUnit, path) -> str:
    if path[0] == "constructor":
        return unit.constructor.name
    return unit.methods[path[1]].name


def format_path(path) -> str:
    return "/".join(str(step) for step in path)


def parse_path(text: str):
    return tuple(int(s) if s.isdigit() else s for s in text.split("/"))
