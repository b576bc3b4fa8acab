"""AST for the subject language.

Nodes are plain mutable dataclasses. Equality is structural and ignores
source positions and checker annotations, so a parse/print/parse round trip
compares equal and a mutant can be undone by restoring a single node.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

VALUE_KINDS = ("int", "float", "bool", "string")
NUMERIC = ("int", "float")
ARITH_OPS = ("+", "-", "*", "/", "%")
REL_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")
CONSTRUCTOR = "constructor"

Pos = tuple  # (line, col)


def is_value_kind(kind: Optional[str]) -> bool:
    return kind in VALUE_KINDS


# -- expressions -------------------------------------------------------------

@dataclass
class Literal:
    value: Union[int, float, bool, str]
    lit_kind: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)
    kind: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass
class Name:
    name: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)
    kind: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass
class FieldRef:
    name: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)
    kind: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass
class Call:
    target: Optional[str]  # None for ``this.m(...)``, else a local/param name
    method: str
    args: list
    pos: Pos = field(default=(0, 0), compare=False, repr=False)
    kind: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=(0, 0), compare=False, repr=False)
    kind: Optional[str] = field(default=None, compare=False, repr=False)
    operand_kind: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass
class Unary:
    op: str
    operand: "Expr"
    pos: Pos = field(default=(0, 0), compare=False, repr=False)
    kind: Optional[str] = field(default=None, compare=False, repr=False)


Expr = Union[Literal, Name, FieldRef, Call, Binary, Unary]


# -- statements --------------------------------------------------------------

@dataclass
class VarDecl:
    name: str
    var_kind: str
    init: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass
class Assign:
    name: str
    value: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass
class FieldAssign:
    name: str
    value: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass
class If:
    cond: Expr
    then: list
    orelse: Optional[list]
    bid: int = -1
    pos: Pos = field(default=(0, 0), compare=False, repr=False)
    gid_true: str = field(default="", compare=False, repr=False)
    gid_false: str = field(default="", compare=False, repr=False)


@dataclass
class While:
    cond: Expr
    body: list
    bid: int = -1
    pos: Pos = field(default=(0, 0), compare=False, repr=False)
    gid_true: str = field(default="", compare=False, repr=False)
    gid_false: str = field(default="", compare=False, repr=False)


@dataclass
class Return:
    value: Optional[Expr]
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass
class Throw:
    message: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass
class ExprStmt:
    call: Call
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


Stmt = Union[VarDecl, Assign, FieldAssign, If, While, Return, Throw, ExprStmt]


# -- declarations ------------------------------------------------------------

@dataclass
class Param:
    name: str
    kind: str


@dataclass
class FieldDecl:
    name: str
    kind: str
    public: bool = False


@dataclass
class MethodDecl:
    name: str
    params: list
    ret: Optional[str]
    body: list
    is_inspector: bool = field(default=False, compare=False)
    pos: Pos = field(default=(0, 0), compare=False, repr=False)

    @property
    def param_kinds(self) -> list:
        return [p.kind for p in self.params]


@dataclass
class SubjectUnit:
    name: str
    fields: list
    constructor: MethodDecl
    methods: list
    source_path: Optional[str] = field(default=None, compare=False, repr=False)

    @property
    def constructors(self) -> list:
        return [self.constructor]

    @property
    def declarations(self) -> list:
        """Constructor first, then methods in declaration order."""
        return [self.constructor, *self.methods]

    def method(self, name: str) -> MethodDecl:
        for decl in self.declarations:
            if decl.name == name:
                return decl
        raise KeyError(name)

    def field_decl(self, name: str) -> FieldDecl:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def inspectors(self) -> list:
        return [m for m in self.methods if m.is_inspector and is_value_kind(m.ret)]

    @property
    def public_fields(self) -> list:
        return [f for f in self.fields if f.public]

    def declaration_index(self, name: str) -> int:
        for i, decl in enumerate(self.declarations):
            if decl.name == name:
                return i
        return len(self.declarations)
