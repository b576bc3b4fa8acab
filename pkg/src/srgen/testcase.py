"""Test-case data: statements and the TestCase chromosome.

Statements define at most one variable, named by an integer id; references
use those ids. Operators keep tests *normalized*: ids are 0, 1, 2, ... in
order of definition, so structurally equal tests compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

BASELINE = "baseline"
FOCAL = "focal"
REPRESENTATIONS = (BASELINE, FOCAL)


@dataclass(frozen=True)
class Primitive:
    var: int
    kind: str
    value: object

    stmt_kind = "primitive"

    def refs(self) -> tuple:
        return ()

    def with_refs(self, refs) -> "Primitive":
        return self


@dataclass(frozen=True)
class Construct:
    var: int
    args: tuple

    stmt_kind = "constructor"

    def refs(self) -> tuple:
        return self.args

    def with_refs(self, refs) -> "Construct":
        return replace(self, args=tuple(refs))


@dataclass(frozen=True)
class FieldRead:
    var: int
    receiver: int
    field: str

    stmt_kind = "field"

    def refs(self) -> tuple:
        return (self.receiver,)

    def with_refs(self, refs) -> "FieldRead":
        return replace(self, receiver=refs[0])


@dataclass(frozen=True)
class MethodCall:
    var: Optional[int]
    receiver: int
    method: str
    args: tuple

    stmt_kind = "method"

    def refs(self) -> tuple:
        return (self.receiver, *self.args)

    def with_refs(self, refs) -> "MethodCall":
        return replace(self, receiver=refs[0], args=tuple(refs[1:]))


@dataclass(frozen=True)
class Assignment:
    target: int
    source: int

    stmt_kind = "assignment"
    var = None

    def refs(self) -> tuple:
        return (self.target, self.source)

    def with_refs(self, refs) -> "Assignment":
        return Assignment(refs[0], refs[1])


STATEMENT_TYPES = (Primitive, Construct, FieldRead, MethodCall, Assignment)


@dataclass(frozen=True)
class TestCase:
    representation: str
    statements: tuple
    focal_method: Optional[str] = None

    __test__ = False  # not a pytest class

    def __len__(self) -> int:
        return len(self.statements)

    @property
    def is_focal(self) -> bool:
        return self.representation == FOCAL

    @property
    def focal_index(self) -> Optional[int]:
        """1-based index of the focal statement (always the last one)."""
        return len(self.statements) if self.is_focal else None

    @property
    def focal_statement(self):
        return self.statements[-1] if self.is_focal else None

    def window(self) -> tuple:
        """Inclusive 1-based statement range whose coverage counts."""
        n = len(self.statements)
        return (n, n) if self.is_focal else (1, n)

    def normalized(self) -> "TestCase":
        mapping = {}
        out = []
        for st in self.statements:
            refs = [mapping.get(r, r) for r in st.refs()]
            st = st.with_refs(refs) if refs else st
            if st.var is not None:
                mapping[st.var] = len(mapping)
                st = replace(st, var=mapping[st.var])
            out.append(st)
        return replace(self, statements=tuple(out))


def invoked_method(st) -> Optional[str]:
    """Name of the subject declaration a statement invokes directly."""
    if isinstance(st, MethodCall):
        return st.method
    if isinstance(st, Construct):
        return "constructor"
    return None
