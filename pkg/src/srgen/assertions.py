"""Assertion candidates, unique-killer selection, focal filtering, grouping and splitting."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .runtime import RETURN, STATUS, Normal, Observation, Raised
from .subject.nodes import CONSTRUCTOR, SubjectUnit
from .testcase import FOCAL, Construct, MethodCall, TestCase

DEFAULT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Assertion:
    id: str
    observation: Observation
    expected: object  # Normal | Raised, exactly as observed on the original run
    tolerance: float = 0.0
    fallback: bool = False
    killed: frozenset = field(default=frozenset(), compare=False)

    @property
    def is_exception(self) -> bool:
        return self.observation.kind == STATUS or isinstance(self.expected, Raised)


@dataclass(frozen=True)
class AssertionGroup:
    method: str
    assertions: tuple  # assertion ids


def candidate_assertions(observations: list, prefix: str = "a",
                         tolerance: float = DEFAULT_TOLERANCE) -> list:
    """One assertion per observation, in observation order.

    Value observations become equality assertions; exception-status
    observations (and inspectors that threw) become exception assertions.
    Tolerance is carried only by assertions on reals.
    """
    out = []
    for k, obs in enumerate(observations):
        real = isinstance(obs.value, Normal) and isinstance(obs.value.value, float)
        out.append(Assertion(f"{prefix}{k}", obs, obs.value, tolerance if real else 0.0))
    return out


def fallback_candidate(candidates: list, test: TestCase) -> Optional[Assertion]:
    """The focal return assertion, or the focal status one for void focal methods."""
    if not test.is_focal:
        return None
    n = len(test)
    by_kind = {}
    for a in candidates:
        o = a.observation
        if o.statement == n and o.kind in (RETURN, STATUS) and o.kind not in by_kind:
            by_kind[o.kind] = a
    chosen = by_kind.get(RETURN) or by_kind.get(STATUS)
    return replace(chosen, fallback=True) if chosen is not None else None


def select_unique_killers(candidates: list, kills: dict,
                          fallback: Optional[Assertion] = None) -> list:
    """Greedy set cover over ``kills`` (assertion id -> killed mutant ids).

    Repeatedly keeps the candidate adding the most not-yet-killed mutants
    (ties: lowest position); stops when nothing new is added. Kept
    assertions are returned in selection order. An empty
    cover falls back to ``fallback`` when one is given.
    """
    covered = set()
    kept = []
    remaining = list(candidates)
    while remaining:
        best, gain = None, 0
        for a in remaining:
            g = len(kills.get(a.id, set()) - covered)
            if g > gain:
                best, gain = a, g
        if best is None:
            break
        kept.append(best)
        covered |= kills.get(best.id, set())
        remaining.remove(best)
    if not kept and fallback is not None:
        return [fallback]
    return [replace(a, killed=frozenset(kills.get(a.id, ()))) for a in kept]


def filter_focal(kept: list, kills: dict, method_of: Callable, focal_scope: set) -> list:
    """Keep assertions killing at least one mutant inside ``focal_scope``."""
    return [a for a in kept
            if a.fallback or any(method_of(m) in focal_scope for m in kills.get(a.id, ()))]


def group_by_method(kept: list, kills: dict, method_of: Callable, unit: SubjectUnit) -> list:
    order = [d.name for d in unit.declarations]
    members = {}
    for a in kept:
        for method in sorted({method_of(m) for m in kills.get(a.id, ())}, key=order.index):
            ids = members.setdefault(method, [])
            if a.id not in ids:
                ids.append(a.id)
    return [AssertionGroup(m, tuple(members[m])) for m in order if m in members]


def invokes(st, method: str) -> bool:
    if method == CONSTRUCTOR:
        return isinstance(st, Construct)
    return isinstance(st, MethodCall) and st.method == method


@dataclass
class SplitResult:
    tests: list  # (method, TestCase, assertions)
    notes: list


def split_test(test: TestCase, groups: list, repair: Callable,
               make_assertions: Callable) -> SplitResult:
    """One focal test per assertion group.

    The test is cut after the last statement invoking the group's method,
    which becomes the focal statement; ``repair`` restores invariants and
    ``make_assertions(test)`` re-derives the assertions, returning
    (assertions, passes_on_original). Groups whose method no statement
    invokes directly, or whose rebuilt test fails, are dropped with a note.
    """
    out, notes = [], []
    for g in groups:
        last = None
        for i, st in enumerate(test.statements):
            if invokes(st, g.method):
                last = i
        if last is None:
            notes.append(f"group {g.method}: method not invoked by any statement; dropped")
            continue
        cut = TestCase(FOCAL, test.statements[:last + 1], g.method)
        focal = repair(cut)
        assertions, ok = make_assertions(focal)
        if not ok:
            notes.append(f"group {g.method}: split test fails on the original subject; dropped")
            continue
        out.append((g.method, focal, assertions))
    return SplitResult(out, notes)

