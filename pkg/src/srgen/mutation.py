"""First-order mutants and the assertion-by-mutant kill matrix."""
from __future__ import annotations

import copy
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Optional

from .runtime import DEFAULT_STEP_LIMIT, SKIPPED, TIMEOUT, Machine, Raised, execute_test
from .runtime.observe import observed_value, values_match
from .subject.nodes import (
    ARITH_OPS, NUMERIC, REL_OPS, Binary, If, Literal, SubjectUnit, Unary, While,
)
from .subject.printer import format_literal
from .subject.walk import enclosing_declaration, format_path, get_at, set_at, walk

OPERATORS = ("AOR", "ROR", "LCR", "CRP", "NEG")

KILLS = "kills"
SURVIVES = "survives"
DIVERGENT = "divergent"

TIMEOUT_FLAG = "timeout"
DIVERGENCE_FLAG = "pre-assertion-divergence"


@dataclass(frozen=True)
class Mutant:
    id: int
    method: str
    location: tuple
    operator: str
    description: str
    replacement: object = field(compare=False, repr=False)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "method": self.method,
            "operator": self.operator,
            "location": format_path(self.location),
            "description": self.description,
        }


def generate_mutants(unit: SubjectUnit, operators=OPERATORS) -> list:
    """All first-order mutants in AST preorder, operator-table order per node."""
    ops = set(operators)
    unknown = ops - set(OPERATORS)
    if unknown:
        raise ValueError(f"unknown mutation operators: {sorted(unknown)}")
    conditions = set()
    for path, node in walk(unit):
        if isinstance(node, (If, While)):
            conditions.add(path + ("cond",))
    out = []
    for path, node in walk(unit):
        for op, desc, repl in _node_mutations(node, path in conditions, ops):
            out.append(Mutant(len(out), enclosing_declaration(unit, path), path, op, desc, repl))
    return out


def _node_mutations(node, is_condition: bool, ops: set):
    if isinstance(node, Binary):
        if "AOR" in ops and node.op in ARITH_OPS:
            for alt in ARITH_OPS:
                if alt != node.op:
                    yield "AOR", f"{node.op} -> {alt}", replace(node, op=alt)
        if "ROR" in ops and node.op in REL_OPS:
            if node.operand_kind in NUMERIC:
                alts = [a for a in REL_OPS if a != node.op]
            else:
                alts = [a for a in ("==", "!=") if a != node.op]
            for alt in alts:
                yield "ROR", f"{node.op} -> {alt}", replace(node, op=alt)
        if "LCR" in ops and node.op in ("&&", "||"):
            alt = "||" if node.op == "&&" else "&&"
            yield "LCR", f"{node.op} -> {alt}", replace(node, op=alt)
    if "CRP" in ops and isinstance(node, Literal):
        if node.lit_kind in NUMERIC:
            cast = int if node.lit_kind == "int" else float
            seen = {node.value}
            for alt in (cast(node.value + 1), cast(node.value - 1), cast(0)):
                if alt not in seen:
                    seen.add(alt)
                    yield ("CRP", f"{format_literal(node.value, node.lit_kind)} -> "
                           f"{format_literal(alt, node.lit_kind)}", replace(node, value=alt))
        elif node.lit_kind == "bool":
            flipped = not node.value
            yield ("CRP", f"{format_literal(node.value, 'bool')} -> {format_literal(flipped, 'bool')}",
                   replace(node, value=flipped))
    if "NEG" in ops and is_condition:
        yield "NEG", "negate condition", Unary("!", node, pos=getattr(node, "pos", (0, 0)), kind="bool")


def apply_mutant(unit: SubjectUnit, mutant: Mutant):
    """Install ``mutant`` in place; returns the node it displaced."""
    original = get_at(unit, mutant.location)
    set_at(unit, mutant.location, copy.copy(mutant.replacement))
    return original


def revert_mutant(unit: SubjectUnit, mutant: Mutant, original) -> None:
    set_at(unit, mutant.location, original)


@contextmanager
def mutated(unit: SubjectUnit, mutant: Mutant):
    original = apply_mutant(unit, mutant)
    try:
        yield unit
    finally:
        revert_mutant(unit, mutant, original)


def mutant_unit(unit: SubjectUnit, mutant: Mutant) -> SubjectUnit:
    """Independent mutated copy of ``unit``."""
    clone = copy.deepcopy(unit)
    apply_mutant(clone, mutant)
    return clone


# -- kill matrix --------------------------------------------------------------

@dataclass
class KillMatrix:
    mutants: list
    rows: list  # assertion ids
    row_test: dict  # assertion id -> test index
    n_tests: int
    cells: dict = field(default_factory=dict)  # (assertion id, mutant id) -> state
    flags: dict = field(default_factory=dict)  # (test index, mutant id) -> set of flags

    @property
    def no_mutants(self) -> bool:
        return not self.mutants

    def cell(self, aid, mid) -> str:
        return self.cells.get((aid, mid), SURVIVES)

    def killed_by(self, aid) -> set:
        return {m.id for m in self.mutants if self.cells.get((aid, m.id)) == KILLS}

    def flagged(self, test_index: int) -> set:
        return {mid for (ti, mid), fl in self.flags.items() if ti == test_index and fl}

    def killed_by_test(self, test_index: int) -> set:
        out = self.flagged(test_index)
        for aid in self.rows:
            if self.row_test[aid] == test_index:
                out |= self.killed_by(aid)
        return out

    def killed(self) -> set:
        out = set()
        for ti in range(self.n_tests):
            out |= self.killed_by_test(ti)
        return out

    def method_of(self, mid: int) -> str:
        return self.mutants[mid].method

    def to_json(self) -> dict:
        return {
            "mutants": [m.to_json() for m in self.mutants],
            "rows": list(self.rows),
            "cells": {f"{a}|{m}": s for (a, m), s in sorted(self.cells.items(), key=str)
                      if s != SURVIVES},
            "flags": {f"{t}|{m}": sorted(f) for (t, m), f in sorted(self.flags.items()) if f},
        }


@dataclass
class CheckedTest:
    """A test plus the assertions whose outcomes the matrix tracks."""

    test: object
    assertions: list  # objects with .id, .observation, .expected, .tolerance
    trace: Optional[object] = None  # original-run trace; computed when absent


def _diverged(original, mutant) -> bool:
    if mutant.timeout:
        return True
    for a, b in zip(original.outcomes, mutant.outcomes):
        if (a is SKIPPED) != (b is SKIPPED) or (a is TIMEOUT) != (b is TIMEOUT):
            return True
        if isinstance(a, Raised) != isinstance(b, Raised):
            return True
        if isinstance(a, Raised) and a.text != b.text:
            return True
    return False


def run_kill_analysis(unit: SubjectUnit, checked: list, mutants: list,
                      step_limit: int = DEFAULT_STEP_LIMIT) -> KillMatrix:
    """Execute every (test, mutant) pair and classify each assertion.

    An assertion kills a mutant when its observation differs beyond the
    assertion's tolerance, or when the observation was not reached because
    the mutant diverged (exception mismatch). If the mutant diverges before
    any assertion's observation is reached, the pair is flagged instead and
    no single assertion is credited. Pairs whose mutated declaration the
    original run never entered cannot differ and are not executed.
    """
    rows, row_test = [], {}
    for ti, ct in enumerate(checked):
        if ct.trace is None:
            ct.trace = execute_test(unit, ct.test, step_limit)
        for a in ct.assertions:
            rows.append(a.id)
            row_test[a.id] = ti
    matrix = KillMatrix(list(mutants), rows, row_test, len(checked))
    for m in mutants:
        relevant = [ti for ti, ct in enumerate(checked) if m.method in ct.trace.entered]
        if not relevant:
            continue
        with mutated(unit, m):
            machine = Machine(unit, step_limit)
            for ti in relevant:
                ct = checked[ti]
                mtrace = machine.run(ct.test, observe=True, record=False)
                _classify(matrix, ti, m.id, ct, mtrace)
    return matrix


def _classify(matrix: KillMatrix, ti: int, mid: int, ct: CheckedTest, mtrace) -> None:
    diverged = _diverged(ct.trace, mtrace)
    flags = set()
    if mtrace.timeout:
        flags.add(TIMEOUT_FLAG)
    observed = [observed_value(a.observation, ct.test, mtrace) for a in ct.assertions]
    if diverged and all(v is SKIPPED for v in observed):
        flags.add(DIVERGENCE_FLAG)
        for a in ct.assertions:
            matrix.cells[(a.id, mid)] = DIVERGENT
    else:
        for a, v in zip(ct.assertions, observed):
            if v is SKIPPED:
                state = DIVERGENT if mtrace.timeout else KILLS
            else:
                state = SURVIVES if values_match(a.expected, v, a.tolerance) else KILLS
            if state != SURVIVES:
                matrix.cells[(a.id, mid)] = state
    if flags:
        matrix.flags[(ti, mid)] = flags


def mutation_score(matrix: KillMatrix) -> float:
    """Killed / total; 1.0 when there are no mutants (see ``no_mutants``)."""
    if matrix.no_mutants:
        return 1.0
    return len(matrix.killed()) / len(matrix.mutants)
