"""Coverage goals, control dependencies and call closures derived from the AST."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .nodes import Call, If, MethodDecl, SubjectUnit, While
from .walk import iter_nodes

ENTRY, TRUE, FALSE = "method-entry", "branch-true", "branch-false"


@dataclass(frozen=True)
class CoverageGoal:
    id: str
    method: str
    kind: str
    branch_node: Optional[int]  # branch id within the declaration
    cdg_depth: int

    @property
    def is_branch(self) -> bool:
        return self.kind != ENTRY

    @property
    def outcome(self) -> Optional[bool]:
        return None if self.kind == ENTRY else self.kind == TRUE


def entry_goal_id(method: str) -> str:
    return f"{method}:entry"


@dataclass
class ControlDependencyGraph:
    """Per-method forest over branch goals.

    ``parent`` maps each branch goal id to the branch-outcome goal it is
    nested under, or None for roots.
    """
    method: str
    goals: list
    parent: dict = field(default_factory=dict)

    @property
    def roots(self) -> list:
        return [g for g in self.goals if self.parent[g] is None]

    @property
    def edges(self) -> list:
        return [(p, g) for g, p in self.parent.items() if p is not None]

    def children(self, goal_id: str) -> list:
        return [g for g in self.goals if self.parent[g] == goal_id]

    def chain(self, goal_id: str) -> list:
        """Outcome goals from the root down to (and including) goal_id."""
        out = [goal_id]
        p = self.parent.get(goal_id)
        while p is not None:
            out.append(p)
            p = self.parent[p]
        return out[::-1]


def build_cdg(method: MethodDecl) -> ControlDependencyGraph:
    cdg = ControlDependencyGraph(method.name, [])

    def visit(stmts, parent):
        for s in stmts:
            if isinstance(s, (If, While)):
                for gid in (s.gid_true, s.gid_false):
                    cdg.goals.append(gid)
                    cdg.parent[gid] = parent
                if isinstance(s, If):
                    visit(s.then, s.gid_true)
                    if s.orelse is not None:
                        visit(s.orelse, s.gid_false)
                else:
                    visit(s.body, s.gid_true)

    visit(method.body, None)
    return cdg


def extract_goals(unit: SubjectUnit) -> list:
    goals = []
    for decl in unit.declarations:
        goals.append(CoverageGoal(entry_goal_id(decl.name), decl.name, ENTRY, None, 0))
        cdg = build_cdg(decl)
        for gid in cdg.goals:
            bid = int(gid.split(":")[1][1:])
            kind = TRUE if gid.endswith(":T") else FALSE
            goals.append(CoverageGoal(gid, decl.name, kind, bid, len(cdg.chain(gid))))
    return goals


def count_conditionals(decl: MethodDecl) -> int:
    return sum(isinstance(n, (If, While)) for n in iter_nodes(decl.body))


def direct_callees(unit: SubjectUnit, method: str) -> set:
    decl = unit.method(method)
    return {n.method for n in iter_nodes(decl.body) if isinstance(n, Call)}


def static_call_closure(unit: SubjectUnit, method: str) -> set:
    """The method plus everything reachable through self calls or calls on
    unit-reference parameters."""
    unit.method(method)  # KeyError on unknown names
    seen = set()
    stack = [method]
    while stack:
        m = stack.pop()
        if m in seen:
            continue
        seen.add(m)
        stack.extend(direct_callees(unit, m) - seen)
    return seen


class StaticModel:
    """Everything the search needs about a unit, computed once."""

    def __init__(self, unit: SubjectUnit):
        self.unit = unit
        self.goals = extract_goals(unit)
        self.goal_by_id = {g.id: g for g in self.goals}
        self._goal_ids = [g.id for g in self.goals]
        self.cdgs = {d.name: build_cdg(d) for d in unit.declarations}
        self.closures = {d.name: frozenset(static_call_closure(unit, d.name))
                         for d in unit.declarations}
        self.chains = {}
        for g in self.goals:
            self.chains[g.id] = self.cdgs[g.method].chain(g.id) if g.is_branch else []

    def parent_of(self, goal_id: str) -> Optional[str]:
        g = self.goal_by_id[goal_id]
        if not g.is_branch:
            return None
        return self.cdgs[g.method].parent[goal_id]

    @property
    def goal_ids(self) -> list:
        return self._goal_ids
