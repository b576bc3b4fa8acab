"""Observation points harvested from an execution; assertions are built on these."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..subject.nodes import SubjectUnit, is_value_kind
from ..testcase import Construct, MethodCall, TestCase
from .values import SKIPPED, TIMEOUT, Normal, Raised

RETURN = "statement-return"
INSPECTOR = "inspector-value"
STATUS = "exception-status"

END = None  # anchor of baseline inspector observations: after the last statement


@dataclass(frozen=True)
class Observation:
    kind: str
    statement: int  # 1-based; for inspector observations, the statement they follow
    receiver: Optional[int]
    inspector: Optional[str]
    value: object  # Normal | Raised for the original run
    value_kind: Optional[str] = None

    @property
    def key(self) -> tuple:
        return (self.kind, self.statement, self.receiver, self.inspector)


def harvest_observations(unit: SubjectUnit, test: TestCase, trace) -> list:
    """Observations for ``test`` given a finished trace of it.

    Baseline tests observe every executed method call (and any constructor
    that threw) plus inspectors on every live unit variable at the end. Focal tests observe only the focal
    statement: its return, its exception status, and inspectors right after it.
    """
    obs = []
    n = len(test.statements)
    if test.is_focal:
        if n == 0:
            return obs
        outcome = trace.outcomes[n - 1]
        if outcome is SKIPPED or outcome is TIMEOUT:
            return obs
        st = test.statements[-1]
        rkind = _return_kind(unit, st)
        if isinstance(outcome, Normal) and is_value_kind(rkind):
            obs.append(Observation(RETURN, n, None, None, outcome, rkind))
        obs.append(Observation(STATUS, n, None, None,
                               outcome if isinstance(outcome, Raised) else Normal(None)))
        anchor = n
    else:
        # inspectors run after the last statement even if an earlier one threw
        # one observation per executed method call: its value, else its status
        for i, (st, outcome) in enumerate(zip(test.statements, trace.outcomes), 1):
            if not isinstance(st, (MethodCall, Construct)):
                continue
            if isinstance(outcome, Raised):
                obs.append(Observation(STATUS, i, None, None, outcome))
            elif isinstance(outcome, Normal) and isinstance(st, MethodCall):
                rkind = _return_kind(unit, st)
                if is_value_kind(rkind):
                    obs.append(Observation(RETURN, i, None, None, outcome, rkind))
                else:
                    obs.append(Observation(STATUS, i, None, None, Normal(None)))
        anchor = n
    for var in trace.live_units:
        for m in unit.inspectors:
            value = trace.inspections.get((var, m.name))
            if value is None or value is TIMEOUT:
                continue
            obs.append(Observation(INSPECTOR, anchor, var, m.name, value, m.ret))
    obs.sort(key=lambda o: (o.statement, 0 if o.kind != INSPECTOR else 1))
    return obs


def _return_kind(unit: SubjectUnit, st) -> Optional[str]:
    if isinstance(st, MethodCall):
        return unit.method(st.method).ret
    return None


def observed_value(obs: Observation, test: TestCase, trace):
    """The value the same observation point takes in another run.

    Returns SKIPPED when the point was not reached (its statement did not
    run, or the run timed out before inspectors were harvested).
    """
    if obs.kind == INSPECTOR:
        if test.is_focal:
            anchor = trace.outcomes[obs.statement - 1]
            if anchor is SKIPPED or anchor is TIMEOUT:
                return SKIPPED
        value = trace.inspections.get((obs.receiver, obs.inspector))
        if value is None or value is TIMEOUT:
            return SKIPPED
        return value
    outcome = trace.outcomes[obs.statement - 1]
    if outcome is SKIPPED or outcome is TIMEOUT:
        return SKIPPED
    if obs.kind == STATUS:
        return outcome if isinstance(outcome, Raised) else Normal(None)
    return outcome


def values_match(expected, actual, tolerance: float = 0.0) -> bool:
    """Whether ``actual`` satisfies an assertion expecting ``expected``.

    Reals compare within ``tolerance``; NaN matches only NaN. Exceptions
    match on their text.
    """
    if isinstance(expected, Raised) or isinstance(actual, Raised):
        return (isinstance(expected, Raised) and isinstance(actual, Raised)
                and expected.text == actual.text)
    if not (isinstance(expected, Normal) and isinstance(actual, Normal)):
        return False
    e, a = expected.value, actual.value
    if isinstance(e, float) and isinstance(a, float):
        if math.isnan(e) or math.isnan(a):
            return math.isnan(e) and math.isnan(a)
        if math.isinf(e) or math.isinf(a):
            return e == a
        return abs(e - a) <= tolerance
    return type(e) is type(a) and e == a
