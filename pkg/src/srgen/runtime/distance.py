"""Branch distances (K = 1) and the normalized fitness of a coverage goal."""
from __future__ import annotations

import math

K = 1.0
_BELOW_ONE = math.nextafter(1.0, 0.0)

_NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def _true_distance(op: str, a, b, numeric: bool) -> float:
    if not numeric:
        equal = (a is b) if op in ("==", "!=") and not isinstance(a, (str, bool)) else a == b
        if op == "==":
            return 0.0 if equal else K
        return K if equal else 0.0
    if op == "<":
        return 0.0 if a < b else float(a - b) + K
    if op == "<=":
        return 0.0 if a <= b else float(a - b)
    if op == ">":
        return 0.0 if a > b else float(b - a) + K
    if op == ">=":
        return 0.0 if a >= b else float(b - a)
    if op == "==":
        return abs(float(a - b))
    return K if a == b else 0.0  # !=


def branch_distance(op: str, a, b, outcome: bool = True, numeric: bool | None = None) -> float:
    """Raw distance of ``a op b`` from evaluating to ``outcome``.

    The false outcome of a comparison is the true outcome of its negation.
    """
    if numeric is None:
        numeric = isinstance(a, (int, float)) and not isinstance(a, bool)
    if not outcome:
        op = _NEGATE[op]
    d = _true_distance(op, a, b, numeric)
    if math.isnan(d):
        return K
    return d


def relational_distances(op: str, a, b, operand_kind) -> tuple:
    numeric = operand_kind in ("int", "float")
    return (branch_distance(op, a, b, True, numeric), branch_distance(op, a, b, False, numeric))


def normalize(d: float) -> float:
    """Maps [0, inf) onto [0, 1)."""
    # d / (d + 1) rounds to 1.0 for huge d; clamp just below
    return min(d / (d + 1.0), _BELOW_ONE) if not math.isinf(d) else _BELOW_ONE


def fitness(goal, trace, model, window) -> float:
    """Approach level plus normalized branch distance for ``goal``.

    ``window`` is the inclusive statement range whose execution counts:
    the whole test for baseline chromosomes, the focal statement for
    focal ones.
    """
    lo, hi = window
    if trace.min_distance(goal.id, lo, hi) == 0:
        return 0.0
    entry = f"{goal.method}:entry"
    if trace.min_distance(entry, lo, hi) != 0:
        return float(goal.cdg_depth + 2)
    chain = model.chains[goal.id]
    k = len(chain)
    for j in range(k - 1, -1, -1):
        d = trace.min_distance(chain[j], lo, hi)
        if d is not None:
            return (k - 1 - j) + normalize(d)
    # entered, but no control-dependent ancestor (or the goal's own node) evaluated
    return float(k) + 1.0 if k else 1.0
