"""Instrumented tree-walking interpreter for subject units.

``execute_test`` runs a TestCase statement by statement. While recording,
every method entry and every evaluated conditional is logged against the
1-based index of the test statement being executed, which is what lets the
fitness function restrict coverage to the focal statement.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

from ..subject.analysis import entry_goal_id
from ..subject.nodes import (
    Assign, Binary, Call, ExprStmt, FieldAssign, FieldRef, If, Literal, Name,
    Return, SubjectUnit, Throw, Unary, VarDecl, While,
)
from ..testcase import Assignment, Construct, FieldRead, MethodCall, Primitive, TestCase
from .distance import K, relational_distances
from .values import (
    MISSING_RETURN, SKIPPED, STACK_OVERFLOW, TIMEOUT, Normal, Obj, Raised,
    StepLimitExceeded, SubjectException, int_div, int_mod, real_div,
    real_mod, wrap_int,
)

DEFAULT_STEP_LIMIT = 100_000
MAX_CALL_DEPTH = 100

if sys.getrecursionlimit() < 20_000:
    sys.setrecursionlimit(20_000)


@dataclass
class ExecTrace:
    """What one execution of a test did.

    ``hits`` maps goal id -> {statement index -> smallest raw distance seen
    while that statement ran}; a distance of 0 means the goal was covered.
    """
    n_statements: int
    hits: dict = field(default_factory=dict)
    outcomes: list = field(default_factory=list)
    steps: int = 0
    timeout: bool = False
    inspections: dict = field(default_factory=dict)  # (var, inspector) -> Normal | Raised | TIMEOUT
    entered: set = field(default_factory=set)  # every declaration entered, inspectors included
    live_units: list = field(default_factory=list)  # unit-typed vars alive at end, in id order

    def covered_in(self, lo: int, hi: int) -> dict:
        """goal id -> first covering statement index within [lo, hi]."""
        out = {}
        for gid, per in self.hits.items():
            best = None
            for idx, d in per.items():
                if d == 0 and lo <= idx <= hi and (best is None or idx < best):
                    best = idx
            if best is not None:
                out[gid] = best
        return out

    @property
    def covered(self) -> dict:
        return self.covered_in(1, self.n_statements)

    def min_distance(self, goal_id: str, lo: int = 1, hi: Optional[int] = None) -> Optional[float]:
        hi = self.n_statements if hi is None else hi
        per = self.hits.get(goal_id)
        if not per:
            return None
        vals = [d for idx, d in per.items() if lo <= idx <= hi]
        return min(vals) if vals else None

    @property
    def branch_min_distance(self) -> dict:
        return {g: min(per.values()) for g, per in self.hits.items() if per}

    def first_exception(self) -> Optional[int]:
        for i, o in enumerate(self.outcomes, 1):
            if isinstance(o, Raised) or o is TIMEOUT:
                return i
        return None


class _Frame:
    __slots__ = ("obj", "env", "decl")

    def __init__(self, obj, env, decl):
        self.obj = obj
        self.env = env
        self.decl = decl


class Machine:
    def __init__(self, unit: SubjectUnit, step_limit: int = DEFAULT_STEP_LIMIT):
        self.unit = unit
        self.step_limit = step_limit
        self.decls = {d.name: d for d in unit.declarations}
        self.entry_ids = {d.name: entry_goal_id(d.name) for d in unit.declarations}
        self.field_names = [f.name for f in unit.fields]
        self.field_defaults = {f.name: _default(f.kind) for f in unit.fields}
        self.steps = 0
        self.depth = 0
        self.serial = 0
        self.recording = False
        self.stmt_index = 0
        self.hits = {}
        self.entered = set()
        self._stmt = {
            VarDecl: self._s_var, Assign: self._s_assign, FieldAssign: self._s_field,
            If: self._s_if, While: self._s_while, Return: self._s_return,
            Throw: self._s_throw, ExprStmt: self._s_expr,
        }
        self._expr = {
            Literal: lambda e, f: e.value,
            Name: lambda e, f: f.env[e.name],
            FieldRef: lambda e, f: f.obj.fields[e.name],
            Call: self._e_call, Binary: self._e_binary, Unary: self._e_unary,
        }

    # -- bookkeeping ---------------------------------------------------------

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.step_limit:
            raise StepLimitExceeded()

    def _hit(self, gid: str, dist: float) -> None:
        per = self.hits.get(gid)
        idx = self.stmt_index
        if per is None:
            self.hits[gid] = {idx: dist}
        else:
            old = per.get(idx)
            if old is None or dist < old:
                per[idx] = dist

    # -- entry points --------------------------------------------------------

    def construct(self, args: list) -> Obj:
        self.serial += 1
        obj = Obj(dict(self.field_defaults), self.serial)
        self.invoke(obj, self.decls["constructor"], args)
        return obj

    def invoke(self, obj: Obj, decl, args: list):
        self.entered.add(decl.name)
        if self.recording:
            self._hit(self.entry_ids[decl.name], 0.0)
        if self.depth >= MAX_CALL_DEPTH:
            raise SubjectException(STACK_OVERFLOW)
        self.depth += 1
        try:
            env = {p.name: a for p, a in zip(decl.params, args)}
            result = self._block(decl.body, _Frame(obj, env, decl))
        finally:
            self.depth -= 1
        if result is None:
            if decl.ret is not None:
                raise SubjectException(MISSING_RETURN)
            return None
        return result[0]

    # -- statements ----------------------------------------------------------

    def _block(self, stmts, frame):
        for s in stmts:
            self._tick()
            r = self._stmt[type(s)](s, frame)
            if r is not None:
                return r
        return None

    def _s_var(self, s, f):
        f.env[s.name] = self._eval(s.init, f)

    def _s_assign(self, s, f):
        f.env[s.name] = self._eval(s.value, f)

    def _s_field(self, s, f):
        f.obj.fields[s.name] = self._eval(s.value, f)

    def _s_if(self, s, f):
        if self._test(s, f):
            return self._block(s.then, f)
        if s.orelse is not None:
            return self._block(s.orelse, f)
        return None

    def _s_while(self, s, f):
        while True:
            self._tick()
            if not self._test(s, f):
                return None
            r = self._block(s.body, f)
            if r is not None:
                return r

    def _s_return(self, s, f):
        return (None if s.value is None else self._eval(s.value, f),)

    def _s_throw(self, s, f):
        raise SubjectException(s.message)

    def _s_expr(self, s, f):
        self._e_call(s.call, f)

    def _test(self, node, f) -> bool:
        if not self.recording:
            return self._eval(node.cond, f)
        value, d_true, d_false = self._cond(node.cond, f)
        self._hit(node.gid_true, d_true)
        self._hit(node.gid_false, d_false)
        return value

    def _cond(self, e, f):
        """Evaluate a boolean expression, returning (value, d_true, d_false)."""
        if isinstance(e, Binary):
            op = e.op
            if op == "&&":
                lv, lt, lf = self._cond(e.left, f)
                if not lv:
                    return False, lt + K, 0.0
                rv, rt, rf = self._cond(e.right, f)
                return rv, lt + rt, min(lf, rf)
            if op == "||":
                lv, lt, lf = self._cond(e.left, f)
                if lv:
                    return True, 0.0, lf + K
                rv, rt, rf = self._cond(e.right, f)
                return rv, min(lt, rt), lf + rf
            if op in ("<", "<=", ">", ">=", "==", "!="):
                a = self._eval(e.left, f)
                b = self._eval(e.right, f)
                value = _compare(op, a, b)
                d_true, d_false = relational_distances(op, a, b, e.operand_kind)
                return value, d_true, d_false
        elif isinstance(e, Unary) and e.op == "!":
            v, t, fl = self._cond(e.operand, f)
            return (not v), fl, t
        v = self._eval(e, f)
        return v, (0.0 if v else K), (K if v else 0.0)

    # -- expressions ---------------------------------------------------------

    def _eval(self, e, f):
        return self._expr[type(e)](e, f)

    def _e_call(self, e, f):
        obj = f.obj if e.target is None else f.env[e.target]
        args = [self._eval(a, f) for a in e.args]
        return self.invoke(obj, self.decls[e.method], args)

    def _e_unary(self, e, f):
        v = self._eval(e.operand, f)
        if e.op == "!":
            return not v
        return wrap_int(-v) if e.kind == "int" else -v

    def _e_binary(self, e, f):
        op = e.op
        if op == "&&":
            return bool(self._eval(e.left, f)) and bool(self._eval(e.right, f))
        if op == "||":
            return bool(self._eval(e.left, f)) or bool(self._eval(e.right, f))
        a = self._eval(e.left, f)
        b = self._eval(e.right, f)
        if e.kind in ("int", "float"):
            return _arith(op, a, b, e.kind == "int")
        return _compare(op, a, b)

    # -- tests ---------------------------------------------------------------

    def run(self, test: TestCase, observe: bool = True, record: bool = True) -> ExecTrace:
        trace = ExecTrace(len(test.statements))
        self.steps = 0
        self.hits = trace.hits
        self.entered = trace.entered
        env = {}
        unit_vars = []
        halted = False
        for i, st in enumerate(test.statements, 1):
            if halted:
                trace.outcomes.append(SKIPPED)
                continue
            self.stmt_index = i
            self.recording = record
            try:
                value = self._run_statement(st, env)
                trace.outcomes.append(Normal(value))
                if st.var is not None and isinstance(value, Obj):
                    unit_vars.append(st.var)
            except SubjectException as exc:
                trace.outcomes.append(Raised(exc.text))
                halted = True
            except StepLimitExceeded:
                trace.outcomes.append(TIMEOUT)
                trace.timeout = True
                halted = True
        self.recording = False
        trace.live_units = sorted(set(unit_vars))
        if observe and not trace.timeout:
            self._inspect(trace, env)
        trace.steps = min(self.steps, self.step_limit)
        return trace

    def _run_statement(self, st, env):
        if isinstance(st, MethodCall):
            decl = self.decls[st.method]
            value = self.invoke(env[st.receiver], decl, [env[a] for a in st.args])
            if st.var is not None:
                env[st.var] = value
            return value
        if isinstance(st, Primitive):
            env[st.var] = st.value
            return st.value
        if isinstance(st, Construct):
            obj = self.construct([env[a] for a in st.args])
            env[st.var] = obj
            return obj
        if isinstance(st, FieldRead):
            value = env[st.receiver].fields[st.field]
            env[st.var] = value
            return value
        if isinstance(st, Assignment):
            env[st.target] = env[st.source]
            return None
        raise TypeError(f"unknown statement {st!r}")

    def _inspect(self, trace: ExecTrace, env: dict) -> None:
        inspectors = self.unit.inspectors
        for var in trace.live_units:
            obj = env[var]
            for m in inspectors:
                key = (var, m.name)
                try:
                    trace.inspections[key] = Normal(self.invoke(obj, m, []))
                except SubjectException as exc:
                    trace.inspections[key] = Raised(exc.text)
                except StepLimitExceeded:
                    trace.inspections[key] = TIMEOUT
                    trace.timeout = True
                    return


def execute_test(unit: SubjectUnit, test: TestCase, step_limit: int = DEFAULT_STEP_LIMIT,
                 observe: bool = True, record: bool = True) -> ExecTrace:
    """Run ``test`` against ``unit``. Never raises for subject-level faults."""
    return Machine(unit, step_limit).run(test, observe=observe, record=record)


def _default(kind: str):
    return {"int": 0, "float": 0.0, "bool": False, "string": ""}.get(kind)


def _arith(op: str, a, b, integral: bool):
    if integral:
        if op == "+":
            return wrap_int(a + b)
        if op == "-":
            return wrap_int(a - b)
        if op == "*":
            return wrap_int(a * b)
        if op == "/":
            return int_div(a, b)
        return int_mod(a, b)
    a = float(a)
    b = float(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return real_div(a, b)
    return real_mod(a, b)


def _compare(op: str, a, b) -> bool:
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a is b if isinstance(a, Obj) else a == b
    return a is not b if isinstance(a, Obj) else a != b
