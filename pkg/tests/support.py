"""Shared fixtures data and independent oracles for the test suite."""
from __future__ import annotations

import itertools
import math
import random
from functools import lru_cache
from pathlib import Path

from srgen.chromosome import ChromosomeConfig, TestFactory
from srgen.emitter import parse_suite
from srgen.subject import parse_subject_file
from srgen.subject.nodes import (
    Assign, Call, ExprStmt, FieldAssign, FieldRef, If, Literal, Name,
    Return, Throw, Unary, VarDecl, While,
)
from srgen.testcase import BASELINE, FOCAL, REPRESENTATIONS, Assignment, Construct, FieldRead, MethodCall, Primitive

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
SUBJECTS = sorted(p.name for p in CORPUS.glob("*.sub"))


@lru_cache(maxsize=None)
def load(name: str):
    return parse_subject_file(CORPUS / name)


def fresh(name: str):
    """An uncached parse, for tests that mutate the AST."""
    return parse_subject_file(CORPUS / name)


LISTING_1 = """
test testDepositToAccount focal deposit {
    var v0: string = "owner";
    var v1: float = 100.0;
    var v2: BankAccount = new BankAccount(v0, v1);
    var v3: float = 50.0;
    v2.deposit(v3);
    assert v2.getBalance() == 150.0 within 0.01;
}
"""

LISTING_2 = """
test test17 {
    var v0: string = "";
    var v1: float = 0.0;
    var v2: BankAccount = new BankAccount(v0, v1);
    v2.closeAccount();
    var v3: float = 665.49;
    v2.deposit(v3);
    var v4: float = 0.05;
    v2.transferFunds(v2, v4);
    assert v2.getBalance() == 665.49 within 0.01;
}
"""


def parse_one(text: str, unit=None):
    unit = unit or load("bank_account.sub")
    return parse_suite(text, unit)[0]


def random_tests(unit, n: int, seed: int, representation=None):
    """``n`` tests from random initialisation plus a few operator rounds."""
    rng = random.Random(seed)
    factory = TestFactory(unit, ChromosomeConfig())
    names = [d.name for d in unit.declarations]
    out = []
    while len(out) < n:
        rep = representation or rng.choice(REPRESENTATIONS)
        t = factory.random_test(rep, rng.choice(names), rng)
        for _ in range(rng.randrange(3)):
            other = factory.random_test(rep, rng.choice(names), rng)
            t, _ = factory.crossover(t, other, rng)
            t = factory.mutate(t, rng)
        out.append(t)
    return out


# -- coverage oracle ------------------------------------------------------------
#
# The subject is translated to plain Python with a logging call at every
# method entry and conditional, then executed directly. Nothing is shared
# with the instrumented interpreter apart from the AST.

_I64 = 2 ** 64


class _Throw(Exception):
    pass


def _wrap(x):
    x %= _I64
    return x - _I64 if x >= 2 ** 63 else x


def _idiv(a, b):
    if b == 0:
        raise _Throw("arith")
    q = abs(a) // abs(b)
    return _wrap(q if (a < 0) == (b < 0) else -q)


def _imod(a, b):
    if b == 0:
        raise _Throw("arith")
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def _fdiv(a, b):
    if b == 0:
        raise _Throw("arith")
    return a / b


def _fmod(a, b):
    if b == 0:
        raise _Throw("arith")
    return math.fmod(a, b)


_RUNTIME = {"_wrap": _wrap, "_idiv": _idiv, "_imod": _imod, "_fdiv": _fdiv,
            "_fmod": _fmod, "_Throw": _Throw, "float": float}


class _Emitter:
    def __init__(self, unit):
        self.unit = unit
        self.lines = []

    def expr(self, e) -> str:
        if isinstance(e, Literal):
            return repr(e.value)
        if isinstance(e, Name):
            return f"l_{e.name}"
        if isinstance(e, FieldRef):
            return f"self.f[{e.name!r}]"
        if isinstance(e, Call):
            recv = "self" if e.target is None else f"l_{e.target}"
            args = "".join(f", {self.expr(a)}" for a in e.args)
            return f"ctx.call({recv}, {e.method!r}{args})"
        if isinstance(e, Unary):
            inner = self.expr(e.operand)
            if e.op == "!":
                return f"(not {inner})"
            return f"_wrap(-{inner})" if e.kind == "int" else f"(-{inner})"
        l, r = self.expr(e.left), self.expr(e.right)
        if e.op == "&&":
            return f"({l} and {r})"
        if e.op == "||":
            return f"({l} or {r})"
        if e.op in ("==", "!=") and e.operand_kind == self.unit.name:
            return f"({l} {'is' if e.op == '==' else 'is not'} {r})"
        if e.op in ("<", "<=", ">", ">=", "==", "!="):
            return f"({l} {e.op} {r})"
        if e.kind == "int":
            return {"+": f"_wrap({l} + {r})", "-": f"_wrap({l} - {r})",
                    "*": f"_wrap({l} * {r})", "/": f"_idiv({l}, {r})",
                    "%": f"_imod({l}, {r})"}[e.op]
        l, r = f"float({l})", f"float({r})"
        return {"+": f"({l} + {r})", "-": f"({l} - {r})", "*": f"({l} * {r})",
                "/": f"_fdiv({l}, {r})", "%": f"_fmod({l}, {r})"}[e.op]

    def block(self, stmts, depth: int) -> None:
        pad = "    " * depth
        if not stmts:
            self.lines.append(pad + "pass")
        for s in stmts:
            if isinstance(s, VarDecl):
                self.lines.append(f"{pad}l_{s.name} = {self.expr(s.init)}")
            elif isinstance(s, Assign):
                self.lines.append(f"{pad}l_{s.name} = {self.expr(s.value)}")
            elif isinstance(s, FieldAssign):
                self.lines.append(f"{pad}self.f[{s.name!r}] = {self.expr(s.value)}")
            elif isinstance(s, If):
                self.lines.append(f"{pad}if ctx.branch({s.gid_true!r}, {s.gid_false!r}, "
                                  f"{self.expr(s.cond)}):")
                self.block(s.then, depth + 1)
                if s.orelse is not None:
                    self.lines.append(f"{pad}else:")
                    self.block(s.orelse, depth + 1)
            elif isinstance(s, While):
                self.lines.append(f"{pad}while ctx.branch({s.gid_true!r}, {s.gid_false!r}, "
                                  f"{self.expr(s.cond)}):")
                self.block(s.body, depth + 1)
            elif isinstance(s, Return):
                value = "None" if s.value is None else self.expr(s.value)
                self.lines.append(f"{pad}return ({value},)")
            elif isinstance(s, Throw):
                self.lines.append(f"{pad}raise _Throw({s.message!r})")
            elif isinstance(s, ExprStmt):
                self.lines.append(f"{pad}{self.expr(s.call)}")

    def module(self) -> str:
        for d in self.unit.declarations:
            params = "".join(f", l_{p.name}" for p in d.params)
            self.lines.append(f"def m_{d.name}(ctx, self{params}):")
            self.block(d.body, 1)
        return "\n".join(self.lines) + "\n"


class _Instance:
    def __init__(self, fields):
        self.f = dict(fields)


class _Context:
    def __init__(self, unit, fns):
        self.unit = unit
        self.fns = fns
        self.log = set()
        self.index = 0
        self.depth = 0

    def branch(self, gid_true, gid_false, value):
        self.log.add((gid_true if value else gid_false, self.index))
        return value

    def call(self, obj, method, *args):
        self.log.add((f"{method}:entry", self.index))
        if self.depth >= 100:
            raise _Throw("stack overflow")
        self.depth += 1
        try:
            result = self.fns[method](self, obj, *args)
        finally:
            self.depth -= 1
        if result is None:
            if self.unit.method(method).ret is not None:
                raise _Throw("missing return")
            return None
        return result[0]


_DEFAULTS = {"int": 0, "float": 0.0, "bool": False, "string": ""}


@lru_cache(maxsize=None)
def _compiled(name: str):
    unit = load(name)
    ns = dict(_RUNTIME)
    exec(compile(_Emitter(unit).module(), f"<oracle {name}>", "exec"), ns)
    fns = {d.name: ns[f"m_{d.name}"] for d in unit.declarations}
    defaults = {f.name: _DEFAULTS.get(f.kind) for f in unit.fields}
    return unit, fns, defaults


def oracle_covered(name: str, test) -> set:
    """(goal id, first covering statement index) pairs for ``test``."""
    unit, fns, defaults = _compiled(name)
    ctx = _Context(unit, fns)
    env = {}
    for i, st in enumerate(test.statements, 1):
        ctx.index = i
        try:
            if isinstance(st, Primitive):
                env[st.var] = st.value
            elif isinstance(st, Construct):
                obj = _Instance(defaults)
                ctx.call(obj, "constructor", *[env[a] for a in st.args])
                env[st.var] = obj
            elif isinstance(st, FieldRead):
                env[st.var] = env[st.receiver].f[st.field]
            elif isinstance(st, MethodCall):
                value = ctx.call(env[st.receiver], st.method, *[env[a] for a in st.args])
                if st.var is not None:
                    env[st.var] = value
            elif isinstance(st, Assignment):
                env[st.target] = env[st.source]
        except _Throw:
            break
    first = {}
    for gid, idx in ctx.log:
        if gid not in first or idx < first[gid]:
            first[gid] = idx
    return set(first.items())


# -- set-cover oracle -------------------------------------------------------------

def optimal_cover(kills: dict) -> set:
    """Mutants covered by a minimum-cardinality exhaustive cover."""
    ids = sorted(kills)
    target = set().union(*kills.values()) if kills else set()
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            covered = set().union(*(kills[a] for a in combo)) if combo else set()
            if covered == target:
                return covered
    return target


def parse_suite_text(text: str, name: str = "bank_account.sub"):
    return parse_suite(text, load(name))


__all__ = [
    "BASELINE", "CORPUS", "FOCAL", "LISTING_1", "LISTING_2", "ROOT", "SUBJECTS",
    "fresh", "load", "optimal_cover", "oracle_covered", "parse_one", "parse_suite_text",
    "random_tests",
]
