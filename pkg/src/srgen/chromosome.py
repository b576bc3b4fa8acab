"""Random test construction and genetic operators for both representations.

Baseline chromosomes are free statement lists. Focal chromosomes pin their
last statement to a call of ``focal_method``; crossover and mutation only
rearrange the setup in front of it, and no operator ever changes which
method the focal statement calls.
"""
from __future__ import annotations

import math
import random
import string
from dataclasses import dataclass, replace
from typing import Optional

from .subject.nodes import CONSTRUCTOR, Literal, SubjectUnit, is_value_kind
from .subject.walk import iter_nodes
from .runtime.values import wrap_int
from .testcase import (
    BASELINE, FOCAL, Assignment, Construct, FieldRead, MethodCall, Primitive,
    TestCase,
)

_TEXT_ALPHABET = string.ascii_letters + string.digits + " "
_REAL_BOUND = 1e12


@dataclass
class ChromosomeConfig:
    max_length: int = 40
    init_length: int = 8
    constant_prob: float = 0.25  # primitives drawn from the subject's literals
    reuse_prob: float = 0.7  # arguments bound to an existing variable when one fits
    int_range: int = 100
    insert_prob: float = 0.5

    def __post_init__(self):
        if self.max_length < 2:
            raise ValueError("max_length must be at least 2")
        if not 2 <= self.init_length <= self.max_length:
            raise ValueError("init_length must lie in [2, max_length]")


class ContractViolation(ValueError):
    pass


class TestFactory:
    """Builds, varies and repairs TestCases for one subject unit."""

    __test__ = False

    def __init__(self, unit: SubjectUnit, config: Optional[ChromosomeConfig] = None):
        self.unit = unit
        self.config = config or ChromosomeConfig()
        self.pool = _constant_pool(unit)
        self.methods = list(unit.methods)
        self.public_fields = unit.public_fields

    # -- kinds -------------------------------------------------------------

    def defined_kind(self, st) -> Optional[str]:
        return defined_kind(self.unit, st)

    def required_kinds(self, st) -> list:
        return required_kinds(self.unit, st)

    # -- primitive values ----------------------------------------------------

    def random_value(self, kind: str, rng: random.Random):
        pool = self.pool.get(kind)
        if pool and rng.random() < self.config.constant_prob:
            return rng.choice(pool)
        r = self.config.int_range
        if kind == "int":
            return rng.randint(-r, r)
        if kind == "float":
            return round(rng.uniform(-r, r), 2)
        if kind == "bool":
            return rng.random() < 0.5
        return "".join(rng.choice(_TEXT_ALPHABET) for _ in range(rng.randint(0, 5)))

    def perturb(self, kind: str, value, rng: random.Random):
        if kind == "int":
            return wrap_int(value + rng.randint(1, 10) * rng.choice((-1, 1)))
        if kind == "float":
            out = value + rng.gauss(0.0, 1.0) * max(1.0, abs(value))
            if not math.isfinite(out):
                out = math.copysign(_REAL_BOUND, out)
            return max(-_REAL_BOUND, min(_REAL_BOUND, out))
        if kind == "bool":
            return not value
        chars = list(value)
        op = rng.randrange(3) if chars else 0
        if op == 0:
            chars.insert(rng.randint(0, len(chars)), rng.choice(_TEXT_ALPHABET))
        elif op == 1:
            del chars[rng.randrange(len(chars))]
        else:
            i = rng.randrange(len(chars))
            chars[i] = rng.choice([c for c in _TEXT_ALPHABET if c != chars[i]])
        return "".join(chars)

    # -- statement insertion -------------------------------------------------

    def _vars_before(self, stmts: list, pos: int, kind: str) -> list:
        out = []
        for st in stmts[:pos]:
            if st.var is not None and self.defined_kind(st) == kind:
                out.append(st.var)
        return out

    def _provide(self, stmts: list, pos: int, kind: str, rng, ids, reuse=True) -> tuple:
        """Variable of ``kind`` usable at ``pos``; may insert statements.

        Returns (var, position after any insertions).
        """
        if reuse:
            existing = self._vars_before(stmts, pos, kind)
            if existing and rng.random() < self.config.reuse_prob:
                return rng.choice(existing), pos
        if is_value_kind(kind):
            var = next(ids)
            stmts.insert(pos, Primitive(var, kind, self.random_value(kind, rng)))
            return var, pos + 1
        return self._insert_construct(stmts, pos, rng, ids)

    def _insert_construct(self, stmts, pos, rng, ids, fresh=False) -> tuple:
        args = []
        for kind in self.unit.constructor.param_kinds:
            var, pos = self._provide(stmts, pos, kind, rng, ids, reuse=not fresh)
            args.append(var)
        var = next(ids)
        stmts.insert(pos, Construct(var, tuple(args)))
        return var, pos + 1

    def _receiver(self, stmts, pos, rng, ids) -> tuple:
        existing = self._vars_before(stmts, pos, self.unit.name)
        if existing:
            return rng.choice(existing), pos
        return self._insert_construct(stmts, pos, rng, ids)

    def _insert_call(self, stmts, pos, method, rng, ids, fresh_args=False) -> int:
        """Insert a call to ``method`` with dependencies; returns its index."""
        if method == CONSTRUCTOR:
            _, end = self._insert_construct(stmts, pos, rng, ids, fresh=fresh_args)
            return end - 1
        decl = self.unit.method(method)
        recv, pos = self._receiver(stmts, pos, rng, ids)
        args = []
        for p in decl.params:
            var, pos = self._provide(stmts, pos, p.kind, rng, ids,
                                     reuse=not (fresh_args and is_value_kind(p.kind)))
            args.append(var)
        var = next(ids) if decl.ret is not None else None
        stmts.insert(pos, MethodCall(var, recv, method, tuple(args)))
        return pos

    def _insert_random(self, stmts, pos, rng, ids) -> None:
        roll = rng.random()
        if not self.methods or roll < 0.1:
            self._insert_construct(stmts, pos, rng, ids)
            return
        if roll < 0.17 and self.public_fields:
            f = rng.choice(self.public_fields)
            recv, pos = self._receiver(stmts, pos, rng, ids)
            stmts.insert(pos, FieldRead(next(ids), recv, f.name))
            return
        if roll < 0.22:
            pairs = self._assignable_pairs(stmts, pos)
            if pairs:
                target, source = rng.choice(pairs)
                stmts.insert(pos, Assignment(target, source))
                return
        self._insert_call(stmts, pos, rng.choice(self.methods).name, rng, ids)

    def _assignable_pairs(self, stmts, pos) -> list:
        by_kind = {}
        for st in stmts[:pos]:
            if st.var is not None:
                by_kind.setdefault(self.defined_kind(st), []).append(st.var)
        return [(a, b) for vs in by_kind.values() for a in vs for b in vs if a != b]

    # -- operators -----------------------------------------------------------

    def random_test(self, representation: str, target_method: Optional[str],
                    rng: random.Random) -> TestCase:
        """A fresh chromosome. ``target_method`` owns the sampled target goal
        and becomes the focal method under the focal representation."""
        cfg = self.config
        ids = _Ids(0)
        stmts = []
        if representation == BASELINE:
            length = rng.randint(2, cfg.init_length)
            while len(stmts) < length:
                self._insert_random(stmts, len(stmts), rng, ids)
            return self.repair(TestCase(BASELINE, tuple(stmts[:cfg.max_length])), rng)
        if representation != FOCAL:
            raise ContractViolation(f"unknown representation {representation!r}")
        if target_method is None:
            raise ContractViolation("focal tests need a target method")
        setup = rng.randint(0, cfg.init_length - 1)
        while len(stmts) < setup:
            self._insert_random(stmts, len(stmts), rng, ids)
        idx = self._insert_call(stmts, len(stmts), target_method, rng, ids, fresh_args=True)
        assert idx == len(stmts) - 1
        return self.repair(TestCase(FOCAL, tuple(stmts), target_method), rng)

    def crossover(self, p1: TestCase, p2: TestCase, rng: random.Random,
                  cut1: Optional[int] = None, cut2: Optional[int] = None) -> tuple:
        """Single-point crossover; under focal, on the setup segments only.

        ``cut1``/``cut2`` are the number of leading statements (of the setup,
        for focal parents) that stay with their own parent.
        """
        if p1.representation != p2.representation:
            raise ContractViolation("crossover between different representations")
        if p1.is_focal:
            s1, s2 = p1.statements[:-1], p2.statements[:-1]
            a = rng.randint(0, len(s1)) if cut1 is None else cut1
            b = rng.randint(0, len(s2)) if cut2 is None else cut2
            # focal statements keep their own parent's variable ids
            c1 = _splice(s1[:a], s2[b:]) + [p1.statements[-1]]
            c2 = _splice(s2[:b], s1[a:]) + [p2.statements[-1]]
            c1 = _rekey_focal(c1, s1[:a])
            c2 = _rekey_focal(c2, s2[:b])
            return (self.repair(replace(p1, statements=tuple(c1)), rng),
                    self.repair(replace(p2, statements=tuple(c2)), rng))
        a = rng.randint(1, len(p1)) if cut1 is None else cut1
        b = rng.randint(0, len(p2) - 1) if cut2 is None else cut2
        c1 = self.repair(replace(p1, statements=tuple(_splice(p1.statements[:a], p2.statements[b:]))), rng)
        c2 = self.repair(replace(p2, statements=tuple(_splice(p2.statements[:b], p1.statements[a:]))), rng)
        return (c1 if len(c1) else p1), (c2 if len(c2) else p2)

    def mutate(self, t: TestCase, rng: random.Random) -> TestCase:
        cfg = self.config
        stmts = list(t.statements)
        focal = t.is_focal
        n = len(stmts)
        ids = _Ids(_max_var(stmts) + 1)
        # delete
        if n:
            kept = []
            for i, st in enumerate(stmts):
                if (focal and i == n - 1) or rng.random() >= 1.0 / n:
                    kept.append(st)
            if kept:
                stmts = kept
        # change
        n = len(stmts)
        i = 0
        while i < len(stmts):
            if rng.random() < 1.0 / n:
                i = self._change(stmts, i, rng, ids)
            i += 1
        # insert
        prob = cfg.insert_prob
        while rng.random() < prob and len(stmts) < cfg.max_length:
            limit = len(stmts) - 1 if focal else len(stmts)
            self._insert_random(stmts, rng.randint(0, max(0, limit)), rng, ids)
            prob *= cfg.insert_prob
        out = self.repair(replace(t, statements=tuple(stmts)), rng)
        return out if len(out) else t

    def _change(self, stmts: list, i: int, rng, ids) -> int:
        """Change statement i in place; returns the index it ended up at."""
        st = stmts[i]
        if isinstance(st, Primitive):
            stmts[i] = replace(st, value=self.perturb(st.kind, st.value, rng))
            return i
        if isinstance(st, Assignment):
            kind = self._kind_of(stmts, i, st.target)
            choices = [v for v in self._vars_before(stmts, i, kind) if v != st.target] if kind else []
            if choices:
                stmts[i] = Assignment(st.target, rng.choice(choices))
            return i
        kinds = self.required_kinds(st)
        new_refs = []
        pos = i
        for kind in kinds:
            candidates = self._vars_before(stmts, pos, kind)
            if is_value_kind(kind) and (not candidates or rng.random() < 0.5):
                var = next(ids)
                stmts.insert(pos, Primitive(var, kind, self.random_value(kind, rng)))
                pos += 1
                new_refs.append(var)
            elif candidates:
                new_refs.append(rng.choice(candidates))
            else:
                var, pos = self._insert_construct(stmts, pos, rng, ids)
                new_refs.append(var)
        stmts[pos] = stmts[pos].with_refs(new_refs)
        return pos

    def _kind_of(self, stmts, i, var) -> Optional[str]:
        for st in stmts[:i]:
            if st.var == var:
                return self.defined_kind(st)
        return None

    # -- repair --------------------------------------------------------------

    def repair(self, t: TestCase, rng: Optional[random.Random] = None) -> TestCase:
        """Make ``t`` satisfy every TestCase invariant.

        Dangling or ill-kinded references are rebound to the earliest
        compatible earlier variable; statements that cannot be rebound are
        dropped, except the focal statement, for which fresh dependencies
        are inserted instead.
        """
        if not validate(t, self.unit, self.config.max_length):
            return t.normalized()
        stmts = list(t.statements)
        for _ in range(len(stmts) + 2):
            stmts = self._repair_pass(stmts, t, rng)
            if len(stmts) <= self.config.max_length:
                break
            stmts = self._shorten(stmts, t.is_focal)
        return TestCase(t.representation, tuple(stmts), t.focal_method).normalized()

    def _repair_pass(self, stmts: list, t: TestCase, rng) -> list:
        focal = t.is_focal
        ids = _Ids(_max_var(stmts) + 1)
        out = []
        kinds = {}  # var -> kind, in definition order
        for i, st in enumerate(stmts):
            is_focal_stmt = focal and i == len(stmts) - 1
            if is_focal_stmt:
                st = self._focal_shape(st, t)
            if st.var is not None and st.var in kinds:
                # duplicate definition: give it a fresh id
                st = replace(st, var=next(ids))
            fixed = self._rebind(st, kinds)
            if fixed is None and is_focal_stmt:
                fixed = self._supply(st, out, kinds, rng, ids)
            if fixed is None:
                continue
            out.append(fixed)
            if fixed.var is not None:
                kinds[fixed.var] = self.defined_kind(fixed)
        if focal and (not out or not self._is_focal_stmt(out[-1], t.focal_method)):
            # focal statement lost (empty input); rebuild it
            fixed = self._supply(self._blank_focal(t.focal_method, ids), out, kinds, rng, ids)
            out.append(fixed)
        return out

    def _focal_shape(self, st, t: TestCase):
        if self._is_focal_stmt(st, t.focal_method):
            return st
        raise ContractViolation(f"focal statement does not call {t.focal_method!r}")

    @staticmethod
    def _is_focal_stmt(st, focal_method) -> bool:
        if focal_method == CONSTRUCTOR:
            return isinstance(st, Construct)
        return isinstance(st, MethodCall) and st.method == focal_method

    def _blank_focal(self, method, ids):
        if method == CONSTRUCTOR:
            return Construct(next(ids), tuple(-1 for _ in self.unit.constructor.params))
        decl = self.unit.method(method)
        return MethodCall(next(ids) if decl.ret is not None else None, -1, method,
                          tuple(-1 for _ in decl.params))

    def _rebind(self, st, kinds: dict):
        if isinstance(st, Assignment):
            tk, sk = kinds.get(st.target), kinds.get(st.source)
            if tk is not None and tk == sk:
                return st
            if tk is not None:
                src = _earliest(kinds, tk, exclude=st.target)
                return Assignment(st.target, src) if src is not None else None
            if sk is not None:
                tgt = _earliest(kinds, sk, exclude=st.source)
                return Assignment(tgt, st.source) if tgt is not None else None
            return None
        refs = st.refs()
        if not refs:
            return st
        if isinstance(st, FieldRead):
            try:
                if not self.unit.field_decl(st.field).public:
                    return None
            except KeyError:
                return None
        new = []
        changed = False
        for ref, kind in zip(refs, self.required_kinds(st)):
            if kinds.get(ref) == kind:
                new.append(ref)
                continue
            alt = _earliest(kinds, kind)
            if alt is None:
                return None
            new.append(alt)
            changed = True
        return st.with_refs(new) if changed else st

    def _supply(self, st, out: list, kinds: dict, rng, ids):
        """Insert fresh dependencies so the focal statement is satisfiable."""
        rng = rng or _DeterministicRng()
        new = []
        for ref, kind in zip(st.refs(), self.required_kinds(st)):
            if kinds.get(ref) == kind:
                new.append(ref)
                continue
            alt = _earliest(kinds, kind)
            if alt is None:
                if is_value_kind(kind):
                    alt = next(ids)
                    out.append(Primitive(alt, kind, self.random_value(kind, rng)))
                else:
                    tmp = []
                    alt, _ = self._insert_construct(tmp, 0, rng, ids, fresh=True)
                    for s in tmp:
                        out.append(s)
                        kinds[s.var] = self.defined_kind(s)
                kinds[alt] = kind
            new.append(alt)
        return st.with_refs(new) if new else st

    def _shorten(self, stmts: list, focal: bool) -> list:
        limit = self.config.max_length
        if not focal:
            return stmts[:limit]
        needed = _needed_by(stmts, len(stmts) - 1)
        out = list(stmts)
        for i in range(len(stmts) - 2, -1, -1):
            if len(out) <= limit:
                break
            if i not in needed:
                del out[i]
        if len(out) > limit:
            # the focal statement's own dependency chain is too long
            del out[len(out) - 2]
        return out


# -- validation ---------------------------------------------------------------

def defined_kind(unit: SubjectUnit, st) -> Optional[str]:
    """Kind of the variable ``st`` defines, or None."""
    if isinstance(st, Primitive):
        return st.kind
    if isinstance(st, Construct):
        return unit.name
    if isinstance(st, FieldRead):
        return unit.field_decl(st.field).kind
    if isinstance(st, MethodCall):
        return unit.method(st.method).ret
    return None


def required_kinds(unit: SubjectUnit, st) -> list:
    """Kinds expected at each of ``st.refs()`` (assignments excepted)."""
    if isinstance(st, Construct):
        return unit.constructor.param_kinds
    if isinstance(st, FieldRead):
        return [unit.name]
    if isinstance(st, MethodCall):
        return [unit.name, *unit.method(st.method).param_kinds]
    return []


def validate(t: TestCase, unit: SubjectUnit, max_length: int = 40) -> list:
    """Every TestCase invariant violated by ``t`` (empty list if none)."""
    problems = []
    n = len(t.statements)
    if not 1 <= n <= max_length:
        problems.append(f"length {n} outside [1, {max_length}]")
    kinds = {}
    for i, st in enumerate(t.statements, 1):
        try:
            required = required_kinds(unit, st)
            if isinstance(st, FieldRead) and not unit.field_decl(st.field).public:
                problems.append(f"s{i}: field {st.field!r} is not public")
            if isinstance(st, MethodCall) and st.method == CONSTRUCTOR:
                problems.append(f"s{i}: constructor called as a method")
        except KeyError as exc:
            problems.append(f"s{i}: unknown member {exc}")
            continue
        if isinstance(st, Assignment):
            tk, sk = kinds.get(st.target), kinds.get(st.source)
            if tk is None or sk is None or tk != sk:
                problems.append(f"s{i}: assignment between {tk} and {sk}")
        else:
            if len(required) != len(st.refs()):
                problems.append(f"s{i}: arity mismatch")
            for ref, kind in zip(st.refs(), required):
                if kinds.get(ref) != kind:
                    problems.append(f"s{i}: v{ref} is {kinds.get(ref)}, needs {kind}")
        if isinstance(st, Primitive) and not _value_matches(st.kind, st.value):
            problems.append(f"s{i}: literal {st.value!r} is not a {st.kind}")
        if st.var is not None:
            if st.var in kinds:
                problems.append(f"s{i}: v{st.var} defined twice")
            kind = defined_kind(unit, st)
            if kind is None:
                problems.append(f"s{i}: defines a variable but has no value")
            kinds[st.var] = kind
        elif isinstance(st, MethodCall) and unit.method(st.method).ret is not None:
            problems.append(f"s{i}: result of {st.method} not bound")
    if t.is_focal:
        if t.focal_method is None:
            problems.append("focal test without focal method")
        elif n:
            last = t.statements[-1]
            if t.focal_method == CONSTRUCTOR:
                if not isinstance(last, Construct):
                    problems.append("constructor-focal test does not end in a constructor")
            elif not (isinstance(last, MethodCall) and last.method == t.focal_method):
                problems.append(f"last statement is not a call of {t.focal_method!r}")
    elif t.focal_method is not None:
        problems.append("baseline test with a focal method")
    return problems


def _value_matches(kind: str, value) -> bool:
    if kind == "bool":
        return isinstance(value, bool)
    if kind == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "float":
        return isinstance(value, float) and math.isfinite(value)
    return isinstance(value, str)


# -- helpers ------------------------------------------------------------------

class _Ids:
    def __init__(self, start: int):
        self.n = start

    def __next__(self) -> int:
        v = self.n
        self.n += 1
        return v


class _DeterministicRng(random.Random):
    """Stand-in stream for repairs invoked without one."""

    def __init__(self):
        super().__init__(0)


def _max_var(stmts) -> int:
    m = -1
    for st in stmts:
        if st.var is not None and st.var > m:
            m = st.var
        for r in st.refs():
            if r > m:
                m = r
    return m


def _splice(head, tail) -> list:
    """head ++ tail with tail's variable ids moved clear of head's."""
    delta = _max_var(head) + 1
    out = list(head)
    for st in tail:
        refs = [r + delta for r in st.refs()]
        moved = st.with_refs(refs) if refs else st
        if moved.var is not None:
            moved = replace(moved, var=moved.var + delta)
        out.append(moved)
    return out


def _rekey_focal(stmts: list, kept_prefix) -> list:
    """Point the focal statement's references only at ids that still mean
    what they meant in its own parent; anything else is left to repair."""
    own = {st.var for st in kept_prefix if st.var is not None}
    focal = stmts[-1]
    taken = {st.var for st in stmts[:-1] if st.var is not None}
    refs = [r if r in own else -1 for r in focal.refs()]
    if refs:
        focal = focal.with_refs(refs)
    if focal.var is not None and focal.var in taken:
        focal = replace(focal, var=max(taken) + 1)
    return stmts[:-1] + [focal]


def _earliest(kinds: dict, kind: str, exclude=None) -> Optional[int]:
    for var, k in kinds.items():
        if k == kind and var != exclude:
            return var
    return None


def _needed_by(stmts: list, idx: int) -> set:
    defs = {st.var: i for i, st in enumerate(stmts) if st.var is not None}
    need = set()
    stack = [idx]
    while stack:
        i = stack.pop()
        for r in stmts[i].refs():
            j = defs.get(r)
            if j is not None and j < i and j not in need:
                need.add(j)
                stack.append(j)
    return need


def _constant_pool(unit: SubjectUnit) -> dict:
    pool = {"int": set(), "float": set(), "string": set()}
    for node in iter_nodes(unit.declarations):
        if isinstance(node, Literal) and node.lit_kind in pool:
            pool[node.lit_kind].add(node.value)
            if node.lit_kind == "int":
                pool["float"].add(float(node.value))
    return {k: sorted(v) for k, v in pool.items() if v}
