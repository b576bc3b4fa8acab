import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srgen.chromosome import ChromosomeConfig, ContractViolation, TestFactory, _Ids, validate
from srgen.runtime import execute_test
from srgen.subject import parse_subject
from srgen.testcase import (
    BASELINE, FOCAL, Assignment, Construct, FieldRead, MethodCall, Primitive, TestCase,
)

from support import SUBJECTS, load

TEXTS = parse_subject("""
unit Texts {
  field s: string;
  constructor() { this.s = ""; }
  method put(x: string) { this.s = x; }
  method size(n: int): int { return n; }
  method touch() {}
}""")


def factory(unit, **kw):
    return TestFactory(unit, ChromosomeConfig(**kw))


def test_random_focal_deposit(bank):
    f = factory(bank)
    for seed in range(20):
        t = f.random_test(FOCAL, "deposit", random.Random(seed))
        last = t.statements[-1]
        assert isinstance(last, MethodCall) and last.method == "deposit"
        defs = {s.var: s for s in t.statements[:-1]}
        assert isinstance(defs[last.receiver], Construct)
        assert isinstance(defs[last.args[0]], Primitive)
        assert validate(t, bank) == []


def test_random_baseline_minimal_length(bank):
    f = factory(bank, init_length=2)
    t = f.random_test(BASELINE, None, random.Random(1))
    assert 2 <= len(t)
    assert validate(t, bank) == []


def test_random_focal_constructor(bank):
    t = factory(bank).random_test(FOCAL, "constructor", random.Random(3))
    assert isinstance(t.statements[-1], Construct)
    assert all(isinstance(s, Primitive) for s in t.statements[:-1]) or len(t) > 3


def test_crossover_keeps_focal_methods(bank):
    f = factory(bank)
    rng = random.Random(5)
    for _ in range(50):
        p1 = f.random_test(FOCAL, "deposit", rng)
        p2 = f.random_test(FOCAL, "closeAccount", rng)
        c1, c2 = f.crossover(p1, p2, rng)
        assert c1.focal_method == "deposit" and c1.statements[-1].method == "deposit"
        assert c2.focal_method == "closeAccount" and c2.statements[-1].method == "closeAccount"


def test_crossover_full_concatenation(bank):
    f = factory(bank, max_length=12)
    rng = random.Random(2)
    p1 = f.random_test(BASELINE, None, rng)
    p2 = f.random_test(BASELINE, None, rng)
    c1, _ = f.crossover(p1, p2, rng, cut1=len(p1), cut2=0)
    assert len(c1) == min(12, len(p1) + len(p2))
    assert c1.statements[:len(p1)] == p1.statements[:min(len(p1), 12)]
    assert validate(c1, bank, 12) == []


def test_crossover_rejects_mixed_representations(bank):
    f = factory(bank)
    rng = random.Random(0)
    with pytest.raises(ContractViolation):
        f.crossover(f.random_test(FOCAL, "deposit", rng), f.random_test(BASELINE, None, rng), rng)


def test_dangling_reference_rebinds_or_drops():
    f = factory(TEXTS)
    p1 = TestCase(BASELINE, (
        Construct(0, ()),
        Primitive(1, "string", "a"),
        Primitive(2, "int", 4),
        Primitive(3, "string", "b"),
        MethodCall(None, 0, "put", (3,)),
        MethodCall(4, 0, "size", (2,)),
    ))
    p2 = TestCase(BASELINE, (Construct(0, ()), Primitive(1, "string", "z")))
    # p2's prefix followed by p1's two calls: put loses its argument and is
    # rebound to the earliest string; size has no int to fall back on and goes
    c1, _ = f.crossover(p2, p1, random.Random(0), cut1=2, cut2=4)
    assert c1.statements == (Construct(0, ()), Primitive(1, "string", "z"),
                             MethodCall(None, 0, "put", (1,)))


def test_perturb_distribution(bank):
    f = factory(bank)
    rng = random.Random(9)
    reals = [f.perturb("float", 100.0, rng) for _ in range(2000)]
    assert all(r != 100.0 for r in reals)
    mean = sum(reals) / len(reals)
    sd = (sum((r - mean) ** 2 for r in reals) / len(reals)) ** 0.5
    assert abs(mean - 100.0) < 10 and 90 < sd < 110
    ints = {f.perturb("int", 0, rng) for _ in range(500)}
    assert ints == set(range(-10, 0)) | set(range(1, 11))
    assert f.perturb("bool", True, rng) is False
    for _ in range(100):
        s = f.perturb("string", "abc", rng)
        assert s != "abc" and abs(len(s) - 3) <= 1


def test_mutation_never_deletes_focal(bank):
    f = factory(bank)
    rng = random.Random(4)
    t = f.random_test(FOCAL, "deposit", rng)
    for _ in range(300):
        t = f.mutate(t, rng)
        assert t.statements[-1].method == "deposit"
        assert validate(t, bank) == []


def test_inserted_call_gets_a_receiver():
    f = factory(TEXTS)
    stmts = [Primitive(0, "int", 1)]
    f._insert_call(stmts, 1, "touch", random.Random(0), _Ids(1))
    assert isinstance(stmts[1], Construct)
    assert stmts[2] == MethodCall(None, stmts[1].var, "touch", ())


def test_repair_inserts_missing_receiver(bank):
    f = factory(bank)
    t = TestCase(FOCAL, (Primitive(0, "float", 5.0), MethodCall(None, 7, "deposit", (0,))), "deposit")
    r = f.repair(t, random.Random(0))
    assert validate(r, bank) == []
    assert isinstance(r.statements[-2], Construct)
    assert r.statements[-1].method == "deposit"


def test_repair_identity_on_valid(bank):
    f = factory(bank)
    rng = random.Random(8)
    for _ in range(50):
        t = f.random_test(rng.choice([BASELINE, FOCAL]), "transferFunds", rng)
        assert f.repair(t) == t


def test_repair_removes_unsatisfiable_and_cascades():
    f = factory(TEXTS)
    t = TestCase(BASELINE, (
        Construct(0, ()),
        Primitive(1, "int", 3),
        MethodCall(None, 0, "put", (1,)),  # wrong kind, no string anywhere
        Assignment(5, 1),  # dangling target, no other int: dropped
        MethodCall(2, 0, "size", (1,)),
    ))
    r = f.repair(t)
    assert r.statements == (Construct(0, ()), Primitive(1, "int", 3), MethodCall(2, 0, "size", (1,)))


def test_field_reads_only_public(bank):
    t = TestCase(BASELINE, (Primitive(0, "string", ""), Primitive(1, "float", 1.0),
                            Construct(2, (0, 1)), FieldRead(3, 2, "balance")))
    assert validate(t, bank)
    assert validate(factory(bank).repair(t), bank) == []


@pytest.mark.parametrize("name", SUBJECTS)
def test_random_tests_execute(name):
    unit = load(name)
    f = factory(unit)
    rng = random.Random(0)
    for d in unit.declarations * 5:
        for rep in (BASELINE, FOCAL):
            t = f.random_test(rep, d.name, rng)
            assert validate(t, unit) == []
            execute_test(unit, t)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SUBJECTS), st.sampled_from([BASELINE, FOCAL]), st.integers(0, 2 ** 32))
def test_operator_closure(name, rep, seed):
    unit = load(name)
    f = factory(unit)
    rng = random.Random(seed)
    methods = [d.name for d in unit.declarations]
    a = f.random_test(rep, rng.choice(methods), rng)
    b = f.random_test(rep, rng.choice(methods), rng)
    fa, fb = a.focal_method, b.focal_method
    for _ in range(20):
        a, b = f.crossover(a, b, rng)
        a, b = f.repair(f.mutate(a, rng)), f.repair(f.mutate(b, rng))
        for t, focal in ((a, fa), (b, fb)):
            assert validate(t, unit) == []
            assert t.focal_method == focal
            assert f.repair(t) == t


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SUBJECTS), st.integers(0, 2 ** 32), st.data())
def test_repair_idempotent_on_garbage(name, seed, data):
    # arbitrary statement soup, not just operator outputs
    unit = load(name)
    f = factory(unit)
    rng = random.Random(seed)
    pool = list(f.random_test(BASELINE, None, rng).statements)
    pool += f.random_test(BASELINE, None, rng).statements
    picks = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=15))
    t = TestCase(BASELINE, tuple(picks))
    once = f.repair(t, rng)
    assert validate(once, unit) == [] or len(once) == 0
    assert f.repair(once, rng) == once
