import copy
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srgen.assertions import candidate_assertions
from srgen.mutation import (
    DIVERGENCE_FLAG, DIVERGENT, KILLS, SURVIVES, TIMEOUT_FLAG, CheckedTest,
    apply_mutant, generate_mutants, mutant_unit, mutation_score, revert_mutant,
    run_kill_analysis,
)
from srgen.runtime import execute_test, harvest_observations
from srgen.subject import parse_subject, print_subject

from support import CORPUS, LISTING_1, SUBJECTS, fresh, load, parse_one, random_tests


def checked(unit, test, tolerance=0.01):
    trace = execute_test(unit, test)
    cands = candidate_assertions(harvest_observations(unit, test, trace), "a", tolerance)
    return CheckedTest(test, cands, trace)


def test_aor_on_plus(bank):
    muts = [m for m in generate_mutants(bank) if m.operator == "AOR" and m.method == "deposit"]
    assert [m.description for m in muts] == ["+ -> -", "+ -> *", "+ -> /", "+ -> %"]


def test_single_relational_condition():
    unit = parse_subject("unit C { constructor() {} method f(a: int, b: int) { if (a <= b) { } } }")
    muts = generate_mutants(unit)
    assert [m.operator for m in muts] == ["ROR"] * 5 + ["NEG"]


def test_non_numeric_relational_only_swaps():
    unit = parse_subject("unit C { constructor() {} method f(a: bool, b: bool): bool { return a == b; } }")
    assert [m.description for m in generate_mutants(unit)] == ["== -> !="]


def test_crp_values():
    unit = parse_subject("unit C { constructor() {} method f(): int { return 1; } method g(): bool { return true; } }")
    assert [m.description for m in generate_mutants(unit)] == ["1 -> 2", "1 -> 0", "true -> false"]


@pytest.mark.parametrize("name", SUBJECTS)
def test_counts_match_manifest(name):
    manifest = json.loads((CORPUS / "manifest.json").read_text())
    muts = generate_mutants(load(name))
    assert len(muts) == manifest["subjects"][name]["mutants"]
    assert [m.id for m in muts] == list(range(len(muts)))


@pytest.mark.parametrize("name", SUBJECTS)
def test_apply_revert_restores(name):
    unit = fresh(name)
    pristine = copy.deepcopy(unit)
    for m in generate_mutants(unit):
        original = apply_mutant(unit, m)
        assert unit != pristine
        revert_mutant(unit, m, original)
        assert unit == pristine


@pytest.mark.parametrize("name", SUBJECTS)
def test_mutants_are_well_formed(name):
    unit = load(name)
    for m in generate_mutants(unit):
        mu = mutant_unit(unit, m)
        parse_subject(print_subject(mu))  # re-checks kinds and names
        assert m.method in {d.name for d in unit.declarations}


def test_deposit_plus_to_minus_kills_listing_1(bank):
    p = parse_one(LISTING_1)
    minus = next(m for m in generate_mutants(bank) if m.method == "deposit" and m.description == "+ -> -")
    ct = CheckedTest(p.test, p.assertions)
    matrix = run_kill_analysis(bank, [ct], [minus])
    assert matrix.cell(p.assertions[0].id, minus.id) == KILLS
    mtrace = execute_test(mutant_unit(bank, minus), p.test)
    assert mtrace.inspections[(2, "getBalance")].value == pytest.approx(50.0)


def test_unreached_method_survives(bank):
    p = parse_one(LISTING_1)
    close = [m for m in generate_mutants(bank) if m.method == "closeAccount"]
    ct = checked(bank, p.test)
    matrix = run_kill_analysis(bank, [ct], close)
    assert all(matrix.cell(a.id, m.id) == SURVIVES for a in ct.assertions for m in close)
    assert mutation_score(matrix) == 0.0


def test_guard_negation_diverges_before_observations():
    unit = load("counter.sub")
    p = parse_one("""
    test t focal increment {
        var v0: int = 5;
        var v1: Counter = new Counter(v0);
        var v2: bool = v1.increment();
    }""", unit)
    neg = next(m for m in generate_mutants(unit) if m.method == "constructor" and m.operator == "NEG")
    ct = checked(unit, p.test)
    matrix = run_kill_analysis(unit, [ct], [neg])
    assert DIVERGENCE_FLAG in matrix.flags[(0, neg.id)]
    assert all(matrix.cell(a.id, neg.id) == DIVERGENT for a in ct.assertions)
    assert matrix.killed() == {neg.id}


def test_timeout_counts_as_killed():
    unit = parse_subject("""
    unit D {
      constructor() {}
      method down(n: int): int { while (n > 0) { n = n - 1; } return n; }
    }""")
    p = parse_one("test t focal down { var v0: D = new D(); var v1: int = 3; var v2: int = v0.down(v1); }", unit)
    plus = [m for m in generate_mutants(unit, ("AOR",)) if m.description == "- -> +"]
    ct = checked(unit, p.test)
    matrix = run_kill_analysis(unit, [ct], plus, step_limit=1000)
    assert TIMEOUT_FLAG in matrix.flags[(0, plus[0].id)]
    assert matrix.killed() == {plus[0].id}


def test_score_three_of_four():
    unit = parse_subject("unit T { constructor() {} method f(x: int): int { return x * 2; } }")
    muts = generate_mutants(unit, ("AOR",))
    p = parse_one("test t focal f { var v0: T = new T(); var v1: int = 2; var v2: int = v0.f(v1); }", unit)
    ct = checked(unit, p.test)
    matrix = run_kill_analysis(unit, [ct], muts)
    assert mutation_score(matrix) == 0.75
    assert mutation_score(matrix) == recount(matrix) / len(muts)


def test_no_mutants(bank):
    matrix = run_kill_analysis(bank, [checked(bank, parse_one(LISTING_1).test)], [])
    assert matrix.no_mutants and mutation_score(matrix) == 1.0


def recount(matrix) -> int:
    killed = {m for (_, m), state in matrix.cells.items() if state == KILLS}
    killed |= {m for (_, m), flags in matrix.flags.items() if flags}
    return len(killed)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(SUBJECTS), st.integers(0, 1000))
def test_matrix_deterministic_and_consistent(name, seed):
    unit = load(name)
    muts = generate_mutants(unit)
    tests = [checked(unit, t) for t in random_tests(unit, 4, seed)]
    m1 = run_kill_analysis(unit, tests, muts)
    m2 = run_kill_analysis(unit, [CheckedTest(c.test, c.assertions) for c in tests], muts)
    assert m1.to_json() == m2.to_json()
    assert mutation_score(m1) == recount(m1) / len(muts)
