"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line to the terminal before asserting. The corpus-wide criteria share a
single ``compare`` run over every subject, both representations and
seeds 1..10 at the default budget of 50,000 evaluations.
"""
import json
import random
import re
import statistics
import time

import pytest

from srgen.assertions import DEFAULT_TOLERANCE, candidate_assertions, select_unique_killers
from srgen.chromosome import TestFactory, validate
from srgen.cli import corpus_tolerance, main
from srgen.emitter import parse_suite
from srgen.mutation import CheckedTest, generate_mutants, run_kill_analysis
from srgen.pipeline import assertion_failures, evaluate_suite
from srgen.runtime import execute_test, harvest_observations
from srgen.subject import StaticModel
from srgen.testcase import BASELINE, FOCAL, REPRESENTATIONS

from support import (
    CORPUS, LISTING_1, LISTING_2, SUBJECTS, load, optimal_cover, oracle_covered,
    parse_suite_text, random_tests,
)

pytestmark = pytest.mark.slow

SEEDS = range(1, 11)
BUDGET = 50_000
TIME_LIMIT = 600.0
BANK = "bank_account.sub"


def verdict(capsys, n: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def corpus_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("compare")
    start = time.perf_counter()
    code = main(["compare", "--corpus", str(CORPUS), "--seeds", f"{SEEDS[0]}..{SEEDS[-1]}",
                 "--budget", str(BUDGET), "--out", str(out)])
    return {"out": out, "code": code, "elapsed": time.perf_counter() - start}


def run_dir(run, name, rep, seed):
    return run["out"] / name[:-4] / rep / f"seed-{seed}"


def report(run, name, rep, seed) -> dict:
    return json.loads((run_dir(run, name, rep, seed) / "report.json").read_text())


def suite_text(run, name, rep, seed) -> str:
    return (run_dir(run, name, rep, seed) / f"{name[:-4]}.{rep}.tests").read_text()


def tolerance(name) -> float:
    tol = corpus_tolerance(CORPUS / name)
    return DEFAULT_TOLERANCE if tol is None else tol


def parsed_suite(run, name, rep, seed) -> list:
    return parse_suite(suite_text(run, name, rep, seed), load(name), tolerance(name))


def all_runs():
    return [(name, rep, seed) for name in SUBJECTS for rep in REPRESENTATIONS for seed in SEEDS]


BALANCE_AFTER_DEPOSIT = re.compile(
    r"(v\d+)\.deposit\(v\d+\);\s*(?://[^\n]*\n\s*)*assert \1\.getBalance\(\) == [-\d.e]+ within 0\.01;")


def test_criterion_1_listing_1_reproduction(corpus_run, capsys):
    bank = load(BANK)
    listing = evaluate_suite(bank, parse_suite_text(LISTING_1))
    semantics_ok = not listing.failures
    found = None
    for seed in SEEDS:
        text = suite_text(corpus_run, BANK, FOCAL, seed)
        for block in re.findall(r"test \w+ focal deposit \{.*?\n\}", text, re.S):
            if BALANCE_AFTER_DEPOSIT.search(block):
                found = (seed, block.splitlines()[0])
                break
        if found:
            break
    ok = semantics_ok and found is not None
    detail = (f"100.0 + 50.0 -> 150.0 within 0.01 holds={semantics_ok}; "
              + (f"seed {found[0]}: '{found[1]}' asserts getBalance after deposit" if found
                 else "no deposit-focal test asserting the balance in seeds 1-10"))
    verdict(capsys, 1, ok, detail)


def test_criterion_2_listing_2_diagnosis(capsys):
    ev = evaluate_suite(load(BANK), parse_suite_text(LISTING_2))
    [rec] = ev.metrics.tests
    ok = len(rec.responsible_methods) >= 2 and rec.coherence < 1.0
    verdict(capsys, 2, ok, f"responsible={rec.responsible_methods} coherence={rec.coherence:.3f}")


def test_criterion_3_effectiveness(corpus_run, capsys):
    problems = []
    if len(SUBJECTS) < 5:
        problems.append(f"only {len(SUBJECTS)} subjects")
    full = {}
    for name in SUBJECTS:
        goals = StaticModel(load(name)).goal_ids
        if len(goals) > 25:
            problems.append(f"{name} has {len(goals)} goals")
        for rep in REPRESENTATIONS:
            reps = [report(corpus_run, name, rep, s) for s in SEEDS]
            full[name, rep] = sum(r["coverage"] == 1.0 for r in reps)
            if full[name, rep] < 8:
                problems.append(f"{name} {rep}: {full[name, rep]}/10 seeds at 100%")
            if any(r["budget_used"] > BUDGET for r in reps):
                problems.append(f"{name} {rep}: budget exceeded")
    bank_focal = [report(corpus_run, BANK, FOCAL, s)["coverage"] for s in SEEDS]
    bank_base = [report(corpus_run, BANK, BASELINE, s)["coverage"] for s in SEEDS]
    if any(c < 1.0 for c in bank_focal):
        problems.append("BankAccount focal below 16/16 for some seed")
    if statistics.median(bank_focal) < 0.9 * statistics.median(bank_base):
        problems.append("BankAccount focal median coverage not within 10% of baseline")
    if corpus_run["code"] != 0:
        problems.append(f"compare exited {corpus_run['code']}")
    if corpus_run["elapsed"] >= TIME_LIMIT:
        problems.append(f"compare took {corpus_run['elapsed']:.0f}s")
    worst = min(full.values())
    detail = (f"{len(SUBJECTS)} subjects, worst cell {worst}/10 seeds at 100% coverage, "
              f"compare {corpus_run['elapsed']:.0f}s" + ("; " + "; ".join(problems) if problems else ""))
    verdict(capsys, 3, not problems, detail)


def test_criterion_4_single_responsibility(corpus_run, capsys):
    bad = []
    n_tests = 0
    for name, rep, seed in all_runs():
        if rep != FOCAL:
            continue
        r = report(corpus_run, name, rep, seed)
        n_tests += len(r["tests"])
        if r["sr_rate"] != 1.0:
            bad.append(f"{name} seed {seed} sr_rate {r['sr_rate']}")
        for p in parsed_suite(corpus_run, name, rep, seed):
            if p.test.focal_method is None or validate(p.test, load(name)):
                bad.append(f"{name} seed {seed} {p.name}")
        for rec in r["tests"]:
            if rec["focal_method"] is None or len(set(rec["responsible_methods"]) - {rec["focal_method"]}):
                bad.append(f"{name} seed {seed} {rec['name']}")
    verdict(capsys, 4, not bad, f"{n_tests} focal tests, {len(bad)} violations {bad[:3]}")


def test_criterion_5_coherence(corpus_run, capsys):
    values = [report(corpus_run, name, FOCAL, seed)["mean_coherence"]
              for name in SUBJECTS for seed in SEEDS]
    bad = [v for v in values if v != 1.0]
    verdict(capsys, 5, not bad, f"{len(values)} focal suites, min mean_coherence {min(values)}")


def test_criterion_6_coverage_oracle(capsys):
    mismatches, timeouts, compared = 0, 0, 0
    for i, name in enumerate(SUBJECTS):
        unit = load(name)
        for t in random_tests(unit, 1000, seed=1000 + i):
            trace = execute_test(unit, t, observe=False)
            if trace.timeout:
                timeouts += 1
                continue
            compared += 1
            if set(trace.covered.items()) != oracle_covered(name, t):
                mismatches += 1
    detail = f"{compared} tests compared, {mismatches} mismatches, {timeouts} timeouts skipped"
    verdict(capsys, 6, mismatches == 0 and timeouts == 0, detail)


def test_criterion_7_greedy_cover(corpus_run, capsys):
    instances, mismatches = 0, 0
    for name in SUBJECTS:
        unit = load(name)
        mutants = generate_mutants(unit)
        tol = tolerance(name)
        for rep in REPRESENTATIONS:
            for seed in SEEDS:
                checked = []
                for i, p in enumerate(parsed_suite(corpus_run, name, rep, seed)):
                    trace = execute_test(unit, p.test)
                    obs = harvest_observations(unit, p.test, trace)
                    checked.append(CheckedTest(p.test, candidate_assertions(obs, f"t{i}.a", tol), trace))
                matrix = run_kill_analysis(unit, checked, mutants)
                for ct in checked:
                    kills = {a.id: matrix.killed_by(a.id) for a in ct.assertions}
                    relevant = set().union(*kills.values()) if kills else set()
                    if len(ct.assertions) > 12 or len(relevant) > 20:
                        continue
                    instances += 1
                    kept = select_unique_killers(ct.assertions, kills)
                    covered = set().union(*(kills[a.id] for a in kept)) if kept else set()
                    if covered != optimal_cover(kills):
                        mismatches += 1
    detail = f"{instances} instances, {mismatches} mismatches"
    verdict(capsys, 7, instances > 0 and mismatches == 0, detail)


def test_criterion_8_operator_closure(capsys):
    per_rep = 10_000
    results = {}
    for rep in REPRESENTATIONS:
        rng = random.Random(8)
        violations, applications, focal_cases, focal_kept = 0, 0, 0, 0
        while applications < per_rep:
            name = SUBJECTS[applications % len(SUBJECTS)]
            unit = load(name)
            f = TestFactory(unit)
            methods = [d.name for d in unit.declarations]
            a = f.random_test(rep, rng.choice(methods), rng)
            b = f.random_test(rep, rng.choice(methods), rng)
            for _ in range(10):
                op = rng.randrange(3)
                if op == 0:
                    outs = list(zip(f.crossover(a, b, rng), (a, b)))
                elif op == 1:
                    outs = [(f.mutate(a, rng), a)]
                else:
                    outs = [(f.repair(b, rng), b)]
                applications += 1
                for child, parent in outs:
                    violations += bool(validate(child, unit))
                    if rep == FOCAL:
                        focal_cases += 1
                        focal_kept += child.focal_method == parent.focal_method
                if op == 0:
                    a, b = outs[0][0], outs[1][0]
                elif op == 1:
                    a = outs[0][0]
                else:
                    b = outs[0][0]
        results[rep] = (applications, violations, focal_cases, focal_kept)
    ok = all(v == 0 for _, v, _, _ in results.values())
    fa = results[FOCAL]
    ok = ok and fa[2] > 0 and fa[3] == fa[2]
    detail = "; ".join(f"{rep}: {n} applications, {v} violations" for rep, (n, v, _, _) in results.items())
    detail += f"; focal identity {fa[3]}/{fa[2]}"
    verdict(capsys, 8, ok, detail)


def test_criterion_9_determinism(tmp_path, capsys):
    differing = []
    cases = [(BANK, FOCAL, 3), (BANK, BASELINE, 3), ("triangle.sub", FOCAL, 7)]
    for name, rep, seed in cases:
        src = tmp_path / "src"
        assert main(["generate", str(CORPUS / name), "--repr", rep, "--seed", str(seed),
                     "--out", str(src)]) == 0
        manifest = src / name[:-4] / rep / f"seed-{seed}" / "manifest.json"
        outs = []
        for label in ("a", "b"):
            assert main(["generate", "--from-manifest", str(manifest), "--out", str(tmp_path / label)]) == 0
            outs.append(tmp_path / label / name[:-4] / rep / f"seed-{seed}")
        for f in ("report.json", f"{name[:-4]}.{rep}.tests"):
            if (outs[0] / f).read_bytes() != (outs[1] / f).read_bytes():
                differing.append(f"{name} {rep} {f}")
    verdict(capsys, 9, not differing, f"{len(cases)} manifests replayed twice, differing: {differing}")


def test_criterion_10_no_false_positives(corpus_run, capsys):
    failing, n_tests = [], 0
    for name, rep, seed in all_runs():
        unit = load(name)
        for p in parsed_suite(corpus_run, name, rep, seed):
            n_tests += 1
            if assertion_failures(p.test, p.assertions, execute_test(unit, p.test)):
                failing.append(f"{name} {rep} seed {seed} {p.name}")
    verdict(capsys, 10, not failing,
            f"{len(all_runs())} suites, {n_tests} tests, {len(failing)} failing {failing[:3]}")
