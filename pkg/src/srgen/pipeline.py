"""End-to-end generation: search, assertion synthesis, metrics and rendering."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .assertions import (
    DEFAULT_TOLERANCE, candidate_assertions, fallback_candidate, filter_focal,
    group_by_method, select_unique_killers, split_test,
)
from .chromosome import TestFactory
from .emitter import render_suite, test_names
from .metrics import SuiteMetrics, suite_metrics
from .mutation import OPERATORS, CheckedTest, KillMatrix, generate_mutants, run_kill_analysis
from .runtime import execute_test, harvest_observations, observed_value, values_match
from .search import SearchConfig, SearchStats, run_search
from .subject.analysis import StaticModel
from .subject.nodes import SubjectUnit
from .testcase import BASELINE, Primitive


@dataclass
class PipelineConfig:
    search: SearchConfig = field(default_factory=SearchConfig)
    tolerance: float = DEFAULT_TOLERANCE
    operators: tuple = OPERATORS
    aaa_comments: bool = True
    split: bool = False


@dataclass
class GeneratedTest:
    name: str
    test: object
    assertions: list
    trace: object = field(default=None, repr=False, compare=False)


@dataclass
class GenerationResult:
    unit: SubjectUnit
    model: StaticModel
    config: PipelineConfig
    stats: SearchStats
    tests: list
    matrix: KillMatrix
    metrics: SuiteMetrics
    split_tests: list = field(default_factory=list)
    split_notes: list = field(default_factory=list)

    @property
    def representation(self) -> str:
        return self.config.search.representation

    def rendered(self):
        return render_suite(self.tests, self.unit, self.representation, self.config.aaa_comments)

    def rendered_split(self):
        return render_suite(self.split_tests, self.unit, "baseline-split", self.config.aaa_comments)

    def report(self, subject: Optional[str] = None) -> dict:
        m = self.metrics
        out = {
            "subject": subject or self.unit.name,
            "representation": self.representation,
            "seed": self.config.search.seed,
            "budget_used": self.stats.evaluations,
            "goals": {"total": m.goals_total, "covered": m.goals_covered},
            "coverage": m.coverage,
            "mutants": {"total": m.mutants_total, "killed": m.mutants_killed},
            "mutation_score": m.mutation_score,
            "sr_rate": m.sr_rate,
            "mean_coherence": m.mean_coherence,
            "tests": [r.__dict__ for r in m.tests],
            "flags": list(m.flags),
            "search": self.stats.to_json(),
        }
        if self.config.split:
            out["split"] = {
                "tests": [{"name": t.name, "focal_method": t.test.focal_method,
                           "n_statements": len(t.test), "n_assertions": len(t.assertions)}
                          for t in self.split_tests],
                "notes": list(self.split_notes),
            }
        return out


def prune_unused_primitives(test):
    """Drop primitive statements nothing refers to; they cannot affect a run."""
    used = {r for st in test.statements for r in st.refs()}
    keep = tuple(st for i, st in enumerate(test.statements)
                 if not (isinstance(st, Primitive) and st.var not in used)
                 or (test.is_focal and i == len(test) - 1))
    return replace(test, statements=keep).normalized()


def assertion_failures(test, assertions: list, trace) -> list:
    """Assertions that do not hold on ``trace``."""
    return [a for a in assertions
            if not values_match(a.expected, observed_value(a.observation, test, trace), a.tolerance)]


def synthesize_assertions(unit: SubjectUnit, model: StaticModel, tests: list, mutants: list,
                          tolerance: float = DEFAULT_TOLERANCE,
                          step_limit: Optional[int] = None) -> tuple:
    """Kept assertions for each test plus the kill matrix over them.

    Candidates come from every observation point; a greedy unique-killer
    cover keeps the useful ones, and focal tests then drop assertions whose
    kills all fall outside the focal method's call closure.
    """
    limit = {} if step_limit is None else {"step_limit": step_limit}
    checked = []
    for i, t in enumerate(tests):
        trace = execute_test(unit, t, **limit)
        cands = candidate_assertions(harvest_observations(unit, t, trace), f"t{i}.a", tolerance)
        checked.append(CheckedTest(t, cands, trace))
    cand_matrix = run_kill_analysis(unit, checked, mutants, **limit)
    final = []
    for ct in checked:
        kills = {a.id: cand_matrix.killed_by(a.id) for a in ct.assertions}
        fallback = fallback_candidate(ct.assertions, ct.test)
        kept = select_unique_killers(ct.assertions, kills, fallback)
        if ct.test.is_focal:
            kept = filter_focal(kept, kills, cand_matrix.method_of, model.closures[ct.test.focal_method])
            if not kept and fallback is not None:
                kept = [fallback]
        final.append(CheckedTest(ct.test, kept, ct.trace))
    matrix = run_kill_analysis(unit, final, mutants, **limit)
    return final, matrix


def generate(unit: SubjectUnit, config: PipelineConfig, model: Optional[StaticModel] = None,
             mutants: Optional[list] = None) -> GenerationResult:
    model = model or StaticModel(unit)
    mutants = generate_mutants(unit, config.operators) if mutants is None else mutants
    sc = config.search
    archive, stats = run_search(unit, sc, model)
    tests = []
    for t in archive.tests(model.goal_ids):
        t = prune_unused_primitives(t)
        if t not in tests:
            tests.append(t)
    checked, matrix = synthesize_assertions(unit, model, tests, mutants, config.tolerance, sc.step_limit)
    names = test_names(tests)
    suite = [GeneratedTest(n, ct.test, ct.assertions, ct.trace) for n, ct in zip(names, checked)]
    metrics = suite_metrics(suite, matrix, model)
    result = GenerationResult(unit, model, config, stats, suite, matrix, metrics)
    if config.split and sc.representation == BASELINE:
        _split_suite(result, mutants)
    return result


def _split_suite(result: GenerationResult, mutants: list) -> None:
    unit, model, cfg = result.unit, result.model, result.config
    factory = TestFactory(unit, cfg.search.chromosome)

    def make_assertions(test):
        checked, _ = synthesize_assertions(unit, model, [test], mutants, cfg.tolerance,
                                           cfg.search.step_limit)
        ct = checked[0]
        return ct.assertions, not assertion_failures(ct.test, ct.assertions, ct.trace)

    pieces = []
    for i, gt in enumerate(result.tests):
        kills = {a.id: result.matrix.killed_by(a.id) for a in gt.assertions}
        groups = group_by_method(gt.assertions, kills, result.matrix.method_of, unit)
        if not groups:
            result.split_notes.append(f"{gt.name}: no assertion kills a mutant; not split")
            continue
        split = split_test(gt.test, groups, factory.repair, make_assertions)
        result.split_notes.extend(f"{gt.name}: {note}" for note in split.notes)
        pieces.extend(split.tests)
    names = test_names([t for _, t, _ in pieces])
    result.split_tests = [GeneratedTest(n, t, a) for n, (_, t, a) in zip(names, pieces)]


@dataclass
class Evaluation:
    metrics: SuiteMetrics
    failures: list  # (test name, assertion id)
    matrix: KillMatrix


def evaluate_suite(unit: SubjectUnit, parsed: list, mutants: Optional[list] = None,
                   operators: tuple = OPERATORS, step_limit: Optional[int] = None) -> Evaluation:
    """Re-run parsed tests on the subject and its mutants."""
    model = StaticModel(unit)
    mutants = generate_mutants(unit, operators) if mutants is None else mutants
    limit = {} if step_limit is None else {"step_limit": step_limit}
    suite, checked, failures = [], [], []
    for p in parsed:
        trace = execute_test(unit, p.test, **limit)
        for a in assertion_failures(p.test, p.assertions, trace):
            failures.append((p.name, a.id))
        checked.append(CheckedTest(p.test, p.assertions, trace))
        suite.append(GeneratedTest(p.name, p.test, p.assertions, trace))
    matrix = run_kill_analysis(unit, checked, mutants, **limit)
    return Evaluation(suite_metrics(suite, matrix, model), failures, matrix)
