"""Suite-level metrics and multi-seed comparison tables."""
from __future__ import annotations

import csv
import io
import statistics
from dataclasses import asdict, dataclass, field
from typing import Optional

from .mutation import KillMatrix
from .subject.analysis import StaticModel
from .testcase import invoked_method

CSV_HEADER = ["subject", "representation", "seed", "coverage", "mutation_score",
              "sr_rate", "mean_coherence", "n_tests", "evals_used"]
SUMMARY_FIELDS = ["coverage", "mutation_score", "sr_rate", "mean_coherence", "n_tests"]


@dataclass
class TestRecord:
    name: str
    focal_method: Optional[str]
    n_statements: int
    n_assertions: int
    responsible_methods: list
    coherence: float
    inferred_focal: Optional[str] = None
    killed_methods: list = field(default_factory=list)
    fallback: bool = False

    __test__ = False


@dataclass
class SuiteMetrics:
    goals_total: int = 0
    goals_covered: int = 0
    coverage: float = 0.0
    mutants_total: int = 0
    mutants_killed: int = 0
    mutation_score: float = 0.0
    sr_rate: float = 0.0
    mean_coherence: float = 0.0
    tests: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def inferred_focal(test) -> Optional[str]:
    """Method of the last statement invoking a subject declaration."""
    for st in reversed(test.statements):
        m = invoked_method(st)
        if m is not None:
            return m
    return None


def test_record(name: str, test, assertions: list, matrix: KillMatrix,
                model: StaticModel) -> TestRecord:
    """Responsibility and coherence of one test from its kept assertions.

    For a focal test, a non-fallback assertion is coherent when it kills a
    mutant inside the focal method's call closure, and every such kill is
    attributed to the focal method (kills outside the closure stay visible
    in ``killed_methods``). For any other test the focal method is
    inferred as the last invoked one; an assertion is coherent only if it
    kills something and all of its kills lie inside that method's closure.
    """
    order = [d.name for d in model.unit.declarations]
    scored = [a for a in assertions if not a.fallback]
    kills = {a.id: matrix.killed_by(a.id) for a in scored}
    raw = set()
    for a in scored:
        raw |= {matrix.method_of(m) for m in kills[a.id]}
    if test.is_focal:
        focal = test.focal_method
        scope = model.closures[focal]
        coherent = [a for a in scored if any(matrix.method_of(m) in scope for m in kills[a.id])]
        responsible = {focal} if coherent else set()
        guess = focal
    else:
        focal = None
        guess = inferred_focal(test)
        scope = model.closures.get(guess, frozenset())
        coherent = [a for a in scored if kills[a.id]
                    and all(matrix.method_of(m) in scope for m in kills[a.id])]
        responsible = raw
    coherence = len(coherent) / len(scored) if scored else 1.0
    return TestRecord(
        name=name,
        focal_method=focal,
        n_statements=len(test),
        n_assertions=len(assertions),
        responsible_methods=sorted(responsible, key=order.index),
        coherence=coherence,
        inferred_focal=guess,
        killed_methods=sorted(raw, key=order.index),
        fallback=any(a.fallback for a in assertions),
    )


def suite_metrics(suite: list, matrix: KillMatrix, model: StaticModel) -> SuiteMetrics:
    """``suite`` items expose .name, .test, .assertions and .trace."""
    goals_total = len(model.goal_ids)
    mutants_total = len(matrix.mutants)
    if not suite:
        return SuiteMetrics(goals_total=goals_total, mutants_total=mutants_total,
                            flags=["empty-suite"])
    covered = set()
    for item in suite:
        covered |= set(item.trace.covered_in(*item.test.window()))
    covered &= set(model.goal_ids)
    killed = matrix.killed()
    records = [test_record(item.name, item.test, item.assertions, matrix, model)
               for item in suite]
    flags = ["no-mutants"] if matrix.no_mutants else []
    return SuiteMetrics(
        goals_total=goals_total,
        goals_covered=len(covered),
        coverage=len(covered) / goals_total if goals_total else 0.0,
        mutants_total=mutants_total,
        mutants_killed=len(killed),
        mutation_score=len(killed) / mutants_total if mutants_total else 1.0,
        sr_rate=sum(len(r.responsible_methods) <= 1 for r in records) / len(records),
        mean_coherence=statistics.fmean(r.coherence for r in records),
        tests=records,
        flags=flags,
    )


# -- comparison ---------------------------------------------------------------

@dataclass
class RunRow:
    subject: str
    representation: str
    seed: int
    metrics: Optional[SuiteMetrics]  # None for a failed run
    evals_used: int = 0
    error: str = ""

    @property
    def failed(self) -> bool:
        return self.metrics is None

    def values(self) -> dict:
        m = self.metrics
        return {
            "coverage": m.coverage, "mutation_score": m.mutation_score,
            "sr_rate": m.sr_rate, "mean_coherence": m.mean_coherence,
            "n_tests": len(m.tests),
        }


@dataclass
class Summary:
    median: float
    iqr: float
    n: int


def median_iqr(xs: list) -> Summary:
    xs = sorted(xs)
    if not xs:
        return Summary(float("nan"), float("nan"), 0)
    if len(xs) == 1:
        return Summary(float(xs[0]), 0.0, 1)
    q1, _, q3 = statistics.quantiles(xs, n=4, method="inclusive")
    return Summary(float(statistics.median(xs)), float(q3 - q1), len(xs))


@dataclass
class Comparison:
    rows: list
    summaries: dict  # (subject, representation) -> {field: Summary}
    mismatched: list  # subjects missing a representation

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            if r.failed:
                w.writerow([r.subject, r.representation, r.seed, "FAILED", "", "", "", "", r.evals_used])
                continue
            v = r.values()
            w.writerow([r.subject, r.representation, r.seed,
                        _num(v["coverage"]), _num(v["mutation_score"]), _num(v["sr_rate"]),
                        _num(v["mean_coherence"]), v["n_tests"], r.evals_used])
        for (subject, rep), summ in self.summaries.items():
            cells = [f"{_num(summ[f].median)} [iqr {_num(summ[f].iqr)}]" for f in SUMMARY_FIELDS]
            evals = median_iqr([r.evals_used for r in self.rows
                                if (r.subject, r.representation) == (subject, rep) and not r.failed])
            w.writerow([subject, rep, "summary", *cells,
                        f"{_num(evals.median)} [iqr {_num(evals.iqr)}]"])
        return buf.getvalue()


def compare(rows: list) -> Comparison:
    rows = sorted(rows, key=lambda r: (r.subject, r.representation, r.seed))
    reps_by_subject = {}
    for r in rows:
        reps_by_subject.setdefault(r.subject, set()).add(r.representation)
    all_reps = set().union(*reps_by_subject.values()) if reps_by_subject else set()
    mismatched = sorted(s for s, reps in reps_by_subject.items() if reps != all_reps)
    summaries = {}
    for r in rows:
        if r.subject in mismatched or r.failed:
            continue
        summaries.setdefault((r.subject, r.representation), {f: [] for f in SUMMARY_FIELDS})
        for f, x in r.values().items():
            summaries[(r.subject, r.representation)][f].append(x)
    summaries = {k: {f: median_iqr(xs) for f, xs in v.items()} for k, v in sorted(summaries.items())}
    return Comparison(rows, summaries, mismatched)


def _num(x) -> str:
    if isinstance(x, int):
        return str(x)
    return f"{x:.4f}"
