"""Many-objective evolutionary search with dynamic target activation.

Every coverage goal is an objective. Only goals whose control-dependency
parent is already covered are active; the population is ranked by the
preference criterion on active uncovered goals, then by non-dominated
fronts, and an archive keeps the shortest covering test per goal.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .chromosome import ChromosomeConfig, TestFactory
from .runtime import DEFAULT_STEP_LIMIT, execute_test, fitness
from .subject.analysis import StaticModel
from .subject.nodes import SubjectUnit
from .testcase import FOCAL, REPRESENTATIONS, TestCase


@dataclass
class SearchConfig:
    population_size: int = 50
    max_evaluations: int = 50_000
    crossover_rate: float = 0.75
    seed: int = 0
    representation: str = FOCAL
    elitism: bool = True
    fresh_rate: float = 0.1
    step_limit: int = DEFAULT_STEP_LIMIT
    chromosome: ChromosomeConfig = field(default_factory=ChromosomeConfig)

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2:
            raise ValueError("population_size must be even and at least 4")
        if self.max_evaluations < 0:
            raise ValueError("max_evaluations must be non-negative")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be a probability")
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"representation must be one of {', '.join(REPRESENTATIONS)}")
        if not self.elitism:
            raise ValueError("archive elitism cannot be disabled")


class CountingRandom(random.Random):
    """random.Random that counts primitive draws (for determinism checks)."""

    def __init__(self, seed=None):
        self.draws = 0
        super().__init__(seed)

    def random(self):
        self.draws += 1
        return super().random()

    def getrandbits(self, k):
        self.draws += 1
        return super().getrandbits(k)


@dataclass(frozen=True)
class ArchiveEntry:
    test: TestCase
    statement: int
    evaluation: int


class Archive:
    def __init__(self):
        self.entries = {}

    def update(self, goal_id: str, test: TestCase, statement: int, evaluation: int) -> bool:
        old = self.entries.get(goal_id)
        if old is not None and len(test) >= len(old.test):
            return False
        self.entries[goal_id] = ArchiveEntry(test, statement, evaluation)
        return True

    @property
    def covered(self) -> set:
        return set(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, goal_id) -> bool:
        return goal_id in self.entries

    def tests(self, goal_order) -> list:
        """Distinct archived tests, ordered by the first goal each covers."""
        seen = set()
        out = []
        for gid in goal_order:
            e = self.entries.get(gid)
            if e is not None and e.test not in seen:
                seen.add(e.test)
                out.append(e.test)
        return out


@dataclass
class SearchStats:
    evaluations: int = 0
    generations: int = 0
    goals_total: int = 0
    goals_covered: int = 0
    rng_draws: int = 0
    coverage_curve: list = field(default_factory=list)  # (generation, evaluations, covered)

    def to_json(self) -> dict:
        return {
            "evaluations": self.evaluations,
            "generations": self.generations,
            "goals_total": self.goals_total,
            "goals_covered": self.goals_covered,
            "rng_draws": self.rng_draws,
            "coverage_curve": [list(p) for p in self.coverage_curve],
        }


def activate_targets(covered: set, model: StaticModel) -> set:
    active = set()
    for gid in model.goal_ids:
        parent = model.parent_of(gid)
        if parent is None or parent in covered:
            active.add(gid)
    return active


def dominates(a, b) -> bool:
    better = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            better = True
    return better


def non_dominated_sort(vectors: list) -> list:
    """Fronts of indices into ``vectors`` (fast non-dominated sorting)."""
    n = len(vectors)
    dominated_by = [[] for _ in range(n)]
    count = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(vectors[i], vectors[j]):
                dominated_by[i].append(j)
                count[j] += 1
            elif dominates(vectors[j], vectors[i]):
                dominated_by[j].append(i)
                count[i] += 1
    fronts = []
    current = [i for i in range(n) if count[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
    return fronts


def crowding_distance(vectors: list, front: list) -> dict:
    dist = {i: 0.0 for i in front}
    if not front:
        return dist
    m = len(vectors[front[0]])
    for k in range(m):
        order = sorted(front, key=lambda i: (vectors[i][k], i))
        lo, hi = vectors[order[0]][k], vectors[order[-1]][k]
        dist[order[0]] = dist[order[-1]] = float("inf")
        if hi == lo:
            continue
        for a, b, c in zip(order, order[1:], order[2:]):
            dist[b] += (vectors[c][k] - vectors[a][k]) / (hi - lo)
    return dist


def preference_sort(lengths: list, goals: list, fit: list) -> list:
    """Rank individuals on ``goals``.

    ``fit[i][g]`` is individual i's fitness on goals[g]; ``lengths[i]`` its
    statement count. Front 0 holds, per goal, the best individual (ties:
    shorter, then lower index); the rest are ranked by non-dominated sorting.
    """
    n = len(lengths)
    if not goals:
        return [list(range(n))] if n else []
    preferred = []
    for g in range(len(goals)):
        best = min(range(n), key=lambda i: (fit[i][g], lengths[i], i))
        if best not in preferred:
            preferred.append(best)
    rest = [i for i in range(n) if i not in set(preferred)]
    fronts = [sorted(preferred)]
    for front in non_dominated_sort([fit[i] for i in rest]):
        fronts.append([rest[j] for j in front])
    return fronts


class _Individual:
    __slots__ = ("test", "fitness")

    def __init__(self, test: TestCase, fitness: dict):
        self.test = test
        self.fitness = fitness


class Search:
    def __init__(self, unit: SubjectUnit, config: SearchConfig, model: Optional[StaticModel] = None):
        self.unit = unit
        self.config = config
        self.model = model or StaticModel(unit)
        self.factory = TestFactory(unit, config.chromosome)
        self.rng = CountingRandom(config.seed)
        self.archive = Archive()
        self.stats = SearchStats(goals_total=len(self.model.goal_ids))
        self.active = set()

    @property
    def uncovered(self) -> list:
        return [g for g in self.model.goal_ids if g not in self.archive]

    def _budget_left(self) -> int:
        return self.config.max_evaluations - self.stats.evaluations

    def evaluate(self, test: TestCase) -> _Individual:
        trace = execute_test(self.unit, test, self.config.step_limit, observe=False)
        self.stats.evaluations += 1
        window = test.window()
        for gid, idx in trace.covered_in(*window).items():
            if gid in self.model.goal_by_id:
                self.archive.update(gid, test, idx, self.stats.evaluations)
        fit = {}
        for gid in self.uncovered:
            fit[gid] = fitness(self.model.goal_by_id[gid], trace, self.model, window)
        return _Individual(test, fit)

    def _fresh(self) -> TestCase:
        targets = sorted(self.active - self.archive.covered, key=self.model.goal_ids.index)
        if not targets:
            targets = self.model.goal_ids
        goal = self.model.goal_by_id[self.rng.choice(targets)]
        return self.factory.random_test(self.config.representation, goal.method, self.rng)

    def _rank(self, pop: list) -> tuple:
        goals = [g for g in self.model.goal_ids if g in self.active and g not in self.archive]
        fit = [[ind.fitness.get(g, float("inf")) for g in goals] for ind in pop]
        fronts = preference_sort([len(ind.test) for ind in pop], goals, fit)
        rank, crowd = {}, {}
        for r, front in enumerate(fronts):
            for i in front:
                rank[i] = r
            crowd.update(crowding_distance(fit, front) if goals else {i: 0.0 for i in front})
        return fronts, rank, crowd

    def _tournament(self, pop, rank, crowd) -> _Individual:
        a = self.rng.randrange(len(pop))
        b = self.rng.randrange(len(pop))
        if (rank[a], -crowd[a]) <= (rank[b], -crowd[b]):
            return pop[a]
        return pop[b]

    def _offspring(self, pop, rank, crowd) -> list:
        cfg = self.config
        n_fresh = round(cfg.fresh_rate * cfg.population_size)
        children = []
        while len(children) < cfg.population_size - n_fresh:
            p1 = self._tournament(pop, rank, crowd).test
            p2 = self._tournament(pop, rank, crowd).test
            if self.rng.random() < cfg.crossover_rate:
                c1, c2 = self.factory.crossover(p1, p2, self.rng)
            else:
                c1, c2 = p1, p2
            children.append(self.factory.mutate(c1, self.rng))
            if len(children) < cfg.population_size - n_fresh:
                children.append(self.factory.mutate(c2, self.rng))
        children.extend(self._fresh() for _ in range(n_fresh))
        return children

    def _evaluate_all(self, tests: list) -> list:
        out = []
        for t in tests:
            if self._budget_left() <= 0:
                break
            out.append(self.evaluate(t))
        return out

    def _refresh(self, pop: list) -> None:
        # drop objectives covered since each individual was evaluated
        covered = self.archive.covered
        for ind in pop:
            for g in [g for g in ind.fitness if g in covered]:
                del ind.fitness[g]

    def _record(self) -> None:
        self.stats.goals_covered = len(self.archive)
        self.stats.coverage_curve.append(
            (self.stats.generations, self.stats.evaluations, len(self.archive)))

    def run(self) -> tuple:
        cfg = self.config
        if cfg.max_evaluations == 0:
            self.stats.rng_draws = self.rng.draws
            return self.archive, self.stats
        self.active = activate_targets(set(), self.model)
        pop = self._evaluate_all([self._fresh() for _ in range(cfg.population_size)])
        self.active |= activate_targets(self.archive.covered, self.model)
        self._record()
        while self.uncovered and self._budget_left() > 0:
            self._refresh(pop)
            fronts, rank, crowd = self._rank(pop)
            children = self._evaluate_all(self._offspring(pop, rank, crowd))
            self.active |= activate_targets(self.archive.covered, self.model)
            union = pop + children
            self._refresh(union)
            fronts, rank, crowd = self._rank(union)
            nxt = []
            for front in fronts:
                if len(nxt) + len(front) <= cfg.population_size:
                    nxt.extend(front)
                else:
                    by_crowd = sorted(front, key=lambda i: (-crowd[i], i))
                    nxt.extend(by_crowd[:cfg.population_size - len(nxt)])
                if len(nxt) >= cfg.population_size:
                    break
            pop = [union[i] for i in nxt]
            self.stats.generations += 1
            self._record()
        self.stats.rng_draws = self.rng.draws
        return self.archive, self.stats


def run_search(unit: SubjectUnit, config: SearchConfig, model: Optional[StaticModel] = None) -> tuple:
    """(Archive, SearchStats) for one deterministic search run."""
    return Search(unit, config, model).run()
