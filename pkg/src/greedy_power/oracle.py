"""Exact selection by exhaustive enumeration of all C(N, M) subsets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .core import ScoreMatrix, check_capacity, goal
from .greedy import greedy_select
from .power import PowerParams, greedy_power

DEFAULT_MAX_SUBSETS = 5_000_000
# subsets scored per vectorised block
_CHUNK = 1 << 14


class BudgetExceededError(ValueError):
    """Enumeration would visit more subsets than the budget allows."""

    def __init__(self, n: int, m: int, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"C({n},{m}) = {count} subsets exceeds the oracle budget of {cap}")


@dataclass(frozen=True)
class OracleBudget:
    max_subsets: int = DEFAULT_MAX_SUBSETS

    def check(self, n: int, m: int) -> int:
        count = comb(n, m)
        if count > self.max_subsets:
            raise BudgetExceededError(n, m, count, self.max_subsets)
        return count


def exact_select(
    matrix: ScoreMatrix, capacity: int, budget: OracleBudget = OracleBudget()
) -> tuple[tuple[int, ...], float]:
    """Globally optimal selection of ``capacity`` creatives.

    Subsets are scanned in lexicographic order and only a strictly larger goal
    replaces the incumbent, so ties resolve to the lexicographically smallest
    index set.
    """
    m = check_capacity(matrix, capacity)
    budget.check(matrix.cols, m)
    if m == 0:
        return (), 0.0
    values = matrix.values
    best_goal = -np.inf
    best: tuple[int, ...] = ()
    combos = itertools.combinations(range(matrix.cols), m)
    while True:
        block = np.array(list(itertools.islice(combos, _CHUNK)), dtype=np.intp)
        if block.size == 0:
            break
        # (W, C, M) -> per-row best for each subset, transposed so each
        # subset's row-sum is a contiguous reduction like core.goal_from_rows
        row_best = values[:, block].max(axis=2)
        goals = np.ascontiguousarray(row_best.T).sum(axis=1)
        k = int(np.argmax(goals))
        if goals[k] > best_goal:
            best_goal = float(goals[k])
            best = tuple(int(x) for x in block[k])
    return best, best_goal


def random_instance(rows: int, cols: int, rng: np.random.Generator) -> ScoreMatrix:
    return ScoreMatrix(np.abs(rng.standard_normal((rows, cols))))


def greedy_optimality_rate(
    rows: int,
    cols: int,
    capacity: int,
    trials: int,
    seed=None,
    budget: OracleBudget = OracleBudget(),
) -> float:
    """Fraction of random half-normal instances on which greedy is globally optimal."""
    budget.check(cols, capacity)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    root = np.random.SeedSequence(seed)
    hits = 0
    for t in range(trials):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(root.entropy, spawn_key=(t,))))
        matrix = random_instance(rows, cols, rng)
        sel, _ = greedy_select(matrix, capacity)
        _, best = exact_select(matrix, capacity, budget)
        hits += goal(matrix, sel) == best
    return hits / trials


@dataclass(frozen=True)
class OracleComparison:
    trials: int
    greedy_rate: float
    power_rate: float
    power_improved_rate: float
    mean_exact_goal: float
    mean_greedy_goal: float
    mean_power_goal: float
    chain_violations: int


def compare_to_exact(
    rows: int,
    cols: int,
    capacity: int,
    trials: int,
    seed=None,
    params=None,
    budget: OracleBudget = OracleBudget(),
) -> OracleComparison:
    """Greedy and unbounded Greedy-Power against the exact optimum on random instances.

    ``params`` defaults to r = M - 1 with every removal subset tried and no
    round limit. Instances match :func:`greedy_optimality_rate` for the same seed.
    """
    budget.check(cols, capacity)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if params is None:
        r = max(1, capacity - 1)
        params = PowerParams(r=r, f=comb(capacity, r), n=None)
    root = np.random.SeedSequence(seed)
    exact_goals, greedy_goals, power_goals = [], [], []
    greedy_hits = power_hits = improved = violations = 0
    for t in range(trials):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(root.entropy, spawn_key=(t,))))
        matrix = random_instance(rows, cols, rng)
        _, best = exact_select(matrix, capacity, budget)
        res = greedy_power(matrix, capacity, params, np.random.SeedSequence(root.entropy, spawn_key=(t, 1)))
        g_greedy, g_power = res.baseline_goal, res.goal
        violations += not (best >= g_power >= g_greedy)
        greedy_hits += g_greedy == best
        power_hits += g_power == best
        improved += g_power > g_greedy
        exact_goals.append(best)
        greedy_goals.append(g_greedy)
        power_goals.append(g_power)
    return OracleComparison(
        trials=trials,
        greedy_rate=greedy_hits / trials,
        power_rate=power_hits / trials,
        power_improved_rate=improved / trials,
        mean_exact_goal=float(np.mean(exact_goals)),
        mean_greedy_goal=float(np.mean(greedy_goals)),
        mean_power_goal=float(np.mean(power_goals)),
        chain_violations=violations,
    )
