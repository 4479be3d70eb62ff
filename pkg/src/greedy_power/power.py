"""Greedy-Power refinement: remove r creatives, greedily refill, repeat.

Randomness comes from numpy's PCG64 generator seeded through
``numpy.random.SeedSequence``. Round ``k`` of a run draws from its own child
stream (spawn key suffix ``(k,)``), so raising the round limit or changing the
number of branches never alters what earlier rounds sampled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .core import InfeasibleError, InvalidSelectionError, ScoreMatrix, check_capacity, check_selection, goal
from .greedy import greedy_select

# Above this many r-subsets, draw by rejection instead of ranking.
_RANK_SAMPLING_LIMIT = 1 << 20


@dataclass(frozen=True)
class PowerParams:
    """Refinement knobs.

    r: creatives removed per candidate. f: removal subsets tried per round,
    ``None`` meaning "same as the selection size". n: greedy rounds including
    the baseline round, ``None`` meaning run until no strict improvement.
    """

    r: int = 1
    f: int | None = None
    n: int | None = 2

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.f is not None and self.f < 1:
            raise ValueError(f"f must be >= 1, got {self.f}")
        if self.n is not None and self.n < 1:
            raise ValueError(f"n must be >= 1 (or None for unbounded), got {self.n}")

    def branches(self, size: int) -> int:
        """Configured branch count for a selection of ``size`` creatives."""
        return size if self.f is None else self.f

    def effective_branches(self, size: int) -> int:
        return min(self.branches(size), comb(size, self.r))

    def check(self, size: int) -> None:
        if self.r > size:
            raise InfeasibleError(f"cannot remove r={self.r} creatives from a selection of {size}")


@dataclass(frozen=True)
class RoundRecord:
    round: int
    best_goal: float
    accepted: bool
    selection: tuple[int, ...]


@dataclass(frozen=True)
class RefinementResult:
    selection: tuple[int, ...]
    goal: float
    baseline: tuple[int, ...]
    baseline_goal: float
    rounds: int
    history: tuple[RoundRecord, ...] = field(default_factory=tuple)

    @property
    def matched(self) -> bool:
        return self.goal == self.baseline_goal

    @property
    def improvement_ratio(self) -> float:
        if self.matched:
            return 0.0
        return self.goal / self.baseline_goal - 1.0

    @property
    def accepted_goals(self) -> list[float]:
        return [self.baseline_goal] + [h.best_goal for h in self.history if h.accepted]


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def child_rng(seed_seq: np.random.SeedSequence, *key: int) -> np.random.Generator:
    """Generator for the sub-stream ``key`` below ``seed_seq``, independent of call order."""
    ss = np.random.SeedSequence(seed_seq.entropy, spawn_key=tuple(seed_seq.spawn_key) + tuple(key))
    return np.random.Generator(np.random.PCG64(ss))


def unrank_combination(rank: int, n: int, k: int) -> tuple[int, ...]:
    """The ``rank``-th k-subset of range(n) in lexicographic order."""
    if not 0 <= rank < comb(n, k):
        raise ValueError(f"rank {rank} out of range for C({n},{k})")
    out = []
    x = 0
    for slots in range(k, 0, -1):
        while True:
            below = comb(n - x - 1, slots - 1)
            if rank < below:
                break
            rank -= below
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def sample_removal_subsets(size: int, r: int, f: int, rng: np.random.Generator | None = None) -> list[tuple[int, ...]]:
    """Pick ``min(f, C(size, r))`` distinct r-subsets of positions ``0..size-1``.

    When ``f`` covers every subset the full lexicographic enumeration is
    returned and ``rng`` is not touched. Otherwise subsets are drawn uniformly
    without replacement, in draw order.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if r > size:
        raise InfeasibleError(f"cannot remove r={r} of {size} creatives")
    if f < 1:
        raise ValueError(f"f must be >= 1, got {f}")
    total = comb(size, r)
    if f >= total:
        return list(itertools.combinations(range(size), r))
    if rng is None:
        raise ValueError("an rng is required when sampling fewer than all subsets")
    if total <= _RANK_SAMPLING_LIMIT:
        ranks = rng.choice(total, size=f, replace=False)
        return [unrank_combination(int(k), size, r) for k in ranks]
    seen: set[tuple[int, ...]] = set()
    out = []
    while len(out) < f:
        pick = tuple(sorted(int(x) for x in rng.choice(size, size=r, replace=False)))
        if pick not in seen:
            seen.add(pick)
            out.append(pick)
    return out


def refine_once(
    matrix: ScoreMatrix,
    incumbent: Sequence[int],
    params: PowerParams,
    rng: np.random.Generator | None = None,
    capacity: int | None = None,
) -> tuple[tuple[int, ...], float]:
    """Best remove-and-refill candidate around ``incumbent``.

    For every sampled removal subset the remaining creatives warm-start a
    greedy refill back to full size; removed creatives may be picked again.
    The first candidate with the highest goal wins. The incumbent itself is
    not a candidate, so the returned goal can be lower than the incumbent's.
    """
    incumbent = check_selection(matrix, incumbent)
    size = len(incumbent)
    if capacity is not None and size != capacity:
        raise InvalidSelectionError(f"incumbent has {size} creatives, expected a complete selection of {capacity}")
    params.check(size)
    best_sel: tuple[int, ...] | None = None
    best_goal = -np.inf
    for removed in sample_removal_subsets(size, params.r, params.branches(size), rng):
        drop = set(removed)
        kept = [c for pos, c in enumerate(incumbent) if pos not in drop]
        cand, _ = greedy_select(matrix, size, kept)
        g = goal(matrix, cand)
        if g > best_goal:
            best_sel, best_goal = cand, g
    return best_sel, float(best_goal)


def greedy_power(matrix: ScoreMatrix, capacity: int, params: PowerParams = PowerParams(), seed=None) -> RefinementResult:
    """Greedy baseline followed by up to ``n - 1`` refinement rounds.

    A round's best candidate replaces the incumbent only on a strict goal
    increase; the first round without one ends the run.
    """
    capacity = check_capacity(matrix, capacity)
    params.check(capacity)
    seed_seq = as_seed_sequence(seed)
    baseline, _ = greedy_select(matrix, capacity)
    baseline_goal = goal(matrix, baseline)
    current, current_goal = baseline, baseline_goal
    history = []
    rounds = 1
    while params.n is None or rounds < params.n:
        rounds += 1
        cand, cand_goal = refine_once(matrix, current, params, child_rng(seed_seq, rounds))
        accepted = cand_goal > current_goal
        history.append(RoundRecord(rounds, cand_goal, accepted, cand))
        if not accepted:
            break
        current, current_goal = cand, cand_goal
    return RefinementResult(current, current_goal, baseline, baseline_goal, rounds, tuple(history))


def split_probability(size: int, r: int) -> float:
    """Chance that a second fixed creative survives when a first one is removed.

    Equals C(size-2, r-1) / C(size-1, r-1) = (size - r) / (size - 1); at an
    even cut this is also the chance the pair ends up on different sides.
    """
    if size < 2:
        raise ValueError(f"need at least two creatives, got {size}")
    if not 1 <= r <= size - 1:
        raise ValueError(f"r must lie in [1, {size - 1}], got {r}")
    return (size - r) / (size - 1)


def split_frequency(size: int, r: int, draws: int, rng: np.random.Generator) -> tuple[float, int]:
    """Monte Carlo estimate of :func:`split_probability` from uniform r-subsets.

    Counts, among draws that remove creative 0, how often creative 1 is kept.
    Returns the frequency and the number of conditioning draws.
    """
    split_probability(size, r)
    # argsort of iid uniforms gives a uniform random permutation per draw
    perms = np.argsort(rng.random((draws, size)), axis=1)
    removed = perms[:, :r]
    has_x = (removed == 0).any(axis=1)
    has_y = (removed == 1).any(axis=1)
    n_cond = int(has_x.sum())
    if n_cond == 0:
        return float("nan"), 0
    return float((has_x & ~has_y).sum() / n_cond), n_cond
