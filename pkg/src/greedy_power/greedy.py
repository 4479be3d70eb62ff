"""Baseline greedy selection with optional warm start."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ScoreMatrix, build_cache, check_capacity, check_selection, InvalidSelectionError


@dataclass(frozen=True)
class GreedyStep:
    index: int
    gain: float
    goal: float


@dataclass(frozen=True)
class GreedyTrace:
    steps: tuple[GreedyStep, ...] = field(default_factory=tuple)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(s.index for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


def greedy_select(
    matrix: ScoreMatrix, capacity: int, start: Sequence[int] = ()
) -> tuple[tuple[int, ...], GreedyTrace]:
    """Fill ``start`` up to ``capacity`` creatives by best marginal gain.

    Each step adds the unselected column with the largest gain; ties go to the
    lowest column index. Columns with zero gain are still added so the result
    always has exactly ``capacity`` entries.

    Returns the selection (warm start first, then additions in order) and the
    per-step trace.
    """
    capacity = check_capacity(matrix, capacity)
    start = check_selection(matrix, start)
    if len(start) > capacity:
        raise InvalidSelectionError(
            f"warm start has {len(start)} creatives, more than capacity {capacity}"
        )
    cache = build_cache(matrix, start)
    taken = np.zeros(matrix.cols, dtype=bool)
    taken[list(start)] = True
    steps = []
    for _ in range(capacity - len(start)):
        gains = cache.gains()
        gains[taken] = -np.inf
        j = int(np.argmax(gains))
        cache.add(j)
        taken[j] = True
        steps.append(GreedyStep(j, float(gains[j]), cache.goal))
    return cache.selected, GreedyTrace(tuple(steps))
