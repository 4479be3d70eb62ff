"""Score matrix, goal function and the incremental coverage cache.

A selection is a sequence of distinct creative (column) indices. The goal of a
selection is the sum over keywords (rows) of the best selected score in that
row, with the empty selection scoring 0.
"""

from __future__ import annotations

import csv
import os
from typing import Iterable, Sequence

import numpy as np


class InvalidSelectionError(ValueError):
    """A selection references a bad column or repeats one."""


class InfeasibleError(ValueError):
    """Requested selection size cannot be satisfied by the matrix."""


class MatrixFormatError(ValueError):
    """A score matrix failed validation (shape, sign or parse errors)."""


class ScoreMatrix:
    """Immutable W x N matrix of nonnegative keyword/creative scores."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise MatrixFormatError(f"score matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise MatrixFormatError(f"score matrix needs at least one row and column, got {arr.shape}")
        bad = ~np.isfinite(arr)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise MatrixFormatError(f"non-finite score at row {i}, column {j}")
        neg = arr < 0
        if neg.any():
            i, j = np.argwhere(neg)[0]
            raise MatrixFormatError(f"negative score {arr[i, j]!r} at row {i}, column {j}")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        """Read-only view of the underlying array."""
        return self._values

    @property
    def rows(self) -> int:
        return self._values.shape[0]

    @property
    def cols(self) -> int:
        return self._values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._values.shape

    def column(self, j: int) -> np.ndarray:
        return self._values[:, j]

    def row_max_total(self) -> float:
        return goal_from_rows(self._values.max(axis=1))

    def __repr__(self) -> str:
        return f"ScoreMatrix(rows={self.rows}, cols={self.cols})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._values, other._values))

    __hash__ = None

    @classmethod
    def from_csv(cls, path: str | os.PathLike) -> "ScoreMatrix":
        """Load a headerless CSV of decimal scores, one keyword per line."""
        rows: list[list[float]] = []
        width = None
        with open(path, newline="") as fh:
            for lineno, record in enumerate(csv.reader(fh)):
                if not record or all(not cell.strip() for cell in record):
                    continue
                values = []
                for col, cell in enumerate(record):
                    try:
                        values.append(float(cell))
                    except ValueError:
                        raise MatrixFormatError(
                            f"{path}: row {len(rows)} (line {lineno + 1}), column {col}: "
                            f"cannot parse {cell.strip()!r} as a number"
                        ) from None
                    if not np.isfinite(values[-1]):
                        raise MatrixFormatError(
                            f"{path}: row {len(rows)}, column {col}: non-finite value {cell.strip()!r}"
                        )
                    if values[-1] < 0:
                        raise MatrixFormatError(
                            f"{path}: row {len(rows)}, column {col}: negative value {cell.strip()!r}"
                        )
                if width is None:
                    width = len(values)
                elif len(values) != width:
                    raise MatrixFormatError(
                        f"{path}: row {len(rows)} has {len(values)} columns, expected {width}"
                    )
                rows.append(values)
        if not rows:
            raise MatrixFormatError(f"{path}: no data rows")
        return cls(rows)

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in self._values:
                writer.writerow([repr(float(x)) for x in row])


def goal_from_rows(row_best: np.ndarray) -> float:
    """Sum per-keyword best scores.

    Every goal in the package is reduced through here (or through the same
    contiguous last-axis reduction in the oracle), so equal selections always
    produce bit-identical goals.
    """
    return float(np.sum(np.ascontiguousarray(row_best, dtype=np.float64), axis=-1))


def check_selection(matrix: ScoreMatrix, selection: Iterable[int]) -> tuple[int, ...]:
    """Return the selection as a tuple of ints, raising on bad or repeated indices."""
    out = []
    seen = set()
    for raw in selection:
        if isinstance(raw, (bool, np.bool_)) or not isinstance(raw, (int, np.integer)):
            raise InvalidSelectionError(f"creative index {raw!r} is not an integer")
        j = int(raw)
        if not 0 <= j < matrix.cols:
            raise InvalidSelectionError(f"creative index {j} out of range [0, {matrix.cols - 1}]")
        if j in seen:
            raise InvalidSelectionError(f"creative index {j} selected twice")
        seen.add(j)
        out.append(j)
    return tuple(out)


def check_capacity(matrix: ScoreMatrix, capacity: int) -> int:
    capacity = int(capacity)
    if capacity < 0:
        raise InfeasibleError(f"selection size must be nonnegative, got {capacity}")
    if capacity > matrix.cols:
        raise InfeasibleError(
            f"cannot select {capacity} creatives from a matrix with {matrix.cols} columns"
        )
    return capacity


def goal(matrix: ScoreMatrix, selection: Sequence[int]) -> float:
    """Sum over keywords of the best score among the selected creatives."""
    sel = check_selection(matrix, selection)
    if not sel:
        return 0.0
    return goal_from_rows(matrix.values[:, list(sel)].max(axis=1))


class CoverageCache:
    """Per-keyword running maximum over a selection.

    ``best[i]`` is the best score row ``i`` receives from the current selection,
    which makes a marginal-gain query a single O(W) pass over one column.
    """

    __slots__ = ("matrix", "best", "selected")

    def __init__(self, matrix: ScoreMatrix, best: np.ndarray, selected: tuple[int, ...]):
        self.matrix = matrix
        self.best = best
        self.selected = selected

    @property
    def goal(self) -> float:
        return goal_from_rows(self.best)

    def copy(self) -> "CoverageCache":
        return CoverageCache(self.matrix, self.best.copy(), self.selected)

    def gain(self, j: int) -> float:
        if not 0 <= j < self.matrix.cols:
            raise InvalidSelectionError(f"creative index {j} out of range [0, {self.matrix.cols - 1}]")
        return float(np.maximum(self.matrix.values[:, j] - self.best, 0.0).sum())

    def gains(self) -> np.ndarray:
        """Marginal gain of every column at once (length N)."""
        return np.maximum(self.matrix.values - self.best[:, None], 0.0).sum(axis=0)

    def add(self, j: int) -> None:
        """Add column ``j`` in place."""
        if not 0 <= j < self.matrix.cols:
            raise InvalidSelectionError(f"creative index {j} out of range [0, {self.matrix.cols - 1}]")
        if j in self.selected:
            raise InvalidSelectionError(f"creative index {j} is already selected")
        np.maximum(self.best, self.matrix.values[:, j], out=self.best)
        self.selected = self.selected + (j,)

    def __repr__(self) -> str:
        return f"CoverageCache(selected={self.selected}, goal={self.goal:.6g})"


def build_cache(matrix: ScoreMatrix, selection: Sequence[int] = ()) -> CoverageCache:
    sel = check_selection(matrix, selection)
    if sel:
        best = matrix.values[:, list(sel)].max(axis=1)
    else:
        best = np.zeros(matrix.rows)
    return CoverageCache(matrix, np.array(best, dtype=np.float64), sel)


def _same_owner(matrix: ScoreMatrix, cache: CoverageCache) -> None:
    if cache.matrix is not matrix and cache.matrix.shape != matrix.shape:
        raise ValueError(f"cache built for shape {cache.matrix.shape}, got matrix of shape {matrix.shape}")


def marginal_gain(matrix: ScoreMatrix, cache: CoverageCache, j: int) -> float:
    """Goal increase from adding column ``j`` to the cached selection."""
    _same_owner(matrix, cache)
    return cache.gain(j)


def add_to_cache(cache: CoverageCache, matrix: ScoreMatrix, j: int) -> CoverageCache:
    """Return a new cache with column ``j`` added; ``cache`` is left untouched."""
    _same_owner(matrix, cache)
    out = cache.copy()
    out.add(j)
    return out
