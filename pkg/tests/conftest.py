import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from greedy_power import ScoreMatrix

# 3x3 worked example: greedy picks {1, 2} (12), optimum is {0, 2} (14)
EXAMPLE = [[6, 4, 0], [0, 4, 4], [0, 0, 4]]


@pytest.fixture
def example():
    return ScoreMatrix(EXAMPLE)


def py_goal(rows, selection):
    """Reference goal on nested lists, no numpy."""
    if not selection:
        return 0
    return sum(max(row[a] for a in selection) for row in rows)


def brute_best(rows, m):
    """All size-m subsets in lexicographic order, keeping the first maximiser."""
    best, best_sel = None, None
    for sel in itertools.combinations(range(len(rows[0])), m):
        g = py_goal(rows, sel)
        if best is None or g > best:
            best, best_sel = g, sel
    return best_sel, best


@st.composite
def int_matrices(draw, max_rows=8, max_cols=8, max_value=20):
    """Small integer-valued matrices: float sums are exact, so equalities hold bit for bit."""
    w = draw(st.integers(1, max_rows))
    n = draw(st.integers(1, max_cols))
    rows = draw(st.lists(st.lists(st.integers(0, max_value), min_size=n, max_size=n), min_size=w, max_size=w))
    return rows


def random_matrix(rng, w, n):
    return ScoreMatrix(np.abs(rng.standard_normal((w, n))))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
