import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedy_power import (
    InvalidSelectionError,
    MatrixFormatError,
    ScoreMatrix,
    add_to_cache,
    build_cache,
    goal,
    marginal_gain,
)

from conftest import int_matrices, py_goal


def test_goal_identity():
    assert goal(ScoreMatrix([[1, 0], [0, 1]]), [0, 1]) == 2.0


def test_goal_example(example):
    # max(4,0) + max(4,4) + max(0,4)
    assert goal(example, [1, 2]) == 12.0


def test_goal_empty(example):
    assert goal(example, []) == 0.0


@pytest.mark.parametrize("bad", [[3], [-1], [0, 0], [1.0]])
def test_goal_rejects_bad_selection(example, bad):
    with pytest.raises(InvalidSelectionError):
        goal(example, bad)


def test_build_cache(example):
    assert build_cache(example, []).best.tolist() == [0, 0, 0]
    assert build_cache(example, [1]).best.tolist() == [4, 4, 0]
    assert build_cache(example, [0, 1, 2]).best.tolist() == [6, 4, 4]


def test_marginal_gain_examples(example):
    cache = build_cache(example, [1])
    assert marginal_gain(example, cache, 1) == 0.0
    assert marginal_gain(example, cache, 0) == 2.0
    assert marginal_gain(example, cache, 2) == 4.0
    with pytest.raises(InvalidSelectionError):
        marginal_gain(example, cache, 3)


def test_add_to_cache(example):
    empty = build_cache(example)
    assert add_to_cache(empty, example, 2).best.tolist() == example.column(2).tolist()
    assert empty.best.tolist() == [0, 0, 0]

    cache = add_to_cache(build_cache(example, [1]), example, 2)
    assert cache.best.tolist() == [4, 4, 4]
    assert cache.selected == (1, 2)

    with pytest.raises(InvalidSelectionError):
        add_to_cache(cache, example, 1)

    zeros = ScoreMatrix([[1, 0], [2, 0]])
    before = build_cache(zeros, [0])
    after = add_to_cache(before, zeros, 1)
    assert after.best.tolist() == before.best.tolist()


def test_matrix_validation():
    with pytest.raises(MatrixFormatError, match="row 1, column 0"):
        ScoreMatrix([[1, 2], [-1, 0]])
    with pytest.raises(MatrixFormatError):
        ScoreMatrix([[np.nan]])
    with pytest.raises(MatrixFormatError):
        ScoreMatrix(np.zeros((0, 3)))
    with pytest.raises(MatrixFormatError):
        ScoreMatrix([1, 2, 3])


def test_matrix_is_immutable(example):
    with pytest.raises(ValueError):
        example.values[0, 0] = 99.0
    src = np.ones((2, 2))
    m = ScoreMatrix(src)
    src[0, 0] = 5
    assert m.values[0, 0] == 1.0


def test_csv_roundtrip(tmp_path, example):
    path = tmp_path / "k.csv"
    example.to_csv(path)
    assert ScoreMatrix.from_csv(path) == example


@pytest.mark.parametrize(
    "text, match",
    [
        ("1,2\n3\n", "row 1 has 1 columns, expected 2"),
        ("1,2\n3,x\n", "row 1 .*column 1"),
        ("1,2\n3,-4\n", "row 1, column 1: negative"),
        ("", "no data rows"),
        ("1,inf\n", "non-finite"),
    ],
)
def test_csv_errors(tmp_path, text, match):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(MatrixFormatError, match=match):
        ScoreMatrix.from_csv(path)


def _subsets(n):
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_goal_matches_reference(rows):
    m = ScoreMatrix(rows)
    for sel in _subsets(m.cols):
        assert goal(m, sel) == py_goal(rows, sel)


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_marginal_gain_exact_and_monotone(rows):
    m = ScoreMatrix(rows)
    for sel in _subsets(m.cols):
        cache = build_cache(m, sel)
        base = goal(m, sel)
        assert cache.goal == base
        gains = cache.gains()
        for j in range(m.cols):
            with_j = goal(m, sel + (j,)) if j not in sel else base
            assert marginal_gain(m, cache, j) == with_j - base
            assert gains[j] == with_j - base
            assert with_j >= base


@settings(max_examples=40, deadline=None)
@given(int_matrices(max_rows=6, max_cols=6))
def test_diminishing_returns(rows):
    m = ScoreMatrix(rows)
    n = m.cols
    for big in _subsets(n):
        big_gain = build_cache(m, big)
        for k in range(len(big) + 1):
            for small in itertools.combinations(big, k):
                small_gain = build_cache(m, small)
                for j in set(range(n)) - set(big):
                    assert big_gain.gain(j) <= small_gain.gain(j)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.randoms(use_true_random=False), st.integers(0, 2**32 - 1))
def test_cache_consistency_real_values(w, n, order_rng, seed):
    m = ScoreMatrix(np.abs(np.random.default_rng(seed).standard_normal((w, n))))
    order = list(range(n))
    order_rng.shuffle(order)
    cache = build_cache(m)
    for j in order[: order_rng.randint(0, n)]:
        before = cache.goal
        g = cache.gain(j)
        cache = add_to_cache(cache, m, j)
        assert cache.goal == pytest.approx(before + g, rel=1e-12, abs=1e-12)
        rebuilt = build_cache(m, cache.selected)
        assert np.array_equal(rebuilt.best, cache.best)
        assert rebuilt.goal == goal(m, cache.selected)
