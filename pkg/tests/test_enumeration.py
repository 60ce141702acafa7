import itertools
import math

import numpy as np
import pytest

from mvsbm.enumeration import exact_search, iter_revolving_door, lex_less, mask_to_signs


@pytest.mark.parametrize("m", range(1, 12))
def test_revolving_door_is_a_gray_code(m):
    for t in range(0, m + 1):
        seq = [frozenset(s) for s in iter_revolving_door(m, t)]
        assert len(seq) == math.comb(m, t)
        assert len(set(seq)) == len(seq)
        assert all(len(s) == t for s in seq)
        for a, b in zip(seq, seq[1:]):
            assert len(a - b) == 1 and len(b - a) == 1


def test_lex_less_matches_sign_order():
    n = 8
    masks = [1 | sum(1 << (c + 1) for c in s) for s in itertools.combinations(range(7), 3)]
    by_signs = sorted(masks, key=lambda m: mask_to_signs(m, n).tolist())
    for a, b in zip(by_signs, by_signs[1:]):
        assert lex_less(a, b) and not lex_less(b, a)


def _brute(W):
    n = W.shape[0]
    best, arg = -math.inf, None
    for rest in itertools.combinations(range(1, n), n // 2 - 1):
        x = -np.ones(n)
        x[[0, *rest]] = 1
        s = sum(W[i, j] for i in range(n) for j in range(i + 1, n) if x[i] == x[j])
        if s > best:
            best, arg = s, x
    return best, arg


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_exact_search_random(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        A = rng.normal(size=(n, n))
        W = np.triu(A, 1) + np.triu(A, 1).T
        mask, best, tie, count = exact_search(W, 1e-9)
        want, arg = _brute(W)
        assert count == math.comb(n - 1, n // 2 - 1)
        assert best == pytest.approx(want, abs=1e-9)
        np.testing.assert_array_equal(mask_to_signs(mask, n), arg)
        assert not tie


def test_exact_search_ties_resolve_to_smallest():
    W = np.zeros((8, 8))
    mask, best, tie, _ = exact_search(W, 1e-9)
    assert tie and best == 0.0
    assert mask_to_signs(mask, 8).tolist() == [1, -1, -1, -1, -1, 1, 1, 1]


def test_exact_search_resync_long_run():
    # n = 18 visits 24310 candidates, crossing several resync points
    n = 18
    rng = np.random.default_rng(0)
    A = rng.normal(size=(n, n)) * 1e3
    W = np.triu(A, 1) + np.triu(A, 1).T
    mask, best, _, _ = exact_search(W, 1e-9)
    x = mask_to_signs(mask, n).astype(float)
    direct = W.sum() / 4 + x @ W @ x / 4
    assert best == pytest.approx(direct, rel=1e-12, abs=1e-6)
