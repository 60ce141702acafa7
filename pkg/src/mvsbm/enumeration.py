"""Revolving-door enumeration of balanced bipartitions with incremental scores.

Node 0 is pinned to the +1 side; the remaining ``n/2 - 1`` members of the +1
side are a ``t``-subset of the ``m = n - 1`` other nodes, visited in the
revolving-door (constant-weight Gray code) order of Knuth's Algorithm R.
Consecutive subsets differ by exactly one element leaving and one entering,
so the same-side score is updated in O(n) per candidate.

The score of a labeling ``x`` under a symmetric zero-diagonal weight matrix
``W`` is ``sum_{i<j, x_i = x_j} W_ij = (sum_{i<j} W_ij) / 2 + x^T W x / 4``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# exact re-evaluation cadence bounding floating drift of the running score
_RESYNC_EVERY = 4096


@njit(cache=True, nogil=True)
def revolving_door_init(m, t):
    """State array ``c`` (1-based, ``c[t+1] = m`` sentinel) for subset {0..t-1}."""
    c = np.empty(t + 2, dtype=np.int64)
    c[0] = -1
    for j in range(1, t + 1):
        c[j] = j - 1
    c[t + 1] = m
    return c


@njit(cache=True, nogil=True)
def revolving_door_next(c, t):
    """Advance ``c`` in place; return ``(leaving, entering)`` or ``(-1, -1)`` when done."""
    if t % 2 == 1:
        if c[1] + 1 < c[2]:
            c[1] += 1
            return c[1] - 1, c[1]
        state = 4
    else:
        if c[1] > 0:
            c[1] -= 1
            return c[1] + 1, c[1]
        state = 5
    j = 2
    while j <= t:
        if state == 4:
            # here c[j] == c[j-1] + 1
            if c[j] >= j:
                out = c[j]
                c[j] = c[j - 1]
                c[j - 1] = j - 2
                return out, j - 2
            state = 5
        else:
            # here c[j-1] == j - 2
            if c[j] + 1 < c[j + 1]:
                out = c[j - 1]
                c[j - 1] = c[j]
                c[j] += 1
                return out, c[j]
            state = 4
        j += 1
    return -1, -1


@njit(cache=True, nogil=True)
def lex_less(a, b):
    """Is the sign sequence of plus-mask ``a`` lexicographically below ``b`` (-1 < +1)?"""
    d = a ^ b
    if d == 0:
        return False
    low = d & -d
    return (a & low) == 0


@njit(cache=True, nogil=True)
def _quad_and_gain(W, x, g):
    n = W.shape[0]
    quad = 0.0
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += W[i, j] * x[j]
        g[i] = s
        quad += x[i] * s
    return quad


@njit(cache=True, nogil=True)
def exact_search(W, tol):
    """Maximise the same-side score over balanced labelings with x_0 = +1.

    Returns ``(best_plus_mask, best_score, tie, candidates)``.  Ties within
    ``tol`` resolve to the lexicographically smallest sign sequence.
    """
    n = W.shape[0]
    m = n - 1
    t = n // 2 - 1
    half_total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            half_total += W[i, j]
    half_total *= 0.5

    x = -np.ones(n)
    x[0] = 1.0
    mask = np.int64(1)
    c = revolving_door_init(m, t)
    for j in range(1, t + 1):
        node = c[j] + 1
        x[node] = 1.0
        mask |= np.int64(1) << node
    g = np.empty(n)
    quad = _quad_and_gain(W, x, g)

    best = half_total + 0.25 * quad
    best_mask = mask
    tie = False
    count = np.int64(1)
    while True:
        out, into = revolving_door_next(c, t)
        if out < 0:
            break
        u = out + 1
        v = into + 1
        # u moves + -> -, v moves - -> +
        quad += -4.0 * (g[u] - g[v]) - 8.0 * W[u, v]
        for i in range(n):
            g[i] += 2.0 * (W[i, v] - W[i, u])
        x[u] = -1.0
        x[v] = 1.0
        mask ^= (np.int64(1) << u) | (np.int64(1) << v)
        count += 1
        if count % _RESYNC_EVERY == 0:
            quad = _quad_and_gain(W, x, g)
        s = half_total + 0.25 * quad
        if s > best + tol:
            best = s
            best_mask = mask
            tie = False
        elif s >= best - tol:
            tie = True
            if s > best:
                best = s
            if lex_less(mask, best_mask):
                best_mask = mask
    return best_mask, best, tie, count


def mask_to_signs(mask: int, n: int) -> np.ndarray:
    bits = (int(mask) >> np.arange(n)) & 1
    return np.where(bits == 1, 1, -1).astype(np.int8)


def iter_revolving_door(m: int, t: int):
    """Python-level iterator over the t-subsets of range(m) in revolving-door order."""
    c = revolving_door_init(m, t)
    yield tuple(int(v) for v in c[1 : t + 1])
    if t == 0:
        return
    while True:
        out, _ = revolving_door_next(c, t)
        if out < 0:
            return
        yield tuple(int(v) for v in c[1 : t + 1])
