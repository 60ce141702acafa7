"""Likelihood-ratio weights, exact ML recovery, a spectral/local-search heuristic
and misclassification metrics.

Minimising the negative log-likelihood over balanced labelings is the same as
maximising the same-side sum of pairwise log-likelihood ratios
``w_ij = log p(A_ij) - log q(A_ij)``, since the remaining term
``-sum_{i<j} log q(A_ij)`` does not depend on the labeling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mvsbm.enumeration import exact_search, mask_to_signs
from mvsbm.errors import (
    DimensionMismatch,
    LengthMismatch,
    TooLargeForExact,
    Unbalanced,
    ZeroZeroMass,
)
from mvsbm.model import MvsbmParams
from mvsbm.sampler import (
    STREAM_RESTARTS,
    AdjacencyTensor,
    Labeling,
    SeedSpec,
    same_side_pairs,
)

LLR_CLAMP = 700.0
TIE_TOL = 1e-9
MAX_EXACT_N = 32


@dataclass(frozen=True, eq=False)
class LlrMatrix:
    n: int
    weights: np.ndarray

    def dense(self) -> np.ndarray:
        """Symmetric matrix with zero diagonal."""
        out = np.zeros((self.n, self.n))
        out[np.triu_indices(self.n, 1)] = self.weights
        return out + out.T


@dataclass(frozen=True)
class EstimateResult:
    labeling: Labeling
    score: float
    num_candidates_scanned: int
    tie: bool


@dataclass(frozen=True)
class RecoveryMetrics:
    mis_count: int
    exact: bool


def llr_table(params: MvsbmParams) -> np.ndarray:
    """Per-bitmask log-likelihood ratio, clamped to +-700; NaN where p = q = 0."""
    p, q = params.within.mass, params.across.mass
    with np.errstate(divide="ignore", invalid="ignore"):
        table = np.log(p) - np.log(q)
    dead = (p == 0) & (q == 0)
    table = np.clip(table, -LLR_CLAMP, LLR_CLAMP)
    table[dead] = np.nan
    return table


def llr_matrix(params: MvsbmParams, tensor: AdjacencyTensor) -> LlrMatrix:
    if tensor.n != params.n or tensor.num_views != params.num_views:
        raise DimensionMismatch(
            f"tensor (n={tensor.n}, D={tensor.num_views}) vs model (n={params.n}, D={params.num_views})"
        )
    table = llr_table(params)
    w = table[tensor.pair_vectors]
    if np.isnan(w).any():
        d = int(tensor.pair_vectors[np.argmax(np.isnan(w))])
        raise ZeroZeroMass(f"observed bitmask {d} has zero mass under both p and q")
    return LlrMatrix(params.n, w)


def _check_labeling(labeling: Labeling, n: int):
    if labeling.n != n:
        raise LengthMismatch(f"labeling has {labeling.n} nodes, expected {n}")
    if int(labeling.signs.sum(dtype=np.int64)) != 0:
        raise Unbalanced("labeling is not balanced")


def score(labeling: Labeling, llr: LlrMatrix) -> float:
    """Sum of ``w_ij`` over pairs placed on the same side."""
    _check_labeling(labeling, llr.n)
    return math.fsum(llr.weights[same_side_pairs(labeling)].tolist())


def neg_log_likelihood(params: MvsbmParams, tensor: AdjacencyTensor, labeling: Labeling) -> float:
    """-log P_x(A); ``inf`` when the labeling cannot generate the tensor."""
    _check_labeling(labeling, params.n)
    same = same_side_pairs(labeling)
    with np.errstate(divide="ignore"):
        lp = np.log(params.within.mass)[tensor.pair_vectors[same]]
        lq = np.log(params.across.mass)[tensor.pair_vectors[~same]]
    return -math.fsum(lp.tolist()) - math.fsum(lq.tolist())


def ml_exact(params: MvsbmParams, tensor: AdjacencyTensor) -> EstimateResult:
    """Exact maximum-likelihood labeling by enumerating all C(n-1, n/2-1) partitions."""
    if params.n > MAX_EXACT_N:
        raise TooLargeForExact(f"n={params.n} exceeds {MAX_EXACT_N}")
    llr = llr_matrix(params, tensor)
    W = llr.dense()
    mask, _, tie, count = exact_search(W, TIE_TOL)
    labeling = Labeling(mask_to_signs(mask, params.n))
    return EstimateResult(labeling, score(labeling, llr), int(count), bool(tie))


def _leading_vector(W: np.ndarray, start: np.ndarray, steps=200, tol=1e-10) -> np.ndarray:
    # shift by the Gershgorin radius so the algebraically largest eigenvalue dominates
    shift = float(np.abs(W).sum(axis=1).max())
    v = start / np.linalg.norm(start)
    for _ in range(steps):
        nxt = W @ v + shift * v
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            return v
        nxt /= norm
        if np.linalg.norm(nxt - v) < tol:
            return nxt
        v = nxt
    return v


def _median_split(v: np.ndarray) -> np.ndarray:
    n = v.size
    order = np.argsort(-v, kind="stable")
    x = np.full(n, -1.0)
    x[order[: n // 2]] = 1.0
    return x


def _two_swap_climb(W: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply the best improving (+, -) swap until none improves the score."""
    x = x.copy()
    while True:
        g = W @ x
        plus = np.flatnonzero(x > 0)
        minus = np.flatnonzero(x < 0)
        # score change of swapping u (+ -> -) with v (- -> +)
        gain = g[minus][None, :] - g[plus][:, None] - 2.0 * W[np.ix_(plus, minus)]
        k = int(np.argmax(gain))
        a, b = divmod(k, minus.size)
        if gain[a, b] <= 1e-12:
            return x
        x[plus[a]] = -1.0
        x[minus[b]] = 1.0


def ml_heuristic(
    params: MvsbmParams,
    tensor: AdjacencyTensor,
    restarts: int = 1,
    seed: SeedSpec | None = None,
) -> EstimateResult:
    """Spectral initialisation plus balanced 2-swap hill climbing, best of ``restarts``.

    Restart 0 starts power iteration from a fixed vector; restart ``r > 0``
    adds Gaussian noise drawn from the restart stream of ``seed``.  The result
    is a local maximum of the score under balanced swaps, not a certificate.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    llr = llr_matrix(params, tensor)
    W = llr.dense()
    n = params.n
    seed = seed or SeedSpec(0, 0)
    rng = seed.generator(STREAM_RESTARTS)
    base = np.linspace(1.0, 2.0, n)
    best_x, best_s = None, -math.inf
    scanned = 0
    for r in range(restarts):
        start = base if r == 0 else base + rng.standard_normal(n) * np.linalg.norm(base)
        x = _two_swap_climb(W, _median_split(_leading_vector(W, start)))
        scanned += 1
        s = 0.25 * float(x @ W @ x)
        if s > best_s + TIE_TOL:
            best_x, best_s = x, s
    labeling = Labeling(best_x.astype(np.int8)).canonical()
    return EstimateResult(labeling, score(labeling, llr), scanned, False)


def recovery_metrics(estimate: Labeling, truth: Labeling) -> RecoveryMetrics:
    """Misclassified nodes up to the global sign flip."""
    if estimate.n != truth.n:
        raise LengthMismatch(f"{estimate.n} vs {truth.n}")
    _check_labeling(estimate, truth.n)
    _check_labeling(truth, truth.n)
    ham = int(np.count_nonzero(estimate.signs != truth.signs))
    mis = min(ham, truth.n - ham)
    return RecoveryMetrics(mis, mis == 0)
