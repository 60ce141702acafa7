"""Error exponents, labeling counts, the ML union bound and change-of-measure checks.

All sums are accumulated in the log domain and exponentiated once; underflow
flushes to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from mvsbm.divergence import TiltedPair, kl, kl_balance_residual, renyi_half
from mvsbm.estimators import llr_table
from mvsbm.errors import InvalidTilt, KOutOfRange, NonpositiveMis
from mvsbm.model import MvsbmParams, check_assumptions
from mvsbm.sampler import (
    STREAM_PAIRS,
    SeedSpec,
    inverse_cdf,
    planted_labeling,
    same_side_pairs,
    sample_labeling,
    sample_tensor_psi,
)

TILT_RESIDUAL_TOL = 1e-8


def _check_k(n: int, k: int):
    if n % 2 or n < 4:
        raise KOutOfRange(f"n={n} must be even and >= 4")
    if not (1 <= k <= n // 2 - 1):
        raise KOutOfRange(f"k={k} not in [1, {n // 2 - 1}]")


def labeling_count_log(n: int, k: int) -> float:
    """log of the number of balanced labelings at Hamming distance 2k: C(n/2, k)^2."""
    _check_k(n, k)
    h = n // 2
    return 2.0 * float(gammaln(h + 1) - gammaln(k + 1) - gammaln(h - k + 1))


def labeling_count_log_relaxed(n: int, k: int) -> float:
    """Upper bound 2k (1 + log(n / 2k)) from C(a, k) <= (e a / k)^k."""
    _check_k(n, k)
    return 2.0 * k * (1.0 + math.log(n / (2.0 * k)))


def lemma1_exponent(n: int, k: int, renyi: float) -> float:
    _check_k(n, k)
    if renyi < 0:
        raise ValueError("renyi must be nonnegative")
    if renyi == 0:
        return 0.0
    return -k * (n - 2 * k) * renyi


def lemma1_term(n: int, k: int, renyi: float) -> float:
    """exp(-k (n - 2k) I): bound on P(x_k scores at least as well as the truth)."""
    return math.exp(lemma1_exponent(n, k, renyi))


@dataclass(frozen=True)
class BoundTerm:
    k: int
    count_log: float
    exponent: float
    term: float


@dataclass(frozen=True)
class BoundReport:
    per_k_terms: tuple
    union_bound: float
    epsilon_margin: float

    def to_json(self) -> dict:
        return {
            "version": 1,
            "union_bound": self.union_bound,
            "epsilon_margin": self.epsilon_margin,
            "per_k_terms": [
                {"k": t.k, "count_log": t.count_log, "exponent": t.exponent, "term": t.term}
                for t in self.per_k_terms
            ],
        }


def ml_union_bound(params: MvsbmParams) -> BoundReport:
    """Union bound on the ML failure probability with exact labeling counts.

    Sums C(n/2, k)^2 exp(-k (n - 2k) I) over k = 1 .. n/2 - 1, capped at 1.
    """
    n = params.n
    renyi = renyi_half(params.within, params.across)
    terms = []
    logs = []
    for k in range(1, n // 2):
        c = labeling_count_log(n, k)
        e = -math.inf if math.isinf(renyi) else lemma1_exponent(n, k, renyi)
        logs.append(c + e)
        terms.append(BoundTerm(k, c, e, float(np.exp(c + e))))
    total_log = float(logsumexp(logs)) if logs else -math.inf
    union = 1.0 if total_log >= 0.0 else math.exp(total_log)
    margin = n * renyi / (2.0 * math.log(n)) - 1.0
    return BoundReport(tuple(terms), union, margin)


@dataclass(frozen=True)
class PsiDiagnostics:
    e_psi_r_lower: float
    e_psi_r_upper: float
    var_upper: float
    necessary_rhs: float
    f_n: float


def lemma2_threshold(n: int, expected_mis: float) -> float:
    """f(n) = log(n / E[mis]) - 2 log 2."""
    if not expected_mis > 0:
        raise NonpositiveMis(f"expected_mis={expected_mis}")
    return math.log(n / expected_mis) - 2.0 * math.log(2.0)


def _check_tilt(params: MvsbmParams, tilt: TiltedPair) -> float:
    res = kl_balance_residual(tilt, params.within, params.across)
    if not res <= TILT_RESIDUAL_TOL:
        raise InvalidTilt(f"KL balance residual {res}")
    return res


def psi_diagnostics(params: MvsbmParams, tilt: TiltedPair, expected_mis: float) -> PsiDiagnostics:
    """Analytic bracket on E_psi[R], its variance bound and the necessary-condition terms."""
    f_n = lemma2_threshold(params.n, expected_mis)
    _check_tilt(params, tilt)
    n = params.n
    s = kl(tilt.p_tilt, params.within) + kl(tilt.q_tilt, params.across)
    rho = check_assumptions(params).rho
    log_rho = math.log(rho) if s > 0 else 0.0
    lower = (n - 1) / 2.0 * s
    upper = n / 2.0 * s
    var_upper = n / 2.0 * log_rho * s + (2 * n - 1) / 4.0 * s * s
    return PsiDiagnostics(lower, upper, var_upper, upper + math.sqrt(4.0 * var_upper), f_n)


def psi_log_ratio(params: MvsbmParams, tilt: TiltedPair, truth, tensor) -> float:
    """R = sum_v log(P_psi(A_0v) / P_phi(A_0v)) over the node-0 row."""
    n = params.n
    row = tensor.pair_vectors[: n - 1]
    x0 = truth.signs[0]
    xv = truth.signs[1:]
    with np.errstate(divide="ignore"):
        psi = np.where(xv == 1, np.log(tilt.p_tilt.mass)[row], np.log(tilt.q_tilt.mass)[row])
        phi = np.where(xv == x0, np.log(params.within.mass)[row], np.log(params.across.mass)[row])
    # psi > 0 implies phi > 0 from the tilt's support
    return math.fsum((psi - phi).tolist())


def estimate_lemma2_lhs(
    params: MvsbmParams, tilt: TiltedPair, f_n: float, trials: int, seed: SeedSpec
):
    """Monte Carlo estimate of P_psi(R <= f_n).

    Trial ``t`` uses ``SeedSpec(seed.master_seed, seed.trial_index + t)`` for
    both the labeling and the tilted tensor.  Returns ``(estimate, stderr)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_tilt(params, tilt)
    hits = 0
    for t in range(trials):
        s = SeedSpec(seed.master_seed, seed.trial_index + t)
        truth = sample_labeling(params.n, s)
        tensor = sample_tensor_psi(params, tilt, truth, s)
        if psi_log_ratio(params, tilt, truth, tensor) <= f_n:
            hits += 1
    est = hits / trials
    return est, math.sqrt(est * (1.0 - est) / trials)


def lemma2_rhs(f_n: float, expected_mis: float, n: int) -> float:
    return math.exp(f_n) * expected_mis / n + 0.5


def flip_block_labeling(n: int, k: int):
    """x_k: the planted labeling with nodes [0, k) and [n/2, n/2 + k) swapped."""
    _check_k(n, k)
    s = planted_labeling(n).signs.copy()
    s[:k] = -1
    s[n // 2 : n // 2 + k] = 1
    return s


def lemma1_monte_carlo(params: MvsbmParams, k: int, trials: int, seed: SeedSpec, batch: int = 20000):
    """Estimate P(L(A|x_k) <= L(A|x_0)) with A drawn from the planted labeling x_0.

    Equivalent to the same-side LLR score of x_k being at least that of x_0.
    Uses a single pair stream of ``seed``, consumed in batches of ``batch``
    tensors.  Returns ``(estimate, stderr)``.
    """
    n = params.n
    x0 = planted_labeling(n)
    xk = flip_block_labeling(n, k)
    same0 = same_side_pairs(x0)
    iu, ju = np.triu_indices(n, 1)
    samek = xk[iu] == xk[ju]
    # only pairs whose side relation changes matter
    diff = same0 != samek
    table = llr_table(params)
    rng = seed.generator(STREAM_PAIRS)
    hits = 0
    done = 0
    same_d = same0[diff]
    while done < trials:
        b = min(batch, trials - done)
        u = rng.random((b, int(diff.sum())))
        masks = np.empty(u.shape, dtype=np.uint16)
        masks[:, same_d] = inverse_cdf(params.within.mass, u[:, same_d])
        masks[:, ~same_d] = inverse_cdf(params.across.mass, u[:, ~same_d])
        w = table[masks]
        # score(x_k) - score(x_0) over the changed pairs
        delta = w[:, ~same_d].sum(axis=1) - w[:, same_d].sum(axis=1)
        hits += int(np.count_nonzero(delta >= -1e-12))
        done += b
    est = hits / trials
    return est, math.sqrt(est * (1.0 - est) / trials)
