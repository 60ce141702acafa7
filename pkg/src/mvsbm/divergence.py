"""Order-1/2 Renyi divergence, the Chernoff family, KL and the geometric tilt.

Natural logarithms throughout.  ``0 log 0`` and ``0**0`` are taken as 0, and
disjoint supports give ``math.inf`` rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mvsbm.errors import DimensionMismatch, DisjointSupports, SupportViolation, TOutOfRange
from mvsbm.model import DistributionOnHypercube, MvsbmParams, validate_distribution


def _pair(a: DistributionOnHypercube, b: DistributionOnHypercube):
    if a.num_views != b.num_views:
        raise DimensionMismatch(f"D={a.num_views} vs D={b.num_views}")
    return a.mass, b.mass


def _mixed_sum(p: np.ndarray, q: np.ndarray, t: float) -> float:
    """Sum of p^t q^(1-t) over the common support."""
    both = (p > 0) & (q > 0)
    pp, qq = p[both], q[both]
    if t == 0.5:
        terms = np.sqrt(pp * qq)
    else:
        terms = pp**t * qq ** (1.0 - t)
    return math.fsum(terms.tolist())


def bhattacharyya(p: DistributionOnHypercube, q: DistributionOnHypercube) -> float:
    pm, qm = _pair(p, q)
    return _mixed_sum(pm, qm, 0.5)


def renyi_half(p: DistributionOnHypercube, q: DistributionOnHypercube) -> float:
    """-2 log of the Bhattacharyya coefficient; ``inf`` for disjoint supports."""
    bc = bhattacharyya(p, q)
    if bc <= 0.0:
        return math.inf
    # rounding can push bc a hair above 1 for identical inputs
    return max(-2.0 * math.log(bc), 0.0)


def chernoff_t(p: DistributionOnHypercube, q: DistributionOnHypercube, t: float) -> float:
    """Symmetrised Chernoff divergence ``-log sum p^t q^(1-t) - log sum q^t p^(1-t)``."""
    pm, qm = _pair(p, q)
    if not (0.0 <= t <= 1.0):
        raise TOutOfRange(f"t={t}")
    a = _mixed_sum(pm, qm, t)
    b = _mixed_sum(qm, pm, t)
    if a <= 0.0 or b <= 0.0:
        return math.inf
    return max(-math.log(a) - math.log(b), 0.0)


def kl(a: DistributionOnHypercube, b: DistributionOnHypercube) -> float:
    am, bm = _pair(a, b)
    pos = am > 0
    if np.any(pos & (bm == 0)):
        raise SupportViolation("a(d) > 0 where b(d) = 0")
    terms = am[pos] * (np.log(am[pos]) - np.log(bm[pos]))
    return max(math.fsum(terms.tolist()), 0.0)


@dataclass(frozen=True)
class TiltedPair:
    p_tilt: DistributionOnHypercube
    q_tilt: DistributionOnHypercube


def kl_balance_residual(tilt: TiltedPair, p: DistributionOnHypercube, q: DistributionOnHypercube) -> float:
    """|KL(p~||p) + KL(q~||q) - KL(p~||q) - KL(q~||p)|; ``inf`` on support violations."""
    try:
        lhs = kl(tilt.p_tilt, p) + kl(tilt.q_tilt, q)
        rhs = kl(tilt.p_tilt, q) + kl(tilt.q_tilt, p)
    except SupportViolation:
        return math.inf
    return abs(lhs - rhs)


def geometric_tilt(p: DistributionOnHypercube, q: DistributionOnHypercube) -> TiltedPair:
    """Both tilted laws equal the normalised geometric mean sqrt(p q) / Z.

    This makes the KL balance condition hold with both sides identical, and
    KL(g||p) + KL(g||q) = -2 log Z = renyi_half(p, q) exactly.
    """
    pm, qm = _pair(p, q)
    g = np.sqrt(pm * qm)
    z = math.fsum(g.tolist())
    if z <= 0.0:
        raise DisjointSupports("p and q have disjoint supports")
    dist = validate_distribution(g / z, p.num_views)
    return TiltedPair(dist, dist)


@dataclass(frozen=True)
class DivergenceReport:
    renyi_half: float
    threshold_stat: float
    kl_p_tilt_p: float
    kl_q_tilt_q: float
    kl_ratio: float


def threshold_statistic(n: int, renyi: float) -> float:
    return n * renyi / math.log(n)


def threshold_stat(params: MvsbmParams) -> DivergenceReport:
    """Divergence summary for a model: I(p,q), n I / log n and the tilt KL ratio."""
    p, q = params.within, params.across
    renyi = renyi_half(p, q)
    tau = threshold_statistic(params.n, renyi)
    if math.isinf(renyi):
        return DivergenceReport(renyi, tau, math.inf, math.inf, math.nan)
    tilt = geometric_tilt(p, q)
    kp = kl(tilt.p_tilt, p)
    kq = kl(tilt.q_tilt, q)
    ratio = (kp + kq) / renyi if renyi > 0 else 1.0
    return DivergenceReport(renyi, tau, kp, kq, ratio)
