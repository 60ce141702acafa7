"""Connection-vector distributions, model parameters and special-case constructors.

A connection vector across ``D`` views is stored as a bitmask: bit ``i`` of the
index is the edge indicator in view ``i`` (view 0 is the least significant
bit).  A distribution over ``{0,1}^D`` is therefore an array of ``2**D``
masses indexed by that bitmask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from mvsbm.errors import (
    BadLength,
    BadModelSpec,
    InvalidNodeCount,
    InvalidProbability,
    NegativeMass,
    NotNormalized,
    ViewsOutOfRange,
)

MAX_VIEWS = 16
NORMALIZATION_TOL = 1e-12
MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class DistributionOnHypercube:
    """Probability mass function over the ``2**num_views`` connection vectors."""

    num_views: int
    mass: np.ndarray

    def __post_init__(self):
        self.mass.setflags(write=False)

    @property
    def support(self) -> np.ndarray:
        return self.mass > 0

    def marginal(self, view: int) -> float:
        """Probability that the edge in ``view`` is present."""
        idx = np.arange(self.mass.size)
        return float(self.mass[(idx >> view) & 1 == 1].sum())

    def __eq__(self, other):
        if not isinstance(other, DistributionOnHypercube):
            return NotImplemented
        return self.num_views == other.num_views and np.array_equal(self.mass, other.mass)

    def __repr__(self):
        return f"DistributionOnHypercube(num_views={self.num_views}, mass={self.mass.tolist()})"


def validate_distribution(mass: Sequence[float] | np.ndarray, num_views: int) -> DistributionOnHypercube:
    """Check and wrap a mass array; nothing is renormalized."""
    if not isinstance(num_views, (int, np.integer)) or num_views < 1 or num_views > MAX_VIEWS:
        raise ViewsOutOfRange(f"num_views={num_views} not in [1, {MAX_VIEWS}]")
    arr = np.array(mass, dtype=np.float64).ravel()
    if arr.size != 1 << int(num_views):
        raise BadLength(f"expected {1 << int(num_views)} masses, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NotNormalized("mass contains non-finite entries")
    if np.any(arr < 0):
        raise NegativeMass(f"negative entry at bitmask {int(np.argmax(arr < 0))}")
    total = math.fsum(arr.tolist())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"masses sum to {total!r}")
    return DistributionOnHypercube(int(num_views), arr)


@dataclass(frozen=True)
class MvsbmParams:
    """Node count plus the within-community (p) and across-community (q) laws."""

    n: int
    within: DistributionOnHypercube
    across: DistributionOnHypercube

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 4 or self.n % 2:
            raise InvalidNodeCount(f"n={self.n} must be an even integer >= 4")
        if self.within.num_views != self.across.num_views:
            raise BadLength(
                f"within has D={self.within.num_views}, across has D={self.across.num_views}"
            )

    @property
    def num_views(self) -> int:
        return self.within.num_views

    def to_json(self) -> dict:
        return {
            "version": MODEL_SCHEMA_VERSION,
            "n": int(self.n),
            "D": self.num_views,
            "kind": "explicit",
            "p_mass": self.within.mass.tolist(),
            "q_mass": self.across.mass.tolist(),
        }


@dataclass(frozen=True)
class AssumptionReport:
    rho: float
    p_bar: float
    separation: float
    a1_holds: bool
    a2_value_positive: bool


def check_assumptions(params: MvsbmParams) -> AssumptionReport:
    """Instance-level diagnostics for the bounded-ratio and separation assumptions.

    ``rho`` is the tightest constant bounding p/q and q/p on the common
    support (``inf`` when some entry is zero on one side only), ``p_bar`` is
    the largest mass of a non-empty connection vector under either law, and
    ``separation`` is sum over non-empty vectors of (p - q)^2 divided by
    ``p_bar**2``.  Never raises: a violated assumption is reported, not rejected.
    """
    p, q = params.within.mass, params.across.mass
    both = (p > 0) & (q > 0)
    one_sided = (p > 0) != (q > 0)
    if np.any(one_sided):
        rho = math.inf
    elif np.any(both):
        ratio = p[both] / q[both]
        rho = float(max(ratio.max(), (1.0 / ratio).max()))
    else:
        rho = 1.0
    p_bar = float(np.maximum(p[1:], q[1:]).max())
    sq = float(np.sum((p[1:] - q[1:]) ** 2))
    separation = sq / p_bar**2 if p_bar > 0 else 0.0
    return AssumptionReport(
        rho=rho,
        p_bar=p_bar,
        separation=separation,
        a1_holds=math.isfinite(rho),
        a2_value_positive=separation > 0,
    )


def _check_prob(name, value):
    if not (0.0 <= float(value) <= 1.0):
        raise InvalidProbability(f"{name}={value} not in [0, 1]")
    return float(value)


def make_bernoulli_sbm(p1: float, q1: float, n: int) -> MvsbmParams:
    """Single-view SBM with within/across edge probabilities ``p1``/``q1``."""
    p1 = _check_prob("p1", p1)
    q1 = _check_prob("q1", q1)
    return MvsbmParams(
        n,
        validate_distribution([1.0 - p1, p1], 1),
        validate_distribution([1.0 - q1, q1], 1),
    )


def make_identical_views(alpha: float, beta: float, D: int, n: int) -> MvsbmParams:
    """``D`` copies of one graph: mass only on the empty and the all-ones vector."""
    alpha = _check_prob("alpha", alpha)
    beta = _check_prob("beta", beta)
    if not isinstance(D, (int, np.integer)) or D < 1 or D > MAX_VIEWS:
        raise ViewsOutOfRange(f"D={D} not in [1, {MAX_VIEWS}]")
    full = (1 << D) - 1

    def dist(a):
        m = np.zeros(1 << D)
        m[0] = 1.0 - a
        m[full] += a
        return validate_distribution(m, D)

    return MvsbmParams(n, dist(alpha), dist(beta))


def product_mass(probs: Sequence[float]) -> np.ndarray:
    """Mass of the product of independent Bernoulli(probs[i]) edges."""
    mass = np.ones(1)
    for pi in probs:
        # appending view i as the next most significant bit
        mass = np.concatenate([mass * (1.0 - pi), mass * pi])
    return mass


def make_independent_views(p_list: Sequence[float], q_list: Sequence[float], n: int) -> MvsbmParams:
    if len(p_list) != len(q_list):
        raise BadLength(f"{len(p_list)} within probabilities vs {len(q_list)} across")
    D = len(p_list)
    if D < 1 or D > MAX_VIEWS:
        raise ViewsOutOfRange(f"D={D} not in [1, {MAX_VIEWS}]")
    ps = [_check_prob(f"p_list[{i}]", v) for i, v in enumerate(p_list)]
    qs = [_check_prob(f"q_list[{i}]", v) for i, v in enumerate(q_list)]
    return MvsbmParams(
        n,
        validate_distribution(product_mass(ps), D),
        validate_distribution(product_mass(qs), D),
    )


def _require(spec, *keys):
    missing = [k for k in keys if k not in spec]
    if missing:
        raise BadModelSpec(f"model spec of kind {spec.get('kind')!r} missing {missing}")


def params_from_json(spec: Mapping[str, Any]) -> MvsbmParams:
    """Build parameters from a model spec dict.

    Schema::

        {"n": int, "D": int, "kind": "explicit" | "bernoulli" | "identical" | "independent",
         "p_mass"/"q_mass" | "p1"/"q1" | "alpha"/"beta" | "p_list"/"q_list"}

    ``version`` is optional and must equal 1 when present.
    """
    if not isinstance(spec, Mapping):
        raise BadModelSpec("model spec must be a JSON object")
    version = spec.get("version", MODEL_SCHEMA_VERSION)
    if version != MODEL_SCHEMA_VERSION:
        raise BadModelSpec(f"unsupported model spec version {version!r}")
    _require(spec, "n", "kind")
    n = spec["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise BadModelSpec(f"n must be an integer, got {n!r}")
    kind = spec["kind"]
    D = spec.get("D")
    if kind == "explicit":
        _require(spec, "D", "p_mass", "q_mass")
        params = MvsbmParams(
            n,
            validate_distribution(spec["p_mass"], D),
            validate_distribution(spec["q_mass"], D),
        )
    elif kind == "bernoulli":
        _require(spec, "p1", "q1")
        params = make_bernoulli_sbm(spec["p1"], spec["q1"], n)
    elif kind == "identical":
        _require(spec, "D", "alpha", "beta")
        params = make_identical_views(spec["alpha"], spec["beta"], D, n)
    elif kind == "independent":
        _require(spec, "p_list", "q_list")
        params = make_independent_views(spec["p_list"], spec["q_list"], n)
    else:
        raise BadModelSpec(f"unknown model kind {kind!r}")
    if D is not None and D != params.num_views:
        raise BadModelSpec(f"D={D} disagrees with the distributions' D={params.num_views}")
    return params
