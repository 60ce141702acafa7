"""Multi-view stochastic block model: divergences, sampling, exact and heuristic
ML recovery, error bounds and Monte Carlo sweeps."""

from mvsbm.divergence import bhattacharyya, chernoff_t, geometric_tilt, kl, renyi_half, threshold_stat
from mvsbm.errors import MvsbmError
from mvsbm.estimators import ml_exact, ml_heuristic, recovery_metrics
from mvsbm.model import (
    DistributionOnHypercube,
    MvsbmParams,
    check_assumptions,
    make_bernoulli_sbm,
    make_identical_views,
    make_independent_views,
)
from mvsbm.sampler import AdjacencyTensor, Labeling, SeedSpec, sample_labeling, sample_tensor

__version__ = "0.1.0"

__all__ = [
    "AdjacencyTensor",
    "DistributionOnHypercube",
    "Labeling",
    "MvsbmError",
    "MvsbmParams",
    "SeedSpec",
    "bhattacharyya",
    "check_assumptions",
    "chernoff_t",
    "geometric_tilt",
    "kl",
    "make_bernoulli_sbm",
    "make_identical_views",
    "make_independent_views",
    "ml_exact",
    "ml_heuristic",
    "recovery_metrics",
    "renyi_half",
    "sample_labeling",
    "sample_tensor",
    "threshold_stat",
]
