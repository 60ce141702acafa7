"""Monte Carlo sweeps across the threshold statistic tau = n I(p,q) / log n."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from mvsbm.bounds import ml_union_bound
from mvsbm.divergence import renyi_half, threshold_statistic
from mvsbm.errors import BadConfig, BadShape, MvsbmError, TrialError, Unreachable
from mvsbm.estimators import MAX_EXACT_N, ml_exact, ml_heuristic, recovery_metrics
from mvsbm.model import (
    MvsbmParams,
    make_bernoulli_sbm,
    make_independent_views,
    params_from_json,
)
from mvsbm.sampler import SeedSpec, sample_labeling, sample_tensor

METHODS = ("exact", "heuristic")
SHAPES = ("bernoulli", "independent_equal")
CSV_HEADER = ["point", "tau", "trials", "success_rate", "ci_lo", "ci_hi", "mean_mis", "se_mis", "union_bound"]
WILSON_Z = 1.959963984540054
TAU_TOL = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    model_points: tuple
    trials_per_point: int
    method: str = "exact"
    restarts: int = 1
    master_seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "model_points", tuple(self.model_points))
        if self.trials_per_point < 1:
            raise BadConfig("trials_per_point must be >= 1")
        if self.method not in METHODS:
            raise BadConfig(f"method must be one of {METHODS}, got {self.method!r}")
        if self.restarts < 1:
            raise BadConfig("restarts must be >= 1")
        if not (0 <= self.master_seed < 2**64):
            raise BadConfig("master_seed must be an unsigned 64-bit integer")
        if self.method == "exact":
            big = [i for i, p in enumerate(self.model_points) if p.n > MAX_EXACT_N]
            if big:
                raise BadConfig(f"exact method needs n <= {MAX_EXACT_N}; points {big} are larger")


@dataclass(frozen=True)
class TrialRecord:
    point_index: int
    trial_index: int
    mis_count: int
    exact: bool
    wall_time: float


@dataclass(frozen=True)
class PointSummary:
    point: int
    n: int
    num_views: int
    tau: float
    trials: int
    successes: int
    success_rate: float
    ci_lo: float
    ci_hi: float
    mean_mis: float
    se_mis: float
    union_bound: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple
    records: tuple


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z):
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def run_trial(params: MvsbmParams, method: str, restarts: int, seed: SeedSpec):
    """One draw of (labeling, tensor) followed by recovery; returns (mis, exact, seconds)."""
    t0 = time.perf_counter()
    truth = sample_labeling(params.n, seed)
    tensor = sample_tensor(params, truth, seed)
    if method == "exact":
        est = ml_exact(params, tensor)
    else:
        est = ml_heuristic(params, tensor, restarts, seed)
    m = recovery_metrics(est.labeling, truth)
    return m.mis_count, m.exact, time.perf_counter() - t0


def summarize_point(index: int, params: MvsbmParams, mis: Sequence[int]) -> PointSummary:
    trials = len(mis)
    arr = np.asarray(mis, dtype=np.float64)
    successes = int(np.count_nonzero(arr == 0))
    lo, hi = wilson_interval(successes, trials)
    mean = math.fsum(arr.tolist()) / trials
    se = float(arr.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    renyi = renyi_half(params.within, params.across)
    return PointSummary(
        point=index,
        n=params.n,
        num_views=params.num_views,
        tau=threshold_statistic(params.n, renyi),
        trials=trials,
        successes=successes,
        success_rate=successes / trials,
        ci_lo=lo,
        ci_hi=hi,
        mean_mis=mean,
        se_mis=se,
        union_bound=ml_union_bound(params).union_bound,
    )


def run_sweep(config: ExperimentConfig, threads: int = 1) -> SweepResult:
    """Run every (point, trial) and aggregate.

    Trial ``t`` of point ``i`` uses ``SeedSpec(master_seed, i * trials_per_point + t)``,
    so appending points leaves earlier points untouched.  Aggregation is keyed
    by index, making results independent of ``threads``.
    """
    T = config.trials_per_point
    tasks = [(i, t) for i in range(len(config.model_points)) for t in range(T)]

    def work(task):
        i, t = task
        params = config.model_points[i]
        try:
            return task, run_trial(params, config.method, config.restarts, SeedSpec(config.master_seed, i * T + t))
        except MvsbmError as exc:
            raise TrialError(i, t, exc) from exc

    if threads <= 1:
        outcomes = [work(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, tasks))
    outcomes.sort(key=lambda o: o[0])
    records = tuple(
        TrialRecord(i, t, mis, exact, wall) for (i, t), (mis, exact, wall) in outcomes
    )
    points = []
    for i, params in enumerate(config.model_points):
        mis = [r.mis_count for r in records if r.point_index == i]
        points.append(summarize_point(i, params, mis))
    return SweepResult(tuple(points), records)


def _point_for(n, D, shape, p_edge, q_edge):
    if shape == "bernoulli":
        return make_bernoulli_sbm(p_edge, q_edge, n)
    return make_independent_views([p_edge] * D, [q_edge] * D, n)


def synthesize_point(n: int, D: int, target_tau: float, shape: str, q_edge: float) -> MvsbmParams:
    """Find the within-edge probability giving ``n I / log n == target_tau``.

    ``q_edge`` is held fixed in every view; for ``independent_equal`` all
    ``D`` views share the same within-edge probability.
    """
    if shape not in SHAPES:
        raise BadShape(f"shape must be one of {SHAPES}, got {shape!r}")
    if shape == "bernoulli" and D != 1:
        raise BadShape("bernoulli shape requires D = 1")
    if not target_tau > 0:
        raise BadConfig("target_tau must be strictly positive")
    if not (0.0 < q_edge < 1.0):
        raise BadConfig("q_edge must lie in (0, 1)")

    def tau_of(p_edge):
        params = _point_for(n, D, shape, p_edge, q_edge)
        return threshold_statistic(n, renyi_half(params.within, params.across))

    top = tau_of(1.0)
    if top < target_tau - TAU_TOL:
        raise Unreachable(f"max tau for q_edge={q_edge} is {top:.6g} < {target_tau}")
    if abs(top - target_tau) <= TAU_TOL:
        p_edge = 1.0
    else:
        p_edge = brentq(lambda p: tau_of(p) - target_tau, q_edge, 1.0, xtol=1e-15, rtol=1e-15, maxiter=500)
    params = _point_for(n, D, shape, p_edge, q_edge)
    got = tau_of(p_edge)
    if abs(got - target_tau) > TAU_TOL:
        raise Unreachable(f"root finder reached tau={got} for target {target_tau}")
    return params


def point_from_json(spec: Mapping[str, Any]) -> MvsbmParams:
    """Model spec, or ``{"kind": "synthesized", "n", "D", "target_tau", "shape", "q_edge"}``."""
    if isinstance(spec, Mapping) and spec.get("kind") == "synthesized":
        missing = [k for k in ("n", "target_tau", "q_edge") if k not in spec]
        if missing:
            raise BadConfig(f"synthesized point missing {missing}")
        return synthesize_point(
            spec["n"], spec.get("D", 1), spec["target_tau"], spec.get("shape", "bernoulli"), spec["q_edge"]
        )
    return params_from_json(spec)


def config_from_json(spec: Mapping[str, Any]) -> ExperimentConfig:
    """Parse a sweep config.

    Schema::

        {"version": 1, "points": [<model spec or synthesized spec>, ...],
         "trials_per_point": int, "method": "exact" | "heuristic",
         "restarts": int, "master_seed": int, "output_path": str}
    """
    if not isinstance(spec, Mapping):
        raise BadConfig("config must be a JSON object")
    if spec.get("version", 1) != 1:
        raise BadConfig(f"unsupported config version {spec.get('version')!r}")
    if "points" not in spec or "trials_per_point" not in spec:
        raise BadConfig("config needs 'points' and 'trials_per_point'")
    points = tuple(point_from_json(p) for p in spec["points"])
    return ExperimentConfig(
        model_points=points,
        trials_per_point=int(spec["trials_per_point"]),
        method=spec.get("method", "exact"),
        restarts=int(spec.get("restarts", 1)),
        master_seed=int(spec.get("master_seed", 0)),
        output_path=spec.get("output_path"),
    )


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in result.points:
        w.writerow(
            [
                p.point,
                _fmt(p.tau),
                p.trials,
                _fmt(p.success_rate),
                _fmt(p.ci_lo),
                _fmt(p.ci_hi),
                _fmt(p.mean_mis),
                _fmt(p.se_mis),
                _fmt(p.union_bound),
            ]
        )
    return buf.getvalue()


def emit_csv(result: SweepResult, path) -> None:
    Path(path).write_text(csv_text(result), encoding="ascii", newline="")
