"""Phase-diagram figures for sweep results."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# keeps PNG bytes stable across runs
_PNG_METADATA = {"Software": None}


def plot_phase_diagram(result, path, title=None):
    """Success rate and mean misclassification against tau, one marker per point.

    Left panel: success rate with 95% Wilson bars and the union-bound floor
    ``1 - union_bound``.  Right panel: mean misclassified nodes with standard
    errors.  The tau = 2 threshold and the one-node level are marked.
    """
    pts = sorted(result.points, key=lambda p: p.tau)
    tau = np.array([p.tau for p in pts])
    rate = np.array([p.success_rate for p in pts])
    lo = np.array([p.ci_lo for p in pts])
    hi = np.array([p.ci_hi for p in pts])
    floor = np.array([max(0.0, 1.0 - p.union_bound) for p in pts])
    mis = np.array([p.mean_mis for p in pts])
    se = np.array([p.se_mis for p in pts])

    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.6), constrained_layout=True)
    if len(pts):
        # interval ends can round a hair past the rate at 0 and 1
        yerr = np.clip([rate - lo, hi - rate], 0.0, None)
        ax0.errorbar(tau, rate, yerr=yerr, fmt="o-", capsize=3, label="ML success rate")
        ax0.plot(tau, floor, "s--", color="0.45", label="1 - union bound")
        ax1.errorbar(tau, mis, yerr=se, fmt="o-", capsize=3, color="C3", label="mean misclassified")
        ax0.legend(loc="lower right", fontsize="small", frameon=False)
        ax1.legend(loc="upper right", fontsize="small", frameon=False)
    for ax in (ax0, ax1):
        ax.axvline(2.0, color="k", lw=0.8, ls=":")
        ax.set_xlabel(r"$\tau = n\,I(p,q)/\log n$")
    ax0.set_ylim(-0.03, 1.03)
    ax0.set_ylabel("exact recovery rate")
    ax1.axhline(1.0, color="k", lw=0.8, ls="--")
    ax1.set_ylabel("mean misclassified nodes")
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)
    return path
