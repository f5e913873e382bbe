"""Figure rendering for CLI reports.

Each command saves PNGs next to its CSV/JSON artifacts.  Figures are a
viewing convenience; the delimited files remain the canonical outputs and
the only ones with byte-level reproducibility guarantees.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def save_exit_time_report(taus, terminal_beliefs, upper: float, t_grid, residual, path) -> None:
    """Histogram of exit times plus the empirical residual-time curve."""
    taus = np.asarray(taus)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.hist(taus, bins=60, color="steelblue", alpha=0.85)
    ax1.set_xlabel("calendar exit time")
    ax1.set_ylabel("paths")
    up_frac = float(np.mean(np.asarray(terminal_beliefs) == upper))
    ax1.set_title(f"exit times (upper-hit fraction {up_frac:.3f})")
    ax2.plot(t_grid, residual, color="darkred")
    ax2.set_xlabel("t")
    ax2.set_ylabel("E[(tau - t)+]")
    ax2.set_title("residual expected time")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_objective_trace(trace, lower_star: float, objective_star: float, path) -> None:
    """Coarse objective scan with the refined maximizer marked."""
    lowers = [lo for lo, _ in trace]
    vals = [v for _, v in trace]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(lowers, vals, "o-", ms=3, color="steelblue", label="coarse scan")
    ax.plot([lower_star], [objective_star], "*", ms=14, color="darkred", label="refined optimum")
    ax.set_xlabel("give-up belief (lower atom)")
    ax.set_ylabel("objective")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_sweep(xs, results, xlabel: str, path, log_x: bool = False) -> None:
    """Optimal success probability and give-up belief along a sweep."""
    p_stars = [r.p_star for r in results]
    lowers = [r.lower_star for r in results]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for ax, ys, label in ((ax1, p_stars, "optimal success probability"),
                          (ax2, lowers, "optimal give-up belief")):
        ax.plot(xs, ys, "o-", color="steelblue")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(label)
        if log_x:
            ax.set_xscale("symlog", linthresh=min((x for x in xs if x > 0), default=1.0))
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
