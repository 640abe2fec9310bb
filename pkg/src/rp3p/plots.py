"""Matplotlib figure rendering for campaign reports and sweeps.

Figures are written to files next to the CSV output; they are a convenience
view, the CSVs remain the canonical result.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import MetricsReport
from .simulate import SweepCell


def save_figure(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def pe_cdf_figure(reports: Sequence[MetricsReport], labels: Sequence[str] | None = None):
    """Empirical CDF of positioning error, one curve per report."""
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = labels or [r.algorithm for r in reports]
    for report, label in zip(reports, labels):
        x, y = report.pe_cdf()
        if x.size == 0:
            continue
        ax.plot(x * 100.0, y, label=label)
    ax.set_xlabel("positioning error (cm)")
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.4)
    ax.legend()
    return fig


def coverage_heatmap_figure(cells: Sequence[SweepCell]):
    """Coverage ratio over the (FoV, tilt) sweep as one curve per tilt."""
    fig, ax = plt.subplots(figsize=(6, 4))
    thetas = sorted({c.theta for c in cells})
    for theta in thetas:
        row = sorted((c for c in cells if c.theta == theta), key=lambda c: c.fov)
        fovs = [np.degrees(c.fov) for c in row]
        crs = [c.coverage_ratio for c in row]
        ax.plot(fovs, crs, marker="o", label=f"tilt {np.degrees(theta):.0f}\N{DEGREE SIGN}")
    ax.set_xlabel("receiver FoV (deg)")
    ax.set_ylabel("coverage ratio")
    ax.set_ylim(0, 1.05)
    ax.grid(True, alpha=0.4)
    ax.legend()
    return fig


def sweep_line_figure(
    x: Sequence[float],
    series: dict[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
):
    """Generic curve plot keyed by series label."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, ys in series.items():
        ax.plot(x, ys, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.4)
    ax.legend()
    return fig


def timing_cdf_figure(times_by_label: dict[str, np.ndarray]):
    """Empirical CDF of per-solve wall-clock time, in milliseconds."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, times in times_by_label.items():
        if len(times) == 0:
            continue
        t = np.sort(np.asarray(times)) * 1e3
        ax.plot(t, np.arange(1, len(t) + 1) / len(t), label=label)
    ax.set_xlabel("solve time (ms)")
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.4)
    ax.legend()
    return fig
