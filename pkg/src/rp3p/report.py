"""Campaign metrics and CSV export.

Coverage ratio counts trials where the synthesized frame passed every
feasibility gate and the solver returned an estimate.  Positioning error is
the Euclidean distance between the true and estimated receiver positions,
collected over successful trials only.

CSV files are byte-stable for a fixed configuration and seed, except for the
wall-clock timing columns; pass include_timing=False to omit their values
when byte-identical output matters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import PositioningError

TRIAL_COLUMNS = (
    "trial_id,true_x,true_y,true_z,est_x,est_y,est_z,pe_m,"
    "feasible,solve_time_s,tolerance_level,ambiguous,failure_stage"
)
SUMMARY_COLUMNS = "cr,mean_pe_m,p50_pe_m,p80_pe_m,p95_pe_m,median_time_s"


@dataclass(frozen=True)
class TrialResult:
    trial_id: int
    true_position: np.ndarray
    est_position: Optional[np.ndarray] = None
    pe: Optional[float] = None
    feasible: bool = False
    solve_time: Optional[float] = None
    tolerance_level: Optional[float] = None
    ambiguous: Optional[bool] = None
    failure_stage: str = ""


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated campaign outcome: coverage, error distribution, timing."""

    algorithm: str
    n_trials: int
    n_feasible: int
    pe_samples: np.ndarray
    solve_times: np.ndarray
    failure_counts: dict[str, int] = field(default_factory=dict)
    trials: tuple[TrialResult, ...] = ()

    @classmethod
    def from_trials(cls, algorithm: str, trials: Sequence[TrialResult]) -> "MetricsReport":
        ok = [t for t in trials if t.feasible]
        failures: dict[str, int] = {}
        for t in trials:
            if not t.feasible:
                failures[t.failure_stage or "unknown"] = (
                    failures.get(t.failure_stage or "unknown", 0) + 1
                )
        pe = np.sort(np.array([t.pe for t in ok], dtype=float))
        times = np.array(
            [t.solve_time for t in ok if t.solve_time is not None], dtype=float
        )
        return cls(
            algorithm=algorithm,
            n_trials=len(trials),
            n_feasible=len(ok),
            pe_samples=pe,
            solve_times=times,
            failure_counts=failures,
            trials=tuple(trials),
        )

    @property
    def coverage_ratio(self) -> float:
        if self.n_trials == 0:
            return 0.0
        return self.n_feasible / self.n_trials

    @property
    def mean_pe(self) -> float:
        return float(self.pe_samples.mean()) if self.pe_samples.size else float("nan")

    def pe_percentile(self, q: float) -> float:
        if not self.pe_samples.size:
            return float("nan")
        return float(np.percentile(self.pe_samples, q))

    @property
    def median_solve_time(self) -> float:
        return float(np.median(self.solve_times)) if self.solve_times.size else float("nan")

    def pe_cdf(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted error samples and their empirical cumulative probabilities."""
        n = self.pe_samples.size
        if n == 0:
            return np.array([]), np.array([])
        return self.pe_samples, np.arange(1, n + 1) / n


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and np.isnan(value):
        return ""
    return str(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def trial_rows(report: MetricsReport, include_timing: bool = True):
    for t in report.trials:
        time_cell = _fmt(t.solve_time) if include_timing else ""
        yield ",".join([
            str(t.trial_id),
            _fmt(float(t.true_position[0])),
            _fmt(float(t.true_position[1])),
            _fmt(float(t.true_position[2])),
            _fmt(None if t.est_position is None else float(t.est_position[0])),
            _fmt(None if t.est_position is None else float(t.est_position[1])),
            _fmt(None if t.est_position is None else float(t.est_position[2])),
            _fmt(t.pe),
            _fmt(t.feasible),
            time_cell,
            _fmt(t.tolerance_level),
            _fmt(t.ambiguous),
            t.failure_stage,
        ])


def export_report(
    report: MetricsReport, path, include_timing: bool = True
) -> tuple[Path, Path]:
    """Write the per-trial CSV at ``path`` and the campaign summary next to it.

    The summary lands at ``<stem>_summary.csv``.  Returns both paths.
    Re-exporting the same report produces byte-identical files.
    """
    path = Path(path)
    summary_path = path.with_name(path.stem + "_summary" + (path.suffix or ".csv"))
    try:
        lines = [TRIAL_COLUMNS]
        lines.extend(trial_rows(report, include_timing=include_timing))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        summary_lines = [SUMMARY_COLUMNS]
        if report.n_trials > 0:
            summary_lines.append(",".join([
                _fmt(report.coverage_ratio),
                _fmt(report.mean_pe),
                _fmt(report.pe_percentile(50)),
                _fmt(report.pe_percentile(80)),
                _fmt(report.pe_percentile(95)),
                _fmt(report.median_solve_time) if include_timing else "",
            ]))
        summary_path.write_text("\n".join(summary_lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise PositioningError(f"cannot write report near {path}: {exc}") from exc
    return path, summary_path
