"""Command-line simulation harness.

Subcommands reproduce the standard experiments: a single campaign (``run``),
coverage over receiver FoV and LED tilt (``sweep-fov``), accuracy versus LED
tilt (``sweep-tilt``), image noise (``sweep-imagenoise``) and
photodiode-camera offset (``sweep-dpc``), and solver timing (``bench``).
Each writes CSV output and, unless ``--no-plot`` is given, a PNG figure next
to it.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, TiltPolicy, load_scenario
from .errors import PositioningError
from .experiments import accuracy_scenario, coverage_scenario
from .report import export_report
from .simulate import coverage_sweep, run_campaign

DEFAULT_FOVS_DEG = "10,20,30,40,50,60,70,80"
DEFAULT_TILTS_DEG = "0,10,30"
DEFAULT_SWEEP_TILTS_DEG = "0,10,20,30,40,60"
DEFAULT_NOISE_PX = "0,1,2,3,4"
DEFAULT_DPC_CM = "0,1,3,6,10"


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad numeric list {text!r}") from exc


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, default=None,
                        help="scenario YAML; defaults to the built-in experiment preset")
    parser.add_argument("--algorithm", choices=("rp3p", "pnp4"), default="rp3p")
    parser.add_argument("--seed", type=int, default=None, help="campaign RNG seed")
    parser.add_argument("--out", type=Path, required=True, help="output CSV path")
    parser.add_argument("--trials", type=int, default=None,
                        help="trial count (ignored for grid placement)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    parser.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    parser.add_argument("--no-timing", action="store_true",
                        help="blank the wall-clock columns for byte-stable CSVs")


def _scenario(args, default: ScenarioConfig) -> ScenarioConfig:
    cfg = load_scenario(args.config) if args.config else default
    if args.seed is not None:
        cfg = replace(cfg, rng_seed=args.seed)
    if args.trials is not None:
        cfg = replace(cfg, n_trials=args.trials)
    return cfg


def _write_rows(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _figure_path(out: Path, suffix: str = "") -> Path:
    return out.with_name(out.stem + suffix + ".png")


def _cmd_run(args) -> int:
    cfg = _scenario(args, accuracy_scenario())
    report = run_campaign(cfg, args.algorithm, n_jobs=args.jobs)
    trial_path, summary_path = export_report(
        report, args.out, include_timing=not args.no_timing
    )
    print(f"{args.algorithm}: {report.n_feasible}/{report.n_trials} feasible "
          f"(CR={report.coverage_ratio:.3f}), mean PE={report.mean_pe * 100:.2f} cm, "
          f"p80={report.pe_percentile(80) * 100:.2f} cm")
    print(f"wrote {trial_path} and {summary_path}")
    if not args.no_plot:
        from . import plots

        fig = plots.pe_cdf_figure([report], [args.algorithm])
        print(f"wrote {plots.save_figure(fig, _figure_path(args.out))}")
    return 0


def _cmd_sweep_fov(args) -> int:
    cfg = _scenario(args, coverage_scenario())
    cfg = replace(cfg, placement="grid", grid_step=args.grid_step)
    fovs = [math.radians(v) for v in args.fov_list]
    tilts = [math.radians(v) for v in args.tilt_list]
    cells = coverage_sweep(cfg, fovs, tilts, algorithm=args.algorithm, n_jobs=args.jobs)
    rows = (
        f"{math.degrees(c.fov):g},{math.degrees(c.theta):g},{c.algorithm},"
        f"{c.coverage_ratio},{c.n_trials},{c.n_feasible}"
        for c in cells
    )
    _write_rows(args.out, "fov_deg,theta_deg,algorithm,cr,n_trials,n_feasible", rows)
    print(f"wrote {args.out} ({len(cells)} cells)")
    if not args.no_plot:
        from . import plots

        fig = plots.coverage_heatmap_figure(cells)
        print(f"wrote {plots.save_figure(fig, _figure_path(args.out))}")
    return 0


def _sweep_campaigns(cfg_list, algorithm, n_jobs):
    return [run_campaign(cfg, algorithm, n_jobs=n_jobs, keep_trials=False)
            for cfg in cfg_list]


def _cmd_sweep_tilt(args) -> int:
    base = _scenario(args, accuracy_scenario())
    thetas = [math.radians(v) for v in args.tilt_list]
    cfgs = [replace(base, tilt=TiltPolicy(mode="fixed", theta=t)) for t in thetas]
    reports = _sweep_campaigns(cfgs, args.algorithm, args.jobs)
    rows = (
        f"{math.degrees(t):g},{args.algorithm},{r.coverage_ratio},{r.mean_pe},"
        f"{r.pe_percentile(50)},{r.pe_percentile(80)},{r.pe_percentile(95)}"
        for t, r in zip(thetas, reports)
    )
    _write_rows(args.out,
                "theta_deg,algorithm,cr,mean_pe_m,p50_pe_m,p80_pe_m,p95_pe_m", rows)
    print(f"wrote {args.out}")
    if not args.no_plot:
        from . import plots

        fig = plots.sweep_line_figure(
            args.tilt_list,
            {"p80": [r.pe_percentile(80) * 100 for r in reports],
             "mean": [r.mean_pe * 100 for r in reports]},
            "LED tilt (deg)", "positioning error (cm)",
        )
        print(f"wrote {plots.save_figure(fig, _figure_path(args.out))}")
    return 0


def _cmd_sweep_imagenoise(args) -> int:
    base = _scenario(args, accuracy_scenario())
    cfgs = [replace(base, pixel_noise_std=s) for s in args.noise_list]
    reports = _sweep_campaigns(cfgs, args.algorithm, args.jobs)
    rows = (
        f"{s:g},{args.algorithm},{r.mean_pe},{r.pe_percentile(80)},{r.coverage_ratio}"
        for s, r in zip(args.noise_list, reports)
    )
    _write_rows(args.out, "pixel_noise_std_px,algorithm,mean_pe_m,p80_pe_m,cr", rows)
    print(f"wrote {args.out}")
    if not args.no_plot:
        from . import plots

        fig = plots.sweep_line_figure(
            args.noise_list,
            {"mean": [r.mean_pe * 100 for r in reports],
             "p80": [r.pe_percentile(80) * 100 for r in reports]},
            "pixel noise std (px)", "positioning error (cm)",
        )
        print(f"wrote {plots.save_figure(fig, _figure_path(args.out))}")
    return 0


def _cmd_sweep_dpc(args) -> int:
    base = _scenario(args, accuracy_scenario())
    dpcs = [v / 100.0 for v in args.dpc_list]
    cfgs = [replace(base, d_pc=d) for d in dpcs]
    reports = _sweep_campaigns(cfgs, args.algorithm, args.jobs)
    rows = (
        f"{d},{args.algorithm},{r.mean_pe},{r.pe_percentile(50)},"
        f"{r.pe_percentile(80)},{r.pe_percentile(95)}"
        for d, r in zip(dpcs, reports)
    )
    _write_rows(args.out,
                "d_pc_m,algorithm,mean_pe_m,p50_pe_m,p80_pe_m,p95_pe_m", rows)
    print(f"wrote {args.out}")
    if not args.no_plot:
        from . import plots

        fig = plots.sweep_line_figure(
            args.dpc_list,
            {"p80": [r.pe_percentile(80) * 100 for r in reports]},
            "photodiode-camera offset (cm)", "positioning error (cm)",
        )
        print(f"wrote {plots.save_figure(fig, _figure_path(args.out))}")
    return 0


def _cmd_bench(args) -> int:
    base = _scenario(args, accuracy_scenario())
    reports = {alg: run_campaign(base, alg, n_jobs=args.jobs, keep_trials=False)
               for alg in ("rp3p", "pnp4")}
    rows = (
        f"{alg},{r.median_solve_time},{float(np.mean(r.solve_times)) if r.solve_times.size else ''},"
        f"{float(np.percentile(r.solve_times, 90)) if r.solve_times.size else ''},{r.solve_times.size}"
        for alg, r in reports.items()
    )
    _write_rows(args.out, "algorithm,median_time_s,mean_time_s,p90_time_s,n_solves", rows)
    for alg, r in reports.items():
        print(f"{alg}: median solve {r.median_solve_time * 1e3:.3f} ms over "
              f"{r.solve_times.size} solves")
    print(f"wrote {args.out}")
    if not args.no_plot:
        from . import plots

        fig = plots.timing_cdf_figure({alg: r.solve_times for alg, r in reports.items()})
        print(f"wrote {plots.save_figure(fig, _figure_path(args.out))}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rp3p-sim",
        description="Indoor visible-light positioning simulation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single Monte Carlo campaign")
    _add_common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep-fov", help="coverage over receiver FoV and LED tilt")
    _add_common(p)
    p.add_argument("--fov-list", type=_float_list, default=_float_list(DEFAULT_FOVS_DEG),
                   help="receiver FoV values in degrees")
    p.add_argument("--tilt-list", type=_float_list, default=_float_list(DEFAULT_TILTS_DEG),
                   help="LED tilt values in degrees")
    p.add_argument("--grid-step", type=float, default=0.25,
                   help="receiver grid spacing in meters")
    p.set_defaults(func=_cmd_sweep_fov)

    p = sub.add_parser("sweep-tilt", help="accuracy versus fixed LED tilt")
    _add_common(p)
    p.add_argument("--tilt-list", type=_float_list,
                   default=_float_list(DEFAULT_SWEEP_TILTS_DEG))
    p.set_defaults(func=_cmd_sweep_tilt)

    p = sub.add_parser("sweep-imagenoise", help="accuracy versus pixel noise")
    _add_common(p)
    p.add_argument("--noise-list", type=_float_list, default=_float_list(DEFAULT_NOISE_PX),
                   help="pixel noise standard deviations in pixels")
    p.set_defaults(func=_cmd_sweep_imagenoise)

    p = sub.add_parser("sweep-dpc", help="accuracy versus photodiode-camera offset")
    _add_common(p)
    p.add_argument("--dpc-list", type=_float_list, default=_float_list(DEFAULT_DPC_CM),
                   help="offsets in centimeters")
    p.set_defaults(func=_cmd_sweep_dpc)

    p = sub.add_parser("bench", help="solver timing for both algorithms")
    _add_common(p)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PositioningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
