"""Monte Carlo trial synthesis and campaign runner.

Each trial draws a receiver placement and LED tilts, checks the feasibility
gates (field of view, emitting direction, SNR), synthesizes a noisy
measurement frame, and runs the selected algorithm.  Trials are fully
deterministic: trial i derives its RNG stream from (seed, i), so serial and
parallel executions agree exactly.

Per-trial RNG draw order (fixed; changing it changes every campaign):
  1. receiver position (uniform placement only: 3 draws),
  2. per pool LED: tilt azimuth, then tilt angle in random-tilt mode,
  3. receiver boresight azimuth and tilt (random_tilt orientation only),
  4. per selected LED: pixel noise then power noise,
  5. the estimator's ambiguity tie-break.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .baseline import estimate_position_pnp
from .channel import LedSource, NoiseParams, PdParams, received_power, sample_measured_power, snr_db
from .config import ScenarioConfig, TiltPolicy
from .errors import EstimationError, InvalidParameterError, PositioningError
from .estimator import KnownLed, LedObservation, MeasurementFrame, estimate_position
from .geometry import RigidPose, look_at_rotation, project_world_to_pixel
from .report import MetricsReport, TrialResult

ALGORITHMS = ("rp3p", "pnp4")
LEDS_REQUIRED = {"rp3p": 3, "pnp4": 4}

# Plan-view triangle area below which an LED triple counts as collinear.
COLLINEAR_AREA_TOL = 1e-9

_ANGLE_EPS = 1e-12


@dataclass(frozen=True)
class SynthesizedTrial:
    """Ground truth plus either a measurement frame or the failed gate."""

    true_position: np.ndarray
    frame: Optional[MeasurementFrame]
    reason: str = ""
    subset: tuple[int, ...] = ()
    pose: Optional[RigidPose] = None
    pd_position: Optional[np.ndarray] = None
    led_sources: tuple[LedSource, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.frame is not None


def min_enclosing_cone(units: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest circular cone (axis, half-angle) containing unit directions.

    Exact for up to a handful of directions: the optimal cap on the sphere is
    supported by at most three points, so all bisector-of-pair and
    circumcenter-of-triple caps are enumerated.
    """
    units = np.asarray(units, dtype=float)
    n = len(units)
    if n == 1:
        return units[0].copy(), 0.0

    best_axis = None
    best_half = math.inf

    def consider(axis: np.ndarray):
        nonlocal best_axis, best_half
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            return
        axis = axis / norm
        half = math.acos(min(1.0, max(-1.0, float(np.min(units @ axis)))))
        if half < best_half:
            best_half = half
            best_axis = axis

    for i, j in itertools.combinations(range(n), 2):
        consider(units[i] + units[j])
    for i, j, k in itertools.combinations(range(n), 3):
        consider(np.cross(units[i] - units[j], units[i] - units[k]))
        consider(-np.cross(units[i] - units[j], units[i] - units[k]))
    if best_axis is None:
        consider(units.mean(axis=0))
    if best_axis is None:
        # Directions cancel entirely; any axis needs a half-angle of pi.
        return np.array([0.0, 0.0, 1.0]), math.pi
    return best_axis, best_half


def grid_points(cfg: ScenarioConfig) -> np.ndarray:
    """Regular sampling of the room volume at the configured grid step.

    Cell-centered (midpoint) sampling: each axis is divided into cells of the
    grid step and the sample sits at the cell center, so the coverage ratio
    is a midpoint Riemann sum over the volume.  Sampling the boundary planes
    instead would put weight on the LED plane z = height, where positioning
    is degenerate and which has zero measure in the true volume integral.
    Points run x-major, then y, then z.
    """
    axes = [
        (np.arange(max(1, round(dim / cfg.grid_step))) + 0.5) * cfg.grid_step
        for dim in cfg.room
    ]
    xs, ys, zs = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([xs.ravel(), ys.ravel(), zs.ravel()])


def n_campaign_trials(cfg: ScenarioConfig) -> int:
    if cfg.placement == "grid":
        return len(grid_points(cfg))
    return cfg.n_trials


def _plan_area(xy: np.ndarray, i: int, j: int, k: int) -> float:
    return 0.5 * abs(
        (xy[j, 0] - xy[i, 0]) * (xy[k, 1] - xy[i, 1])
        - (xy[k, 0] - xy[i, 0]) * (xy[j, 1] - xy[i, 1])
    )


def _candidate_triples(cfg: ScenarioConfig) -> list[tuple[tuple[int, int, int], float]]:
    """Usable positioning triples as (indices, plan area).

    Plan-collinear triples cannot feed the trilateration step and are
    dropped.  Under max_area selection the triples are ordered best-first.
    """
    xy = cfg.led_array()[:, :2]
    n = len(xy)
    out: list[tuple[tuple[int, int, int], float]] = []
    for combo in itertools.combinations(range(n), 3):
        area = _plan_area(xy, *combo)
        if area > COLLINEAR_AREA_TOL:
            out.append((combo, area))
    if cfg.led_selection == "first_k":
        out = [entry for entry in out if entry[0] == (0, 1, 2)]
    else:
        out.sort(key=lambda entry: -entry[1])
    return out


def _tilted_normal(theta: float, azimuth: float) -> np.ndarray:
    """Straight-down normal rotated by theta about a horizontal axis."""
    return np.array([
        -math.sin(theta) * math.sin(azimuth),
        math.sin(theta) * math.cos(azimuth),
        -math.cos(theta),
    ])


def _tilted_up(theta: float, azimuth: float) -> np.ndarray:
    """Straight-up boresight rotated by theta about a horizontal axis."""
    return np.array([
        math.sin(theta) * math.sin(azimuth),
        -math.sin(theta) * math.cos(azimuth),
        math.cos(theta),
    ])


def _snr_gate_ok(cfg: ScenarioConfig, pd: PdParams, p_true: float) -> bool:
    if p_true <= 0.0:
        return False
    if cfg.power_noise_mode == "fixed_snr":
        return cfg.power_snr_db >= cfg.snr_gate_db
    if cfg.power_noise_std == 0.0:
        return True  # noiseless: infinite SNR
    noise = NoiseParams(power_noise_std=cfg.power_noise_std)
    return snr_db(p_true, pd, noise) >= cfg.snr_gate_db


def _power_noise(cfg: ScenarioConfig, p_true: float) -> NoiseParams:
    if cfg.power_noise_mode == "fixed_snr":
        return NoiseParams.for_snr(
            p_true, cfg.power_snr_db, n_power_averages=cfg.n_power_averages
        )
    return NoiseParams(
        power_noise_std=cfg.power_noise_std, n_power_averages=cfg.n_power_averages
    )


@dataclass(frozen=True)
class TrialWorld:
    """Drawn state of one trial: receiver placement, LED tilts, boresight policy."""

    receiver: np.ndarray
    sources: tuple[LedSource, ...]
    units: Optional[np.ndarray]
    fixed_boresight: Optional[np.ndarray]
    degenerate: bool = False


def draw_trial_world(
    cfg: ScenarioConfig, rng: np.random.Generator, trial_index: int = 0
) -> TrialWorld:
    """Draw the trial's physical state (RNG steps 1-3 of the module contract)."""
    positions = cfg.led_array()

    if cfg.placement == "grid":
        pts = grid_points(cfg)
        receiver = pts[trial_index % len(pts)]
    else:
        receiver = np.array([rng.uniform(0.0, dim) for dim in cfg.room])

    # Tilts are drawn for the whole pool so the stream does not depend on
    # which subset ends up selected.
    normals = []
    for _ in range(len(positions)):
        azimuth = rng.uniform(0.0, 2.0 * math.pi)
        theta = cfg.tilt.theta
        if cfg.tilt.mode == "random":
            theta = rng.uniform(0.0, cfg.tilt.theta)
        normals.append(_tilted_normal(theta, azimuth))
    sources = tuple(
        LedSource(
            position=positions[i],
            normal=normals[i],
            semi_angle=cfg.led_semi_angle,
            tx_power=cfg.led_tx_power,
            led_id=i,
        )
        for i in range(len(positions))
    )

    fixed_boresight = None
    if cfg.orientation == "fixed_up":
        fixed_boresight = np.array([0.0, 0.0, 1.0])
    elif cfg.orientation == "random_tilt":
        azimuth = rng.uniform(0.0, 2.0 * math.pi)
        tilt = rng.uniform(0.0, cfg.orientation_max_tilt)
        fixed_boresight = _tilted_up(tilt, azimuth)

    offsets = positions - receiver
    ranges = np.linalg.norm(offsets, axis=1)
    if np.any(ranges < 1e-9):
        return TrialWorld(receiver, sources, None, fixed_boresight, degenerate=True)
    units = offsets / ranges[:, None]
    return TrialWorld(receiver, sources, units, fixed_boresight)


def _emitting_ok(cfg: ScenarioConfig, world: TrialWorld, i: int,
                 pd_position: np.ndarray) -> bool:
    position = world.sources[i].position
    to_pd = pd_position - position
    dist = np.linalg.norm(to_pd)
    if dist < 1e-9:
        return False
    cos_phi = float(world.sources[i].normal @ (to_pd / dist))
    limit = math.cos(cfg.led_semi_angle) if cfg.emitting_gate == "semi_angle" else 0.0
    return cos_phi >= limit - _ANGLE_EPS


def _gate_triple(cfg: ScenarioConfig, world: TrialWorld, sel: list[int]):
    """Orient the rig for a triple and run its gates.

    Returns (boresight, rotation, pd_position, powers) on success or the
    failed gate name.
    """
    if cfg.orientation == "aim_cone":
        boresight, cone_half = min_enclosing_cone(world.units[sel])
        if cone_half > cfg.pd.fov + _ANGLE_EPS:
            return "fov"
    else:
        boresight = world.fixed_boresight
        cos_inc = world.units[sel] @ boresight
        max_angle = math.acos(min(1.0, max(-1.0, float(np.min(cos_inc)))))
        if max_angle > cfg.pd.fov + _ANGLE_EPS:
            return "fov"

    rotation = look_at_rotation(boresight)
    pd_position = world.receiver + cfg.d_pc * rotation["xyz".index(cfg.d_pc_axis)]

    if not all(_emitting_ok(cfg, world, i, pd_position) for i in sel):
        return "emitting"
    powers = [
        received_power(world.sources[i], pd_position, boresight, cfg.pd) for i in sel
    ]
    if not all(_snr_gate_ok(cfg, cfg.pd, p) for p in powers):
        return "snr"
    return boresight, rotation, pd_position, powers


def _gate_fourth(cfg: ScenarioConfig, world: TrialWorld, sel: tuple[int, ...],
                 boresight: np.ndarray, pd_position: np.ndarray):
    """Pick the disambiguation beacon for the baseline at the rig's boresight."""
    candidates = [i for i in range(len(world.sources)) if i not in sel]
    if cfg.led_selection == "first_k":
        candidates = candidates[:1]
    best = None
    reason = "fov"
    for i in candidates:
        angle = math.acos(min(1.0, max(-1.0, float(world.units[i] @ boresight))))
        if angle > cfg.pd.fov + _ANGLE_EPS:
            continue
        if not _emitting_ok(cfg, world, i, pd_position):
            reason = _deeper(reason, "emitting")
            continue
        p4 = received_power(world.sources[i], pd_position, boresight, cfg.pd)
        if not _snr_gate_ok(cfg, cfg.pd, p4):
            reason = _deeper(reason, "snr")
            continue
        if best is None or angle < best[0]:
            best = (angle, i, p4)
    if best is None:
        return reason
    return best[1], best[2]


def synthesize_for_triple(
    cfg: ScenarioConfig,
    world: TrialWorld,
    triple: tuple[int, ...],
    rng: np.random.Generator,
    with_fourth: bool = False,
) -> SynthesizedTrial:
    """Gate one positioning triple and synthesize its noisy frame."""
    gated = _gate_triple(cfg, world, list(triple))
    if isinstance(gated, str):
        return SynthesizedTrial(
            true_position=world.receiver, frame=None, reason=gated,
            led_sources=world.sources,
        )
    boresight, rotation, pd_position, powers = gated
    sel = tuple(triple)

    if with_fourth:
        fourth = _gate_fourth(cfg, world, sel, boresight, pd_position)
        if isinstance(fourth, str):
            return SynthesizedTrial(
                true_position=world.receiver, frame=None, reason=fourth,
                led_sources=world.sources,
            )
        sel = sel + (fourth[0],)
        powers = powers + [fourth[1]]

    pose = RigidPose(rotation=rotation, position=world.receiver)
    observations = []
    known = []
    try:
        for i, p_true in zip(sel, powers):
            pixel = project_world_to_pixel(
                world.sources[i].position, pose, cfg.intrinsics
            )
            if cfg.pixel_noise_std > 0.0:
                pixel = pixel + rng.normal(
                    0.0, cfg.pixel_noise_std, size=(cfg.n_image_averages, 2)
                ).mean(axis=0)
            noise = _power_noise(cfg, p_true)
            measured = sample_measured_power(p_true, noise, rng)
            observations.append(LedObservation(led_id=i, pixel=pixel, power=measured))
            known.append(
                KnownLed(
                    led_id=i,
                    position=world.sources[i].position,
                    semi_angle=cfg.led_semi_angle,
                    tx_power=cfg.led_tx_power,
                )
            )
        frame = MeasurementFrame(observations=tuple(observations), leds=tuple(known))
    except PositioningError:
        return SynthesizedTrial(
            true_position=world.receiver, frame=None, reason="frame",
            led_sources=world.sources,
        )

    return SynthesizedTrial(
        true_position=world.receiver,
        frame=frame,
        subset=sel,
        pose=pose,
        pd_position=pd_position,
        led_sources=world.sources,
    )


def synthesize_trial(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    algorithm: str = "rp3p",
    trial_index: int = 0,
) -> SynthesizedTrial:
    """Draw one trial and synthesize its measurement frame.

    Infeasibility (a gate failure) is data, not an error: the result carries
    the failed gate name instead of a frame.  The rig orients itself for the
    best available three-LED subset; the four-LED baseline is evaluated at
    that same boresight with a disambiguation beacon added.
    """
    if algorithm not in ALGORITHMS:
        raise InvalidParameterError(f"algorithm must be one of {ALGORITHMS}")
    world = draw_trial_world(cfg, rng, trial_index)

    def fail(reason: str) -> SynthesizedTrial:
        return SynthesizedTrial(
            true_position=world.receiver, frame=None, reason=reason,
            led_sources=world.sources,
        )

    if world.degenerate:
        return fail("degenerate")
    triples = _candidate_triples(cfg)
    if not triples:
        return fail("degenerate")

    deepest = "fov"
    for triple, _area in triples:
        result = synthesize_for_triple(
            cfg, world, triple, rng, with_fourth=(algorithm == "pnp4")
        )
        if result.feasible:
            return result
        if result.reason in _GATE_DEPTH:
            deepest = _deeper(deepest, result.reason)
        else:
            return result  # frame-synthesis failure, not a gate
    return fail(deepest)


_GATE_DEPTH = {"fov": 0, "emitting": 1, "snr": 2}


def _deeper(current: str, new: str) -> str:
    return new if _GATE_DEPTH[new] > _GATE_DEPTH[current] else current


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one trial."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_index,)))


def run_trial(cfg: ScenarioConfig, algorithm: str, trial_index: int) -> TrialResult:
    """One full trial: synthesis, estimation, and the acquisition retry.

    When the strength check cannot single out one range candidate (ambiguous
    result) or the solve fails outright, the receiver re-aims at the next
    usable LED triple and measures again, keeping the first clean fix.  The
    first attempt's outcome is kept if every triple stays ambiguous.
    """
    if algorithm not in ALGORITHMS:
        raise InvalidParameterError(f"algorithm must be one of {ALGORITHMS}")
    rng = trial_rng(cfg.rng_seed, trial_index)
    world = draw_trial_world(cfg, rng, trial_index)
    if world.degenerate:
        return TrialResult(
            trial_id=trial_index, true_position=world.receiver,
            feasible=False, failure_stage="degenerate",
        )
    triples = _candidate_triples(cfg)
    if not triples:
        return TrialResult(
            trial_id=trial_index, true_position=world.receiver,
            feasible=False, failure_stage="degenerate",
        )

    accepted = None
    fallback_estimate = None
    first_failure = None
    deepest = "fov"
    elapsed = 0.0  # solver time only; synthesis is simulation overhead
    for triple, _area in triples:
        synth = synthesize_for_triple(
            cfg, world, triple, rng, with_fourth=(algorithm == "pnp4")
        )
        if not synth.feasible:
            if synth.reason in _GATE_DEPTH:
                deepest = _deeper(deepest, synth.reason)
            elif first_failure is None:
                first_failure = synth.reason
            continue
        start = time.perf_counter()
        try:
            if algorithm == "rp3p":
                est = estimate_position(synth.frame, cfg.intrinsics, cfg.pd, rng)
            else:
                est = estimate_position_pnp(synth.frame, cfg.intrinsics)
        except EstimationError as exc:
            elapsed += time.perf_counter() - start
            if first_failure is None:
                first_failure = exc.stage
            continue
        elapsed += time.perf_counter() - start
        if algorithm == "pnp4" or not est.ambiguous:
            accepted = est
            break
        if fallback_estimate is None:
            fallback_estimate = est

    est = accepted if accepted is not None else fallback_estimate
    if est is None:
        return TrialResult(
            trial_id=trial_index, true_position=world.receiver,
            feasible=False,
            failure_stage=first_failure if first_failure is not None else deepest,
        )

    pe = float(np.linalg.norm(world.receiver - est.position))
    return TrialResult(
        trial_id=trial_index,
        true_position=world.receiver,
        est_position=est.position,
        pe=pe,
        feasible=True,
        solve_time=elapsed,
        tolerance_level=est.tolerance_level,
        ambiguous=est.ambiguous,
    )


def _run_range(args) -> list[TrialResult]:
    cfg, algorithm, lo, hi = args
    return [run_trial(cfg, algorithm, i) for i in range(lo, hi)]


def run_campaign(
    cfg: ScenarioConfig,
    algorithm: str = "rp3p",
    n_jobs: int = 1,
    keep_trials: bool = True,
) -> MetricsReport:
    """Execute every trial of a campaign and aggregate the metrics.

    Results are a pure function of (cfg, algorithm); n_jobs only changes the
    wall-clock time.
    """
    if algorithm not in ALGORITHMS:
        raise InvalidParameterError(f"algorithm must be one of {ALGORITHMS}")
    n = n_campaign_trials(cfg)
    if n_jobs <= 1:
        trials = [run_trial(cfg, algorithm, i) for i in range(n)]
    else:
        chunk = max(1, math.ceil(n / (n_jobs * 8)))
        spans = [(cfg, algorithm, lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        trials = []
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for part in pool.map(_run_range, spans):
                trials.extend(part)
    report = MetricsReport.from_trials(algorithm, trials)
    if not keep_trials:
        report = replace(report, trials=())
    return report


@dataclass(frozen=True)
class SweepCell:
    fov: float
    theta: float
    algorithm: str
    coverage_ratio: float
    n_trials: int
    n_feasible: int
    mean_pe: float
    p80_pe: float


def coverage_sweep(
    cfg: ScenarioConfig,
    fov_list: Sequence[float],
    tilt_list: Sequence[float],
    algorithm: str = "rp3p",
    n_jobs: int = 1,
) -> list[SweepCell]:
    """Coverage ratio over a (receiver FoV, LED tilt) grid of campaigns.

    Angles are radians.  Placement is forced to the regular grid.
    """
    cells = []
    for theta in tilt_list:
        for fov in fov_list:
            cell_cfg = replace(
                cfg,
                placement="grid",
                pd=replace(cfg.pd, fov=fov),
                tilt=TiltPolicy(mode=cfg.tilt.mode, theta=theta),
            )
            report = run_campaign(cell_cfg, algorithm, n_jobs=n_jobs, keep_trials=False)
            cells.append(
                SweepCell(
                    fov=fov,
                    theta=theta,
                    algorithm=algorithm,
                    coverage_ratio=report.coverage_ratio,
                    n_trials=report.n_trials,
                    n_feasible=report.n_feasible,
                    mean_pe=report.mean_pe,
                    p80_pe=report.pe_percentile(80),
                )
            )
    return cells
