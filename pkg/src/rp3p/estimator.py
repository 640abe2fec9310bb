"""Joint camera/RSS position estimation from three LEDs.

Pipeline: back-project the three pixel observations to bearings, measure the
incidence and inter-bearing angles, solve the law-of-cosines system for up to
four range candidates, invert the Lambertian channel per candidate to get the
implied irradiance cosines, keep the candidate consistent with the LED
semi-angles (relaxing the band in 5% steps when noise pushes every candidate
out), then fix (x, y) by linear least squares over the equal-height LEDs and
recover z from the first range.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import p3p
from .channel import PdParams, lambertian_order, rss_constant
from .errors import (
    DisambiguationError,
    EstimationError,
    InconsistentDistanceError,
    InvalidIncidenceError,
    InvalidParameterError,
    PositioningError,
    SingularGeometryError,
)
from .geometry import (
    CameraIntrinsics,
    back_project_bearing,
    incidence_angle,
    inter_bearing_angle,
)

# Relaxation ladder for the irradiance-cosine band: 0%, 5%, ..., 100%.
TOLERANCE_STEP = 0.05
TOLERANCE_LEVELS = tuple(i * TOLERANCE_STEP for i in range(21))

# LEDs must share a common height for the planar trilateration step.
COMMON_HEIGHT_TOL = 1e-9

# |det A| below this times the row-norm product means collinear LEDs.
SINGULAR_REL_TOL = 1e-9

# Negative radicand tolerance when recovering the height.
HEIGHT_RADICAND_EPS = 1e-9


@dataclass(frozen=True)
class KnownLed:
    """Per-LED knowledge available to the receiver: identity, world position,
    half-power semi-angle and transmit power (broadcast over the light link)."""

    led_id: int
    position: np.ndarray
    semi_angle: float
    tx_power: float

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))


@dataclass(frozen=True)
class LedObservation:
    """One measured LED: pixel coordinate of its image and received power."""

    led_id: int
    pixel: np.ndarray
    power: float

    def __post_init__(self):
        object.__setattr__(self, "pixel", np.asarray(self.pixel, dtype=float))


@dataclass(frozen=True)
class MeasurementFrame:
    """Everything the solver sees: 3 observations (4 for the baseline) plus
    the matching LED knowledge."""

    observations: tuple[LedObservation, ...]
    leds: tuple[KnownLed, ...]

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "leds", tuple(self.leds))
        n = len(self.observations)
        if n not in (3, 4):
            raise InvalidParameterError(f"frame needs 3 or 4 observations, got {n}")
        ids = [o.led_id for o in self.observations]
        if len(set(ids)) != n:
            raise InvalidParameterError("observation LED ids must be distinct")
        known = {led.led_id for led in self.leds}
        missing = [i for i in ids if i not in known]
        if missing:
            raise InvalidParameterError(f"no known LED for ids {missing}")
        if any(o.power <= 0 for o in self.observations):
            raise InvalidParameterError("measured powers must be positive")

    def led_for(self, led_id: int) -> KnownLed:
        for led in self.leds:
            if led.led_id == led_id:
                return led
        raise KeyError(led_id)

    def ordered_leds(self) -> tuple[KnownLed, ...]:
        """Known LEDs in observation order."""
        return tuple(self.led_for(o.led_id) for o in self.observations)


@dataclass(frozen=True)
class CandidateEvaluation:
    """Irradiance cosines of one range candidate and its band-test outcome."""

    index: int
    cos_phis: tuple[float, ...]
    feasible: bool
    passed_at: Optional[float]


@dataclass(frozen=True)
class PositionEstimate:
    position: np.ndarray
    distances: tuple[float, float, float]
    tolerance_level: float = 0.0
    n_feasible: int = 1
    ambiguous: bool = False
    evaluations: tuple[CandidateEvaluation, ...] = field(default=())


def _inversion_constants(
    frame: MeasurementFrame, psi_est: Sequence[float], pd: PdParams
) -> tuple[np.ndarray, np.ndarray]:
    """Per-LED values of P / (C cos psi) and 1/m, shared by all candidates."""
    leds = frame.ordered_leds()
    scale = np.empty(len(leds))
    inv_m = np.empty(len(leds))
    for i, (led, obs, psi) in enumerate(zip(leds, frame.observations, psi_est)):
        cos_psi = math.cos(psi)
        if psi >= math.pi / 2 or cos_psi <= 0.0:
            raise InvalidIncidenceError(f"incidence angle {psi:.4f} rad >= pi/2")
        c = rss_constant(led.tx_power, led.semi_angle, pd)
        scale[i] = obs.power / (c * cos_psi)
        inv_m[i] = 1.0 / lambertian_order(led.semi_angle)
    return scale, inv_m


def irradiance_cosines(
    distances: Sequence[float],
    frame: MeasurementFrame,
    psi_est: Sequence[float],
    pd: PdParams,
) -> np.ndarray:
    """Irradiance-angle cosines implied by a range candidate.

    Inverts P = C / d^2 * cos^m(phi) * cos(psi): cos(phi) =
    (P d^2 / (C cos psi))^(1/m).  Values are returned raw; they exceed 1 or
    undershoot cos(semi_angle) exactly when the candidate is inconsistent,
    which is the filter's signal.
    """
    scale, inv_m = _inversion_constants(frame, psi_est, pd)
    d = np.asarray(distances, dtype=float)
    return (scale * d * d) ** inv_m


def _band_pass_level(cos_phis, cos_half) -> Optional[float]:
    """First relaxation level at which every cosine fits the band, or None.

    At level t the band is [cos(semi)*(1-t), 1*(1+t)]; the semi-angle lies in
    (0, pi/2) so cos(semi) is strictly positive.
    """
    t_needed = 0.0
    for cphi, chalf in zip(cos_phis, cos_half):
        lower = 1.0 - cphi / chalf
        upper = cphi - 1.0
        if lower > t_needed:
            t_needed = lower
        if upper > t_needed:
            t_needed = upper
    for level in TOLERANCE_LEVELS:
        if t_needed <= level:
            return level
    return None


def filter_candidates(
    candidates: p3p.DistanceCandidateSet,
    frame: MeasurementFrame,
    psi_est: Sequence[float],
    pd: PdParams,
    rng: np.random.Generator,
) -> tuple[p3p.DistanceCandidate, list[CandidateEvaluation], float, bool]:
    """Select the physically consistent range candidate via the semi-angle band.

    Starting from the strict band, the tolerance grows in 5% steps until at
    least one candidate fits.  Several candidates fitting at the accepting
    level are resolved by a uniform random draw from the supplied generator
    (flagged ambiguous).  Returns (chosen, evaluations, tolerance, ambiguous).
    """
    leds = frame.ordered_leds()
    cos_half = [math.cos(led.semi_angle) for led in leds]
    scale, inv_m = _inversion_constants(frame, psi_est, pd)
    scale = scale.tolist()
    inv_m = inv_m.tolist()

    all_cos = []
    pass_levels = []
    for cand in candidates:
        cos_phis = tuple(
            (s * d * d) ** im for s, d, im in zip(scale, cand.distances, inv_m)
        )
        all_cos.append(cos_phis)
        pass_levels.append(_band_pass_level(cos_phis, cos_half))

    finite = [lv for lv in pass_levels if lv is not None]
    if not finite:
        raise DisambiguationError(
            "no candidate satisfies the irradiance band even fully relaxed"
        )
    accept_level = min(finite)
    feasible_idx = [i for i, lv in enumerate(pass_levels) if lv == accept_level]

    evaluations = [
        CandidateEvaluation(
            index=i,
            cos_phis=tuple(float(c) for c in all_cos[i]),
            feasible=(pass_levels[i] is not None and pass_levels[i] <= accept_level),
            passed_at=pass_levels[i],
        )
        for i in range(len(candidates.candidates))
    ]

    ambiguous = len(feasible_idx) > 1
    if ambiguous:
        pick = feasible_idx[int(rng.integers(len(feasible_idx)))]
    else:
        pick = feasible_idx[0]
    return candidates.candidates[pick], evaluations, accept_level, ambiguous


def lls_xy(
    distances: Sequence[float], led_positions: Sequence[np.ndarray]
) -> tuple[float, float]:
    """Planar fix by linear least squares over three equal-height LEDs.

    Differencing the squared-range equations removes the quadratic terms,
    leaving A [x y]^T = b with A built from LED coordinate differences.  For
    three LEDs A is square, so this is the exact solution of the 2x2 system.
    """
    pos = [np.asarray(s, dtype=float) for s in led_positions]
    zs = [s[2] for s in pos]
    if max(zs) - min(zs) > COMMON_HEIGHT_TOL:
        raise InvalidParameterError("LEDs must share a common height (1e-9)")
    (x1, y1, _), (x2, y2, _), (x3, y3, _) = pos
    d1, d2, d3 = distances
    a = np.array([[x2 - x1, y2 - y1], [x3 - x1, y3 - y1]])
    scale = np.linalg.norm(a[0]) * np.linalg.norm(a[1])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < SINGULAR_REL_TOL * max(scale, 1e-30):
        raise SingularGeometryError("LEDs are collinear in plan view")
    b = 0.5 * np.array([
        d1 * d1 - d2 * d2 + x2 * x2 + y2 * y2 - x1 * x1 - y1 * y1,
        d1 * d1 - d3 * d3 + x3 * x3 + y3 * y3 - x1 * x1 - y1 * y1,
    ])
    x = (b[0] * a[1, 1] - b[1] * a[0, 1]) / det
    y = (a[0, 0] * b[1] - a[1, 0] * b[0]) / det
    return float(x), float(y)


def z_from_distance(
    xy: tuple[float, float], d1: float, led1: np.ndarray
) -> float:
    """Receiver height from the first range and the planar fix.

    Of the two roots z1 +/- Delta only the below-ceiling one is physical; the
    other puts the receiver above the LED plane.
    """
    x1, y1, z1 = np.asarray(led1, dtype=float)
    x, y = xy
    radicand = d1 * d1 - (x1 - x) ** 2 - (y1 - y) ** 2
    if radicand < -HEIGHT_RADICAND_EPS:
        raise InconsistentDistanceError(
            f"range {d1:.6g} shorter than the planar distance it must cover"
        )
    delta = math.sqrt(max(radicand, 0.0))
    return float(z1 - delta)


@contextmanager
def _stage(name: str):
    """Re-raise pipeline errors tagged with the failing stage."""
    try:
        yield
    except EstimationError:
        raise
    except PositioningError as exc:
        raise EstimationError(name, str(exc)) from exc


def estimate_position(
    frame: MeasurementFrame,
    intrinsics: CameraIntrinsics,
    pd: PdParams,
    rng: np.random.Generator,
) -> PositionEstimate:
    """Full three-LED pipeline from a measurement frame to a world position.

    Any stage failure propagates as EstimationError carrying the stage name.
    """
    if len(frame.observations) != 3:
        raise EstimationError("frame", "three-LED estimation needs exactly 3 observations")
    leds = frame.ordered_leds()

    with _stage("bearings"):
        bearings = [back_project_bearing(o.pixel, intrinsics) for o in frame.observations]

    with _stage("angles"):
        psi_est = [incidence_angle(b) for b in bearings]
        alpha12 = inter_bearing_angle(bearings[0], bearings[1])
        alpha13 = inter_bearing_angle(bearings[0], bearings[2])
        alpha23 = inter_bearing_angle(bearings[1], bearings[2])

    with _stage("distances"):
        s1, s2, s3 = (led.position for led in leds)
        problem = p3p.P3PProblem(
            d12=float(np.linalg.norm(s1 - s2)),
            d13=float(np.linalg.norm(s1 - s3)),
            d23=float(np.linalg.norm(s2 - s3)),
            alpha12=alpha12,
            alpha13=alpha13,
            alpha23=alpha23,
        )
        candidates = p3p.solve_problem(problem)

    with _stage("disambiguation"):
        chosen, evaluations, level, ambiguous = filter_candidates(
            candidates, frame, psi_est, pd, rng
        )

    with _stage("trilateration"):
        xy = lls_xy(chosen.distances, [led.position for led in leds])

    with _stage("height"):
        z = z_from_distance(xy, chosen.d1, leds[0].position)

    n_feasible = sum(1 for e in evaluations if e.feasible)
    return PositionEstimate(
        position=np.array([xy[0], xy[1], z]),
        distances=chosen.distances,
        tolerance_level=level,
        n_feasible=n_feasible,
        ambiguous=ambiguous,
        evaluations=tuple(evaluations),
    )
