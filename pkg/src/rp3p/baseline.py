"""Four-LED perspective-n-point baseline.

Purely visual comparison method: ranges to LEDs 1-3 come from the same
law-of-cosines solver, and the fourth LED disambiguates.  For each range
candidate the implied receiver position is trilaterated, and the candidate
whose predicted LED-4 viewing angles best match the measured inter-bearing
angles wins.  Received powers are never read.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import p3p
from .errors import BaselineFailureError, EstimationError, PositioningError
from .estimator import MeasurementFrame, PositionEstimate, lls_xy, z_from_distance
from .geometry import (
    CameraIntrinsics,
    back_project_bearing,
    inter_bearing_angle,
)


def pnp_position(
    led_positions: Sequence[np.ndarray],
    pixels: Sequence[np.ndarray],
    intrinsics: CameraIntrinsics,
) -> PositionEstimate:
    """Position from four LED pixel observations (no signal-strength input).

    led_positions and pixels are index-aligned; the first three LEDs feed the
    range solver and must not be collinear in plan view.
    """
    if len(led_positions) != 4 or len(pixels) != 4:
        raise BaselineFailureError("the baseline needs exactly 4 LEDs")
    pos = [np.asarray(s, dtype=float) for s in led_positions]

    try:
        bearings = [back_project_bearing(px, intrinsics) for px in pixels]
        alpha12 = inter_bearing_angle(bearings[0], bearings[1])
        alpha13 = inter_bearing_angle(bearings[0], bearings[2])
        alpha23 = inter_bearing_angle(bearings[1], bearings[2])
        problem = p3p.P3PProblem(
            d12=float(np.linalg.norm(pos[0] - pos[1])),
            d13=float(np.linalg.norm(pos[0] - pos[2])),
            d23=float(np.linalg.norm(pos[1] - pos[2])),
            alpha12=alpha12,
            alpha13=alpha13,
            alpha23=alpha23,
        )
        candidates = p3p.solve_problem(problem)
    except PositioningError as exc:
        raise BaselineFailureError(f"range candidates unavailable: {exc}") from exc

    # Measured angles between LED 4's bearing and each of the other three.
    measured_to_4 = np.array([
        inter_bearing_angle(bearings[i], bearings[3]) for i in range(3)
    ])

    best: tuple[float, PositionEstimate] | None = None
    for cand in candidates:
        try:
            xy = lls_xy(cand.distances, pos[:3])
            z = z_from_distance(xy, cand.d1, pos[0])
        except PositioningError:
            continue
        receiver = np.array([xy[0], xy[1], z])
        predicted = np.empty(3)
        degenerate = False
        for i in range(3):
            u = pos[i] - receiver
            w = pos[3] - receiver
            nu, nw = np.linalg.norm(u), np.linalg.norm(w)
            if nu < 1e-12 or nw < 1e-12:
                degenerate = True
                break
            predicted[i] = math.acos(min(1.0, max(-1.0, float(u @ w) / (nu * nw))))
        if degenerate:
            continue
        discrepancy = float(np.max(np.abs(predicted - measured_to_4)))
        estimate = PositionEstimate(
            position=receiver,
            distances=cand.distances,
            tolerance_level=0.0,
            n_feasible=len(candidates),
            ambiguous=False,
        )
        if best is None or discrepancy < best[0]:
            best = (discrepancy, estimate)

    if best is None:
        raise BaselineFailureError("every range candidate failed trilateration")
    return best[1]


def estimate_position_pnp(
    frame: MeasurementFrame, intrinsics: CameraIntrinsics
) -> PositionEstimate:
    """Baseline entry point on a 4-observation frame; reads pixels only."""
    if len(frame.observations) != 4:
        raise EstimationError("frame", "the baseline needs exactly 4 observations")
    leds = frame.ordered_leds()
    try:
        return pnp_position(
            [led.position for led in leds],
            [o.pixel for o in frame.observations],
            intrinsics,
        )
    except PositioningError as exc:
        if isinstance(exc, EstimationError):
            raise
        raise EstimationError("baseline", str(exc)) from exc
