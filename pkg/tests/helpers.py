"""Shared test utilities: scenario pieces and the brute-force range oracle."""

from __future__ import annotations

import math

import numpy as np

from rp3p import (
    CameraIntrinsics,
    KnownLed,
    LedObservation,
    LedSource,
    MeasurementFrame,
    NormalizedP3P,
    P3PProblem,
    PdParams,
    RigidPose,
    look_at_rotation,
    normalize,
    project_world_to_pixel,
    received_power,
)

TABLE_PD = PdParams(
    area=1e-4, filter_gain=1.0, refractive_index=1.5,
    fov=math.radians(60.0), responsivity=0.54,
)
TABLE_K = CameraIntrinsics(fu=800.0, fv=800.0, u0=320.0, v0=240.0)
TABLE_LEDS = np.array([
    [2.0, 2.0, 3.0],
    [2.0, 3.0, 3.0],
    [3.0, 3.0, 3.0],
    [3.0, 2.0, 3.0],
    [2.5, 2.5, 3.0],
])
SEMI_ANGLE = math.radians(60.0)
TX_POWER = 2.2


def random_problem(rng: np.random.Generator) -> tuple[P3PProblem, np.ndarray, np.ndarray]:
    """Consistent range problem from a random ceiling triangle and camera.

    Returns the problem, the true ranges, and the LED positions.
    """
    while True:
        leds = np.column_stack([
            rng.uniform(0.0, 5.0, 3), rng.uniform(0.0, 5.0, 3), np.full(3, 3.0)
        ])
        area = 0.5 * abs(
            (leds[1, 0] - leds[0, 0]) * (leds[2, 1] - leds[0, 1])
            - (leds[2, 0] - leds[0, 0]) * (leds[1, 1] - leds[0, 1])
        )
        if area < 0.05:
            continue
        cam = np.array([rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 2.5)])
        d = np.linalg.norm(leds - cam, axis=1)
        units = (leds - cam) / d[:, None]
        alphas = [
            math.acos(min(1.0, max(-1.0, float(units[i] @ units[j]))))
            for i, j in ((0, 1), (0, 2), (1, 2))
        ]
        if min(alphas) < 2e-3 or max(alphas) > math.pi - 1e-2:
            continue
        problem = P3PProblem(
            d12=float(np.linalg.norm(leds[0] - leds[1])),
            d13=float(np.linalg.norm(leds[0] - leds[2])),
            d23=float(np.linalg.norm(leds[1] - leds[2])),
            alpha12=alphas[0], alpha13=alphas[1], alpha23=alphas[2],
        )
        return problem, d, leds


def _f2(norm: NormalizedP3P, x: float, y: float) -> float:
    return (1.0 - norm.b) * x * x + (norm.b * norm.r * y - norm.q) * x + 1.0 - norm.b * y * y


def _x_branches(norm: NormalizedP3P, y: float) -> list[float]:
    """Real x roots of the first quadratic at this y (quadratic formula only)."""
    a2 = -norm.a
    b2 = norm.a * norm.r * y
    c2 = (1.0 - norm.a) * y * y - norm.p * y + 1.0
    disc = b2 * b2 - 4.0 * a2 * c2
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    return [(-b2 + s) / (2.0 * a2), (-b2 - s) / (2.0 * a2)]


def oracle_roots(
    problem: P3PProblem,
    lo: float = 0.01,
    hi: float = 100.0,
    n_grid: int = 3000,
) -> list[tuple[float, float]]:
    """Brute-force (x, y) roots of the range system via grid scan + bisection.

    Independent of the production solver: x comes from the quadratic formula
    on the first equation, and sign changes of the second equation along a
    y grid are refined by bisection.
    """
    norm = normalize(problem)
    ys = np.geomspace(lo, hi, n_grid)
    found: list[tuple[float, float]] = []

    for branch in (0, 1):
        prev = None
        for y in ys:
            xs = _x_branches(norm, y)
            if len(xs) <= branch or not (lo <= xs[branch] <= hi):
                prev = None
                continue
            val = _f2(norm, xs[branch], y)
            if prev is not None and val == 0.0:
                found.append((xs[branch], float(y)))
            elif prev is not None and prev[1] * val < 0.0:
                y_lo, y_hi = prev[0], float(y)
                f_lo = prev[1]
                for _ in range(80):
                    mid = 0.5 * (y_lo + y_hi)
                    xs_mid = _x_branches(norm, mid)
                    if len(xs_mid) <= branch:
                        break
                    f_mid = _f2(norm, xs_mid[branch], mid)
                    if f_lo * f_mid <= 0.0:
                        y_hi = mid
                    else:
                        y_lo, f_lo = mid, f_mid
                y_root = 0.5 * (y_lo + y_hi)
                xs_root = _x_branches(norm, y_root)
                if len(xs_root) > branch:
                    found.append((xs_root[branch], y_root))
            prev = (float(y), val)

    deduped: list[tuple[float, float]] = []
    for x, y in found:
        if not any(abs(x - u) < 1e-6 * (1 + abs(u)) and abs(y - v) < 1e-6 * (1 + abs(v))
                   for u, v in deduped):
            deduped.append((x, y))
    return deduped


def make_frame(
    receiver: np.ndarray,
    boresight: np.ndarray,
    led_positions: np.ndarray,
    led_normals: np.ndarray | None = None,
    pd: PdParams = TABLE_PD,
    intrinsics: CameraIntrinsics = TABLE_K,
    pd_offset: np.ndarray | None = None,
) -> tuple[MeasurementFrame, RigidPose]:
    """Noiseless synthetic frame for LEDs observed from a receiver pose."""
    receiver = np.asarray(receiver, dtype=float)
    n = len(led_positions)
    if led_normals is None:
        led_normals = np.tile([0.0, 0.0, -1.0], (n, 1))
    rotation = look_at_rotation(boresight)
    pose = RigidPose(rotation=rotation, position=receiver)
    pd_position = receiver if pd_offset is None else receiver + pd_offset
    observations = []
    known = []
    for i in range(n):
        source = LedSource(
            position=led_positions[i], normal=led_normals[i],
            semi_angle=SEMI_ANGLE, tx_power=TX_POWER, led_id=i,
        )
        pixel = project_world_to_pixel(led_positions[i], pose, intrinsics)
        power = received_power(source, pd_position, rotation[2], pd)
        observations.append(LedObservation(led_id=i, pixel=pixel, power=power))
        known.append(KnownLed(led_id=i, position=led_positions[i],
                              semi_angle=SEMI_ANGLE, tx_power=TX_POWER))
    return MeasurementFrame(tuple(observations), tuple(known)), pose
