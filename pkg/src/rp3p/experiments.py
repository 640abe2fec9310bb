"""Preset scenario configurations for the standard experiments.

These factories pin the room, LED pool, camera and photodiode of the default
5 m x 5 m x 3 m deployment and vary only what each experiment sweeps.  The
CLI uses them when no config file is given, and the acceptance suite runs
them directly.
"""

from __future__ import annotations

import math
from dataclasses import replace

from .config import ScenarioConfig, TiltPolicy, table1_scenario


def accuracy_scenario(
    seed: int = 1,
    n_trials: int = 10_000,
    pixel_noise_std: float = 2.0,
    tilt: TiltPolicy | None = None,
    d_pc: float = 0.01,
) -> ScenarioConfig:
    """Random receiver placements with the standard measurement noise.

    Pixel noise of 2 px averaged over 10 images, per-measurement SNR of
    13.6 dB averaged over 1000 power readings, LEDs randomly tilted up to 5
    degrees, and a 1 cm photodiode-camera offset.
    """
    return table1_scenario(
        placement="uniform",
        orientation="aim_cone",
        led_selection="max_area",
        tilt=tilt if tilt is not None else TiltPolicy(mode="random", theta=math.radians(5.0)),
        pixel_noise_std=pixel_noise_std,
        n_image_averages=10,
        power_noise_mode="fixed_snr",
        power_snr_db=13.6,
        n_power_averages=1000,
        d_pc=d_pc,
        emitting_gate="semi_angle",
        snr_gate_db=13.6,
        n_trials=n_trials,
        rng_seed=seed,
    )


def exact_recovery_scenario(
    seed: int = 1, n_trials: int = 10_000, theta: float = 0.0
) -> ScenarioConfig:
    """Noiseless configuration: every feasible unambiguous trial must recover
    the receiver exactly (to solver precision)."""
    return table1_scenario(
        placement="uniform",
        orientation="aim_cone",
        led_selection="max_area",
        tilt=TiltPolicy(mode="fixed", theta=theta),
        pixel_noise_std=0.0,
        power_noise_mode="fixed_sigma",
        power_noise_std=0.0,
        d_pc=0.0,
        emitting_gate="semi_angle",
        n_trials=n_trials,
        rng_seed=seed,
    )


def coverage_scenario(seed: int = 1, grid_step: float = 0.25) -> ScenarioConfig:
    """Grid placement over the room volume for coverage-ratio maps.

    Feasibility gates on the receiver FoV cone, the LED emitting hemisphere
    and the 13.6 dB SNR requirement; the standard measurement noise stays on
    so solver failures count against coverage.  Tilt is a fixed angle here
    (the sweep axis), not a random perturbation.
    """
    return replace(
        accuracy_scenario(seed=seed),
        placement="grid",
        grid_step=grid_step,
        emitting_gate="hemisphere",
        tilt=TiltPolicy(mode="fixed", theta=0.0),
        d_pc=0.01,
    )


def baseline_pool_scenario(cfg: ScenarioConfig) -> ScenarioConfig:
    """Restrict the LED pool to the four corner luminaires.

    The four-LED baseline is a 4-beacon system; the fifth (center) LED
    belongs to the denser deployments only.
    """
    return replace(cfg, led_positions=cfg.led_positions[:4])
