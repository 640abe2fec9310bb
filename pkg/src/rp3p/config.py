"""Scenario configuration for the Monte Carlo harness.

A scenario pins the room, the LED pool, the receiver rig and placement
policy, the noise model, and the feasibility gates.  Configurations load from
a YAML file whose sections mirror the dataclass field-for-field; unknown keys
are errors so typos cannot silently change an experiment.  All angles are
degrees in the file and radians in memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import yaml

from .channel import PdParams
from .errors import ConfigError
from .geometry import CameraIntrinsics

TILT_MODES = ("fixed", "random")
PLACEMENTS = ("uniform", "grid")
ORIENTATIONS = ("fixed_up", "aim_cone", "random_tilt")
SELECTIONS = ("first_k", "max_area")
POWER_NOISE_MODES = ("fixed_snr", "fixed_sigma")
EMITTING_GATES = ("semi_angle", "hemisphere")
OFFSET_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class TiltPolicy:
    """LED tilt away from straight-down: a fixed angle or a random perturbation
    bounded by theta, about a uniformly random horizontal axis per LED per trial."""

    mode: str = "fixed"
    theta: float = 0.0

    def __post_init__(self):
        if self.mode not in TILT_MODES:
            raise ConfigError(f"tilt mode must be one of {TILT_MODES}")
        if not (0.0 <= self.theta < math.pi / 2):
            raise ConfigError("tilt angle must lie in [0, pi/2)")


@dataclass(frozen=True)
class ScenarioConfig:
    room: tuple[float, float, float] = (5.0, 5.0, 3.0)
    led_positions: tuple[tuple[float, float, float], ...] = (
        (2.0, 2.0, 3.0),
        (2.0, 3.0, 3.0),
        (3.0, 3.0, 3.0),
        (3.0, 2.0, 3.0),
        (2.5, 2.5, 3.0),
    )
    led_semi_angle: float = math.radians(60.0)
    led_tx_power: float = 2.2
    tilt: TiltPolicy = field(default_factory=TiltPolicy)
    led_selection: str = "max_area"

    placement: str = "uniform"
    grid_step: float = 0.05
    orientation: str = "fixed_up"
    orientation_max_tilt: float = 0.0
    d_pc: float = 0.0
    d_pc_axis: str = "x"

    pd: PdParams = field(default_factory=PdParams)
    intrinsics: CameraIntrinsics = field(
        default_factory=lambda: CameraIntrinsics(fu=800.0, fv=800.0, u0=320.0, v0=240.0)
    )

    pixel_noise_std: float = 0.0
    n_image_averages: int = 10
    power_noise_mode: str = "fixed_snr"
    power_snr_db: float = 13.6
    power_noise_std: float = 0.0
    n_power_averages: int = 1000

    emitting_gate: str = "semi_angle"
    snr_gate_db: float = 13.6
    n_trials: int = 1000
    rng_seed: int = 0

    def __post_init__(self):
        if any(v <= 0 for v in self.room):
            raise ConfigError("room dimensions must be positive")
        if len(self.led_positions) < 3:
            raise ConfigError("the LED pool needs at least 3 LEDs")
        length, width, height = self.room
        for x, y, z in self.led_positions:
            if not (0 <= x <= length and 0 <= y <= width and 0 <= z <= height):
                raise ConfigError(f"LED ({x},{y},{z}) outside the room")
        zs = {z for _, _, z in self.led_positions}
        if max(zs) - min(zs) > 1e-9:
            raise ConfigError("pool LEDs must share a common height")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"placement must be one of {PLACEMENTS}")
        if self.orientation not in ORIENTATIONS:
            raise ConfigError(f"orientation must be one of {ORIENTATIONS}")
        if self.led_selection not in SELECTIONS:
            raise ConfigError(f"led_selection must be one of {SELECTIONS}")
        if self.power_noise_mode not in POWER_NOISE_MODES:
            raise ConfigError(f"power_noise_mode must be one of {POWER_NOISE_MODES}")
        if self.emitting_gate not in EMITTING_GATES:
            raise ConfigError(f"emitting_gate must be one of {EMITTING_GATES}")
        if self.d_pc_axis not in OFFSET_AXES:
            raise ConfigError(f"d_pc_axis must be one of {OFFSET_AXES}")
        if self.grid_step <= 0:
            raise ConfigError("grid_step must be positive")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.d_pc < 0:
            raise ConfigError("d_pc must be >= 0")

    @property
    def led_height(self) -> float:
        return self.led_positions[0][2]

    def led_array(self) -> np.ndarray:
        return np.asarray(self.led_positions, dtype=float)


def table1_scenario(**overrides) -> ScenarioConfig:
    """The default 5 m x 5 m x 3 m scenario with the five-LED ceiling pool."""
    return replace(ScenarioConfig(), **overrides) if overrides else ScenarioConfig()


def _require_mapping(node, context: str) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"section '{context}' must be a mapping")
    return node


def _take(node: dict, context: str, known: Sequence[str]) -> dict:
    unknown = sorted(set(node) - set(known))
    if unknown:
        raise ConfigError(f"unknown keys in '{context}': {', '.join(unknown)}")
    return node


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a nested dict (as parsed from YAML)."""
    raw = _take(
        _require_mapping(raw, "<root>"),
        "<root>",
        ["room", "leds", "receiver", "pd", "camera", "noise",
         "emitting_gate", "snr_gate_db", "n_trials", "rng_seed"],
    )
    kwargs: dict = {}

    room = _take(_require_mapping(raw.get("room"), "room"), "room",
                 ["length", "width", "height"])
    if room:
        kwargs["room"] = (
            float(room.get("length", 5.0)),
            float(room.get("width", 5.0)),
            float(room.get("height", 3.0)),
        )

    leds = _take(_require_mapping(raw.get("leds"), "leds"), "leds",
                 ["positions", "semi_angle_deg", "tx_power_w", "tilt", "selection"])
    if "positions" in leds:
        kwargs["led_positions"] = tuple(tuple(float(c) for c in p) for p in leds["positions"])
    if "semi_angle_deg" in leds:
        kwargs["led_semi_angle"] = math.radians(float(leds["semi_angle_deg"]))
    if "tx_power_w" in leds:
        kwargs["led_tx_power"] = float(leds["tx_power_w"])
    if "selection" in leds:
        kwargs["led_selection"] = str(leds["selection"])
    tilt = _take(_require_mapping(leds.get("tilt"), "leds.tilt"), "leds.tilt",
                 ["mode", "theta_deg"])
    if tilt:
        kwargs["tilt"] = TiltPolicy(
            mode=str(tilt.get("mode", "fixed")),
            theta=math.radians(float(tilt.get("theta_deg", 0.0))),
        )

    receiver = _take(_require_mapping(raw.get("receiver"), "receiver"), "receiver",
                     ["placement", "grid_step_m", "orientation",
                      "orientation_max_tilt_deg", "d_pc_m", "d_pc_axis"])
    if "placement" in receiver:
        kwargs["placement"] = str(receiver["placement"])
    if "grid_step_m" in receiver:
        kwargs["grid_step"] = float(receiver["grid_step_m"])
    if "orientation" in receiver:
        kwargs["orientation"] = str(receiver["orientation"])
    if "orientation_max_tilt_deg" in receiver:
        kwargs["orientation_max_tilt"] = math.radians(float(receiver["orientation_max_tilt_deg"]))
    if "d_pc_m" in receiver:
        kwargs["d_pc"] = float(receiver["d_pc_m"])
    if "d_pc_axis" in receiver:
        kwargs["d_pc_axis"] = str(receiver["d_pc_axis"])

    pd = _take(_require_mapping(raw.get("pd"), "pd"), "pd",
               ["area_m2", "filter_gain", "refractive_index", "fov_deg",
                "responsivity_a_per_w"])
    if pd:
        kwargs["pd"] = PdParams(
            area=float(pd.get("area_m2", 1e-4)),
            filter_gain=float(pd.get("filter_gain", 1.0)),
            refractive_index=float(pd.get("refractive_index", 1.5)),
            fov=math.radians(float(pd.get("fov_deg", 60.0))),
            responsivity=float(pd.get("responsivity_a_per_w", 0.54)),
        )

    camera = _take(_require_mapping(raw.get("camera"), "camera"), "camera",
                   ["fu", "fv", "u0", "v0"])
    if camera:
        kwargs["intrinsics"] = CameraIntrinsics(
            fu=float(camera.get("fu", 800.0)),
            fv=float(camera.get("fv", 800.0)),
            u0=float(camera.get("u0", 320.0)),
            v0=float(camera.get("v0", 240.0)),
        )

    noise = _take(_require_mapping(raw.get("noise"), "noise"), "noise",
                  ["pixel_std_px", "n_image_averages", "power_model", "snr_db",
                   "power_std_w", "n_power_averages"])
    if "pixel_std_px" in noise:
        kwargs["pixel_noise_std"] = float(noise["pixel_std_px"])
    if "n_image_averages" in noise:
        kwargs["n_image_averages"] = int(noise["n_image_averages"])
    if "power_model" in noise:
        kwargs["power_noise_mode"] = str(noise["power_model"])
    if "snr_db" in noise:
        kwargs["power_snr_db"] = float(noise["snr_db"])
    if "power_std_w" in noise:
        kwargs["power_noise_std"] = float(noise["power_std_w"])
    if "n_power_averages" in noise:
        kwargs["n_power_averages"] = int(noise["n_power_averages"])

    if "emitting_gate" in raw:
        kwargs["emitting_gate"] = str(raw["emitting_gate"])
    if "snr_gate_db" in raw:
        kwargs["snr_gate_db"] = float(raw["snr_gate_db"])
    if "n_trials" in raw:
        kwargs["n_trials"] = int(raw["n_trials"])
    if "rng_seed" in raw:
        kwargs["rng_seed"] = int(raw["rng_seed"])

    return ScenarioConfig(**kwargs)


def load_scenario(path) -> ScenarioConfig:
    """Load a scenario from a YAML file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must contain a mapping at top level")
    return scenario_from_dict(raw)
