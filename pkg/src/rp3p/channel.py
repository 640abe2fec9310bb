"""Lambertian line-of-sight optical channel.

Implements the DC channel gain of a generalized-Lambertian LED into a
photodiode behind an optical filter and concentrator, the received optical
power, the electrical SNR after photodetection, and synthesis of noisy
averaged power measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, InvalidParameterError
from .geometry import clamped_arccos


def lambertian_order(semi_angle: float) -> float:
    """Lambertian mode number m = -ln 2 / ln(cos(semi_angle)).

    The semi-angle is the half-power beam angle in radians, in (0, pi/2).
    """
    if not (0.0 < semi_angle < math.pi / 2):
        raise InvalidParameterError(f"semi-angle {semi_angle} outside (0, pi/2)")
    return -math.log(2.0) / math.log(math.cos(semi_angle))


@dataclass(frozen=True)
class LedSource:
    """Transmitter truth: position, unit normal, half-power semi-angle, optical power."""

    position: np.ndarray
    normal: np.ndarray
    semi_angle: float
    tx_power: float
    led_id: int = 0

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise InvalidParameterError("LED normal must be unit length to 1e-9")
        if not (0.0 < self.semi_angle < math.pi / 2):
            raise InvalidParameterError("LED semi-angle outside (0, pi/2)")
        if not self.tx_power > 0:
            raise InvalidParameterError("LED transmit power must be positive")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "normal", n)

    @property
    def mode_number(self) -> float:
        return lambertian_order(self.semi_angle)


@dataclass(frozen=True)
class PdParams:
    """Photodiode front-end: area, filter gain, concentrator index, FoV, responsivity."""

    area: float = 1e-4
    filter_gain: float = 1.0
    refractive_index: float = 1.5
    fov: float = math.radians(60.0)
    responsivity: float = 0.54

    def __post_init__(self):
        if not self.area > 0:
            raise InvalidParameterError("detector area must be positive")
        if not (0.0 < self.fov <= math.pi / 2):
            raise InvalidParameterError("FoV outside (0, pi/2]")
        if self.refractive_index < 1.0:
            raise InvalidParameterError("refractive index must be >= 1")


@dataclass(frozen=True)
class NoiseParams:
    """Measurement-noise model for synthesized trials.

    Power measurements are disturbed by additive Gaussian noise of standard
    deviation ``power_noise_std`` (watts, per single measurement) and reported
    as the mean of ``n_power_averages`` draws.  Pixel coordinates get additive
    Gaussian noise of ``pixel_noise_std`` averaged over ``n_image_averages``
    images.
    """

    power_noise_std: float = 0.0
    n_power_averages: int = 1000
    pixel_noise_std: float = 0.0
    n_image_averages: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.power_noise_std < 0 or self.pixel_noise_std < 0:
            raise InvalidParameterError("noise standard deviations must be >= 0")
        if self.n_power_averages < 1 or self.n_image_averages < 1:
            raise InvalidParameterError("averaging counts must be >= 1")

    @classmethod
    def for_snr(cls, true_power: float, snr_db: float, **kwargs) -> "NoiseParams":
        """Noise parameters whose single-measurement SNR at ``true_power`` is ``snr_db``.

        The electrical SNR is (P R_p)^2 / (sigma R_p)^2, so the power-domain
        standard deviation is P * 10^(-snr_db/20), independent of responsivity.
        """
        std = true_power * 10.0 ** (-snr_db / 20.0)
        return cls(power_noise_std=std, **kwargs)


def concentrator_gain(psi: float, pd: PdParams) -> float:
    """Optical concentrator gain: n^2 / sin^2(FoV) inside the FoV, else 0.

    The FoV boundary is included.
    """
    if 0.0 <= psi <= pd.fov:
        return pd.refractive_index**2 / math.sin(pd.fov) ** 2
    return 0.0


def channel_gain(
    led: LedSource,
    rx_position: np.ndarray,
    rx_normal: np.ndarray,
    pd: PdParams,
) -> float:
    """DC gain of the LoS link between an LED and the photodiode.

    H = (m+1) A / (2 pi d^2) * cos^m(phi) * T_s * g(psi) * cos(psi), where phi
    is the irradiance angle at the LED and psi the incidence angle at the
    receiver.  Returns 0 when the receiver is behind the LED panel
    (cos phi < 0) or outside the concentrator FoV.
    """
    rx = np.asarray(rx_position, dtype=float)
    to_rx = rx - led.position
    d = float(np.linalg.norm(to_rx))
    if d < 1e-12:
        raise DegenerateGeometryError("receiver coincides with LED")
    to_rx /= d
    cos_phi = float(led.normal @ to_rx)
    if cos_phi <= 0.0:
        return 0.0
    n_rx = np.asarray(rx_normal, dtype=float)
    n_rx = n_rx / np.linalg.norm(n_rx)
    cos_psi = float(n_rx @ (-to_rx))
    psi = clamped_arccos(cos_psi)
    g = concentrator_gain(psi, pd)
    if g == 0.0:
        return 0.0
    m = led.mode_number
    return (
        (m + 1.0) * pd.area / (2.0 * math.pi * d * d)
        * cos_phi**m
        * pd.filter_gain
        * g
        * cos_psi
    )


def received_power(
    led: LedSource,
    rx_position: np.ndarray,
    rx_normal: np.ndarray,
    pd: PdParams,
) -> float:
    """Received optical power P_t * H, in watts."""
    return led.tx_power * channel_gain(led, rx_position, rx_normal, pd)


def rss_constant(tx_power: float, semi_angle: float, pd: PdParams) -> float:
    """Signal-strength prefactor P_t (m+1) A T_s g / (2 pi) for an in-FoV link.

    Received power is then C / d^2 * cos^m(phi) * cos(psi).  The concentrator
    gain assumes the incidence angle lies inside the FoV; out-of-FoV links
    carry no power and never reach the strength-based inversion.
    """
    m = lambertian_order(semi_angle)
    g = pd.refractive_index**2 / math.sin(pd.fov) ** 2
    return tx_power * (m + 1.0) * pd.area * pd.filter_gain * g / (2.0 * math.pi)


def snr_db(p_r: float, pd: PdParams, noise: NoiseParams) -> float:
    """Electrical SNR in dB: 10 log10((P_r R_p)^2 / sigma_elec^2).

    The electrical noise deviation is the power-domain deviation referred
    through the responsivity.  Zero received power yields -inf, the
    not-feasible sentinel.
    """
    if noise.power_noise_std <= 0.0:
        raise InvalidParameterError("SNR undefined for zero noise deviation")
    if p_r <= 0.0:
        return -math.inf
    sigma_elec = noise.power_noise_std * pd.responsivity
    return 10.0 * math.log10((p_r * pd.responsivity) ** 2 / sigma_elec**2)


def sample_measured_power(
    true_power: float, noise: NoiseParams, rng: np.random.Generator
) -> float:
    """Mean of n_power_averages noisy observations of the true power.

    Exactly equals true_power when the noise deviation is zero (no RNG draw,
    so the stream is unchanged in the noiseless case).
    """
    if noise.power_noise_std == 0.0:
        return true_power
    draws = rng.normal(true_power, noise.power_noise_std, noise.n_power_averages)
    return float(draws.mean())
