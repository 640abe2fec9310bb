import inspect
import math

import numpy as np
import pytest

from rp3p import (
    LedObservation,
    MeasurementFrame,
    estimate_position_pnp,
    min_enclosing_cone,
    pnp_position,
)
from rp3p.baseline import pnp_position as pnp_core

from helpers import TABLE_K, TABLE_PD, TABLE_LEDS, make_frame


def four_led_frame(receiver, pd_offset=None):
    positions = TABLE_LEDS[:4]
    units = positions - np.asarray(receiver, dtype=float)
    units /= np.linalg.norm(units, axis=1, keepdims=True)
    boresight, _ = min_enclosing_cone(units)
    return make_frame(receiver, boresight, positions, pd_offset=pd_offset)


class TestPnp:
    def test_noiseless_exact_recovery(self):
        rng = np.random.default_rng(61)
        for _ in range(300):
            receiver = np.array([rng.uniform(0.3, 4.7), rng.uniform(0.3, 4.7),
                                 rng.uniform(0.0, 2.0)])
            frame, _ = four_led_frame(receiver)
            est = estimate_position_pnp(frame, TABLE_K)
            assert np.linalg.norm(est.position - receiver) < 1e-6

    def test_selected_candidate_is_ground_truth(self):
        rng = np.random.default_rng(62)
        for _ in range(200):
            receiver = np.array([rng.uniform(0.5, 4.5), rng.uniform(0.5, 4.5),
                                 rng.uniform(0.0, 2.0)])
            frame, _ = four_led_frame(receiver)
            est = estimate_position_pnp(frame, TABLE_K)
            d_true = [float(np.linalg.norm(TABLE_LEDS[i] - receiver)) for i in range(3)]
            assert np.allclose(est.distances, d_true, rtol=1e-6)

    def test_reads_no_powers(self):
        # structural: the core solver does not even accept power input
        params = inspect.signature(pnp_core).parameters
        assert "power" not in " ".join(params)
        # and scrambling the powers in the frame changes nothing
        receiver = np.array([1.7, 2.9, 0.6])
        frame, _ = four_led_frame(receiver)
        scrambled = MeasurementFrame(
            observations=tuple(
                LedObservation(led_id=o.led_id, pixel=o.pixel, power=o.power * 17.3)
                for o in frame.observations
            ),
            leds=frame.leds,
        )
        a = estimate_position_pnp(frame, TABLE_K)
        b = estimate_position_pnp(scrambled, TABLE_K)
        assert np.array_equal(a.position, b.position)

    def test_worse_candidates_never_selected(self):
        # the argmin contract: the returned position always has the smallest
        # fourth-LED angular discrepancy, which for noiseless input is ~0
        rng = np.random.default_rng(63)
        for _ in range(100):
            receiver = np.array([rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0),
                                 rng.uniform(0.0, 1.5)])
            frame, _ = four_led_frame(receiver)
            est = estimate_position_pnp(frame, TABLE_K)
            # predicted vs measured discrepancy at the winning candidate
            bearing_angles = []
            for i in range(3):
                u = TABLE_LEDS[i] - est.position
                w = TABLE_LEDS[3] - est.position
                cosang = u @ w / (np.linalg.norm(u) * np.linalg.norm(w))
                bearing_angles.append(math.acos(np.clip(cosang, -1, 1)))
            true_angles = []
            for i in range(3):
                u = TABLE_LEDS[i] - receiver
                w = TABLE_LEDS[3] - receiver
                cosang = u @ w / (np.linalg.norm(u) * np.linalg.norm(w))
                true_angles.append(math.acos(np.clip(cosang, -1, 1)))
            assert np.allclose(bearing_angles, true_angles, atol=1e-6)

    def test_requires_four_leds(self):
        receiver = np.array([2.0, 2.0, 1.0])
        positions = TABLE_LEDS[:3]
        units = positions - receiver
        units /= np.linalg.norm(units, axis=1, keepdims=True)
        boresight, _ = min_enclosing_cone(units)
        frame, _ = make_frame(receiver, boresight, positions)
        with pytest.raises(Exception):
            estimate_position_pnp(frame, TABLE_K)

    def test_pixels_only_interface(self):
        receiver = np.array([2.2, 2.4, 0.9])
        frame, _ = four_led_frame(receiver)
        est = pnp_position(
            [led.position for led in frame.ordered_leds()],
            [o.pixel for o in frame.observations],
            TABLE_K,
        )
        assert np.linalg.norm(est.position - receiver) < 1e-6
