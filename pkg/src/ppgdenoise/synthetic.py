"""Synthetic stand-ins for the two data sources: pulse-like PPG records with
a known HR profile, and activity-shaped accelerometer traces.

Everything is a pure function of its seed, so fixtures and desk-scale
corpora are reproducible byte for byte.
"""
from __future__ import annotations

import numpy as np

from .dataset import RECORD_DURATION_S, RECORD_RATE_HZ, BidmcRecord
from .noise import ACCEL_RANGE_G, AccelTrace
from .signals import RawSignal

# Dominant oscillation frequency (Hz) per activity; intensity scales amplitude.
_ACTIVITY_HZ = {
    "finger_tapping": 4.0,
    "waving": 1.5,
    "shaking_hands": 3.0,
    "running_arm_swing": 2.5,
    "fist_open_close": 2.0,
    "arm_3d": 0.8,
}
_INTENSITY_G = {"low": 0.4, "high": 1.2}


def synth_ppg(
    duration_s: float,
    rate_hz: float = RECORD_RATE_HZ,
    *,
    base_bpm: float = 75.0,
    wander_bpm: float = 5.0,
    seed: int = 0,
    label: str = "synthetic",
) -> tuple[RawSignal, np.ndarray]:
    """Pulse train with a slowly wandering heart rate.

    Returns the signal and the instantaneous HR (BPM) sampled at 1 Hz.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    wander_hz = rng.uniform(0.015, 0.03)
    hr = base_bpm + wander_bpm * np.sin(2 * np.pi * wander_hz * t + rng.uniform(0, 2 * np.pi))
    phase = np.cumsum(hr / 60.0) / rate_hz
    # Dominant systolic wave plus a small dicrotic bump and respiratory sway.
    pulse = np.sin(2 * np.pi * phase) + 0.25 * np.sin(4 * np.pi * phase - 1.2)
    resp = 0.12 * np.sin(2 * np.pi * 0.25 * t)
    samples = 1.0 + 0.45 * pulse + resp + rng.normal(0.0, 0.004, size=n)
    hr_1hz = hr[:: int(rate_hz)][: int(duration_s)]
    return RawSignal(samples, rate_hz, label), hr_1hz


def synth_record(
    record_id: str, *, seed: int = 0, duration_s: float = RECORD_DURATION_S
) -> BidmcRecord:
    rng = np.random.default_rng(seed)
    base = rng.uniform(60.0, 100.0)
    ppg, hr = synth_ppg(
        duration_s, base_bpm=base, seed=int(rng.integers(2**31)), label=record_id
    )
    return BidmcRecord(id=record_id, ppg=ppg, hr_ref=hr, duration_s=duration_s)


def synth_accel_trace(
    activity: str,
    intensity: str,
    duration_s: float,
    *,
    seed: int = 0,
) -> AccelTrace:
    """Bounded oscillatory trace whose frequency/amplitude depend on the activity."""
    rng = np.random.default_rng(seed)
    rate = 32.0
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate
    freq = _ACTIVITY_HZ[activity]
    amp = _INTENSITY_G[intensity]
    # Real movements are bursty and broadband: effort varies second by
    # second (including short rests), and direction reversals add jerk on
    # top of the dominant oscillation.
    n_seconds = n // 32 + 1
    effort_s = rng.uniform(0.2, 1.6, size=n_seconds)
    effort_s[rng.random(n_seconds) < 0.15] = 0.05  # brief rests
    effort = np.repeat(effort_s, 32)[:n]
    axes = []
    for _ in range(3):
        f = freq * rng.uniform(0.9, 1.1)
        axis = amp * effort * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
        axis += 0.4 * amp * effort * rng.standard_normal(n)
        axes.append(axis)
    samples = np.clip(np.stack(axes, axis=1), -ACCEL_RANGE_G, ACCEL_RANGE_G)
    return AccelTrace(samples, activity, intensity)
