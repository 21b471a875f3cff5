"""Accelerometer-driven motion-artifact noise model and clean/noisy mixing.

The noise envelope is built from per-sample 3-axis differences: within each
one-second block (32 samples at 32 Hz) the maximum absolute per-axis step is
accumulated into ``sum``; at every block boundary an exponential moving
average ``avg = 0.9 * avg + 0.1 * (sum / 32)`` is advanced and ``sum``
resets. Samples of block k carry the average computed at the end of block
k - 1 (one-block latency, avg starts at 0), so the emitted series is causal
and bounded by 4 for in-range (+/-2 g) traces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UndefinedSignalPowerError
from .signals import RawSignal, _frozen_array

ACTIVITIES = (
    "finger_tapping",
    "waving",
    "shaking_hands",
    "running_arm_swing",
    "fist_open_close",
    "arm_3d",
)
INTENSITIES = ("low", "high")

ACCEL_RATE_HZ = 32.0
ACCEL_RANGE_G = 2.0
BLOCK_SAMPLES = 32
EMA_KEEP = 0.9
EMA_GAIN = 0.1


@dataclass(frozen=True)
class AccelSample:
    """One 3-axis accelerometer reading in g."""

    x: float
    y: float
    z: float


@dataclass(frozen=True)
class AccelTrace:
    """3-axis accelerometer series at 32 Hz, values in g within +/-2."""

    samples: np.ndarray  # shape (n, 3)
    activity_label: str
    intensity: str
    rate_hz: float = ACCEL_RATE_HZ

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.ndim != 2 or samples.shape[1] != 3 or samples.shape[0] == 0:
            raise InvalidInputError(f"AccelTrace needs shape (n, 3), got {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("AccelTrace samples must be finite")
        if np.abs(samples).max() > ACCEL_RANGE_G:
            raise InvalidInputError(
                f"AccelTrace samples exceed the +/-{ACCEL_RANGE_G} g sensor range"
            )
        if self.rate_hz != ACCEL_RATE_HZ:
            raise InvalidInputError(f"AccelTrace rate must be {ACCEL_RATE_HZ} Hz")
        if self.activity_label not in ACTIVITIES:
            raise InvalidInputError(f"unknown activity label {self.activity_label!r}")
        if self.intensity not in INTENSITIES:
            raise InvalidInputError(f"unknown intensity {self.intensity!r}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass
class NoiseModelState:
    """Running EMA output and the in-progress block accumulator."""

    avg: float = 0.0
    sum: float = 0.0


@dataclass(frozen=True)
class NoisyRecord:
    """Clean signal, additive noise, and their mix with the realized S/N."""

    clean: RawSignal
    noisy: RawSignal
    noise: np.ndarray
    gain: float
    snr_db: float
    activity_label: str = ""
    intensity: str = ""

    def __post_init__(self):
        object.__setattr__(self, "noise", _frozen_array(self.noise))
        if not (len(self.clean) == len(self.noisy) == self.noise.size):
            raise InvalidInputError("clean, noisy and noise must have equal length")


def max_diff_step(curr, prev) -> float:
    """Largest absolute per-axis difference between two 3-axis samples."""
    cx, cy, cz = _axes(curr)
    px, py, pz = _axes(prev)
    return max(abs(cx - px), abs(cy - py), abs(cz - pz))


def _axes(sample):
    if isinstance(sample, AccelSample):
        return sample.x, sample.y, sample.z
    x, y, z = sample
    return float(x), float(y), float(z)


def ema_update(avg: float, block_sum: float) -> float:
    """Advance the envelope filter by one block."""
    return EMA_KEEP * avg + EMA_GAIN * (block_sum / BLOCK_SAMPLES)


def motion_noise(trace: AccelTrace) -> np.ndarray:
    """Per-sample noise envelope for a trace; length equals the trace length.

    A trailing partial block never advances the filter; its samples carry the
    average from the last completed block boundary.
    """
    n = len(trace)
    if n < BLOCK_SAMPLES:
        raise InvalidInputError(
            f"motion_noise needs at least {BLOCK_SAMPLES} samples, got {n}"
        )
    diffs = np.abs(np.diff(trace.samples, axis=0, prepend=trace.samples[:1])).max(axis=1)
    n_blocks = n // BLOCK_SAMPLES
    block_sums = diffs[: n_blocks * BLOCK_SAMPLES].reshape(n_blocks, BLOCK_SAMPLES).sum(axis=1)

    state = NoiseModelState()
    emitted = np.empty(n, dtype=np.float64)
    for k in range(n_blocks):
        emitted[k * BLOCK_SAMPLES : (k + 1) * BLOCK_SAMPLES] = state.avg
        state.avg = ema_update(state.avg, block_sums[k])
        state.sum = 0.0
    emitted[n_blocks * BLOCK_SAMPLES :] = state.avg
    return emitted


def snr_db(signal, noise) -> float:
    """AC power ratio in dB; powers are mean squared deviations from the mean.

    Zero noise power maps to +inf; zero signal power is an error.
    """
    sig = np.asarray(signal, dtype=np.float64)
    nse = np.asarray(noise, dtype=np.float64)
    if sig.shape != nse.shape:
        raise InvalidInputError(f"length mismatch: signal {sig.shape} vs noise {nse.shape}")
    p_noise = np.mean((nse - nse.mean()) ** 2)
    if p_noise == 0.0:
        return math.inf
    p_signal = np.mean((sig - sig.mean()) ** 2)
    if p_signal == 0.0:
        raise UndefinedSignalPowerError("signal is constant, S/N is undefined")
    return 10.0 * math.log10(p_signal / p_noise)


def mix(
    clean: RawSignal,
    noise,
    gain: float = 1.0,
    *,
    activity_label: str = "",
    intensity: str = "",
) -> NoisyRecord:
    """Add ``gain * noise`` to a clean signal; gain 0 is the bit-exact identity."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != clean.samples.shape:
        raise InvalidInputError(
            f"length mismatch: clean {clean.samples.shape} vs noise {noise.shape}"
        )
    if gain < 0:
        raise InvalidInputError(f"gain must be >= 0, got {gain}")
    if gain == 0.0:
        noisy_samples = clean.samples.copy()
    else:
        noisy_samples = clean.samples + gain * noise
    noisy = RawSignal(noisy_samples, clean.rate_hz, clean.label)
    return NoisyRecord(
        clean=clean,
        noisy=noisy,
        noise=noise,
        gain=float(gain),
        snr_db=snr_db(clean.samples, gain * noise),
        activity_label=activity_label,
        intensity=intensity,
    )
