"""Core signal types, resampling, windowing, and min-max normalization.

All functions are pure and operate on immutable (read-only) numpy arrays,
so they are safe to call from any number of workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindowError, InvalidInputError

WINDOW_SIZE = 256
PIPELINE_RATE_HZ = 32.0


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RawSignal:
    """A uniformly sampled 1-D signal in arbitrary units."""

    samples: np.ndarray
    rate_hz: float
    label: str = ""

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidInputError("RawSignal needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("RawSignal samples must be finite")
        if not (self.rate_hz > 0):
            raise InvalidInputError(f"rate_hz must be positive, got {self.rate_hz}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "rate_hz", float(self.rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.rate_hz


@dataclass(frozen=True)
class WindowSegment:
    """Raw, not yet normalized window cut out of a source signal."""

    samples: np.ndarray
    origin_index: int
    rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen_array(self.samples))


@dataclass(frozen=True)
class SignalWindow:
    """Fixed-length window with samples in [0, 1].

    ``normalize`` guarantees min 0 / max 1 exactly; windows recovered from
    images only satisfy the [0, 1] range, so the type checks range alone.
    """

    samples: np.ndarray
    rate_hz: float = PIPELINE_RATE_HZ
    origin_index: int = 0

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.shape != (WINDOW_SIZE,):
            raise InvalidInputError(
                f"SignalWindow needs exactly {WINDOW_SIZE} samples, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("SignalWindow samples must be finite")
        if samples.min() < 0.0 or samples.max() > 1.0:
            raise InvalidInputError("SignalWindow samples must lie in [0, 1]")
        object.__setattr__(self, "samples", samples)


def resample(signal: RawSignal, dst_rate_hz: float) -> RawSignal:
    """Linearly resample to ``dst_rate_hz``.

    Output sample k is the linear interpolation of the input at source
    position k * src_rate / dst_rate; output length is floor(n * dst / src),
    which never extrapolates past the final source sample when downsampling.
    """
    if dst_rate_hz <= 0:
        raise InvalidInputError(f"dst_rate_hz must be positive, got {dst_rate_hz}")
    n = len(signal)
    if n < 2:
        raise InvalidInputError("resample needs at least 2 samples")
    out_len = int(np.floor(n * dst_rate_hz / signal.rate_hz))
    if out_len < 1:
        raise InvalidInputError(
            f"resampling {n} samples from {signal.rate_hz} to {dst_rate_hz} Hz leaves no output"
        )
    positions = np.arange(out_len) * (signal.rate_hz / dst_rate_hz)
    out = np.interp(positions, np.arange(n), signal.samples)
    return RawSignal(out, dst_rate_hz, signal.label)


def normalize(samples, *, rate_hz: float = PIPELINE_RATE_HZ, origin_index: int = 0) -> SignalWindow:
    """Map a 256-sample window onto [0, 1] by (x - min) / (max - min)."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.shape != (WINDOW_SIZE,):
        raise InvalidInputError(
            f"normalize needs exactly {WINDOW_SIZE} samples, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("normalize needs finite samples")
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        raise DegenerateWindowError(f"constant window (value {lo!r}) cannot be normalized")
    return SignalWindow((arr - lo) / (hi - lo), rate_hz=rate_hz, origin_index=origin_index)


def normalize_segment(segment: WindowSegment) -> SignalWindow:
    return normalize(
        segment.samples, rate_hz=segment.rate_hz, origin_index=segment.origin_index
    )


def window_split(
    signal: RawSignal, size: int = WINDOW_SIZE, stride: int = WINDOW_SIZE
) -> list[WindowSegment]:
    """Cut a signal into fixed-size windows; a trailing remainder is dropped."""
    if size < 1 or stride < 1:
        raise InvalidInputError("size and stride must be >= 1")
    n = len(signal)
    if n < size:
        return []
    count = (n - size) // stride + 1
    return [
        WindowSegment(signal.samples[k * stride : k * stride + size], k * stride, signal.rate_hz)
        for k in range(count)
    ]
