"""Heart-rate-domain evaluation: peaks, per-beat HR, RMSE/PPE, report math.

Definitions pinned here because published error tables rarely spell them out:

* peaks: local maxima above the signal mean with a refractory gap
  (default 0.33 s, i.e. at most ~180 BPM), amplitude-priority, ties to the
  earliest index;
* beat matching: estimate peaks are matched to reference peaks greedily by
  time distance within +/-0.5 s, one-to-one;
* PPE: mean absolute difference of matched per-beat HR values over all
  reference beats, where an unmatched reference beat contributes its own HR
  magnitude as the miss penalty;
* RMSE: over per-beat HR pairs aligned by the same matching;
* report averages: column-wise arithmetic means, improvement averages are
  means of per-row ratios (not ratios of column averages).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientPeaksError, InvalidInputError
from .signals import _frozen_array

REFRACTORY_S = 0.33
MATCH_TOL_S = 0.5

REPORT_COLUMNS = (
    "Noise Type",
    "S/N (dB)",
    "RMSE Gen. (BPM)",
    "RMSE Nsy. (BPM)",
    "RMSE Imprv.",
    "PPE Gen. (BPM)",
    "PPE Nsy. (BPM)",
    "PPE Imprv.",
)


@dataclass(frozen=True)
class PeakSeries:
    """Strictly increasing peak sample positions at a known rate."""

    indices: np.ndarray
    rate_hz: float

    def __post_init__(self):
        indices = _frozen_array(self.indices, dtype=np.int64)
        if indices.ndim != 1:
            raise InvalidInputError("peak indices must be 1-D")
        if indices.size > 1 and not np.all(np.diff(indices) > 0):
            raise InvalidInputError("peak indices must be strictly increasing")
        if not (self.rate_hz > 0):
            raise InvalidInputError(f"rate_hz must be positive, got {self.rate_hz}")
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return self.indices.size

    @property
    def times_s(self) -> np.ndarray:
        return self.indices / self.rate_hz


@dataclass(frozen=True)
class EvalRow:
    """One noise-type/intensity row of the evaluation table."""

    noise_type: str
    snr_db: float
    rmse_gen_bpm: float
    rmse_noisy_bpm: float
    rmse_improvement: float
    ppe_gen_bpm: float
    ppe_noisy_bpm: float
    ppe_improvement: float
    intensity: str = ""

    def __post_init__(self):
        for name in ("rmse_gen_bpm", "rmse_noisy_bpm", "ppe_gen_bpm", "ppe_noisy_bpm"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be non-negative")
        # Improvement columns restate noisy/gen; tolerate printed-value rounding.
        for gen, noisy, imprv in (
            (self.rmse_gen_bpm, self.rmse_noisy_bpm, self.rmse_improvement),
            (self.ppe_gen_bpm, self.ppe_noisy_bpm, self.ppe_improvement),
        ):
            if gen > 0 and math.isfinite(imprv):
                if abs(imprv - noisy / gen) > 1e-2 * max(1.0, abs(imprv)):
                    raise InvalidInputError(
                        f"improvement {imprv} inconsistent with {noisy}/{gen}"
                    )


_NUMERIC_FIELDS = (
    "snr_db",
    "rmse_gen_bpm",
    "rmse_noisy_bpm",
    "rmse_improvement",
    "ppe_gen_bpm",
    "ppe_noisy_bpm",
    "ppe_improvement",
)


@dataclass(frozen=True)
class ColumnAverages:
    snr_db: float
    rmse_gen_bpm: float
    rmse_noisy_bpm: float
    rmse_improvement: float
    ppe_gen_bpm: float
    ppe_noisy_bpm: float
    ppe_improvement: float


@dataclass(frozen=True)
class EvalReport:
    rows: tuple
    averages: ColumnAverages


def detect_peaks(signal, rate_hz: float, *, refractory_s: float = REFRACTORY_S) -> PeakSeries:
    """Local maxima above the mean, thinned by amplitude within the refractory gap."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError("detect_peaks needs a 1-D signal")
    if x.size < 2 * rate_hz:
        raise InvalidInputError(
            f"detect_peaks needs at least 2 s of samples ({int(2 * rate_hz)}), got {x.size}"
        )
    mean = x.mean()
    interior = np.arange(1, x.size - 1)
    is_peak = (x[interior] > x[interior - 1]) & (x[interior] >= x[interior + 1])
    candidates = interior[is_peak & (x[interior] > mean)]
    if candidates.size == 0:
        return PeakSeries(np.empty(0, dtype=np.int64), rate_hz)

    # Quantize down to whole samples so the stated max HR stays detectable
    # at coarse rates (a 180 BPM train at 32 Hz has alternating 10/11 gaps).
    min_gap = math.floor(refractory_s * rate_hz)
    order = sorted(candidates, key=lambda i: (-x[i], i))
    accepted: list[int] = []
    for idx in order:
        if all(abs(idx - kept) >= min_gap for kept in accepted):
            accepted.append(int(idx))
    return PeakSeries(np.sort(accepted), rate_hz)


def hr_bpm(peaks: PeakSeries) -> np.ndarray:
    """Per-beat heart rate: 60 * rate / interval for each consecutive peak pair."""
    if len(peaks) < 2:
        raise InsufficientPeaksError(f"need at least 2 peaks, got {len(peaks)}")
    return 60.0 * peaks.rate_hz / np.diff(peaks.indices)


def match_peaks(
    est: PeakSeries, ref: PeakSeries, *, tol_s: float = MATCH_TOL_S
) -> list[tuple[int, int]]:
    """Greedy one-to-one (est_index, ref_index) pairs by time distance within tol."""
    est_t = est.times_s
    ref_t = ref.times_s
    pairs = [
        (abs(et - rt), ri, ei)
        for ri, rt in enumerate(ref_t)
        for ei, et in enumerate(est_t)
        if abs(et - rt) <= tol_s
    ]
    pairs.sort()
    used_est: set[int] = set()
    used_ref: set[int] = set()
    matches = []
    for _, ri, ei in pairs:
        if ri in used_ref or ei in used_est:
            continue
        used_ref.add(ri)
        used_est.add(ei)
        matches.append((ei, ri))
    matches.sort(key=lambda m: m[1])
    return matches


def matched_hr_pairs(
    est: PeakSeries, ref: PeakSeries, *, tol_s: float = MATCH_TOL_S
) -> tuple[np.ndarray, np.ndarray]:
    """Per-beat HR values for beats whose bounding peaks match consecutively."""
    est_hr = hr_bpm(est)
    ref_hr = hr_bpm(ref)
    est_of_ref = dict((ri, ei) for ei, ri in match_peaks(est, ref, tol_s=tol_s))
    est_vals, ref_vals = [], []
    for k in range(len(ref_hr)):
        start = est_of_ref.get(k)
        end = est_of_ref.get(k + 1)
        if start is not None and end is not None and end == start + 1:
            est_vals.append(est_hr[start])
            ref_vals.append(ref_hr[k])
    return np.asarray(est_vals), np.asarray(ref_vals)


def hr_at_times(peaks: PeakSeries, times_s) -> np.ndarray:
    """Per-beat HR interpolated at arbitrary times (edge values clamped).

    Each beat's HR is anchored at the midpoint of its peak pair, which keeps
    a constant-rate train exactly constant under interpolation.
    """
    hr = hr_bpm(peaks)
    t = peaks.times_s
    midpoints = (t[:-1] + t[1:]) / 2.0
    return np.interp(np.asarray(times_s, dtype=np.float64), midpoints, hr)


def rmse_bpm(estimate, reference) -> float:
    e = np.asarray(estimate, dtype=np.float64)
    r = np.asarray(reference, dtype=np.float64)
    if e.shape != r.shape:
        raise InvalidInputError(f"length mismatch: {e.shape} vs {r.shape}")
    if e.size < 1:
        raise InvalidInputError("rmse_bpm needs at least one pair")
    return float(np.sqrt(np.mean((e - r) ** 2)))


def ppe_bpm(est_peaks: PeakSeries, ref_peaks: PeakSeries, *, tol_s: float = MATCH_TOL_S) -> float:
    """Mean absolute per-beat HR error over reference beats, misses penalized."""
    est_hr = hr_bpm(est_peaks)
    ref_hr = hr_bpm(ref_peaks)
    est_of_ref = dict((ri, ei) for ei, ri in match_peaks(est_peaks, ref_peaks, tol_s=tol_s))
    total = 0.0
    for k in range(len(ref_hr)):
        start = est_of_ref.get(k)
        end = est_of_ref.get(k + 1)
        if start is not None and end is not None and end == start + 1:
            total += abs(est_hr[start] - ref_hr[k])
        else:
            total += abs(ref_hr[k])
    return float(total / len(ref_hr))


def improvement_ratio(noisy_err: float, gen_err: float) -> float:
    if noisy_err < 0 or gen_err < 0:
        raise InvalidInputError("errors must be non-negative")
    if gen_err == 0.0:
        return math.inf
    return noisy_err / gen_err


def aggregate(rows) -> EvalReport:
    """Column-wise means; improvement averages are means of per-row ratios."""
    rows = tuple(rows)
    if not rows:
        raise InvalidInputError("aggregate needs at least one row")
    means = {
        name: float(np.mean([getattr(row, name) for row in rows])) for name in _NUMERIC_FIELDS
    }
    return EvalReport(rows=rows, averages=ColumnAverages(**means))


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def write_report_csv(report: EvalReport, path) -> None:
    """Emit rows plus an Average line under the canonical table header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in list(report.rows) + [report.averages]:
            name = "Average" if isinstance(row, ColumnAverages) else row.noise_type
            writer.writerow(
                [name] + [_cell(getattr(row, field)) for field in _NUMERIC_FIELDS]
            )
