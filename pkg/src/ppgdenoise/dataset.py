"""Ingestion of critical-care PPG records and wristband accelerometer files,
train/test splitting, and synthetic noisy-corpus construction.

File layouts:

* record CSVs, two per record id:
  ``<id>_Signals.csv`` with a header row naming a PPG (or PLETH) column at
  125 Hz, and ``<id>_Numerics.csv`` with an HR column at 1 Hz;
* accelerometer CSVs: first row per-axis epoch timestamps, second row the
  sample rate (must be 32), remaining rows x,y,z integer counts at
  1/64 g per count;
* corpus manifest CSV with columns
  record_id,segment_offset,activity,intensity,gain,snr_db.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InvalidInputError,
    MissingColumnError,
    MissingFileError,
    NonNumericCellError,
    RangeError,
    RateError,
)
from .noise import ACTIVITIES, INTENSITIES, AccelTrace, NoisyRecord, mix, motion_noise
from .signals import RawSignal, _frozen_array, resample

RECORD_RATE_HZ = 125.0
HR_RATE_HZ = 1.0
RECORD_DURATION_S = 480.0
RECORD_COUNT = 53
TRAIN_CLEAN_COUNT = 40
NOISY_SOURCE_COUNT = 20
TEST_COUNT = 13
COUNTS_PER_G = 64.0
SEGMENT_S = 120.0

MANIFEST_COLUMNS = ("record_id", "segment_offset", "activity", "intensity", "gain", "snr_db")


@dataclass(frozen=True)
class BidmcRecord:
    """One record: PPG at 125 Hz plus the 1 Hz reference HR channel."""

    id: str
    ppg: RawSignal
    hr_ref: np.ndarray
    duration_s: float

    def __post_init__(self):
        object.__setattr__(self, "hr_ref", _frozen_array(self.hr_ref))


@dataclass(frozen=True)
class SplitPlan:
    train_clean_ids: tuple
    train_noisy_source_ids: tuple
    test_ids: tuple
    seed: int

    def __post_init__(self):
        if not set(self.train_noisy_source_ids) <= set(self.train_clean_ids):
            raise InvalidInputError("noisy sources must be a subset of the clean train set")
        if set(self.train_clean_ids) & set(self.test_ids):
            raise InvalidInputError("train and test ids must be disjoint")


@dataclass(frozen=True)
class CorpusSegment:
    """One 2-minute noisy segment plus where it came from."""

    record_id: str
    segment_offset: int  # sample offset into the 32 Hz record
    record: NoisyRecord


def _read_csv_column(path: Path, wanted: tuple[str, ...]) -> np.ndarray:
    if not path.is_file():
        raise MissingFileError(f"missing file {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(f"{path}: empty file, no header row") from None
        names = [cell.strip().upper() for cell in header]
        col = next((names.index(w) for w in wanted if w in names), None)
        if col is None:
            raise MissingColumnError(f"{path}: no column named one of {wanted} in {header}")
        values = []
        for row_num, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                values.append(float(row[col]))
            except (ValueError, IndexError):
                cell = row[col] if col < len(row) else "<missing>"
                raise NonNumericCellError(
                    f"{path}: non-numeric cell {cell!r} at row {row_num}, column {col + 1}"
                ) from None
    return np.asarray(values, dtype=np.float64)


def load_bidmc(directory, *, strict: bool = False) -> list[BidmcRecord]:
    """Load every ``<id>_Signals.csv``/``<id>_Numerics.csv`` pair, sorted by id.

    ``strict`` additionally enforces the published corpus shape: 53 records
    of 8 minutes each.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFileError(f"missing directory {directory}")
    records = []
    for sig_path in sorted(directory.glob("*_Signals.csv")):
        record_id = sig_path.name[: -len("_Signals.csv")]
        ppg = _read_csv_column(sig_path, ("PPG", "PLETH"))
        hr = _read_csv_column(directory / f"{record_id}_Numerics.csv", ("HR",))
        duration = ppg.size / RECORD_RATE_HZ
        if strict and abs(duration - RECORD_DURATION_S) > 1.0:
            raise InvalidInputError(
                f"{record_id}: duration {duration:.1f} s, expected {RECORD_DURATION_S:.0f} s"
            )
        if strict and abs(hr.size - RECORD_DURATION_S * HR_RATE_HZ) > 1:
            raise InvalidInputError(f"{record_id}: HR channel has {hr.size} samples")
        records.append(
            BidmcRecord(
                id=record_id,
                ppg=RawSignal(ppg, RECORD_RATE_HZ, record_id),
                hr_ref=hr,
                duration_s=duration,
            )
        )
    if strict and len(records) != RECORD_COUNT:
        raise InvalidInputError(f"expected {RECORD_COUNT} records, found {len(records)}")
    if not records:
        warnings.warn(f"no records found under {directory}", stacklevel=2)
    return records


def save_bidmc(record: BidmcRecord, directory) -> None:
    """Re-serialize a record in the ingested layout (used for fixtures)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / f"{record.id}_Signals.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["Time [s]", "PLETH"])
        for i, v in enumerate(record.ppg.samples):
            writer.writerow([repr(i / record.ppg.rate_hz), repr(float(v))])
    with open(directory / f"{record.id}_Numerics.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["Time [s]", "HR"])
        for i, v in enumerate(record.hr_ref):
            writer.writerow([str(i), repr(float(v))])


def load_e4_acc(
    path,
    *,
    activity_label: str | None = None,
    intensity: str | None = None,
    counts_per_g: float = COUNTS_PER_G,
) -> AccelTrace:
    """Parse a wristband accelerometer CSV into a trace in g at 32 Hz."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"missing file {path}")
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if len(rows) < 3:
        raise InvalidInputError(f"{path}: need timestamp row, rate row and at least one sample")
    rate = float(rows[1][0])
    if rate != 32.0:
        raise RateError(f"{path}: declared rate {rate} Hz, expected 32 Hz")
    counts = np.empty((len(rows) - 2, 3), dtype=np.float64)
    for i, row in enumerate(rows[2:], start=3):
        if len(row) < 3:
            raise NonNumericCellError(f"{path}: row {i} has {len(row)} cells, expected 3")
        for j in range(3):
            try:
                counts[i - 3, j] = float(row[j])
            except ValueError:
                raise NonNumericCellError(
                    f"{path}: non-numeric cell {row[j]!r} at row {i}, column {j + 1}"
                ) from None
    limit = 2.0 * counts_per_g
    if np.abs(counts).max() > limit:
        raise RangeError(f"{path}: counts exceed +/-{limit:.0f} (the +/-2 g sensor range)")
    if activity_label is None or intensity is None:
        parsed_activity, parsed_intensity = _parse_trace_stem(path.stem)
        activity_label = activity_label or parsed_activity
        intensity = intensity or parsed_intensity
    return AccelTrace(counts / counts_per_g, activity_label, intensity)


def _parse_trace_stem(stem: str) -> tuple[str, str]:
    head, sep, tail = stem.rpartition("_")
    if sep and tail in INTENSITIES and head in ACTIVITIES:
        return head, tail
    raise InvalidInputError(
        f"cannot derive activity/intensity from filename stem {stem!r}; "
        "pass activity_label= and intensity="
    )


def save_e4_acc(trace: AccelTrace, path, *, counts_per_g: float = COUNTS_PER_G) -> None:
    timestamp = 1_600_000_000
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"{timestamp:.6f}"] * 3)
        writer.writerow(["32.000000"] * 3)
        for row in np.round(trace.samples * counts_per_g).astype(int):
            writer.writerow([str(v) for v in row])


def build_splits(records, seed: int, *, strict: bool = True) -> SplitPlan:
    """Seeded shuffle of record ids into train-clean / noisy-source / test sets."""
    ids = sorted(r.id if isinstance(r, BidmcRecord) else str(r) for r in records)
    if len(set(ids)) != len(ids):
        raise InvalidInputError("record ids must be unique")
    n = len(ids)
    if strict and n != RECORD_COUNT:
        raise InvalidInputError(
            f"expected {RECORD_COUNT} records, got {n}; pass strict=False to scale the split"
        )
    if strict:
        n_train, n_noisy = TRAIN_CLEAN_COUNT, NOISY_SOURCE_COUNT
    else:
        if n < 2:
            raise InvalidInputError("need at least 2 records to split")
        n_train = min(max(round(n * TRAIN_CLEAN_COUNT / RECORD_COUNT), 1), n - 1)
        n_noisy = min(max(round(n * NOISY_SOURCE_COUNT / RECORD_COUNT), 1), n_train)
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    return SplitPlan(
        train_clean_ids=tuple(shuffled[:n_train]),
        train_noisy_source_ids=tuple(shuffled[:n_noisy]),
        test_ids=tuple(shuffled[n_train:]),
        seed=seed,
    )


def build_noisy_corpus(
    plan: SplitPlan,
    records,
    traces,
    gain: float = 1.0,
    *,
    which: str = "train",
    segment_s: float = SEGMENT_S,
    dst_rate_hz: float = 32.0,
) -> tuple[list[CorpusSegment], list[tuple]]:
    """Mix motion noise into 2-minute segments of the selected records.

    Traces are sorted by (activity, intensity) and cycled deterministically
    across segments, so a rerun with identical inputs reproduces the corpus
    and its manifest byte for byte.
    """
    if which == "train":
        selected_ids = plan.train_noisy_source_ids
    elif which == "test":
        selected_ids = plan.test_ids
    else:
        raise InvalidInputError(f"which must be 'train' or 'test', got {which!r}")
    by_id = {r.id: r for r in records}
    missing = [rid for rid in selected_ids if rid not in by_id]
    if missing:
        raise InvalidInputError(f"records not loaded: {missing}")
    traces = sorted(traces, key=lambda t: (t.activity_label, t.intensity))
    if not traces:
        raise InvalidInputError("need at least one accelerometer trace")
    noises = [motion_noise(t) for t in traces]

    seg_len = int(round(segment_s * dst_rate_hz))
    segments: list[CorpusSegment] = []
    manifest: list[tuple] = []
    cursor = 0
    for rid in selected_ids:
        low = resample(by_id[rid].ppg, dst_rate_hz)
        n_segments = len(low) // seg_len
        for k in range(n_segments):
            offset = k * seg_len
            clean = RawSignal(low.samples[offset : offset + seg_len], dst_rate_hz, rid)
            trace = traces[cursor % len(traces)]
            noise = noises[cursor % len(noises)]
            cursor += 1
            if noise.size < seg_len:
                raise InvalidInputError(
                    f"trace for {trace.activity_label}/{trace.intensity} has "
                    f"{noise.size} samples, segment needs {seg_len}"
                )
            record = mix(
                clean,
                noise[:seg_len],
                gain,
                activity_label=trace.activity_label,
                intensity=trace.intensity,
            )
            segments.append(CorpusSegment(rid, offset, record))
            manifest.append(
                (rid, offset, trace.activity_label, trace.intensity, gain, record.snr_db)
            )
    return segments, manifest


def write_manifest(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for rid, offset, activity, intensity, gain, snr in rows:
            writer.writerow([rid, str(offset), activity, intensity, repr(float(gain)), _fmt_snr(snr)])


def read_manifest(path) -> list[tuple]:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"missing manifest {path}")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != MANIFEST_COLUMNS:
            raise InvalidInputError(f"{path}: unexpected manifest header {header}")
        for row in reader:
            rid, offset, activity, intensity, gain, snr = row
            rows.append((rid, int(offset), activity, intensity, float(gain), float(snr)))
    return rows


def _fmt_snr(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return repr(float(value))
