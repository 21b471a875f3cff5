"""Command-line pipeline: synth | detect | denoise | eval.

Window routing rule: every 256-sample window is normalized, classified,
and leaves the pipeline exactly once - clean windows pass through bit-equal,
noisy windows go image -> (translation) -> image -> signal. Translation is
out of process: in ``external_images`` mode the command only looks up
``<record>_<offset>_translated.pgm`` files produced elsewhere; ``identity``
mode short-circuits the translation for plumbing tests.

Exit codes: 0 success, 2 config, 3 ingestion, 4 file format, 5 missing
translated images, 1 anything else.
"""
from __future__ import annotations

import argparse
import csv
import math
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import metrics as mt
from .config import ENV_PREFIX, PipelineConfig, load_config
from .detector import ClassScores, DetectorWeights, infer, load_weights
from .errors import (
    ConfigError,
    DegenerateWindowError,
    IngestionError,
    InsufficientPeaksError,
    InvalidInputError,
    MissingFileError,
    MissingTranslationError,
    PipelineError,
)
from .imaging import decode, encode, image_filename, read_pgm, write_pgm
from .signals import RawSignal, WindowSegment, normalize, window_split

LABELS_COLUMNS = ("file", "origin_index", "p_clean", "p_noisy", "label")
PROVENANCE_COLUMNS = ("file", "origin_index", "label", "route", "image")

_STEM_RE = re.compile(r"^(?P<record>.+)_(?P<offset>\d+)_(?P<kind>clean|noisy)$")


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def write_signal_csv(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("sample\n")
        for v in np.asarray(samples, dtype=np.float64):
            fh.write(_fmt(v) + "\n")


def read_signal_csv(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"missing signal file {path}")
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != "sample":
        raise IngestionError(f"{path}: expected a 'sample' header line")
    try:
        return np.asarray([float(v) for v in lines[1:] if v.strip()], dtype=np.float64)
    except ValueError:
        raise IngestionError(f"{path}: non-numeric sample value") from None


def parse_signal_stem(path) -> tuple[str, int]:
    """Record id and absolute sample offset encoded in a signal filename."""
    m = _STEM_RE.match(Path(path).stem)
    if m is None:
        return Path(path).stem, 0
    return m.group("record"), int(m.group("offset"))


def _iter_windows(samples: np.ndarray, rate_hz: float = 32.0):
    signal = RawSignal(samples, rate_hz)
    yield from window_split(signal)


def _normalized_or_none(segment: WindowSegment):
    try:
        return normalize(
            segment.samples, rate_hz=segment.rate_hz, origin_index=segment.origin_index
        )
    except DegenerateWindowError:
        return None


def cmd_synth(config: PipelineConfig, which: str = "train") -> int:
    if not config.data_dir:
        raise ConfigError("data_dir is required for synth")
    if not config.traces_dir:
        raise ConfigError("traces_dir is required for synth")
    records = ds.load_bidmc(config.data_dir, strict=config.strict)
    if not records:
        raise IngestionError(f"no records under {config.data_dir}")
    traces_dir = Path(config.traces_dir)
    if not traces_dir.is_dir():
        raise MissingFileError(f"missing traces directory {traces_dir}")
    traces = [
        ds.load_e4_acc(p, counts_per_g=config.counts_per_g)
        for p in sorted(traces_dir.glob("*.csv"))
    ]
    if not traces:
        raise IngestionError(f"no accelerometer CSVs under {traces_dir}")

    plan = ds.build_splits(records, config.seed, strict=config.strict)
    segments, manifest = ds.build_noisy_corpus(
        plan, records, traces, config.gain, which=which, segment_s=config.segment_s
    )

    out = Path(config.out_dir)
    signals_dir = out / "signals"
    signals_dir.mkdir(parents=True, exist_ok=True)
    images_dir = out / "images"
    if config.write_images:
        images_dir.mkdir(parents=True, exist_ok=True)

    for seg in segments:
        base = f"{seg.record_id}_{seg.segment_offset}"
        write_signal_csv(seg.record.clean.samples, signals_dir / f"{base}_clean.csv")
        write_signal_csv(seg.record.noisy.samples, signals_dir / f"{base}_noisy.csv")
        if config.write_images:
            for kind, raw in (("clean", seg.record.clean), ("noisy", seg.record.noisy)):
                for segment in _iter_windows(raw.samples):
                    window = _normalized_or_none(segment)
                    offset = seg.segment_offset + segment.origin_index
                    if window is None:
                        warnings.warn(f"skipping constant window {base}+{offset}", stacklevel=2)
                        continue
                    name = image_filename(seg.record_id, offset, kind)
                    write_pgm(encode(window, source_id=name), images_dir / name)

    ds.write_manifest(manifest, out / "manifest.csv")
    with open(out / "splits.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "role"])
        for rid in plan.train_clean_ids:
            role = "train_noisy_source" if rid in plan.train_noisy_source_ids else "train_clean"
            writer.writerow([rid, role])
        for rid in plan.test_ids:
            writer.writerow([rid, "test"])
    print(f"synth: {len(segments)} segments from {len(records)} records -> {out}")
    return 0


def _load_detector(config: PipelineConfig) -> DetectorWeights:
    if not config.weights:
        raise ConfigError("weights path is required")
    if not Path(config.weights).is_file():
        raise MissingFileError(f"missing weights file {config.weights}")
    return load_weights(config.weights)


def cmd_detect(config: PipelineConfig, files, out_path=None) -> int:
    weights = _load_detector(config)
    out_path = Path(out_path or Path(config.out_dir) / "labels.csv")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LABELS_COLUMNS)
        for file in files:
            samples = read_signal_csv(file)
            for segment in _iter_windows(samples):
                window = _normalized_or_none(segment)
                if window is None:
                    print(
                        f"detect: skipping constant window {file}+{segment.origin_index}",
                        file=sys.stderr,
                    )
                    continue
                scores = infer(window, weights)
                writer.writerow(
                    [
                        Path(file).name,
                        str(segment.origin_index),
                        _fmt(scores.p_clean),
                        _fmt(scores.p_noisy),
                        scores.label,
                    ]
                )
    print(f"detect: labels -> {out_path}")
    return 0


def cmd_denoise(config: PipelineConfig, files, recon_dir=None, provenance_path=None) -> int:
    weights = _load_detector(config)
    if config.translator == "external_images":
        if not config.images_dir:
            raise ConfigError("images_dir is required in external_images mode")
        if not Path(config.images_dir).is_dir():
            raise ConfigError(f"images_dir {config.images_dir} is not a directory")
    recon_dir = Path(recon_dir or Path(config.out_dir) / "recon")
    recon_dir.mkdir(parents=True, exist_ok=True)
    provenance_path = Path(provenance_path or Path(config.out_dir) / "provenance.csv")
    provenance_path.parent.mkdir(parents=True, exist_ok=True)

    missing: list[str] = []
    with open(provenance_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROVENANCE_COLUMNS)
        for file in files:
            record_id, base_offset = parse_signal_stem(file)
            samples = read_signal_csv(file)
            out_chunks: list[np.ndarray] = []
            for segment in _iter_windows(samples):
                abs_offset = base_offset + segment.origin_index
                window = _normalized_or_none(segment)
                if window is None:
                    out_chunks.append(np.zeros(config.window_size))
                    writer.writerow(
                        [Path(file).name, str(segment.origin_index), "", "degenerate", ""]
                    )
                    continue
                scores = infer(window, weights)
                if scores.label == "clean":
                    out_chunks.append(window.samples)
                    writer.writerow(
                        [Path(file).name, str(segment.origin_index), "clean", "passthrough", ""]
                    )
                    continue
                encoded = encode(window, source_id=f"{record_id}_{abs_offset}")
                if config.translator == "identity":
                    out_chunks.append(decode(encoded).samples)
                    writer.writerow(
                        [Path(file).name, str(segment.origin_index), "noisy", "translated", ""]
                    )
                    continue
                image_path = Path(config.images_dir) / image_filename(
                    record_id, abs_offset, "translated"
                )
                if not image_path.is_file():
                    missing.append(str(image_path))
                    out_chunks.append(window.samples)
                    writer.writerow(
                        [
                            Path(file).name,
                            str(segment.origin_index),
                            "noisy",
                            "missing",
                            str(image_path),
                        ]
                    )
                    continue
                out_chunks.append(decode(read_pgm(image_path)).samples)
                writer.writerow(
                    [
                        Path(file).name,
                        str(segment.origin_index),
                        "noisy",
                        "translated",
                        str(image_path),
                    ]
                )
            stem = Path(file).stem
            stem = stem[: -len("_noisy")] if stem.endswith(("_noisy", "_clean")) else stem
            recon = np.concatenate(out_chunks) if out_chunks else np.empty(0)
            write_signal_csv(recon, recon_dir / f"{stem}_recon.csv")
    print(f"denoise: reconstructions -> {recon_dir}, provenance -> {provenance_path}")
    if missing:
        for path in missing:
            print(f"denoise: missing translated image {path}", file=sys.stderr)
        raise MissingTranslationError(f"{len(missing)} translated images missing")
    return 0


def _normalized_view(samples: np.ndarray, window_size: int) -> np.ndarray:
    """Per-window normalized rendering of a raw signal (zeros where constant)."""
    chunks = []
    for segment in _iter_windows(samples):
        window = _normalized_or_none(segment)
        chunks.append(window.samples if window is not None else np.zeros(window_size))
    return np.concatenate(chunks) if chunks else np.empty(0)


def _segment_metrics(est: np.ndarray, ref: np.ndarray, config: PipelineConfig):
    """(matched est/ref HR pairs, PPE numerator, reference beat count)."""
    ref_peaks = mt.detect_peaks(ref, 32.0, refractory_s=config.refractory_s)
    if len(ref_peaks) < 2:
        return np.empty(0), np.empty(0), 0.0, 0
    ref_hr = mt.hr_bpm(ref_peaks)
    est_peaks = mt.detect_peaks(est, 32.0, refractory_s=config.refractory_s)
    if len(est_peaks) < 2:
        return np.empty(0), np.empty(0), float(np.abs(ref_hr).sum()), len(ref_hr)
    est_vals, ref_vals = mt.matched_hr_pairs(est_peaks, ref_peaks, tol_s=config.match_tol_s)
    ppe_sum = mt.ppe_bpm(est_peaks, ref_peaks, tol_s=config.match_tol_s) * len(ref_hr)
    return est_vals, ref_vals, ppe_sum, len(ref_hr)


def _hr_ref_pairs(est: np.ndarray, rid: str, offset: int, hr_refs: dict, config: PipelineConfig):
    """Per-second interpolated HR paired against the 1 Hz reference channel."""
    if rid not in hr_refs:
        warnings.warn(f"{rid}: no HR reference channel loaded", stacklevel=2)
        return (), ()
    n_sec = est.size // 32
    sec0 = offset // 32
    ref_slice = hr_refs[rid][sec0 : sec0 + n_sec]
    if ref_slice.size < n_sec:
        warnings.warn(f"{rid}: HR channel shorter than segment", stacklevel=2)
        return (), ()
    try:
        peaks = mt.detect_peaks(est, 32.0, refractory_s=config.refractory_s)
    except InvalidInputError:
        return (), ()
    if len(peaks) < 2:
        return (), ()
    return mt.hr_at_times(peaks, np.arange(n_sec) + 0.5), ref_slice


def cmd_eval(
    config: PipelineConfig,
    manifest_path,
    signals_dir,
    recon_dir,
    out_dir=None,
) -> int:
    rows = ds.read_manifest(manifest_path)
    if not rows:
        raise InvalidInputError(f"manifest {manifest_path} has no rows")
    signals_dir = Path(signals_dir)
    recon_dir = Path(recon_dir)
    out = Path(out_dir or Path(config.out_dir) / "eval")
    plots_dir = out / "plots"
    plots_dir.mkdir(parents=True, exist_ok=True)

    hr_refs = None
    if config.rmse_mode == "hr_ref":
        if not config.data_dir:
            raise ConfigError("rmse_mode=hr_ref needs data_dir for the HR reference channel")
        hr_refs = {
            r.id: r.hr_ref for r in ds.load_bidmc(config.data_dir, strict=config.strict)
        }

    groups: dict[tuple[str, str], dict] = {}
    for rid, offset, activity, intensity, gain, snr in rows:
        base = f"{rid}_{offset}"
        clean = _normalized_view(read_signal_csv(signals_dir / f"{base}_clean.csv"), config.window_size)
        noisy = _normalized_view(read_signal_csv(signals_dir / f"{base}_noisy.csv"), config.window_size)
        recon = read_signal_csv(recon_dir / f"{base}_recon.csv")
        if not (clean.size == noisy.size == recon.size):
            raise InvalidInputError(
                f"{base}: clean/noisy/recon lengths differ "
                f"({clean.size}/{noisy.size}/{recon.size})"
            )
        group = groups.setdefault(
            (activity, intensity),
            {
                "snr": [],
                "gen_pairs": ([], []),
                "nsy_pairs": ([], []),
                "gen_ppe": [0.0, 0],
                "nsy_ppe": [0.0, 0],
                "plot": None,
            },
        )
        group["snr"].append(snr)
        for key_pairs, key_ppe, est in (
            ("gen_pairs", "gen_ppe", recon),
            ("nsy_pairs", "nsy_ppe", noisy),
        ):
            try:
                est_vals, ref_vals, ppe_sum, n_beats = _segment_metrics(est, clean, config)
            except (InvalidInputError, InsufficientPeaksError) as exc:
                warnings.warn(f"{base}: skipped ({exc})", stacklevel=2)
                continue
            if hr_refs is not None:
                est_vals, ref_vals = _hr_ref_pairs(est, rid, offset, hr_refs, config)
            group[key_pairs][0].extend(est_vals)
            group[key_pairs][1].extend(ref_vals)
            group[key_ppe][0] += ppe_sum
            group[key_ppe][1] += n_beats
        if group["plot"] is None and clean.size >= config.window_size:
            group["plot"] = (
                clean[: config.window_size],
                noisy[: config.window_size],
                recon[: config.window_size],
            )

    eval_rows = []
    for (activity, intensity), group in sorted(groups.items()):
        gen_rmse = _pooled_rmse(group["gen_pairs"])
        nsy_rmse = _pooled_rmse(group["nsy_pairs"])
        gen_ppe = group["gen_ppe"][0] / group["gen_ppe"][1] if group["gen_ppe"][1] else math.nan
        nsy_ppe = group["nsy_ppe"][0] / group["nsy_ppe"][1] if group["nsy_ppe"][1] else math.nan
        eval_rows.append(
            mt.EvalRow(
                noise_type=activity,
                snr_db=float(np.mean(group["snr"])),
                rmse_gen_bpm=gen_rmse,
                rmse_noisy_bpm=nsy_rmse,
                rmse_improvement=mt.improvement_ratio(nsy_rmse, gen_rmse),
                ppe_gen_bpm=gen_ppe,
                ppe_noisy_bpm=nsy_ppe,
                ppe_improvement=mt.improvement_ratio(nsy_ppe, gen_ppe),
                intensity=intensity,
            )
        )
        if group["plot"] is not None:
            with open(plots_dir / f"{activity}_{intensity}.csv", "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["sample_index", "clean", "noisy", "reconstructed"])
                clean_w, noisy_w, recon_w = group["plot"]
                for i in range(len(clean_w)):
                    writer.writerow(
                        [str(i), _fmt(clean_w[i]), _fmt(noisy_w[i]), _fmt(recon_w[i])]
                    )

    report = mt.aggregate(eval_rows)
    mt.write_report_csv(report, out / "report.csv")
    print(f"eval: report -> {out / 'report.csv'}")
    return 0


def _pooled_rmse(pairs) -> float:
    est, ref = pairs
    if not est:
        return math.nan
    return mt.rmse_bpm(np.asarray(est), np.asarray(ref))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--data-dir", dest="data_dir")
    parser.add_argument("--traces-dir", dest="traces_dir")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--weights")
    parser.add_argument("--images-dir", dest="images_dir")
    parser.add_argument("--gain", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--translator", choices=("identity", "external_images"))
    parser.add_argument("--segment-s", dest="segment_s", type=float)
    parser.add_argument("--strict", dest="strict", action="store_const", const=True)
    parser.add_argument(
        "--no-images", dest="write_images", action="store_const", const=False
    )


def _config_from_args(args) -> PipelineConfig:
    keys = (
        "data_dir",
        "traces_dir",
        "out_dir",
        "weights",
        "images_dir",
        "gain",
        "seed",
        "translator",
        "segment_s",
        "strict",
        "write_images",
        "rmse_mode",
    )
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    return load_config(args.config, overrides=overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppgdn",
        description="PPG motion-artifact pipeline: synthesize, detect, route, evaluate.",
        epilog=f"Any config key can also be set via {ENV_PREFIX}<KEY> environment variables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="build the noisy corpus, manifest and window images")
    _add_common(p)
    p.add_argument("--which", choices=("train", "test"), default="train")

    p = sub.add_parser("detect", help="label windows of signal files as clean/noisy")
    _add_common(p)
    p.add_argument("--out", dest="labels_out")
    p.add_argument("files", nargs="*")

    p = sub.add_parser("denoise", help="route windows through pass-through or translation")
    _add_common(p)
    p.add_argument("--recon-dir", dest="recon_dir")
    p.add_argument("--provenance", dest="provenance_path")
    p.add_argument("files", nargs="*")

    p = sub.add_parser("eval", help="HR-domain error report from aligned signal triples")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--signals-dir", required=True, dest="eval_signals_dir")
    p.add_argument("--recon-dir", required=True, dest="eval_recon_dir")
    p.add_argument("--report-dir", dest="report_dir")
    p.add_argument("--rmse-mode", dest="rmse_mode", choices=("beat_matched", "hr_ref"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "synth":
            return cmd_synth(config, which=args.which)
        if args.command == "detect":
            return cmd_detect(config, args.files, out_path=args.labels_out)
        if args.command == "denoise":
            return cmd_denoise(
                config, args.files, recon_dir=args.recon_dir, provenance_path=args.provenance_path
            )
        return cmd_eval(
            config,
            args.manifest,
            args.eval_signals_dir,
            args.eval_recon_dir,
            out_dir=args.report_dir,
        )
    except PipelineError as exc:
        print(f"ppgdn {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"ppgdn {args.command}: error: {exc}", file=sys.stderr)
        return IngestionError.exit_code


if __name__ == "__main__":
    sys.exit(main())
