#!/usr/bin/env python3
"""Desk-scale end-to-end run: synthesize corpora, train the translator on
training-set window images, translate held-out noisy images, route them
through the pipeline's denoise command with a trained detector, and score
HR-RMSE improvement with the pipeline's eval command.

Repeats training over several seeds and reports the median improvement and
the early cycle-loss trend. All cross-component traffic goes through the
CLIs and file formats.

Usage:
    python3 trainer/scripts/desk_scale.py --work /tmp/desk_scale \
        [--seeds 0 1 2] [--epochs 2] [--ngf 16] [--n-blocks 3] [--ndf 32] \
        [--max-images 300] [--gain 3.0] [--detector-epochs 40]
"""
from __future__ import annotations

import argparse
import csv
import statistics
import subprocess
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]


def sh(argv):
    print("+", " ".join(str(a) for a in argv), flush=True)
    subprocess.run([str(a) for a in argv], check=True)


def ensure_data(work: Path) -> Path:
    data = work / "data"
    if not (data / "records").is_dir():
        sh(
            [
                sys.executable,
                REPO_ROOT / "scripts" / "gen_synthetic_data.py",
                "--out", data,
                "--records", 53,
                "--duration-s", 480,
                "--seed", 0,
            ]
        )
    return data


def ensure_corpora(work: Path, data: Path, gain: float) -> tuple[Path, Path]:
    train, test = work / "train", work / "test"
    for which, out in (("train", train), ("test", test)):
        if not (out / "manifest.csv").is_file():
            sh(
                [
                    sys.executable, "-m", "ppgdenoise.cli", "synth",
                    "--data-dir", data / "records",
                    "--traces-dir", data / "traces",
                    "--out-dir", out,
                    "--seed", 0,
                    "--gain", gain,
                    "--strict",
                    "--which", which,
                ]
            )
    return train, test


def ensure_detector(work: Path, train: Path, epochs: int) -> Path:
    weights = work / "detector.bin"
    if not weights.is_file():
        sh(
            [
                sys.executable, "-m", "ppgtrainer.cli", "train-detector",
                "--data", train,
                "--out", weights,
                "--log", work / "detector_log.csv",
                "--epochs", epochs,
                "--seed", 0,
            ]
        )
    return weights


def cycle_trend(steps_csv: Path) -> tuple[float, float]:
    rows = list(csv.DictReader(open(steps_csv)))
    values = [float(r["L_cyc"]) for r in rows[:50]]
    head = statistics.mean(values[:5])
    tail = statistics.mean(values[-5:])
    return head, tail


def report_improvement(report_csv: Path) -> float:
    rows = list(csv.DictReader(open(report_csv)))
    return float(rows[-1]["RMSE Imprv."])  # the Average line


def run_seed(work: Path, train: Path, test: Path, detector: Path, seed: int, args) -> dict:
    run_dir = work / f"run_seed{seed}"
    sh(
        [
            sys.executable, "-m", "ppgtrainer.cli", "train-cyclegan",
            "--noisy-dir", train / "images",
            "--clean-dir", train / "images",
            "--noisy-pattern", "*_noisy.pgm",
            "--clean-pattern", "*_clean.pgm",
            "--max-images", args.max_images,
            "--out-dir", run_dir,
            "--epochs", args.epochs,
            "--batch-size", args.batch_size,
            "--ngf", args.ngf,
            "--n-blocks", args.n_blocks,
            "--ndf", args.ndf,
            "--seed", seed,
        ]
    )
    translated = work / f"translated_seed{seed}"
    sh(
        [
            sys.executable, "-m", "ppgtrainer.cli", "translate",
            "--images-dir", test / "images",
            "--checkpoint", run_dir / "checkpoint_final.pt",
            "--out-dir", translated,
        ]
    )
    recon = work / f"recon_seed{seed}"
    sh(
        [
            sys.executable, "-m", "ppgdenoise.cli", "denoise",
            "--weights", detector,
            "--translator", "external_images",
            "--images-dir", translated,
            "--recon-dir", recon,
            "--provenance", work / f"provenance_seed{seed}.csv",
            *sorted(str(p) for p in (test / "signals").glob("*_noisy.csv")),
        ]
    )
    report_dir = work / f"eval_seed{seed}"
    sh(
        [
            sys.executable, "-m", "ppgdenoise.cli", "eval",
            "--manifest", test / "manifest.csv",
            "--signals-dir", test / "signals",
            "--recon-dir", recon,
            "--report-dir", report_dir,
        ]
    )
    head, tail = cycle_trend(run_dir / "steps.csv")
    improvement = report_improvement(report_dir / "report.csv")
    print(
        f"seed {seed}: avg RMSE improvement {improvement:.2f}x, "
        f"cycle loss first-5 {head:.4f} -> steps-46..50 {tail:.4f}",
        flush=True,
    )
    return {"seed": seed, "improvement": improvement, "cycle_head": head, "cycle_tail": tail}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--work", required=True)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--epochs", type=int, default=2)
    parser.add_argument("--batch-size", type=int, default=1)
    parser.add_argument("--ngf", type=int, default=16)
    parser.add_argument("--n-blocks", type=int, default=3)
    parser.add_argument("--ndf", type=int, default=32)
    parser.add_argument("--max-images", type=int, default=300)
    parser.add_argument("--gain", type=float, default=3.0)
    parser.add_argument("--detector-epochs", type=int, default=40)
    args = parser.parse_args()

    work = Path(args.work)
    work.mkdir(parents=True, exist_ok=True)
    data = ensure_data(work)
    train, test = ensure_corpora(work, data, args.gain)
    detector = ensure_detector(work, train, args.detector_epochs)

    results = [run_seed(work, train, test, detector, seed, args) for seed in args.seeds]
    improvements = [r["improvement"] for r in results]
    drops = [r["cycle_head"] - r["cycle_tail"] for r in results]
    median_improvement = statistics.median(improvements)
    median_drop = statistics.median(drops)
    print(f"median RMSE improvement over seeds {args.seeds}: {median_improvement:.2f}x")
    print(f"median cycle-loss drop over first 50 steps: {median_drop:.4f}")
    ok = median_improvement > 2.0 and median_drop > 0.0
    print("PASS" if ok else "FAIL", "desk-scale criterion (>2x median, cycle decreasing)")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
