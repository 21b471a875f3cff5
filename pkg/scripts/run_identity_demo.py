#!/usr/bin/env python3
"""End-to-end demo on synthetic data with the identity translator:
synth -> detect -> denoise -> eval, everything under one output directory.

Usage:
    python3 scripts/run_identity_demo.py --work demo_out [--seed 0] [--gain 2.0]
"""
import argparse
from pathlib import Path

from ppgdenoise.cli import main as ppgdn
from ppgdenoise.dataset import save_bidmc, save_e4_acc
from ppgdenoise.detector import save_weights, zero_weights
from ppgdenoise.synthetic import synth_accel_trace, synth_record


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--work", required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--gain", type=float, default=2.0)
    parser.add_argument("--records", type=int, default=6)
    args = parser.parse_args()

    work = Path(args.work)
    records_dir = work / "records"
    traces_dir = work / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    for k in range(args.records):
        save_bidmc(synth_record(f"rec{k:02d}", seed=k, duration_s=240.0), records_dir)
    for i, (activity, intensity) in enumerate(
        [("waving", "low"), ("waving", "high"), ("arm_3d", "low"), ("arm_3d", "high")]
    ):
        save_e4_acc(
            synth_accel_trace(activity, intensity, 120.0, seed=i),
            traces_dir / f"{activity}_{intensity}.csv",
        )
    weights_path = work / "weights.bin"
    save_weights(zero_weights(), weights_path)

    out = work / "out"
    steps = [
        [
            "synth",
            "--data-dir", str(records_dir),
            "--traces-dir", str(traces_dir),
            "--out-dir", str(out),
            "--seed", str(args.seed),
            "--gain", str(args.gain),
        ],
    ]
    for argv in steps:
        code = ppgdn(argv)
        if code != 0:
            return code

    noisy_files = sorted(str(p) for p in (out / "signals").glob("*_noisy.csv"))
    for argv in (
        ["detect", "--weights", str(weights_path), "--out", str(out / "labels.csv"), *noisy_files],
        [
            "denoise",
            "--weights", str(weights_path),
            "--translator", "identity",
            "--recon-dir", str(out / "recon"),
            "--provenance", str(out / "provenance.csv"),
            *noisy_files,
        ],
        [
            "eval",
            "--manifest", str(out / "manifest.csv"),
            "--signals-dir", str(out / "signals"),
            "--recon-dir", str(out / "recon"),
            "--report-dir", str(out / "eval"),
        ],
    ):
        code = ppgdn(argv)
        if code != 0:
            return code
    print(f"done; report at {out / 'eval' / 'report.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
