#!/usr/bin/env python3
"""Generate a synthetic record directory and accelerometer trace directory
in the pipeline's ingestion formats, sized like the real corpora by default
(53 records of 8 minutes; one trace per activity/intensity pair).

Usage:
    python3 scripts/gen_synthetic_data.py --out data/ [--records 53]
        [--duration-s 480] [--trace-duration-s 120] [--seed 0]
"""
import argparse
from pathlib import Path

from ppgdenoise.dataset import save_bidmc, save_e4_acc
from ppgdenoise.noise import ACTIVITIES, INTENSITIES
from ppgdenoise.synthetic import synth_accel_trace, synth_record


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--records", type=int, default=53)
    parser.add_argument("--duration-s", type=float, default=480.0)
    parser.add_argument("--trace-duration-s", type=float, default=120.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    records_dir = out / "records"
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)

    for k in range(args.records):
        record = synth_record(
            f"rec{k:02d}", seed=args.seed * 1_000_003 + k, duration_s=args.duration_s
        )
        save_bidmc(record, records_dir)
    for i, activity in enumerate(ACTIVITIES):
        for j, intensity in enumerate(INTENSITIES):
            trace = synth_accel_trace(
                activity,
                intensity,
                args.trace_duration_s,
                seed=args.seed * 7919 + i * 2 + j,
            )
            save_e4_acc(trace, traces_dir / f"{activity}_{intensity}.csv")
    print(f"records -> {records_dir}")
    print(f"traces -> {traces_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
