"""Trainer CLI: train-detector | train-cyclegan | translate."""
from __future__ import annotations

import argparse
import sys

from .data import load_labeled_windows
from .detector import DetectorTrainConfig, train_detector
from .training import TrainConfig, train_cyclegan
from .translation import translate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppgtrain",
        description="Train the window classifier and the image translator; "
        "outputs use the pipeline's exchange formats.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-detector", help="train the clean/noisy window classifier")
    p.add_argument("--data", required=True, help="corpus directory with signals/")
    p.add_argument("--out", required=True, help="weights file to write")
    p.add_argument("--log", help="training log CSV")
    p.add_argument("--epochs", type=int, default=DetectorTrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=DetectorTrainConfig.batch_size)
    p.add_argument("--lr", type=float, default=DetectorTrainConfig.lr)
    p.add_argument("--val-fraction", type=float, default=DetectorTrainConfig.val_fraction)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train-cyclegan", help="train the unpaired image translator")
    p.add_argument("--noisy-dir", required=True)
    p.add_argument("--clean-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--lambda-cyc", type=float, default=TrainConfig.lambda_cyc)
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    p.add_argument("--lr", type=float, default=TrainConfig.lr)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ngf", type=int, default=TrainConfig.ngf)
    p.add_argument("--n-blocks", type=int, default=TrainConfig.n_blocks)
    p.add_argument("--ndf", type=int, default=TrainConfig.ndf)
    p.add_argument("--checkpoint-interval", type=int, default=TrainConfig.checkpoint_interval)
    p.add_argument("--noisy-pattern", default=TrainConfig.noisy_pattern)
    p.add_argument("--clean-pattern", default=TrainConfig.clean_pattern)
    p.add_argument("--max-images", type=int, default=TrainConfig.max_images)

    p = sub.add_parser("translate", help="run the noisy->clean generator over a folder")
    p.add_argument("--images-dir", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--pattern", default="*_noisy.pgm")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train-detector":
            windows, labels = load_labeled_windows(args.data)
            config = DetectorTrainConfig(
                epochs=args.epochs,
                batch_size=args.batch_size,
                lr=args.lr,
                val_fraction=args.val_fraction,
                seed=args.seed,
            )
            train_detector(windows, labels, args.out, config, log_path=args.log)
            return 0
        if args.command == "train-cyclegan":
            config = TrainConfig(
                lambda_cyc=args.lambda_cyc,
                epochs=args.epochs,
                batch_size=args.batch_size,
                lr=args.lr,
                seed=args.seed,
                ngf=args.ngf,
                n_blocks=args.n_blocks,
                ndf=args.ndf,
                checkpoint_interval=args.checkpoint_interval,
                noisy_pattern=args.noisy_pattern,
                clean_pattern=args.clean_pattern,
                max_images=args.max_images,
            )
            train_cyclegan(args.noisy_dir, args.clean_dir, args.out_dir, config)
            return 0
        translate(args.images_dir, args.checkpoint, args.out_dir, pattern=args.pattern)
        return 0
    except (ValueError, FileNotFoundError) as exc:
        print(f"ppgtrain {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
