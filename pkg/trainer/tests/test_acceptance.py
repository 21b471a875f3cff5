"""Acceptance suite for the training component.

The gradient check runs by default; the two training criteria are desk-scale
runs marked ``slow`` (enable with ``-m slow``). Each prints a PASS/FAIL line
with its measured value.
"""

import csv
import statistics
import subprocess
import sys
import time
from pathlib import Path

import pytest
import torch

from test_gradcheck import gradient_agreement

REPO_ROOT = Path(__file__).resolve().parents[2]


def test_gradient_check_acceptance(tiny_models, tiny_batches):
    start = time.perf_counter()
    rel, analytic, numeric = gradient_agreement(
        tiny_models, tiny_batches, coords_per_tensor=8, seed=1
    )
    elapsed = time.perf_counter() - start
    assert rel <= 1e-3, f"relative disagreement {rel:.2e}"
    assert elapsed < 300.0
    print(f"PASS gradient check (rel {rel:.2e} <= 1e-3, {elapsed:.0f}s < 300s)")


def _build_corpus(root: Path, which: str = "train") -> Path:
    """Full-size synthetic corpus through the pipeline CLI."""
    data = root / "data"
    if not (data / "records").is_dir():
        subprocess.run(
            [
                sys.executable,
                str(REPO_ROOT / "scripts" / "gen_synthetic_data.py"),
                "--out", str(data),
                "--records", "53",
                "--duration-s", "480",
                "--seed", "0",
            ],
            check=True,
        )
    out = root / which
    if not (out / "manifest.csv").is_file():
        subprocess.run(
            [
                sys.executable, "-m", "ppgdenoise.cli", "synth",
                "--data-dir", str(data / "records"),
                "--traces-dir", str(data / "traces"),
                "--out-dir", str(out),
                "--seed", "0",
                "--gain", "3.0",
                "--strict",
                "--which", which,
                "--no-images",
            ],
            check=True,
        )
    return out


@pytest.mark.slow
def test_detector_training_acceptance(tmp_path_factory):
    from ppgdenoise.detector import load_weights, save_weights
    from ppgtrainer.data import load_labeled_windows
    from ppgtrainer.detector import DetectorTrainConfig, train_detector

    start = time.perf_counter()
    root = tmp_path_factory.mktemp("detector_acceptance")
    corpus = _build_corpus(root)
    windows, labels = load_labeled_windows(corpus)
    assert windows.shape[0] >= 2000
    assert int((labels == 0).sum()) == int((labels == 1).sum())

    weights_path = root / "weights.bin"
    summary = train_detector(
        windows, labels, weights_path, DetectorTrainConfig(epochs=30, lr=1e-3, seed=0)
    )
    elapsed = time.perf_counter() - start
    assert elapsed < 1800.0, f"took {elapsed:.0f}s"

    # Bit-exact consumption by the pipeline package.
    loaded = load_weights(weights_path)
    resaved = root / "resaved.bin"
    save_weights(loaded, resaved)
    assert weights_path.read_bytes() == resaved.read_bytes()

    # Window-level agreement through the pipeline's own detect command.
    labels_csv = root / "labels.csv"
    files = sorted(str(p) for p in (corpus / "signals").glob("*.csv"))
    subprocess.run(
        [
            sys.executable, "-m", "ppgdenoise.cli", "detect",
            "--weights", str(weights_path),
            "--out", str(labels_csv),
            *files,
        ],
        check=True,
    )
    rows = list(csv.DictReader(open(labels_csv)))
    agree = sum(
        1 for r in rows if (r["label"] == "noisy") == r["file"].endswith("_noisy.csv")
    )
    agreement = agree / len(rows)

    assert summary["val_accuracy"] >= 0.95, f"val accuracy {summary['val_accuracy']:.4f}"
    assert agreement >= 0.95, f"detect agreement {agreement:.4f}"
    print(
        f"PASS detector training (val {summary['val_accuracy']:.4f} >= 0.95, "
        f"detect agreement {agreement:.4f} >= 0.95, {elapsed:.0f}s < 1800s)"
    )


@pytest.mark.slow
def test_cyclegan_desk_scale(tmp_path_factory):
    """Full recipe via the orchestration script: 3 seeds, median RMSE
    improvement > 2x via the pipeline's eval command, cycle loss decreasing
    over the first 50 generator steps."""
    root = tmp_path_factory.mktemp("desk_scale")
    result = subprocess.run(
        [
            sys.executable,
            str(REPO_ROOT / "trainer" / "scripts" / "desk_scale.py"),
            "--work", str(root),
            "--seeds", "0", "1", "2",
            "--epochs", "2",
            "--ngf", "16",
            "--n-blocks", "3",
            "--ndf", "32",
            "--max-images", "300",
            "--gain", "3.0",
            "--detector-epochs", "30",
        ],
        capture_output=True,
        text=True,
    )
    sys.stdout.write(result.stdout[-2000:])
    assert result.returncode == 0, result.stdout[-2000:] + result.stderr[-2000:]
    assert "PASS desk-scale criterion" in result.stdout


@pytest.mark.slow
def test_cycle_loss_decreases_early(tmp_path_factory, rng):
    """First-50-step cycle trend on its own, cheap enough to rerun: median
    over 3 seeds on a 40-image-per-domain corpus."""
    from conftest import make_window_image
    from ppgtrainer.pgm import write_pgm
    from ppgtrainer.training import TrainConfig, train_cyclegan

    root = tmp_path_factory.mktemp("cycle_trend")
    noisy, clean = root / "noisy", root / "clean"
    noisy.mkdir(), clean.mkdir()
    for k in range(40):
        write_pgm(make_window_image(rng), noisy / f"rec_{k * 256}_noisy.pgm")
        write_pgm(make_window_image(rng), clean / f"rec_{k * 256}_clean.pgm")
    drops = []
    for seed in (0, 1, 2):
        out = root / f"run{seed}"
        train_cyclegan(
            noisy,
            clean,
            out,
            TrainConfig(
                epochs=2, seed=seed, ngf=8, n_blocks=2, ndf=8, n_layers=2, batch_size=1
            ),
        )
        rows = list(csv.DictReader(open(out / "steps.csv")))[:50]
        values = [float(r["L_cyc"]) for r in rows]
        drops.append(statistics.mean(values[:5]) - statistics.mean(values[-5:]))
    median_drop = statistics.median(drops)
    assert median_drop > 0.0, f"median first-50-step cycle drop {median_drop:.4f}"
    print(f"PASS cycle-loss trend (median drop {median_drop:.4f} > 0 over 3 seeds)")
