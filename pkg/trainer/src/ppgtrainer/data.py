"""Data loading for both trainers, built on the pipeline's file contracts:
signal CSVs ("sample" header, one value per line), the corpus manifest, and
256x256 PGM window images.
"""
from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np
import torch

from .pgm import PgmError, read_pgm

WINDOW = 256
LABEL_CLEAN = 0
LABEL_NOISY = 1


def read_signal_csv(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "sample":
        raise ValueError(f"{path}: expected a 'sample' header line")
    return np.asarray([float(v) for v in lines[1:] if v.strip()], dtype=np.float64)


def windows_of(samples: np.ndarray) -> list[np.ndarray]:
    """Non-overlapping min-max-normalized windows; constant windows skipped."""
    out = []
    for start in range(0, len(samples) - WINDOW + 1, WINDOW):
        chunk = samples[start : start + WINDOW]
        lo, hi = chunk.min(), chunk.max()
        if hi == lo:
            continue
        out.append((chunk - lo) / (hi - lo))
    return out


def load_labeled_windows(synth_out_dir) -> tuple[torch.Tensor, torch.Tensor]:
    """(windows, labels) from a corpus directory's signals/ folder.

    Files ending ``_clean.csv`` label 0, ``_noisy.csv`` label 1; anything
    else is ignored.
    """
    signals_dir = Path(synth_out_dir) / "signals"
    if not signals_dir.is_dir():
        raise FileNotFoundError(f"no signals/ under {synth_out_dir}")
    windows: list[np.ndarray] = []
    labels: list[int] = []
    for path in sorted(signals_dir.glob("*.csv")):
        if path.stem.endswith("_clean"):
            label = LABEL_CLEAN
        elif path.stem.endswith("_noisy"):
            label = LABEL_NOISY
        else:
            continue
        for window in windows_of(read_signal_csv(path)):
            windows.append(window)
            labels.append(label)
    if not windows:
        raise FileNotFoundError(f"no usable windows under {signals_dir}")
    x = torch.tensor(np.stack(windows), dtype=torch.float32)
    y = torch.tensor(labels, dtype=torch.int64)
    return x, y


def pixels_to_tensor(pixels: np.ndarray) -> torch.Tensor:
    """uint8 [0,255] -> float32 [-1,1], shape (1, H, W)."""
    scaled = pixels.astype(np.float32) / 255.0 * 2.0 - 1.0
    return torch.from_numpy(scaled).unsqueeze(0)


def tensor_to_pixels(tensor: torch.Tensor) -> np.ndarray:
    """float [-1,1] -> uint8 [0,255] with round-half-away quantization."""
    array = tensor.detach().squeeze().clamp(-1.0, 1.0).numpy()
    return np.clip(np.round((array + 1.0) / 2.0 * 255.0), 0, 255).astype(np.uint8)


class PgmFolder:
    """Eagerly loaded folder of window images as [-1,1] tensors."""

    def __init__(self, directory, pattern: str = "*.pgm", limit: int = 0):
        self.paths = sorted(Path(directory).glob(pattern))
        if limit:
            self.paths = self.paths[:limit]
        tensors = []
        kept = []
        for path in self.paths:
            try:
                tensors.append(pixels_to_tensor(read_pgm(path)))
            except (PgmError, OSError) as exc:
                warnings.warn(f"skipping unreadable image {path}: {exc}", stacklevel=2)
                continue
            kept.append(path)
        if not tensors:
            raise FileNotFoundError(f"no readable PGM images under {directory}")
        self.paths = kept
        self.images = torch.stack(tensors)

    def __len__(self) -> int:
        return self.images.shape[0]

    def batches(self, batch_size: int, generator: torch.Generator):
        order = torch.randperm(len(self), generator=generator)
        for start in range(0, len(self) - batch_size + 1, batch_size):
            yield self.images[order[start : start + batch_size]]
