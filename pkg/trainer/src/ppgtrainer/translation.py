"""Apply a trained noisy->clean generator to a folder of window images."""
from __future__ import annotations

import warnings
from pathlib import Path

import torch

from .data import pixels_to_tensor, tensor_to_pixels
from .pgm import PgmError, read_pgm, write_pgm
from .training import load_checkpoint


def translated_name(name: str) -> str:
    stem = Path(name).stem
    for suffix in ("_noisy", "_clean"):
        if stem.endswith(suffix):
            return stem[: -len(suffix)] + "_translated.pgm"
    return stem + "_translated.pgm"


def translate(images_dir, checkpoint_path, out_dir, pattern: str = "*.pgm") -> list[Path]:
    """One output PGM per input image; returns the written paths."""
    _, gen_xy, _, _, _, _ = load_checkpoint(checkpoint_path)
    gen_xy.eval()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    paths = [p for p in sorted(Path(images_dir).glob(pattern)) if "_translated" not in p.stem]
    if not paths:
        raise FileNotFoundError(f"no input images matching {pattern} under {images_dir}")
    with torch.no_grad():
        for path in paths:
            try:
                pixels = read_pgm(path)
            except (PgmError, OSError) as exc:
                warnings.warn(f"skipping {path}: {exc}", stacklevel=2)
                continue
            output = gen_xy(pixels_to_tensor(pixels).unsqueeze(0))[0]
            target = out / translated_name(path.name)
            write_pgm(tensor_to_pixels(output), target)
            written.append(target)
    if not written:
        raise FileNotFoundError(f"no readable images under {images_dir}")
    print(f"translate: {len(written)} images -> {out}")
    return written
