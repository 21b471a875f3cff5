"""Binary PGM (P5) reader/writer for the 256x256, maxval-255 exchange format.

Written independently of the consumer side on purpose: the file format is
the component boundary, so both ends implement it from the same contract.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

SIDE = 256
MAXVAL = 255


class PgmError(ValueError):
    pass


def write_pgm(pixels: np.ndarray, path) -> None:
    pixels = np.asarray(pixels)
    if pixels.shape != (SIDE, SIDE):
        raise PgmError(f"pixels must be {SIDE}x{SIDE}, got {pixels.shape}")
    if pixels.dtype != np.uint8:
        if pixels.min() < 0 or pixels.max() > MAXVAL:
            raise PgmError("pixel values must lie in [0, 255]")
        pixels = pixels.astype(np.uint8)
    header = f"P5\n{SIDE} {SIDE}\n{MAXVAL}\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes(order="C"))


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4 and pos < len(data):
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if len(fields) < 4:
        raise PgmError(f"{path}: truncated header")
    magic, width, height, maxval = fields
    if magic != b"P5":
        raise PgmError(f"{path}: magic {magic!r}, expected b'P5'")
    if (int(width), int(height)) != (SIDE, SIDE):
        raise PgmError(f"{path}: dimensions {width!r}x{height!r}, expected {SIDE}x{SIDE}")
    if int(maxval) != MAXVAL:
        raise PgmError(f"{path}: maxval {maxval!r}, expected {MAXVAL}")
    pos += 1
    body = data[pos : pos + SIDE * SIDE]
    if len(body) != SIDE * SIDE:
        raise PgmError(f"{path}: expected {SIDE * SIDE} pixel bytes, got {len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(SIDE, SIDE).copy()
