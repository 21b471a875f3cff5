"""Signal-window <-> grayscale-image codec and the PGM exchange format.

A window maps to a symmetric 256x256 image via the pairwise sum
``pixels[i][j] = min(255, floor((s[i] + s[j]) * 128))``; the inverse reads
only the diagonal, ``s[i] = pixels[i][i] / 256``, so a decoded window lies
in [0, 255/256] and round-trips within one quantization step.

Images are exchanged as binary PGM (P5), 256x256, maxval 255 - the simplest
container every component can reproduce bit-exactly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, PgmFormatError
from .signals import PIPELINE_RATE_HZ, WINDOW_SIZE, SignalWindow

IMAGE_SIDE = 256
MAXVAL = 255

IMAGE_KINDS = ("clean", "noisy", "translated")
_NAME_RE = re.compile(r"^(?P<record>.+)_(?P<offset>\d+)_(?P<kind>clean|noisy|translated)\.pgm$")


@dataclass(frozen=True)
class GrayImage:
    """256x256 8-bit grayscale matrix plus the id of its source window."""

    pixels: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.shape != (IMAGE_SIDE, IMAGE_SIDE):
            raise InvalidInputError(
                f"GrayImage needs shape ({IMAGE_SIDE}, {IMAGE_SIDE}), got {pixels.shape}"
            )
        if pixels.dtype != np.uint8:
            if pixels.min() < 0 or pixels.max() > MAXVAL:
                raise InvalidInputError("GrayImage pixels must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        pixels = pixels.copy()
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)


def encode(window: SignalWindow, source_id: str = "") -> GrayImage:
    """Pairwise-sum embedding of a [0, 1] window into a symmetric image."""
    s = window.samples
    if s.min() < 0.0 or s.max() > 1.0:
        raise InvalidInputError("encode needs samples in [0, 1]")
    raw = np.floor((s[:, None] + s[None, :]) * 128.0)
    return GrayImage(np.minimum(raw, MAXVAL).astype(np.uint8), source_id)


def decode(
    image: GrayImage, *, rate_hz: float = PIPELINE_RATE_HZ, origin_index: int = 0
) -> SignalWindow:
    """Recover a window from the image diagonal (values in [0, 255/256])."""
    samples = np.diagonal(image.pixels).astype(np.float64) / 256.0
    return SignalWindow(samples, rate_hz=rate_hz, origin_index=origin_index)


def write_pgm(image: GrayImage, path) -> None:
    """Write the canonical binary PGM form: ``P5\\n256 256\\n255\\n`` + pixels."""
    header = f"P5\n{IMAGE_SIDE} {IMAGE_SIDE}\n{MAXVAL}\n".encode("ascii")
    Path(path).write_bytes(header + image.pixels.tobytes(order="C"))


def read_pgm(path) -> GrayImage:
    """Read a binary PGM, enforcing magic P5, 256x256 dimensions and maxval 255."""
    data = Path(path).read_bytes()
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":  # comment runs to end of line
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise PgmFormatError(f"{path}: truncated header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise PgmFormatError(f"{path}: magic is {magic!r}, expected b'P5'")
    width = _header_int(next_token(), "width", path)
    height = _header_int(next_token(), "height", path)
    if (width, height) != (IMAGE_SIDE, IMAGE_SIDE):
        raise PgmFormatError(
            f"{path}: dimensions {width}x{height}, expected {IMAGE_SIDE}x{IMAGE_SIDE}"
        )
    maxval = _header_int(next_token(), "maxval", path)
    if maxval != MAXVAL:
        raise PgmFormatError(f"{path}: maxval is {maxval}, expected {MAXVAL}")
    pos += 1  # single whitespace byte separates maxval from pixel data
    pixel_bytes = data[pos : pos + IMAGE_SIDE * IMAGE_SIDE]
    if len(pixel_bytes) != IMAGE_SIDE * IMAGE_SIDE:
        raise PgmFormatError(
            f"{path}: pixel payload has {len(pixel_bytes)} bytes, "
            f"expected {IMAGE_SIDE * IMAGE_SIDE}"
        )
    pixels = np.frombuffer(pixel_bytes, dtype=np.uint8).reshape(IMAGE_SIDE, IMAGE_SIDE)
    return GrayImage(pixels, source_id=Path(path).stem)


def _header_int(token: bytes, fieldname: str, path) -> int:
    try:
        return int(token)
    except ValueError:
        raise PgmFormatError(f"{path}: {fieldname} is {token!r}, expected an integer") from None


def image_filename(record: str, offset: int, kind: str) -> str:
    """Canonical name for a window image: ``<record>_<offset>_<kind>.pgm``."""
    if kind not in IMAGE_KINDS:
        raise InvalidInputError(f"kind must be one of {IMAGE_KINDS}, got {kind!r}")
    return f"{record}_{offset}_{kind}.pgm"


def parse_image_filename(name: str) -> tuple[str, int, str]:
    m = _NAME_RE.match(Path(name).name)
    if m is None:
        raise InvalidInputError(f"{name!r} does not match <record>_<offset>_<kind>.pgm")
    return m.group("record"), int(m.group("offset")), m.group("kind")
