"""Clean/noisy window classifier: fixed 1-D CNN topology plus weights file I/O.

The layer stack is pinned (shape chain 247x70, 238x70, 79x70, 70x140,
61x140, 140, 32, 16, 2) and verified on every load and every inference.
Coefficients are stored as little-endian float32 in a portable binary file;
inference accumulates in float64 for cross-platform stability.

Weights file layout (all integers little-endian):

    magic     8 bytes   b"PPGDETW1"
    version   uint32    1
    n_layers  uint32
    then per layer:
      kind    uint8     1=conv1d 2=maxpool1d 3=gap 4=dense
      conv1d:    uint32 out_ch, in_ch, width; float32 weights (out,in,width)
                 row-major; float32 bias (out,)
      maxpool1d: uint32 pool, stride
      gap:       no payload
      dense:     uint8 activation (1=relu 2=softmax); uint32 out_dim, in_dim;
                 float32 weights (out,in) row-major; float32 bias (out,)
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    InvalidInputError,
    ShapeError,
    TopologyError,
    TruncatedFileError,
    VersionMismatchError,
)
from .signals import SignalWindow

MAGIC = b"PPGDETW1"
VERSION = 1

_KIND_CODES = {"conv1d": 1, "maxpool1d": 2, "gap": 3, "dense": 4}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
_ACT_CODES = {"relu": 1, "softmax": 2}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}

# (kind, layer-defining shape ints/activation), in network order.
LAYER_PLAN = (
    ("conv1d", 70, 1, 10),
    ("conv1d", 70, 70, 10),
    ("maxpool1d", 3, 3),
    ("conv1d", 140, 70, 10),
    ("conv1d", 140, 140, 10),
    ("gap",),
    ("dense", 32, 140, "relu"),
    ("dense", 16, 32, "relu"),
    ("dense", 2, 16, "softmax"),
)

# Expected activation shape after each layer for a 256-sample input.
SHAPE_CHAIN = (
    (247, 70),
    (238, 70),
    (79, 70),
    (70, 140),
    (61, 140),
    (140,),
    (32,),
    (16,),
    (2,),
)


def _f32(values, shape) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float32).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("layer coefficients must be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Conv1dLayer:
    kind = "conv1d"
    weights: np.ndarray  # (out_channels, in_channels, width)
    bias: np.ndarray  # (out_channels,)

    def __post_init__(self):
        w = _f32(self.weights, np.shape(self.weights))
        if w.ndim != 3:
            raise InvalidInputError(f"conv1d weights need shape (out, in, width), got {w.shape}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", _f32(self.bias, (w.shape[0],)))

    def plan_entry(self):
        return ("conv1d",) + self.weights.shape


@dataclass(frozen=True)
class MaxPool1dLayer:
    kind = "maxpool1d"
    pool: int = 3
    stride: int = 3

    def plan_entry(self):
        return ("maxpool1d", self.pool, self.stride)


@dataclass(frozen=True)
class GlobalAvgPoolLayer:
    kind = "gap"

    def plan_entry(self):
        return ("gap",)


@dataclass(frozen=True)
class DenseLayer:
    kind = "dense"
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str = "relu"

    def __post_init__(self):
        w = _f32(self.weights, np.shape(self.weights))
        if w.ndim != 2:
            raise InvalidInputError(f"dense weights need shape (out, in), got {w.shape}")
        if self.activation not in _ACT_CODES:
            raise InvalidInputError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", _f32(self.bias, (w.shape[0],)))

    def plan_entry(self):
        return ("dense", self.weights.shape[0], self.weights.shape[1], self.activation)


@dataclass(frozen=True)
class DetectorWeights:
    """All parameters of the classifier, validated against the layer plan."""

    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        validate_topology(self.layers)


@dataclass(frozen=True)
class ClassScores:
    p_clean: float
    p_noisy: float

    def __post_init__(self):
        if not (0.0 <= self.p_clean <= 1.0 and 0.0 <= self.p_noisy <= 1.0):
            raise InvalidInputError("class probabilities must lie in [0, 1]")
        if abs(self.p_clean + self.p_noisy - 1.0) > 1e-6:
            raise InvalidInputError("class probabilities must sum to 1")

    @property
    def label(self) -> str:
        # A tie is labeled clean: pass-through is the conservative route.
        return "noisy" if self.p_noisy > self.p_clean else "clean"


def validate_topology(layers) -> None:
    if len(layers) != len(LAYER_PLAN):
        raise TopologyError(f"expected {len(LAYER_PLAN)} layers, got {len(layers)}")
    for i, (layer, plan) in enumerate(zip(layers, LAYER_PLAN), start=1):
        if layer.plan_entry() != plan:
            raise TopologyError(
                f"layer {i}: expected {plan}, got {layer.plan_entry()}"
            )


def conv1d_valid(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Valid (no padding) stride-1 cross-correlation followed by ReLU.

    x is (L, C); kernels are (K, C, W); the result is (L - W + 1, K).
    """
    x = np.asarray(x, dtype=np.float64)
    kernels = np.asarray(kernels, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if x.ndim != 2 or kernels.ndim != 3 or x.shape[1] != kernels.shape[1]:
        raise ShapeError(f"conv1d shapes disagree: input {x.shape}, kernels {kernels.shape}")
    length, width = x.shape[0], kernels.shape[2]
    if length < width:
        raise ShapeError(f"input length {length} is shorter than kernel width {width}")
    windows = np.lib.stride_tricks.sliding_window_view(x, width, axis=0)  # (L-W+1, C, W)
    out = np.einsum("lcw,kcw->lk", windows, kernels) + bias
    return np.maximum(out, 0.0)


def maxpool1d(x: np.ndarray, pool: int = 3, stride: int = 3) -> np.ndarray:
    """Disjoint max pooling along the first axis; the remainder is dropped."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"maxpool1d needs a (L, C) input, got {x.shape}")
    length = x.shape[0]
    if length < pool:
        raise ShapeError(f"input length {length} is shorter than pool size {pool}")
    out_len = (length - pool) // stride + 1
    starts = np.arange(out_len) * stride
    windows = np.lib.stride_tricks.sliding_window_view(x, pool, axis=0)[starts]
    return windows.max(axis=2)


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"global_avg_pool needs a non-empty (L, C) input, got {x.shape}")
    return x.mean(axis=0)


def dense(x: np.ndarray, weights: np.ndarray, bias: np.ndarray, activation: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if x.ndim != 1 or weights.ndim != 2 or weights.shape[1] != x.shape[0]:
        raise ShapeError(f"dense shapes disagree: input {x.shape}, weights {weights.shape}")
    out = weights @ x + bias
    if activation == "relu":
        return np.maximum(out, 0.0)
    if activation == "softmax":
        shifted = out - out.max()
        e = np.exp(shifted)
        return e / e.sum()
    raise InvalidInputError(f"unknown activation {activation!r}")


def infer(window: SignalWindow, weights: DetectorWeights) -> ClassScores:
    """Run the full stack on one window, checking the shape chain layer by layer."""
    x = window.samples.reshape(-1, 1)
    for i, (layer, expected) in enumerate(zip(weights.layers, SHAPE_CHAIN), start=1):
        if layer.kind == "conv1d":
            x = conv1d_valid(x, layer.weights, layer.bias)
        elif layer.kind == "maxpool1d":
            x = maxpool1d(x, layer.pool, layer.stride)
        elif layer.kind == "gap":
            x = global_avg_pool(x)
        else:
            x = dense(x, layer.weights, layer.bias, layer.activation)
        if x.shape != expected:
            raise ShapeError(f"layer {i} produced shape {x.shape}, expected {expected}")
    return ClassScores(p_clean=float(x[0]), p_noisy=float(x[1]))


def zero_weights() -> DetectorWeights:
    """All-zero coefficients; every inference yields the (0.5, 0.5) tie."""
    return _build(lambda shape: np.zeros(shape, dtype=np.float32))


def random_weights(seed: int = 0, scale: float = 0.1) -> DetectorWeights:
    rng = np.random.default_rng(seed)
    return _build(lambda shape: rng.normal(0.0, scale, size=shape).astype(np.float32))


def _build(make) -> DetectorWeights:
    layers = []
    for plan in LAYER_PLAN:
        if plan[0] == "conv1d":
            _, out_ch, in_ch, width = plan
            layers.append(Conv1dLayer(make((out_ch, in_ch, width)), make((out_ch,))))
        elif plan[0] == "maxpool1d":
            layers.append(MaxPool1dLayer(plan[1], plan[2]))
        elif plan[0] == "gap":
            layers.append(GlobalAvgPoolLayer())
        else:
            _, out_dim, in_dim, activation = plan
            layers.append(DenseLayer(make((out_dim, in_dim)), make((out_dim,)), activation))
    return DetectorWeights(tuple(layers))


def save_weights(weights: DetectorWeights, path) -> None:
    chunks = [MAGIC, struct.pack("<II", VERSION, len(weights.layers))]
    for layer in weights.layers:
        chunks.append(struct.pack("<B", _KIND_CODES[layer.kind]))
        if layer.kind == "conv1d":
            chunks.append(struct.pack("<III", *layer.weights.shape))
            chunks.append(layer.weights.astype("<f4").tobytes(order="C"))
            chunks.append(layer.bias.astype("<f4").tobytes(order="C"))
        elif layer.kind == "maxpool1d":
            chunks.append(struct.pack("<II", layer.pool, layer.stride))
        elif layer.kind == "dense":
            chunks.append(struct.pack("<B", _ACT_CODES[layer.activation]))
            chunks.append(struct.pack("<II", *layer.weights.shape))
            chunks.append(layer.weights.astype("<f4").tobytes(order="C"))
            chunks.append(layer.bias.astype("<f4").tobytes(order="C"))
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFileError(
                f"{self.path}: needed {n} bytes at byte offset {self.pos}, "
                f"file ends at {len(self.data)}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u8(self) -> int:
        return self.take(1)[0]

    def f32_array(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4").reshape(shape)


def load_weights(path) -> DetectorWeights:
    reader = _Reader(Path(path).read_bytes(), path)
    magic = reader.take(len(MAGIC))
    if magic != MAGIC:
        raise BadMagicError(f"{path}: magic is {magic!r}, expected {MAGIC!r}")
    version = reader.u32()
    if version != VERSION:
        raise VersionMismatchError(f"{path}: version is {version}, expected {VERSION}")
    n_layers = reader.u32()
    layers = []
    for _ in range(n_layers):
        code = reader.u8()
        kind = _KIND_NAMES.get(code)
        if kind is None:
            raise TopologyError(
                f"{path}: layer {len(layers) + 1}: unknown layer kind code {code}"
            )
        if kind == "conv1d":
            out_ch, in_ch, width = reader.u32(), reader.u32(), reader.u32()
            w = reader.f32_array((out_ch, in_ch, width))
            b = reader.f32_array((out_ch,))
            layers.append(Conv1dLayer(w, b))
        elif kind == "maxpool1d":
            layers.append(MaxPool1dLayer(reader.u32(), reader.u32()))
        elif kind == "gap":
            layers.append(GlobalAvgPoolLayer())
        else:
            act = _ACT_NAMES.get(reader.u8())
            if act is None:
                raise TopologyError(f"{path}: layer {len(layers) + 1}: unknown activation code")
            out_dim, in_dim = reader.u32(), reader.u32()
            w = reader.f32_array((out_dim, in_dim))
            b = reader.f32_array((out_dim,))
            layers.append(DenseLayer(w, b, act))
    if reader.pos != len(reader.data):
        raise TruncatedFileError(
            f"{path}: {len(reader.data) - reader.pos} trailing bytes at byte offset {reader.pos}"
        )
    return DetectorWeights(tuple(layers))
