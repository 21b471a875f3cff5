"""Writer for the portable window-classifier weights file.

Layout (little-endian): 8-byte magic ``PPGDETW1``, uint32 version (1),
uint32 layer count, then per-layer records:

* conv1d   (kind 1): uint32 out_ch, in_ch, width; float32 weights
  (out, in, width) row-major; float32 bias (out,)
* maxpool  (kind 2): uint32 pool, stride
* gap      (kind 3): no payload
* dense    (kind 4): uint8 activation (1 relu, 2 softmax); uint32 out, in;
  float32 weights (out, in) row-major; float32 bias (out,)

The consumer validates topology strictly, so the exporter emits exactly the
canonical stack: conv 70x1x10, conv 70x70x10, pool 3/3, conv 140x70x10,
conv 140x140x10, gap, dense 32/relu, dense 16/relu, dense 2/softmax.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"PPGDETW1"
VERSION = 1

KIND_CONV = 1
KIND_POOL = 2
KIND_GAP = 3
KIND_DENSE = 4
ACT_RELU = 1
ACT_SOFTMAX = 2


def _f32_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


def write_weights(path, convs, dense_layers) -> None:
    """Serialize the canonical stack.

    ``convs``: four (weights (out,in,width), bias) pairs in network order.
    ``dense_layers``: three (weights (out,in), bias, activation) triples.
    """
    if len(convs) != 4 or len(dense_layers) != 3:
        raise ValueError("expected 4 conv layers and 3 dense layers")
    chunks = [MAGIC, struct.pack("<II", VERSION, 9)]

    def conv_record(weights, bias):
        weights = np.asarray(weights)
        chunks.append(struct.pack("<B", KIND_CONV))
        chunks.append(struct.pack("<III", *weights.shape))
        chunks.append(_f32_bytes(weights))
        chunks.append(_f32_bytes(bias))

    conv_record(*convs[0])
    conv_record(*convs[1])
    chunks.append(struct.pack("<B", KIND_POOL))
    chunks.append(struct.pack("<II", 3, 3))
    conv_record(*convs[2])
    conv_record(*convs[3])
    chunks.append(struct.pack("<B", KIND_GAP))
    for weights, bias, activation in dense_layers:
        weights = np.asarray(weights)
        chunks.append(struct.pack("<B", KIND_DENSE))
        chunks.append(struct.pack("<B", ACT_RELU if activation == "relu" else ACT_SOFTMAX))
        chunks.append(struct.pack("<II", *weights.shape))
        chunks.append(_f32_bytes(weights))
        chunks.append(_f32_bytes(bias))
    Path(path).write_bytes(b"".join(chunks))
