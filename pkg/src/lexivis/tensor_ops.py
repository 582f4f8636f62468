"""Dense tensor primitives: 2-D convolution, ReLU, 2x2 max-pooling, order statistics.

Activations and weights are plain numpy arrays: activations in channel-major
``(C, H, W)`` float32 layout, kernel banks as :class:`ConvWeights`.  Convolution
accumulates dot products in float64 and stores float32, so results are
independent of any internal chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigurationError

__all__ = [
    "ConvWeights",
    "as_feature_tensor",
    "conv2d",
    "conv2d_reference",
    "relu",
    "maxpool2",
    "quantile_nearest_rank",
]

# float64 elements per im2col chunk (~32 MB); keeps peak memory bounded on
# the widest VGG-19 layers without affecting results.
_CHUNK_ELEMS = 1 << 22


def as_feature_tensor(x) -> np.ndarray:
    """Validate and return ``x`` as a finite (C, H, W) float32 array."""
    arr = np.asarray(x, dtype=np.float32)
    if arr.ndim != 3:
        raise ValueError(f"expected a (C, H, W) array, got shape {arr.shape}")
    if any(s <= 0 for s in arr.shape):
        raise ValueError(f"all tensor dimensions must be positive, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("tensor contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class ConvWeights:
    """One convolution layer's kernel bank.

    ``weights`` has shape (out_channels, in_channels, kh, kw); ``bias`` has one
    entry per output channel.  Both are stored float32.
    """

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float32)
        b = np.ascontiguousarray(self.bias, dtype=np.float32)
        if w.ndim != 4:
            raise ValueError(f"weights must be 4-D (out, in, kh, kw), got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ValueError(
                f"bias shape {b.shape} does not match {w.shape[0]} output channels"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_shape(self) -> tuple[int, int]:
        return self.weights.shape[2], self.weights.shape[3]


def _conv_output_shape(x: np.ndarray, w: ConvWeights, stride: int, padding: int):
    if not isinstance(stride, (int, np.integer)) or stride < 1:
        raise ValueError(f"stride must be a positive integer, got {stride!r}")
    if not isinstance(padding, (int, np.integer)) or padding < 0:
        raise ValueError(f"padding must be a non-negative integer, got {padding!r}")
    c, h, width = x.shape
    if c != w.in_channels:
        raise ConfigurationError(
            f"input has {c} channels but the kernel bank expects {w.in_channels}"
        )
    kh, kw = w.kernel_shape
    out_h = (h + 2 * padding - kh) // stride + 1
    out_w = (width + 2 * padding - kw) // stride + 1
    if out_h <= 0 or out_w <= 0:
        raise ConfigurationError(
            f"kernel {kh}x{kw} with stride {stride}, padding {padding} produces an "
            f"empty output for a {h}x{width} input"
        )
    return out_h, out_w


def conv2d(x, w: ConvWeights, stride: int = 1, padding: int = 1) -> np.ndarray:
    """Zero-padded 2-D convolution of a (C, H, W) tensor with a kernel bank.

    Patch rows are gathered im2col-style and reduced with a float64 matrix
    product, chunked over output rows to bound memory.
    """
    x = as_feature_tensor(x)
    out_h, out_w = _conv_output_shape(x, w, stride, padding)
    kh, kw = w.kernel_shape
    out_c = w.out_channels

    padded = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(padded, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    # windows: (C, out_h, out_w, kh, kw)
    wmat = w.weights.reshape(out_c, -1).astype(np.float64).T
    bias = w.bias.astype(np.float64)

    out = np.empty((out_c, out_h, out_w), dtype=np.float32)
    row_elems = out_w * w.in_channels * kh * kw
    rows_per_chunk = max(1, _CHUNK_ELEMS // max(1, row_elems))
    for r0 in range(0, out_h, rows_per_chunk):
        r1 = min(out_h, r0 + rows_per_chunk)
        block = windows[:, r0:r1].transpose(1, 2, 0, 3, 4)
        patches = block.reshape((r1 - r0) * out_w, -1).astype(np.float64)
        acc = patches @ wmat + bias
        out[:, r0:r1, :] = acc.T.reshape(out_c, r1 - r0, out_w).astype(np.float32)
    return out


def conv2d_reference(x, w: ConvWeights, stride: int = 1, padding: int = 1) -> np.ndarray:
    """Direct loop convolution over (channel, row, column, window); test oracle.

    Same contract as :func:`conv2d`, quadratically slower; kept for
    equivalence checks on small inputs.
    """
    x = as_feature_tensor(x)
    out_h, out_w = _conv_output_shape(x, w, stride, padding)
    kh, kw = w.kernel_shape

    padded = np.pad(x, ((0, 0), (padding, padding), (padding, padding))).astype(np.float64)
    out = np.empty((w.out_channels, out_h, out_w), dtype=np.float32)
    for oc in range(w.out_channels):
        kernel = w.weights[oc].astype(np.float64)
        b = float(w.bias[oc])
        for oy in range(out_h):
            for ox in range(out_w):
                window = padded[:, oy * stride : oy * stride + kh, ox * stride : ox * stride + kw]
                out[oc, oy, ox] = np.float32((window * kernel).sum() + b)
    return out


def relu(x) -> np.ndarray:
    """Elementwise max(0, x); shape and dtype preserved."""
    return np.maximum(np.asarray(x, dtype=np.float32), np.float32(0))


def maxpool2(x) -> np.ndarray:
    """2x2 max-pooling with stride 2.  H and W must be even."""
    x = as_feature_tensor(x)
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise ConfigurationError(f"maxpool2 needs even spatial dims, got {h}x{w}")
    return x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))


def quantile_nearest_rank(values, q: float) -> np.float32:
    """Nearest-rank quantile: the ascending-sorted element at 1-based index ceil(q*N).

    Always returns an element actually present in ``values``.
    """
    arr = np.asarray(values, dtype=np.float32).ravel()
    if arr.size == 0:
        raise ValueError("quantile of an empty sequence")
    if not np.isfinite(arr).all():
        raise ValueError("quantile input contains NaN or Inf")
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile fraction must be in (0, 1], got {q!r}")
    idx = min(arr.size, math.ceil(q * arr.size)) - 1
    return np.partition(arr, idx)[idx]
