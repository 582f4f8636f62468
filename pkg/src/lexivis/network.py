"""VGG-19 feature extraction: run the conv stack and keep every layer's maps.

The classifier head is never built; the forward pass stops after the last
pooling stage.  Feature maps are captured after each convolution's ReLU by
default (``capture="post_relu"``); ``capture="pre_relu"`` is available for
sensitivity studies on the thresholding rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .tensor_ops import conv2d, maxpool2, relu
from .weights import (
    VGG19_CONV_CHANNELS,
    VGG19_CONV_SIDES,
    VGG19_TOTAL_KERNELS,
    LoadedWeights,
)

__all__ = ["FeatureMapSet", "forward_collect", "VGG19Features", "INPUT_SIDE"]

INPUT_SIDE = 224
_CAPTURE_MODES = ("post_relu", "pre_relu")


@dataclass(frozen=True)
class FeatureMapSet:
    """The 16 captured feature-map stacks of one forward pass, in layer order."""

    maps: tuple[np.ndarray, ...]
    capture: str = "post_relu"

    def __post_init__(self):
        if len(self.maps) != len(VGG19_CONV_CHANNELS):
            raise ValueError(f"expected {len(VGG19_CONV_CHANNELS)} layers, got {len(self.maps)}")
        for i, (m, c, side) in enumerate(zip(self.maps, VGG19_CONV_CHANNELS, VGG19_CONV_SIDES)):
            if m.shape != (c, side, side):
                raise ValueError(
                    f"layer {i + 1} has shape {m.shape}, expected {(c, side, side)}"
                )

    def __len__(self) -> int:
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)

    def __getitem__(self, i):
        return self.maps[i]

    @property
    def total_kernels(self) -> int:
        return sum(m.shape[0] for m in self.maps)           # 5504 for vgg19


def forward_collect(x, weights: LoadedWeights, capture: str = "post_relu") -> FeatureMapSet:
    """Forward a normalized (3, 224, 224) tensor and collect all 16 map stacks."""
    if capture not in _CAPTURE_MODES:
        raise ValueError(f"capture must be one of {_CAPTURE_MODES}, got {capture!r}")
    x = np.asarray(x, dtype=np.float32)
    if x.shape != (3, INPUT_SIDE, INPUT_SIDE):
        raise ValueError(f"input must be (3, {INPUT_SIDE}, {INPUT_SIDE}), got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("input tensor contains NaN or Inf")

    captured = []
    conv_idx = 0
    for spec in weights.manifest.layers:
        if spec.kind == "conv":
            pre = conv2d(x, weights.conv_weights[conv_idx], stride=1, padding=1)
            x = relu(pre)
            captured.append(x if capture == "post_relu" else pre)
            conv_idx += 1
        elif spec.kind == "maxpool":
            x = maxpool2(x)
        # relu entries are folded into the conv step above
    fms = FeatureMapSet(maps=tuple(captured), capture=capture)
    assert fms.total_kernels == VGG19_TOTAL_KERNELS
    return fms


class VGG19Features(BaseEstimator, TransformerMixin):
    """Transformer wrapping :func:`forward_collect`.

    Parameters
    ----------
    weights : path to a manifest.json, WeightManifest, or LoadedWeights
    capture : "post_relu" (default) or "pre_relu"

    ``fit`` loads the weight blobs; ``transform`` accepts a single normalized
    (3, 224, 224) array or a sequence of them and returns the matching
    FeatureMapSet(s).
    """

    def __init__(self, weights=None, capture: str = "post_relu"):
        self.weights = weights
        self.capture = capture

    def fit(self, X=None, y=None):
        if self.weights is None:
            raise ValueError("VGG19Features requires a weights source")
        if isinstance(self.weights, LoadedWeights):
            self.loaded_ = self.weights
        else:
            self.loaded_ = LoadedWeights.load(self.weights)
        return self

    def transform(self, X):
        if not hasattr(self, "loaded_"):
            raise NotFittedError("VGG19Features must be fitted before transform")
        if isinstance(X, np.ndarray) and X.ndim == 3:
            return forward_collect(X, self.loaded_, capture=self.capture)
        return [forward_collect(x, self.loaded_, capture=self.capture) for x in X]
