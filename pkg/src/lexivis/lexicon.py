"""Turn feature maps into the image's "text": one word count per kernel.

A kernel's word count is the number of its feature-map pixels above a
brightness threshold.  Two threshold readings are supported:

* ``quantile`` (default, level 0.9): pixels strictly greater than the
  nearest-rank 90% quantile of that map, i.e. the top 10% of pixel values.
* ``relative_max``: pixels strictly greater than level * max(map); a map whose
  maximum is <= 0 contributes no words.

Strict inequality means a constant (dead or saturated) map yields count 0.
``strict=False`` switches to >= for sensitivity studies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import CountsFormatError
from .network import FeatureMapSet
from .tensor_ops import quantile_nearest_rank

__all__ = [
    "ThresholdSpec",
    "WordCountTable",
    "word_count",
    "extract_lexicon",
    "LexiconExtractor",
]

_MODES = ("quantile", "relative_max")
_CSV_HEADER = "layer,kernel,count"


@dataclass(frozen=True)
class ThresholdSpec:
    """How a feature map's significant pixels are selected."""

    mode: str = "quantile"
    level: float = 0.9
    strict: bool = True

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"threshold mode must be one of {_MODES}, got {self.mode!r}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"threshold level must be in (0, 1), got {self.level!r}")

    def as_dict(self) -> dict:
        return {"mode": self.mode, "level": self.level, "strict": self.strict}

    @classmethod
    def parse(cls, text: str, strict: bool = True) -> "ThresholdSpec":
        """Parse the CLI form ``MODE:LEVEL``, e.g. ``quantile:0.9``."""
        mode, sep, level = text.partition(":")
        if not sep:
            raise ValueError(f"threshold must look like MODE:LEVEL, got {text!r}")
        return cls(mode=mode, level=float(level), strict=strict)


def word_count(feature_map, spec: ThresholdSpec = ThresholdSpec()) -> int:
    """Count one kernel's words: feature-map pixels above the threshold."""
    values = np.asarray(feature_map, dtype=np.float32).ravel()
    if values.size == 0:
        raise ValueError("empty feature map")
    if spec.mode == "quantile":
        thr = np.float64(quantile_nearest_rank(values, spec.level))
    else:
        peak = np.float64(values.max())
        if peak <= 0.0:
            return 0
        thr = np.float64(spec.level) * peak
    if spec.strict:
        return int((values > thr).sum())
    return int((values >= thr).sum())


def _layer_counts(stack: np.ndarray, spec: ThresholdSpec) -> np.ndarray:
    """Vectorized word_count over every kernel of one (C, H, W) layer."""
    flat = stack.reshape(stack.shape[0], -1)
    n = flat.shape[1]
    if spec.mode == "quantile":
        idx = min(n, math.ceil(spec.level * n)) - 1
        thr = np.partition(flat, idx, axis=1)[:, idx].astype(np.float64)
    else:
        peak = flat.max(axis=1).astype(np.float64)
        thr = np.float64(spec.level) * peak
    if spec.strict:
        counts = (flat > thr[:, None]).sum(axis=1)
    else:
        counts = (flat >= thr[:, None]).sum(axis=1)
    if spec.mode == "relative_max":
        counts[flat.max(axis=1) <= 0] = 0
    return counts.astype(np.int64)


@dataclass(frozen=True)
class WordCountTable:
    """Per (layer, kernel) word counts plus provenance metadata.

    Rows are ordered by (layer, kernel); layers are 1-based, kernels 0-based.
    ``metadata`` records image id, threshold, and perturbation so reports can
    be traced back to their inputs.
    """

    layers: np.ndarray
    kernels: np.ndarray
    counts: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        layers = np.asarray(self.layers, dtype=np.int64)
        kernels = np.asarray(self.kernels, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if not (layers.shape == kernels.shape == counts.shape) or layers.ndim != 1:
            raise ValueError("layers, kernels and counts must be equal-length 1-D arrays")
        if layers.size and (layers.min() < 1 or kernels.min() < 0 or counts.min() < 0):
            raise ValueError("layers must be >= 1, kernels and counts >= 0")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return self.counts.size

    @property
    def nonzero_counts(self) -> np.ndarray:
        return self.counts[self.counts > 0]

    def layer_totals(self) -> tuple[np.ndarray, np.ndarray]:
        """(distinct layer ids ascending, summed counts per layer)."""
        ids = np.unique(self.layers)
        totals = np.array(
            [self.counts[self.layers == i].sum() for i in ids], dtype=np.int64
        )
        return ids, totals

    # -- interchange formats ------------------------------------------------

    def to_csv(self, path):
        lines = [_CSV_HEADER]
        lines += [f"{l},{k},{c}" for l, k, c in zip(self.layers, self.kernels, self.counts)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_csv(cls, path, metadata: dict | None = None) -> "WordCountTable":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise CountsFormatError(f"cannot read counts file {path}: {e}") from e
        lines = text.splitlines()
        if not lines or lines[0].strip() != _CSV_HEADER:
            raise CountsFormatError(f"{path}:1: expected header {_CSV_HEADER!r}")
        layers, kernels, counts = [], [], []
        seen = set()
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise CountsFormatError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
            try:
                l, k, c = (int(p) for p in parts)
            except ValueError as e:
                raise CountsFormatError(f"{path}:{lineno}: non-integer field: {e}") from e
            if l < 1 or k < 0 or c < 0:
                raise CountsFormatError(f"{path}:{lineno}: out-of-range values {l},{k},{c}")
            if (l, k) in seen:
                raise CountsFormatError(f"{path}:{lineno}: duplicate entry for layer {l} kernel {k}")
            seen.add((l, k))
            layers.append(l)
            kernels.append(k)
            counts.append(c)
        return cls(
            layers=np.array(layers, dtype=np.int64),
            kernels=np.array(kernels, dtype=np.int64),
            counts=np.array(counts, dtype=np.int64),
            metadata=metadata or {"source": str(path)},
        )

    def to_json(self, path):
        doc = {
            "metadata": self.metadata,
            "counts": [[int(l), int(k), int(c)]
                       for l, k, c in zip(self.layers, self.kernels, self.counts)],
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path) -> "WordCountTable":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            rows = doc["counts"]
            layers = np.array([r[0] for r in rows], dtype=np.int64)
            kernels = np.array([r[1] for r in rows], dtype=np.int64)
            counts = np.array([r[2] for r in rows], dtype=np.int64)
            return cls(layers=layers, kernels=kernels, counts=counts,
                       metadata=doc.get("metadata", {}))
        except (json.JSONDecodeError, KeyError, IndexError, TypeError, ValueError) as e:
            raise CountsFormatError(f"cannot parse counts JSON {path}: {e}") from e


def extract_lexicon(
    fms: FeatureMapSet,
    spec: ThresholdSpec = ThresholdSpec(),
    image_id: str | None = None,
    perturbation: dict | None = None,
) -> WordCountTable:
    """Apply the word-count rule to every kernel of every layer.

    Row order is (layer, kernel) ascending regardless of how the maps were
    computed, so tables are byte-stable across runs.
    """
    layers, kernels, counts = [], [], []
    for layer_idx, stack in enumerate(fms, start=1):
        layer_counts = _layer_counts(stack, spec)
        layers.append(np.full(layer_counts.size, layer_idx, dtype=np.int64))
        kernels.append(np.arange(layer_counts.size, dtype=np.int64))
        counts.append(layer_counts)
    metadata = {"threshold": spec.as_dict()}
    if image_id is not None:
        metadata["image_id"] = image_id
    metadata["perturbation"] = perturbation
    return WordCountTable(
        layers=np.concatenate(layers),
        kernels=np.concatenate(kernels),
        counts=np.concatenate(counts),
        metadata=metadata,
    )


class LexiconExtractor(BaseEstimator, TransformerMixin):
    """Stateless transformer from FeatureMapSet to WordCountTable."""

    def __init__(self, mode: str = "quantile", level: float = 0.9, strict: bool = True):
        self.mode = mode
        self.level = level
        self.strict = strict

    def _spec(self) -> ThresholdSpec:
        return ThresholdSpec(mode=self.mode, level=self.level, strict=self.strict)

    def fit(self, X=None, y=None):
        self._spec()  # validate parameters
        return self

    def transform(self, X):
        spec = self._spec()
        if isinstance(X, FeatureMapSet):
            return extract_lexicon(X, spec)
        return [extract_lexicon(fms, spec) for fms in X]
