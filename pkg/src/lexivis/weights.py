"""Portable weight format: a JSON manifest plus raw little-endian float32 blobs.

The manifest lists every layer of the feature stack in execution order and
points each convolution at two blob files (kernel weights and biases) with
sha256 digests.  See ``docs/weights-format.md`` for the field-by-field layout.
Only the VGG-19 feature stack is accepted in v1.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, IntegrityError, ManifestError
from .tensor_ops import ConvWeights

__all__ = [
    "VGG19_CONV_CHANNELS",
    "VGG19_CONV_NAMES",
    "VGG19_POOL_AFTER",
    "VGG19_CONV_SIDES",
    "VGG19_TOTAL_KERNELS",
    "VGG19_WEIGHT_COUNT",
    "VGG19_PARAM_COUNT",
    "Normalization",
    "LayerSpec",
    "WeightManifest",
    "LoadedWeights",
    "load_manifest",
    "load_conv_weights",
    "file_sha256",
]

# VGG-19 feature stack: 16 conv layers; a 2x2 pool follows conv layers
# 2, 4, 8, 12 and 16 (1-based).
VGG19_CONV_CHANNELS = (64, 64, 128, 128, 256, 256, 256, 256,
                       512, 512, 512, 512, 512, 512, 512, 512)
VGG19_POOL_AFTER = (2, 4, 8, 12, 16)
VGG19_CONV_NAMES = (
    "conv1_1", "conv1_2",
    "conv2_1", "conv2_2",
    "conv3_1", "conv3_2", "conv3_3", "conv3_4",
    "conv4_1", "conv4_2", "conv4_3", "conv4_4",
    "conv5_1", "conv5_2", "conv5_3", "conv5_4",
)
# Spatial side of each conv layer's output for a 224x224 input.
VGG19_CONV_SIDES = (224, 224, 112, 112, 56, 56, 56, 56,
                    28, 28, 28, 28, 14, 14, 14, 14)
VGG19_TOTAL_KERNELS = sum(VGG19_CONV_CHANNELS)          # 5504
VGG19_WEIGHT_COUNT = sum(
    o * i * 9
    for o, i in zip(VGG19_CONV_CHANNELS, (3,) + VGG19_CONV_CHANNELS[:-1])
)                                                       # 20,018,880
VGG19_PARAM_COUNT = VGG19_WEIGHT_COUNT + VGG19_TOTAL_KERNELS  # 20,024,384

_BLOB_DTYPE = "f32le"


@dataclass(frozen=True)
class Normalization:
    """Input preprocessing constants recorded by the exporter."""

    mean: tuple[float, float, float]
    std: tuple[float, float, float]
    channel_order: str = "rgb"
    pixel_scale: float = 255.0

    def __post_init__(self):
        if self.channel_order not in ("rgb", "bgr"):
            raise ManifestError(f"unknown channel_order {self.channel_order!r}")
        if len(self.mean) != 3 or len(self.std) != 3:
            raise ManifestError("normalization mean/std must have 3 entries")
        if self.pixel_scale <= 0:
            raise ManifestError("pixel_scale must be positive")


@dataclass(frozen=True)
class LayerSpec:
    """One manifest entry.  Blob fields are only set for kind == "conv"."""

    name: str
    kind: str
    in_channels: int = 0
    out_channels: int = 0
    kernel: int = 0
    stride: int = 0
    padding: int = 0
    weights_path: Path | None = None
    bias_path: Path | None = None
    weights_sha256: str = ""
    bias_sha256: str = ""
    weights_shape: tuple[int, ...] = ()
    bias_shape: tuple[int, ...] = ()
    dtype: str = _BLOB_DTYPE


@dataclass(frozen=True)
class WeightManifest:
    """Validated manifest; blobs are loaded separately."""

    arch_name: str
    normalization: Normalization
    layers: tuple[LayerSpec, ...]
    path: Path | None = None
    digest: str = ""

    @property
    def conv_layers(self) -> tuple[LayerSpec, ...]:
        return tuple(s for s in self.layers if s.kind == "conv")


def file_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ManifestError(f"{context}: missing required field {key!r}")
    return obj[key]


def _parse_conv_layer(entry: dict, base: Path, index: int) -> LayerSpec:
    ctx = f"layer {index} ({entry.get('name', '?')})"
    spec = LayerSpec(
        name=_require(entry, "name", ctx),
        kind="conv",
        in_channels=int(_require(entry, "in_channels", ctx)),
        out_channels=int(_require(entry, "out_channels", ctx)),
        kernel=int(_require(entry, "kernel", ctx)),
        stride=int(_require(entry, "stride", ctx)),
        padding=int(_require(entry, "padding", ctx)),
        weights_path=base / _require(entry, "weights_path", ctx),
        bias_path=base / _require(entry, "bias_path", ctx),
        weights_sha256=str(_require(entry, "weights_sha256", ctx)),
        bias_sha256=str(_require(entry, "bias_sha256", ctx)),
        weights_shape=tuple(int(v) for v in _require(entry, "weights_shape", ctx)),
        bias_shape=tuple(int(v) for v in _require(entry, "bias_shape", ctx)),
        dtype=str(entry.get("dtype", _BLOB_DTYPE)),
    )
    if spec.dtype != _BLOB_DTYPE:
        raise ManifestError(f"{ctx}: unsupported dtype {spec.dtype!r} (expected {_BLOB_DTYPE!r})")
    if spec.kernel != 3 or spec.stride != 1 or spec.padding != 1:
        raise ManifestError(
            f"{ctx}: vgg19 conv layers use kernel 3, stride 1, padding 1; "
            f"got kernel={spec.kernel}, stride={spec.stride}, padding={spec.padding}"
        )
    expected_w = (spec.out_channels, spec.in_channels, 3, 3)
    if spec.weights_shape != expected_w:
        raise ManifestError(f"{ctx}: weights_shape {spec.weights_shape} != {expected_w}")
    if spec.bias_shape != (spec.out_channels,):
        raise ManifestError(f"{ctx}: bias_shape {spec.bias_shape} != ({spec.out_channels},)")
    return spec


def _check_blob_file(spec: LayerSpec, path: Path, shape: tuple[int, ...]):
    if not path.is_file():
        raise FileNotFoundError(f"layer {spec.name}: blob file not found: {path}")
    expected = int(np.prod(shape)) * 4
    actual = path.stat().st_size
    if actual != expected:
        raise FormatError(
            f"layer {spec.name}: blob {path} is {actual} bytes, "
            f"expected {expected} for shape {shape}"
        )


def _validate_vgg19_sequence(layers: tuple[LayerSpec, ...]):
    convs = [s for s in layers if s.kind == "conv"]
    if len(convs) != 16:
        raise ManifestError(f"vgg19 requires exactly 16 conv layers, manifest has {len(convs)}")
    out_seq = tuple(s.out_channels for s in convs)
    if out_seq != VGG19_CONV_CHANNELS:
        raise ManifestError(
            f"vgg19 out-channel sequence must be {list(VGG19_CONV_CHANNELS)}, got {list(out_seq)}"
        )
    in_seq = tuple(s.in_channels for s in convs)
    expected_in = (3,) + VGG19_CONV_CHANNELS[:-1]
    if in_seq != expected_in:
        raise ManifestError(
            f"vgg19 in-channel sequence must be {list(expected_in)}, got {list(in_seq)}"
        )

    # Walk the full sequence: conv -> relu, pools at the block boundaries.
    conv_idx = 0
    pool_positions = []
    i = 0
    while i < len(layers):
        s = layers[i]
        if s.kind == "conv":
            conv_idx += 1
            if i + 1 >= len(layers) or layers[i + 1].kind != "relu":
                raise ManifestError(f"layer {s.name}: every conv must be followed by a relu")
            i += 2
        elif s.kind == "maxpool":
            pool_positions.append(conv_idx)
            i += 1
        elif s.kind == "relu":
            raise ManifestError(f"layer {i}: relu without a preceding conv")
        else:
            raise ManifestError(f"layer {i}: unknown kind {s.kind!r}")
    if tuple(pool_positions) != VGG19_POOL_AFTER:
        raise ManifestError(
            f"vgg19 pools must follow conv layers {list(VGG19_POOL_AFTER)}, "
            f"got {pool_positions}"
        )


def load_manifest(path) -> WeightManifest:
    """Parse and fully validate a manifest; blob contents are not read yet.

    Blob files must exist with the declared byte length; checksums are
    verified later by :func:`load_conv_weights`.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ManifestError(f"cannot read manifest {path}: {e}") from e
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ManifestError(f"manifest {path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ManifestError(f"manifest {path}: top level must be an object")

    arch = _require(doc, "arch_name", str(path))
    if arch != "vgg19":
        raise ManifestError(f"unknown arch {arch!r}: only 'vgg19' is supported")

    norm_doc = _require(doc, "normalization", str(path))
    norm = Normalization(
        mean=tuple(float(v) for v in _require(norm_doc, "mean", "normalization")),
        std=tuple(float(v) for v in _require(norm_doc, "std", "normalization")),
        channel_order=str(norm_doc.get("channel_order", "rgb")),
        pixel_scale=float(norm_doc.get("pixel_scale", 255.0)),
    )

    base = path.parent
    layers = []
    for i, entry in enumerate(_require(doc, "layers", str(path))):
        kind = _require(entry, "kind", f"layer {i}")
        if kind == "conv":
            layers.append(_parse_conv_layer(entry, base, i))
        elif kind in ("relu", "maxpool"):
            layers.append(LayerSpec(name=str(entry.get("name", kind)), kind=kind))
        else:
            raise ManifestError(f"layer {i}: unknown kind {kind!r}")
    layers = tuple(layers)

    _validate_vgg19_sequence(layers)
    for spec in layers:
        if spec.kind == "conv":
            _check_blob_file(spec, spec.weights_path, spec.weights_shape)
            _check_blob_file(spec, spec.bias_path, spec.bias_shape)

    return WeightManifest(
        arch_name=arch,
        normalization=norm,
        layers=layers,
        path=path,
        digest=file_sha256(path),
    )


def _read_blob(spec: LayerSpec, path: Path, sha256: str, shape: tuple[int, ...]) -> np.ndarray:
    data = path.read_bytes()
    expected = int(np.prod(shape)) * 4
    if len(data) != expected:
        raise FormatError(
            f"layer {spec.name}: blob {path} is {len(data)} bytes, expected {expected}"
        )
    actual = hashlib.sha256(data).hexdigest()
    if actual != sha256:
        raise IntegrityError(
            f"layer {spec.name}: checksum mismatch for {path}: "
            f"manifest says {sha256}, file is {actual}"
        )
    return np.frombuffer(data, dtype="<f4").reshape(shape)


def load_conv_weights(spec: LayerSpec) -> ConvWeights:
    """Read one conv layer's blobs, verifying checksums before parsing."""
    if spec.kind != "conv":
        raise ValueError(f"layer {spec.name} has kind {spec.kind!r}, not conv")
    w = _read_blob(spec, spec.weights_path, spec.weights_sha256, spec.weights_shape)
    b = _read_blob(spec, spec.bias_path, spec.bias_sha256, spec.bias_shape)
    return ConvWeights(weights=w, bias=b)


@dataclass(frozen=True)
class LoadedWeights:
    """A manifest together with every conv layer's blobs in memory.

    Immutable after construction; safe to share across worker threads.
    """

    manifest: WeightManifest
    conv_weights: tuple[ConvWeights, ...] = field(repr=False, default=())

    @classmethod
    def load(cls, manifest) -> "LoadedWeights":
        if not isinstance(manifest, WeightManifest):
            manifest = load_manifest(manifest)
        loaded = tuple(load_conv_weights(s) for s in manifest.conv_layers)
        return cls(manifest=manifest, conv_weights=loaded)

    @property
    def parameter_count(self) -> int:
        return sum(w.weights.size + w.bias.size for w in self.conv_weights)
