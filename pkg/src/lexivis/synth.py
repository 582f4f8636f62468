"""Deterministic synthetic inputs: weight banks and sample photographs.

Weight blobs come from a counter-based generator (FNV-1a key hash plus a
murmur3-finalizer mix) that is exactly reproducible in any language with
32-bit integer arithmetic and IEEE-754 doubles; ``docs/fixtures.md`` pins the
scheme.  Blob digests therefore identify a (seed, layer) pair uniquely, which
is what the cross-implementation fixture tests key on.

Sample images are procedural multi-octave textures with soft blobs, standing
in for natural photographs in batch runs and sweeps.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .weights import (
    VGG19_CONV_CHANNELS,
    VGG19_CONV_NAMES,
    VGG19_POOL_AFTER,
    Normalization,
)

__all__ = [
    "IMAGENET_NORMALIZATION",
    "blob_values",
    "fixture_image_bytes",
    "write_synthetic_weights",
    "generate_sample_image",
]

IMAGENET_NORMALIZATION = Normalization(
    mean=(0.485, 0.456, 0.406),
    std=(0.229, 0.224, 0.225),
    channel_order="rgb",
    pixel_scale=255.0,
)

_MASK32 = 0xFFFFFFFF
_GOLDEN32 = 0x9E3779B9


def _fnv1a32(data: bytes) -> int:
    h = 0x811C9DC5
    for b in data:
        h = ((h ^ b) * 0x01000193) & _MASK32
    return h


def _fmix32_array(x: np.ndarray) -> np.ndarray:
    # murmur3 finalizer; uint64 intermediates keep numpy from overflow noise
    x = x.astype(np.uint64) & _MASK32
    x ^= x >> 16
    x = (x * 0x85EBCA6B) & _MASK32
    x ^= x >> 13
    x = (x * 0xC2B2AE35) & _MASK32
    x ^= x >> 16
    return x


def _uniform_units(name: str, seed: int, count: int) -> np.ndarray:
    """``count`` doubles in [0, 1) for the blob ``name`` under ``seed``."""
    base = _fmix32_array(np.array([_fnv1a32(name.encode()) ^ (seed & _MASK32)]))[0]
    idx = np.arange(count, dtype=np.uint64)
    u = _fmix32_array((base + idx * _GOLDEN32) & _MASK32)
    return u.astype(np.float64) * 2.0**-32


def blob_values(name: str, seed: int, count: int, bound: float) -> np.ndarray:
    """float32 values uniform in [-bound, bound), deterministic in (name, seed)."""
    r = _uniform_units(name, seed, count)
    return ((2.0 * r - 1.0) * bound).astype(np.float32)


def fixture_image_bytes(width: int = 224, height: int = 224, seed: int = 0) -> bytes:
    """Raw RGB bytes of the noise fixture image: channel value = mix output mod 256."""
    u = _uniform_units("fixture_image", seed, width * height * 3)
    return (np.floor(u * 4294967296.0).astype(np.uint64) % 256).astype(np.uint8).tobytes()


def _weight_bound(fan_in: int) -> float:
    # He-style uniform bound keeps activations in range through all 16 layers
    return float(np.sqrt(6.0 / fan_in))


def _bias_bound(fan_in: int) -> float:
    return float(1.0 / np.sqrt(fan_in))


def write_synthetic_weights(out_dir, seed: int = 0) -> Path:
    """Emit a full vgg19 manifest plus blobs generated from ``seed``.

    Returns the manifest path.  Regenerating with the same seed reproduces
    every blob bit for bit, so committed digests stand in for the 80 MB of
    blob data.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    layers = []
    in_channels = 3
    for i, (name, out_channels) in enumerate(zip(VGG19_CONV_NAMES, VGG19_CONV_CHANNELS), start=1):
        fan_in = in_channels * 9
        w_name, b_name = f"{name}.weights", f"{name}.bias"
        w = blob_values(w_name, seed, out_channels * in_channels * 9, _weight_bound(fan_in))
        b = blob_values(b_name, seed, out_channels, _bias_bound(fan_in))
        w_file, b_file = f"{w_name}.bin", f"{b_name}.bin"
        (out_dir / w_file).write_bytes(w.tobytes())
        (out_dir / b_file).write_bytes(b.tobytes())
        layers.append({
            "name": name,
            "kind": "conv",
            "in_channels": in_channels,
            "out_channels": out_channels,
            "kernel": 3,
            "stride": 1,
            "padding": 1,
            "weights_path": w_file,
            "bias_path": b_file,
            "weights_sha256": hashlib.sha256(w.tobytes()).hexdigest(),
            "bias_sha256": hashlib.sha256(b.tobytes()).hexdigest(),
            "weights_shape": [out_channels, in_channels, 3, 3],
            "bias_shape": [out_channels],
            "dtype": "f32le",
        })
        layers.append({"name": f"relu{name[4:]}", "kind": "relu"})
        if i in VGG19_POOL_AFTER:
            layers.append({"name": f"pool{len([p for p in VGG19_POOL_AFTER if p <= i])}",
                           "kind": "maxpool"})
        in_channels = out_channels

    manifest = {
        "format_version": 1,
        "arch_name": "vgg19",
        "generator": {"scheme": "fmix32-counter-v1", "seed": seed},
        "normalization": {
            "mean": list(IMAGENET_NORMALIZATION.mean),
            "std": list(IMAGENET_NORMALIZATION.std),
            "channel_order": IMAGENET_NORMALIZATION.channel_order,
            "pixel_scale": IMAGENET_NORMALIZATION.pixel_scale,
        },
        "layers": layers,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _bilinear_upsample(grid: np.ndarray, size: int) -> np.ndarray:
    """Upsample an (n+1, n+1, 3) lattice to (size, size, 3)."""
    n = grid.shape[0] - 1
    xs = np.linspace(0.0, n, size)
    x0 = np.floor(xs).astype(int)
    x1 = np.minimum(x0 + 1, n)
    f = xs - x0
    rows = grid[x0] * (1 - f)[:, None, None] + grid[x1] * f[:, None, None]
    cols = rows[:, x0] * (1 - f)[None, :, None] + rows[:, x1] * f[None, :, None]
    return cols


def generate_sample_image(seed: int, size: int = 448) -> np.ndarray:
    """A procedural stand-in photograph: fractal texture plus soft objects."""
    rng = np.random.Generator(np.random.PCG64(seed))
    img = np.zeros((size, size, 3), dtype=np.float64)
    amplitude, total = 1.0, 0.0
    for cells in (3, 6, 12, 24, 48, 96):
        grid = rng.random((cells + 1, cells + 1, 3))
        img += amplitude * _bilinear_upsample(grid, size)
        total += amplitude
        amplitude *= 0.55
    img /= total

    ys, xs = np.mgrid[0:size, 0:size] / size
    for _ in range(rng.integers(3, 7)):
        cx, cy = rng.random(2)
        rx, ry = 0.05 + 0.25 * rng.random(2)
        color = rng.random(3)
        d = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2
        alpha = np.exp(-d)[:, :, None]
        img = img * (1 - 0.8 * alpha) + color * 0.8 * alpha

    # gentle directional light so the global histogram is not flat
    tilt = (0.7 + 0.6 * xs * rng.random() + 0.6 * ys * rng.random())[:, :, None]
    img = np.clip(img * tilt, 0.0, 1.0)
    return np.floor(img * 255.0 + 0.5).astype(np.uint8)
