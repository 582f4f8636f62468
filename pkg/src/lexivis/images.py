"""Image decoding, ROI extraction, input normalization, and perturbations.

Images are (H, W, 3) uint8 RGB numpy arrays throughout.  All four
perturbations (salt-and-pepper noise, Gaussian blur, erosion, dilation) act on
the 8-bit ROI before normalization, and all windowed operations clamp to the
edge so no artificial border is introduced.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .network import INPUT_SIDE
from .weights import Normalization

__all__ = [
    "load_image",
    "save_image",
    "check_image",
    "crop_roi",
    "auto_roi",
    "to_input_tensor",
    "salt_pepper",
    "gaussian_blur",
    "erode",
    "dilate",
    "PerturbationSpec",
    "apply_perturbation",
    "PERTURBATION_KINDS",
]

PERTURBATION_KINDS = ("saltpepper", "gaussian", "erode", "dilate")


def check_image(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ValueError(
            f"expected an (H, W, 3) uint8 RGB array, got shape "
            f"{getattr(arr, 'shape', None)} dtype {getattr(arr, 'dtype', None)}"
        )
    return arr


def load_image(path) -> np.ndarray:
    """Decode a PNG or JPEG file to an (H, W, 3) uint8 RGB array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def save_image(img, path):
    """Write an RGB array as PNG (used for debug dumps of perturbed ROIs)."""
    Image.fromarray(check_image(img), mode="RGB").save(Path(path))


def crop_roi(img, x: int, y: int, size: int = INPUT_SIDE) -> np.ndarray:
    """Exact pixel copy of the ``size`` x ``size`` window at column x, row y."""
    img = check_image(img)
    h, w = img.shape[:2]
    if x < 0 or y < 0 or x + size > w or y + size > h:
        raise ValueError(
            f"ROI ({x}, {y}) of size {size} does not fit inside a {w}x{h} image"
        )
    return img[y : y + size, x : x + size].copy()


def auto_roi(img, size: int = INPUT_SIDE) -> np.ndarray:
    """Deterministic default ROI: scale the short side to ``size``, center-crop.

    Bilinear resampling; used by the CLI when no coordinates are given.
    """
    img = check_image(img)
    h, w = img.shape[:2]
    if min(h, w) < 1:
        raise ValueError("empty image")
    scale = size / min(h, w)
    new_w, new_h = max(size, round(w * scale)), max(size, round(h * scale))
    resized = np.asarray(
        Image.fromarray(img, mode="RGB").resize((new_w, new_h), Image.BILINEAR)
    )
    x = (new_w - size) // 2
    y = (new_h - size) // 2
    return resized[y : y + size, x : x + size].copy()


def to_input_tensor(img, norm: Normalization) -> np.ndarray:
    """Normalize a 224x224 RGB image to the network's (3, 224, 224) float32 input.

    Per channel: (pixel / pixel_scale - mean) / std, computed in float64 and
    stored float32.  Channel order follows the manifest.
    """
    img = check_image(img)
    if img.shape[:2] != (INPUT_SIDE, INPUT_SIDE):
        raise ValueError(f"expected a {INPUT_SIDE}x{INPUT_SIDE} ROI, got {img.shape[:2]}")
    chw = img.astype(np.float64).transpose(2, 0, 1)
    if norm.channel_order == "bgr":
        chw = chw[::-1]
    mean = np.asarray(norm.mean, dtype=np.float64).reshape(3, 1, 1)
    std = np.asarray(norm.std, dtype=np.float64).reshape(3, 1, 1)
    return ((chw / norm.pixel_scale - mean) / std).astype(np.float32)


def salt_pepper(img, p: float, seed: int = 0) -> np.ndarray:
    """Replace each pixel with probability ``p`` by black or white (1/2 each).

    Bit-reproducible for a fixed seed; the generator is local to the call.
    """
    img = check_image(img)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise proportion must be in [0, 1], got {p!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    h, w = img.shape[:2]
    replace = rng.random((h, w)) < p
    white = rng.random((h, w)) < 0.5
    out = img.copy()
    out[replace & white] = 255
    out[replace & ~white] = 0
    return out


def _gaussian_kernel_1d(k: int) -> np.ndarray:
    # sigma = k/6 ties blur strength to kernel size (~3 sigma of support)
    sigma = k / 6.0
    center = (k - 1) / 2.0
    xs = np.arange(k, dtype=np.float64)
    g = np.exp(-((xs - center) ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


def _check_odd(size, what: str) -> int:
    if not isinstance(size, (int, np.integer)) or size < 1 or size % 2 == 0:
        raise ValueError(f"{what} must be an odd integer >= 1, got {size!r}")
    return int(size)


def _pad_edge(arr: np.ndarray, r: int, axis: int) -> np.ndarray:
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (r, r)
    return np.pad(arr, pad, mode="edge")


def gaussian_blur(img, k: int) -> np.ndarray:
    """Blur with a normalized k x k Gaussian (sigma = k/6), clamp-to-edge borders.

    The 2-D kernel is the outer product of the 1-D one, so the two separable
    passes are exact.  k = 1 is the identity.
    """
    img = check_image(img)
    k = _check_odd(k, "gaussian kernel size")
    if k == 1:
        return img.copy()
    g = _gaussian_kernel_1d(k)
    r = k // 2
    acc = img.astype(np.float64)
    for axis in (0, 1):
        padded = _pad_edge(acc, r, axis)
        out = np.zeros_like(acc)
        for i in range(k):
            sl = [slice(None)] * 3
            sl[axis] = slice(i, i + acc.shape[axis])
            out += g[i] * padded[tuple(sl)]
        acc = out
    return np.clip(np.floor(acc + 0.5), 0, 255).astype(np.uint8)


def _morphology(img, s: int, reducer) -> np.ndarray:
    img = check_image(img)
    s = _check_odd(s, "structuring element size")
    if s == 1:
        return img.copy()
    r = s // 2
    out = img
    for axis in (0, 1):
        padded = _pad_edge(out, r, axis)
        slices = []
        for i in range(s):
            sl = [slice(None)] * 3
            sl[axis] = slice(i, i + out.shape[axis])
            slices.append(padded[tuple(sl)])
        out = reducer.reduce(slices)
    return out


def erode(img, s: int) -> np.ndarray:
    """Grayscale erosion per channel: windowwise min over an s x s square."""
    return _morphology(img, s, np.minimum)


def dilate(img, s: int) -> np.ndarray:
    """Grayscale dilation per channel: windowwise max over an s x s square."""
    return _morphology(img, s, np.maximum)


@dataclass(frozen=True)
class PerturbationSpec:
    """One point on a degradation axis: kind, level, and (for noise) a seed.

    ``level`` is the replaced-pixel proportion for "saltpepper" and the odd
    kernel / structuring-element size for the other kinds.
    """

    kind: str
    level: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "saltpepper":
            if not 0.0 <= self.level <= 1.0:
                raise ValueError(f"saltpepper proportion must be in [0, 1], got {self.level!r}")
        else:
            level = self.level
            if isinstance(level, float):
                if not level.is_integer():
                    raise ValueError(f"{self.kind} size must be an odd integer, got {level!r}")
                level = int(level)
            _check_odd(level, f"{self.kind} size")
            object.__setattr__(self, "level", level)

    @property
    def is_identity(self) -> bool:
        return self.level == 0.0 if self.kind == "saltpepper" else self.level == 1

    def as_dict(self) -> dict:
        d = {"kind": self.kind, "level": self.level}
        if self.kind == "saltpepper":
            d["seed"] = self.seed
        return d


def apply_perturbation(img, spec: PerturbationSpec | None) -> np.ndarray:
    """Apply one perturbation; ``None`` passes the image through untouched."""
    if spec is None:
        return check_image(img)
    if spec.kind == "saltpepper":
        return salt_pepper(img, spec.level, seed=spec.seed)
    if spec.kind == "gaussian":
        return gaussian_blur(img, int(spec.level))
    if spec.kind == "erode":
        return erode(img, int(spec.level))
    return dilate(img, int(spec.level))
