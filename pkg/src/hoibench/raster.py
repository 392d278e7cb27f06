"""Pixel-level primitives: float image buffers, convolution, warping, resampling.

Images are float64 arrays of shape (height, width, channels) with values in
[0, 1]; 8-bit conversion happens only at the IO boundary (see imgio).  All
operations return freshly allocated buffers and clamp on write.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Mapper = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def clamp01(data: np.ndarray) -> np.ndarray:
    return np.clip(data, 0.0, 1.0)


@dataclass(frozen=True)
class ImageBuffer:
    """H x W x C raster with intensities in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] not in (1, 3):
            raise ValueError(f"image must be (h, w, c) with c in {{1, 3}}, got {d.shape}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("image must be non-empty")
        if d.dtype != np.float64:
            raise ValueError("image data must be float64")
        d.flags.writeable = False

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @staticmethod
    def from_array(arr: np.ndarray) -> "ImageBuffer":
        """Copy an (h, w) or (h, w, c) array into a clamped buffer."""
        a = np.array(arr, dtype=np.float64, copy=True)
        if a.ndim == 2:
            a = a[:, :, None]
        return ImageBuffer(clamp01(a))

    @staticmethod
    def constant(width: int, height: int, value: float, channels: int = 3) -> "ImageBuffer":
        return ImageBuffer(np.full((height, width, channels), float(value)))


@dataclass(frozen=True)
class Kernel2D:
    """Odd-sized filter tap grid; rows x cols, both odd (k x 1 and 1 x k allowed)."""

    weights: np.ndarray

    def __post_init__(self):
        w = self.weights
        if w.ndim != 2:
            raise ValueError("kernel weights must be 2-D")
        if w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0:
            raise ValueError(f"kernel dimensions must be odd, got {w.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape

    @staticmethod
    def normalized(weights: np.ndarray) -> "Kernel2D":
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if total <= 0:
            raise ValueError("kernel weights must have positive sum")
        k = Kernel2D(w / total)
        assert abs(k.weights.sum() - 1.0) < 1e-6
        return k


def _accumulate_taps(data: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Sliding dot product with reflect padding; no clamping, any channel count."""
    kh, kw = weights.shape
    ph, pw = kh // 2, kw // 2
    pad = ((ph, ph), (pw, pw)) + ((0, 0),) * (data.ndim - 2)
    padded = np.pad(data, pad, mode="symmetric")
    h, w = data.shape[:2]
    out = np.zeros_like(data)
    for dy in range(kh):
        for dx in range(kw):
            tap = weights[dy, dx]
            if tap == 0.0:
                continue
            out += tap * padded[dy:dy + h, dx:dx + w]
    return out


def convolve_2d(img: ImageBuffer, kernel: Kernel2D) -> ImageBuffer:
    """Convolve with reflect padding (border pixel included in the reflection)."""
    out = _accumulate_taps(img.data, kernel.weights[::-1, ::-1])
    return ImageBuffer(clamp01(out))


def _sample_bilinear(data: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    h, w = data.shape[:2]
    rows = np.clip(rows, 0.0, h - 1.0)
    cols = np.clip(cols, 0.0, w - 1.0)
    r0 = np.floor(rows).astype(np.int64)
    c0 = np.floor(cols).astype(np.int64)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = (rows - r0)[..., None]
    fc = (cols - c0)[..., None]
    top = data[r0, c0] * (1.0 - fc) + data[r0, c1] * fc
    bot = data[r1, c0] * (1.0 - fc) + data[r1, c1] * fc
    return top * (1.0 - fr) + bot * fr


def _sample_nearest(data: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    h, w = data.shape[:2]
    r = np.clip(np.rint(rows), 0, h - 1).astype(np.int64)
    c = np.clip(np.rint(cols), 0, w - 1).astype(np.int64)
    return data[r, c]


def warp(img: ImageBuffer, mapper: Mapper, sampling: str = "bilinear") -> ImageBuffer:
    """Resample so that out[y, x] = img[mapper(y, x)], border-clamped.

    The mapper receives float64 index grids (rows, cols) of the output and
    returns same-shaped source coordinates; out-of-range sources sample the
    nearest border pixel, making the operation total.
    """
    rows, cols = np.meshgrid(
        np.arange(img.height, dtype=np.float64),
        np.arange(img.width, dtype=np.float64),
        indexing="ij",
    )
    src_r, src_c = mapper(rows, cols)
    if sampling == "bilinear":
        out = _sample_bilinear(img.data, src_r, src_c)
    elif sampling == "nearest":
        out = _sample_nearest(img.data, src_r, src_c)
    else:
        raise ValueError(f"unknown sampling mode: {sampling}")
    return ImageBuffer(clamp01(out))


def resize(img: ImageBuffer, new_w: int, new_h: int, sampling: str = "bilinear") -> ImageBuffer:
    """Resize to exactly (new_w, new_h) with bilinear or nearest sampling."""
    if new_w < 1 or new_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {new_w}x{new_h}")
    if sampling == "nearest":
        # src = floor(dst * S / D), the plain index-scaling rule
        r = np.minimum((np.arange(new_h) * img.height) // new_h, img.height - 1)
        c = np.minimum((np.arange(new_w) * img.width) // new_w, img.width - 1)
        out = img.data[np.ix_(r, c)]
    elif sampling == "bilinear":
        # half-pixel-center mapping: exact identity when sizes match
        r = (np.arange(new_h, dtype=np.float64) + 0.5) * (img.height / new_h) - 0.5
        c = (np.arange(new_w, dtype=np.float64) + 0.5) * (img.width / new_w) - 0.5
        rows, cols = np.meshgrid(r, c, indexing="ij")
        out = _sample_bilinear(img.data, rows, cols)
    else:
        raise ValueError(f"unknown sampling mode: {sampling}")
    return ImageBuffer(clamp01(out))


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps truncated at 3 sigma."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    half = max(1, int(np.ceil(3.0 * sigma)))
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: ImageBuffer, sigma: float) -> ImageBuffer:
    """Separable Gaussian blur with reflect padding."""
    k = gaussian_kernel_1d(sigma)
    img = convolve_2d(img, Kernel2D(k[None, :]))
    return convolve_2d(img, Kernel2D(k[:, None]))


def smooth_2d(field: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian-smooth a plain 2-D float array (used for displacement fields)."""
    k = gaussian_kernel_1d(sigma)
    out = _accumulate_taps(np.asarray(field, dtype=np.float64), k[None, :])
    return _accumulate_taps(out, k[:, None])
