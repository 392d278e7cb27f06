"""8-bit image IO: lossless PNG for outputs and masks, JPEG read for sources.

Conversion to/from 8 bits uses round-half-up and happens only here; everything
in between stays float64 in [0, 1].
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .raster import ImageBuffer, clamp01


def to_uint8(img: ImageBuffer) -> np.ndarray:
    return np.floor(clamp01(img.data) * 255.0 + 0.5).astype(np.uint8)


def from_uint8(arr: np.ndarray) -> ImageBuffer:
    a = np.asarray(arr)
    if a.ndim == 2:
        a = a[:, :, None]
    return ImageBuffer(a.astype(np.float64) / 255.0)


def _to_pil(img: ImageBuffer) -> Image.Image:
    u8 = to_uint8(img)
    if img.channels == 1:
        return Image.fromarray(u8[:, :, 0], mode="L")
    return Image.fromarray(u8, mode="RGB")


def write_png(img: ImageBuffer, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _to_pil(img).save(path, format="PNG")


def read_image(path: str | Path) -> ImageBuffer:
    """Read PNG or JPEG; grayscale stays 1-channel, everything else becomes RGB."""
    with Image.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im)
        else:
            arr = np.asarray(im.convert("RGB"))
    return from_uint8(arr)


def write_mask_png(mask: np.ndarray, path: str | Path) -> None:
    """Binary mask as 8-bit PNG: 0 = background, 255 = instance."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    u8 = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(u8, mode="L").save(path, format="PNG")


def read_mask_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return arr >= 128


def jpeg_roundtrip(img: ImageBuffer, quality: int) -> ImageBuffer:
    """Encode to baseline JPEG at the given quality and decode back."""
    buf = io.BytesIO()
    _to_pil(img).save(buf, format="JPEG", quality=int(quality))
    buf.seek(0)
    with Image.open(buf) as im:
        arr = np.asarray(im.convert("L" if img.channels == 1 else "RGB"))
    out = from_uint8(arr)
    assert out.data.shape == img.data.shape
    return out
