"""Shared fixtures: a deterministic synthetic reference photo and small helpers."""

from __future__ import annotations

import numpy as np
import pytest

import hoibench as hb


def make_reference_photo(width: int = 128, height: int = 128) -> hb.ImageBuffer:
    """Synthetic 'photo' with gradients, shapes, and texture; values in [0.08, 0.92].

    Midtone-heavy by construction so additive-noise oracles are not distorted
    by clamping at the ends of the intensity range.
    """
    y, x = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    u = x / (width - 1.0)
    v = y / (height - 1.0)
    r = 0.35 + 0.4 * u
    g = 0.35 + 0.4 * v
    b = 0.5 + 0.2 * np.sin(2 * np.pi * x / 32.0) * np.cos(2 * np.pi * y / 32.0)
    img = np.stack([r, g, b], axis=2)
    disk = (x - width * 0.3) ** 2 + (y - height * 0.35) ** 2 <= (min(width, height) * 0.18) ** 2
    img[disk] = np.array([0.85, 0.8, 0.75])
    img[int(height * 0.55):int(height * 0.8), int(width * 0.55):int(width * 0.85)] = np.array([0.15, 0.2, 0.25])
    cb = ((x // 2 + y // 2) % 2).astype(float)
    patch = (slice(int(height * 0.1), int(height * 0.3)), slice(int(width * 0.6), int(width * 0.9)))
    for c in range(3):
        img[patch + (c,)] = 0.3 + 0.4 * cb[patch]
    lines = (x + y) % 24 < 2
    img[lines] = np.array([0.75, 0.7, 0.3])
    return hb.ImageBuffer.from_array(np.clip(img, 0.08, 0.92))


def psnr(a: hb.ImageBuffer, b: hb.ImageBuffer) -> float:
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return 200.0
    return 10.0 * float(np.log10(1.0 / mse))


def spearman(xs, ys) -> float:
    def ranks(values):
        order = sorted(range(len(values)), key=lambda i: values[i])
        out = [0.0] * len(values)
        for rank, idx in enumerate(order):
            out[idx] = float(rank)
        return out

    rx, ry = ranks(xs), ranks(ys)
    n = len(xs)
    mx, my = sum(rx) / n, sum(ry) / n
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    den = (sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry)) ** 0.5
    return num / den


@pytest.fixture(scope="session")
def reference_photo() -> hb.ImageBuffer:
    return make_reference_photo()


# Published per-corruption means for four HOI detectors, paired with the
# aggregate each scoreboard reports (20 values in registry order -> mean).
# A fifth published row is internally inconsistent with its reported
# aggregate (46.81 vs 45.05) and is excluded from the oracle.
PUBLISHED_ROWS = {
    "detector-a": (
        [26.63, 19.03, 58.56, 13.87, 52.46, 68.06, 52.66, 65.81, 42.24, 46.69,
         69.22, 57.31, 62.04, 70.77, 47.89, 60.72, 48.99, 53.21, 29.90, 30.49],
        48.83,
    ),
    "detector-b": (
        [15.38, 10.12, 48.73, 7.56, 41.67, 60.92, 28.78, 56.89, 24.24, 28.18,
         64.67, 41.06, 49.75, 67.07, 30.67, 44.30, 37.33, 50.79, 22.39, 22.45],
        37.65,
    ),
    "detector-c": (
        [15.71, 12.10, 51.08, 6.77, 41.65, 62.59, 26.08, 56.32, 20.46, 23.89,
         66.65, 38.55, 51.78, 69.12, 25.63, 44.36, 38.79, 52.34, 15.97, 22.22],
        37.10,
    ),
    "detector-d": (
        [14.64, 9.90, 48.27, 7.74, 40.50, 60.63, 28.37, 56.31, 20.40, 28.52,
         64.94, 40.48, 50.48, 67.48, 32.42, 44.21, 38.27, 51.15, 21.11, 23.24],
        37.45,
    ),
}


def build_tiny_dataset(root, n_images: int = 2, size: int = 24, mode: str = "hico-det"):
    """Write a small self-contained dataset: PNG images plus annotations.json.

    Every image gets one (human, object, verb) annotation whose boxes sit in
    opposite quadrants, so perfect detections are easy to synthesize.
    """
    import json

    from hoibench import imgio

    root.mkdir(parents=True, exist_ok=True)
    (root / "images").mkdir(exist_ok=True)
    images = []
    annotations = []
    for i in range(n_images):
        photo = make_reference_photo(size, size)
        shifted = np.roll(photo.data, shift=3 * i, axis=1)
        imgio.write_png(hb.ImageBuffer.from_array(shifted), root / "images" / f"{i}.png")
        images.append({"id": i, "path": f"images/{i}.png", "width": size, "height": size})
        annotations.append(
            {
                "image_id": i,
                "human_box": [1, 1, size // 3, size // 3],
                "object_box": [size // 2, size // 2, size // 3, size // 3],
                "object_category": 0,
                "verb": i % 2,
            }
        )
    payload = {
        "mode": mode,
        "images": images,
        "verbs": ["hold", "carry"],
        "objects": ["cup"],
        "annotations": annotations,
    }
    ann_path = root / "annotations.json"
    ann_path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return ann_path
