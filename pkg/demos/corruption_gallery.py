"""Walk through the corruption registry: apply every kind at three severities
to a synthetic photo and tile the results into one contact-sheet PNG.

Run from the repo root after `pip install -e .`:

    python demos/corruption_gallery.py

The sheet lands in demos/output/corruption_gallery.png, one row per kind,
columns = severities 1/3/5. Rerunning reproduces the identical file: every
generator draws its randomness from a stream keyed by (seed, image, kind,
severity), never from global state.
"""

from pathlib import Path

import numpy as np

import hoibench as hb
from hoibench import imgio
from hoibench.corruptions import ALL_KINDS, FAMILY_OF, LONG_NAMES
from hoibench.ladders import load_ladders


def make_photo(size: int = 96) -> hb.ImageBuffer:
    y, x = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    img = np.stack(
        [
            0.35 + 0.4 * x / (size - 1.0),
            0.35 + 0.4 * y / (size - 1.0),
            0.5 + 0.2 * np.sin(2 * np.pi * x / 24.0) * np.cos(2 * np.pi * y / 24.0),
        ],
        axis=2,
    )
    disk = (x - size * 0.35) ** 2 + (y - size * 0.4) ** 2 <= (size * 0.2) ** 2
    img[disk] = np.array([0.85, 0.8, 0.7])
    img[int(size * 0.6):int(size * 0.85), int(size * 0.55):int(size * 0.9)] = np.array([0.15, 0.2, 0.3])
    return hb.ImageBuffer.from_array(np.clip(img, 0.05, 0.95))


def main() -> None:
    photo = make_photo()
    config = load_ladders()
    severities = (1, 3, 5)
    pad = 3

    tile_h, tile_w = photo.height + pad, photo.width + pad
    sheet = np.ones((len(ALL_KINDS) * tile_h, (len(severities) + 1) * tile_w, 3))
    for row, kind in enumerate(ALL_KINDS):
        print(f"{kind:<5} [{FAMILY_OF[kind]:<3}] {LONG_NAMES[kind]}")
        sheet[row * tile_h:row * tile_h + photo.height, 0:photo.width] = photo.data
        for col, severity in enumerate(severities, start=1):
            spec = hb.CorruptionSpec(kind, severity, seed=0)
            out = hb.apply_corruption(photo, spec, image_id=0, ladders=config)
            y0, x0 = row * tile_h, col * tile_w
            sheet[y0:y0 + photo.height, x0:x0 + photo.width] = out.data

    out_path = Path(__file__).parent / "output" / "corruption_gallery.png"
    imgio.write_png(hb.ImageBuffer.from_array(sheet), out_path)
    print(f"\nwrote {out_path} (clean column + severities {severities})")


if __name__ == "__main__":
    main()
