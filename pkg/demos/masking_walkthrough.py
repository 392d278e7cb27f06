"""Stage-by-stage construction of a semantic occlusion mask.

    python demos/masking_walkthrough.py

An instance raster goes through dilation (breaks contour alignment), convex
hull (fills the silhouette), and cover-ratio scaling (shrinks the hull onto a
configured fraction of the instance's bounding box).  Each stage is saved to
demos/output/ and the pixel counts are printed, so you can watch the area
change: superset after dilation and hull, then controlled shrinkage per level.
"""

from pathlib import Path

import numpy as np

import hoibench as hb
from hoibench import imgio
from hoibench.masking import MaskLadder, apply_mask, build_semantic_mask, convex_hull, dilate
from hoibench.streams import derive_stream


def make_instance() -> hb.InstanceMask:
    # an L-shaped "person" blob with a ragged edge inside a 96x96 frame
    mask = np.zeros((96, 96), dtype=bool)
    mask[20:70, 34:50] = True
    mask[55:70, 50:66] = True
    rng = np.random.default_rng(5)
    ys = rng.integers(18, 72, 60)
    xs = rng.integers(32, 68, 60)
    keep = (ys > 20) & (xs < 64)
    mask[ys[keep], xs[keep]] = True
    ys_all, xs_all = np.nonzero(mask)
    bbox = (int(xs_all.min()), int(ys_all.min()),
            int(xs_all.max() - xs_all.min() + 1), int(ys_all.max() - ys_all.min() + 1))
    return hb.InstanceMask(mask, bbox)


def save_mask(mask: np.ndarray, name: str) -> None:
    imgio.write_mask_png(mask, Path(__file__).parent / "output" / name)


def main() -> None:
    inst = make_instance()
    print(f"instance: area={inst.area} bbox={inst.bbox}")
    save_mask(inst.mask, "mask_0_instance.png")

    grown = dilate(inst, radius=4)
    print(f"dilated (r=4): area={grown.area}  (superset: {bool((inst.mask <= grown.mask).all())})")
    save_mask(grown.mask, "mask_1_dilated.png")

    hull = convex_hull(grown)
    print(f"convex hull: area={hull.area}  (idempotent: {bool(np.array_equal(convex_hull(hull).mask, hull.mask))})")
    save_mask(hull.mask, "mask_2_hull.png")

    ladder = MaskLadder.default()
    print(f"cover ratios: {ladder.cover_ratios}")
    for level in (2, 3, 4):
        stream = derive_stream(0, 0, 63, level)
        built = build_semantic_mask(inst, level, ladder, stream)
        ys, xs = np.nonzero(built.mask)
        tight = (int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))
        target = tuple(round(r * d) for r, d in zip(ladder.cover_ratios[level], inst.bbox[2:]))
        print(f"level w{level}: area={built.area} tight box={tight} target~{target}")
        save_mask(built.mask, f"mask_3_level_w{level}.png")

    # applying a mask zeroes exactly its support
    img = hb.ImageBuffer.from_array(0.3 + 0.5 * np.random.default_rng(1).random((96, 96, 3)))
    built = build_semantic_mask(inst, 3, ladder, derive_stream(0, 0, 63, 3))
    masked = apply_mask(img, built)
    imgio.write_png(masked, Path(__file__).parent / "output" / "mask_4_applied.png")
    print(f"applied w3: zeroed values={int(np.sum(masked.data == 0.0))} (= 3 x {built.area})")


if __name__ == "__main__":
    main()
