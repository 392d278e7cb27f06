"""Instance-mask occlusion pipeline: dilation, convex hull, cover-ratio scaling.

A semantic mask is built from an instance mask by dilating it with a small
random radius, taking the convex hull, and rescaling the hull about its
centroid so its tight bounding box covers a configured fraction of the
instance's ground-truth box.  Applying a mask zeroes the covered pixels.

Hull geometry is exact: hull construction and rasterization use integer
cross products on pixel-center coordinates, which makes the hull operation
idempotent on rasters.  Cover-ratio scaling works on the cell-footprint
polygon (pixel squares rather than centers) so that an n-pixel-wide raster
has footprint width n, matching bounding-box units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, EmptyMaskError, InvalidLevelError
from .raster import ImageBuffer
from .streams import RngStream

LEVEL_CLEAN = 1
LEVELS = (1, 2, 3, 4)

# half-open rasterization tie-break; directions chosen not to parallel lattice edges
_EPS_X = 1e-7
_EPS_Y = 0.6180339887e-7


@dataclass(frozen=True)
class InstanceMask:
    """Binary raster plus the instance's ground-truth box (x, y, w, h)."""

    mask: np.ndarray
    bbox: tuple[int, int, int, int]

    def __post_init__(self):
        m = self.mask
        if m.ndim != 2 or m.dtype != bool:
            raise ValueError("mask must be a 2-D boolean array")
        x, y, w, h = self.bbox
        if w < 1 or h < 1:
            raise ValueError("bbox must have positive dimensions")
        if x < 0 or y < 0 or x + w > m.shape[1] or y + h > m.shape[0]:
            raise ValueError("bbox must lie within the mask raster")
        m.flags.writeable = False

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    @staticmethod
    def from_bbox(shape: tuple[int, int], bbox: tuple[int, int, int, int]) -> "InstanceMask":
        """Filled-box fallback when no segmentation raster exists."""
        m = np.zeros(shape, dtype=bool)
        x, y, w, h = bbox
        m[y:y + h, x:x + w] = True
        return InstanceMask(m, bbox)


@dataclass(frozen=True)
class MaskLadder:
    """Cover ratios (r_w, r_h) for the non-clean levels 2..4."""

    cover_ratios: dict[int, tuple[float, float]]
    dilation_radius: tuple[int, int] = (2, 6)

    def __post_init__(self):
        prev = (0.0, 0.0)
        for level in (2, 3, 4):
            if level not in self.cover_ratios:
                raise ValueError(f"cover ratios missing level {level}")
            rw, rh = self.cover_ratios[level]
            if not (0.0 < rw <= 1.0 and 0.0 < rh <= 1.0):
                raise ValueError("cover ratios must be in (0, 1]")
            if rw < prev[0] or rh < prev[1]:
                raise ValueError("cover ratios must be non-decreasing across levels")
            prev = (rw, rh)

    @staticmethod
    def default() -> "MaskLadder":
        return MaskLadder({2: (0.4, 0.4), 3: (0.5, 0.5), 4: (0.6, 0.6)})


def dilate(m: InstanceMask, radius: int) -> InstanceMask:
    """Morphological dilation with a square element of side 2*radius + 1."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return m
    mask = m.mask
    for axis in (0, 1):
        padded = np.pad(mask, [(radius, radius) if a == axis else (0, 0) for a in (0, 1)], constant_values=False)
        acc = np.zeros_like(mask)
        for off in range(2 * radius + 1):
            sl = [slice(None), slice(None)]
            sl[axis] = slice(off, off + mask.shape[axis])
            acc |= padded[tuple(sl)]
        mask = acc
    return InstanceMask(mask, m.bbox)


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Counterclockwise convex hull of integer points (collinear points dropped)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[tuple[int, int]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[int, int]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _mask_points(mask: np.ndarray) -> list[tuple[int, int]]:
    ys, xs = np.nonzero(mask)
    return list(zip(xs.tolist(), ys.tolist()))


def _rasterize_hull(verts: list[tuple[int, int]], shape: tuple[int, int]) -> np.ndarray:
    """Pixels whose centers lie in the hull of pixel-center points; exact integer tests."""
    out = np.zeros(shape, dtype=bool)
    xs = np.asarray([v[0] for v in verts], dtype=np.int64)
    ys = np.asarray([v[1] for v in verts], dtype=np.int64)
    x0, x1 = max(0, xs.min()), min(shape[1] - 1, xs.max())
    y0, y1 = max(0, ys.min()), min(shape[0] - 1, ys.max())
    if x1 < x0 or y1 < y0:
        return out
    gx, gy = np.meshgrid(np.arange(x0, x1 + 1, dtype=np.int64), np.arange(y0, y1 + 1, dtype=np.int64))
    if len(verts) == 1:
        inside = (gx == xs[0]) & (gy == ys[0])
    elif len(verts) == 2:
        ax, ay = verts[0]
        bx, by = verts[1]
        cross = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        dot = (gx - ax) * (bx - ax) + (gy - ay) * (by - ay)
        inside = (cross == 0) & (dot >= 0) & (dot <= (bx - ax) ** 2 + (by - ay) ** 2)
    else:
        inside = np.ones(gx.shape, dtype=bool)
        n = len(verts)
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            inside &= (bx - ax) * (gy - ay) - (by - ay) * (gx - ax) >= 0
    out[y0:y1 + 1, x0:x1 + 1] = inside
    return out


def convex_hull(m: InstanceMask) -> InstanceMask:
    """Filled convex hull raster of the mask; idempotent."""
    if not m.mask.any():
        raise EmptyMaskError("cannot hull an empty mask")
    verts = _monotone_chain(_mask_points(m.mask))
    return InstanceMask(_rasterize_hull(verts, m.mask.shape), m.bbox)


def _footprint_polygon(mask: np.ndarray) -> list[tuple[int, int]]:
    """Hull of the unit-cell corners of all mask pixels (pixel (x, y) spans [x, x+1) x [y, y+1))."""
    centers = _monotone_chain(_mask_points(mask))
    corners = [(x + dx, y + dy) for x, y in centers for dx in (0, 1) for dy in (0, 1)]
    return _monotone_chain(corners)


def _polygon_area_centroid(verts: list[tuple[float, float]]) -> tuple[float, tuple[float, float]]:
    area2 = 0.0
    cx = cy = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        w = x0 * y1 - x1 * y0
        area2 += w
        cx += (x0 + x1) * w
        cy += (y0 + y1) * w
    if area2 == 0.0:
        return 0.0, (0.0, 0.0)
    return area2 / 2.0, (cx / (3.0 * area2), cy / (3.0 * area2))


def _rasterize_float_polygon(verts: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Half-open rasterization: pixel (x, y) included iff its center (+tiny bias) is inside."""
    out = np.zeros(shape, dtype=bool)
    minx, maxx = verts[:, 0].min(), verts[:, 0].max()
    miny, maxy = verts[:, 1].min(), verts[:, 1].max()
    x0 = max(0, int(np.floor(minx - 1)))
    x1 = min(shape[1] - 1, int(np.ceil(maxx + 1)))
    y0 = max(0, int(np.floor(miny - 1)))
    y1 = min(shape[0] - 1, int(np.ceil(maxy + 1)))
    if x1 < x0 or y1 < y0:
        return out
    gx, gy = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    px = gx + 0.5 + _EPS_X
    py = gy + 0.5 + _EPS_Y
    inside = np.ones(gx.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        inside &= (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= 0.0
    out[y0:y1 + 1, x0:x1 + 1] = inside
    return out


def scale_to_cover(hull: InstanceMask, bbox: tuple[int, int, int, int], ratios: tuple[float, float]) -> InstanceMask:
    """Rescale the hull about its centroid so its tight box covers (r_w, r_h) of bbox."""
    rw, rh = ratios
    if not (0.0 < rw <= 1.0 and 0.0 < rh <= 1.0):
        raise ValueError(f"cover ratios must be in (0, 1], got {ratios}")
    if not hull.mask.any():
        raise EmptyMaskError("cannot scale an empty mask")
    if len(_monotone_chain(_mask_points(hull.mask))) < 3:
        raise DegenerateGeometryError("hull polygon has zero area")
    poly = _footprint_polygon(hull.mask)
    area, centroid = _polygon_area_centroid([(float(x), float(y)) for x, y in poly])
    if area <= 0.0:
        raise DegenerateGeometryError("hull polygon has zero area")
    verts = np.asarray(poly, dtype=np.float64)
    width = verts[:, 0].max() - verts[:, 0].min()
    height = verts[:, 1].max() - verts[:, 1].min()
    sx = rw * bbox[2] / width
    sy = rh * bbox[3] / height
    scaled = np.empty_like(verts)
    scaled[:, 0] = centroid[0] + (verts[:, 0] - centroid[0]) * sx
    scaled[:, 1] = centroid[1] + (verts[:, 1] - centroid[1]) * sy
    # raster centers live at (x + 0.5, y + 0.5) in footprint coordinates
    return InstanceMask(_rasterize_float_polygon(scaled, hull.mask.shape), hull.bbox)


def build_semantic_mask(inst: InstanceMask, level: int, ladder: MaskLadder, stream: RngStream) -> InstanceMask:
    """Compose dilation, hull, and cover-ratio scaling for one masking level."""
    if level not in LEVELS:
        raise InvalidLevelError(f"level must be one of {LEVELS}, got {level}")
    if level == LEVEL_CLEAN:
        return InstanceMask(np.zeros(inst.mask.shape, dtype=bool), inst.bbox)
    lo, hi = ladder.dilation_radius
    radius = stream.integer(lo, hi + 1)
    hull = convex_hull(dilate(inst, radius))
    return scale_to_cover(hull, inst.bbox, ladder.cover_ratios[level])


def union_masks(masks: list[InstanceMask]) -> np.ndarray:
    """Union of instance masks as a plain boolean raster."""
    if not masks:
        raise EmptyMaskError("no masks to union")
    out = np.zeros(masks[0].mask.shape, dtype=bool)
    for m in masks:
        if m.mask.shape != out.shape:
            raise ValueError("mask dimensions differ")
        out |= m.mask
    return out


def apply_mask(img: ImageBuffer, mask: np.ndarray | InstanceMask) -> ImageBuffer:
    """Zero all channels under the mask; everything else is untouched."""
    m = mask.mask if isinstance(mask, InstanceMask) else np.asarray(mask, dtype=bool)
    if m.shape != (img.height, img.width):
        raise ValueError(f"mask shape {m.shape} does not match image {(img.height, img.width)}")
    out = np.array(img.data)
    out[m] = 0.0
    return ImageBuffer(out)
