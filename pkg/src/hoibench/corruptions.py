"""The 20 benchmark corruption generators, each with a 5-level severity ladder.

Kinds are grouped into four families: optical-system blurs (OS), sensor /
compression / transmission artifacts (SCT), environmentally induced effects
(EI), and geometric & scene distortions (G&S).  Every generator is a pure
function of (image, spec, image_id, ladder config): randomness comes only from
the provenance-keyed stream, so outputs are bit-identical across reruns and
thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import imgio
from .errors import UnknownCorruptionError, ValidationError
from .ladders import LadderConfig, load_ladders
from .raster import ImageBuffer, Kernel2D, clamp01, convolve_2d, gaussian_blur, smooth_2d, warp
from .streams import RngStream, derive_stream

OS_KINDS = ("MB", "DB", "GauB", "GB")
SCT_KINDS = ("GauN", "ShN", "S&P", "JPEG", "SN", "PL")
EI_KINDS = ("EXP", "RE", "OCC", "VE")
GS_KINDS = ("MP", "SC", "ET", "PD", "PIX", "ZB")

ALL_KINDS = OS_KINDS + SCT_KINDS + EI_KINDS + GS_KINDS

FAMILY_OF = {}
for _fam, _kinds in (("OS", OS_KINDS), ("SCT", SCT_KINDS), ("EI", EI_KINDS), ("G&S", GS_KINDS)):
    for _k in _kinds:
        FAMILY_OF[_k] = _fam

KIND_INDEX = {kind: i for i, kind in enumerate(ALL_KINDS)}

LONG_NAMES = {
    "MB": "motion blur",
    "DB": "defocus blur",
    "GauB": "Gaussian blur",
    "GB": "glass blur",
    "GauN": "Gaussian noise",
    "ShN": "shot noise",
    "S&P": "salt-and-pepper noise",
    "JPEG": "JPEG artifacts",
    "SN": "speckle noise",
    "PL": "packet loss",
    "EXP": "exposure",
    "RE": "rainbow effect",
    "OCC": "occlusion",
    "VE": "vignette effect",
    "MP": "moire pattern",
    "SC": "screen crack",
    "ET": "elastic transform",
    "PD": "perspective distortion",
    "PIX": "pixelation",
    "ZB": "zoom blur",
}


def normalize_kind(name: str) -> str:
    """Resolve a user-supplied kind name to its canonical abbreviation."""
    if name in KIND_INDEX:
        return name
    folded = name.strip().lower()
    aliases = {"sp": "S&P", "s&p": "S&P", "snp": "S&P"}
    if folded in aliases:
        return aliases[folded]
    for kind in ALL_KINDS:
        if kind.lower() == folded:
            return kind
    raise UnknownCorruptionError(
        f"unknown corruption kind {name!r}; valid kinds: {', '.join(ALL_KINDS)}"
    )


@dataclass(frozen=True)
class CorruptionSpec:
    """One benchmark cell: (kind, severity 1..5, seed)."""

    kind: str
    severity: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KIND_INDEX:
            raise UnknownCorruptionError(
                f"unknown corruption kind {self.kind!r}; valid kinds: {', '.join(ALL_KINDS)}"
            )
        if not 1 <= int(self.severity) <= 5:
            raise ValidationError(f"severity must be in 1..5, got {self.severity}")


def stream_for(spec: CorruptionSpec, image_id: int) -> RngStream:
    return derive_stream(spec.seed, image_id, KIND_INDEX[spec.kind], spec.severity)


def apply_corruption(
    img: ImageBuffer,
    spec: CorruptionSpec,
    image_id: int = 0,
    ladders: LadderConfig | None = None,
) -> ImageBuffer:
    """Apply one corruption cell; dispatches to the family operation."""
    ladders = ladders or load_ladders()
    stream = stream_for(spec, image_id)
    kind = spec.kind
    if kind in OS_KINDS:
        out = os_blur(img, kind, spec.severity, stream, ladders)
    elif kind in SCT_KINDS:
        out = sct_degrade(img, kind, spec.severity, stream, ladders)
    elif kind in EI_KINDS:
        out = ei_effect(img, kind, spec.severity, stream, ladders)
    else:
        out = gs_distort(img, kind, spec.severity, stream, ladders)
    assert out.data.shape == img.data.shape
    return out


# ---------------------------------------------------------------- OS family


def motion_blur_kernel(length: int, angle_deg: float) -> Kernel2D:
    """Normalized linear motion kernel of the given tap length."""
    if angle_deg % 180 == 0:
        return Kernel2D.normalized(np.ones((1, length)))
    if angle_deg % 180 == 90:
        return Kernel2D.normalized(np.ones((length, 1)))
    w = np.zeros((length, length))
    c = (length - 1) / 2.0
    rad = math.radians(angle_deg)
    for t in np.linspace(-c, c, 4 * length):
        x = int(round(c + t * math.cos(rad)))
        y = int(round(c - t * math.sin(rad)))
        w[y, x] = 1.0
    return Kernel2D.normalized(w)


def disk_kernel(radius: float) -> Kernel2D:
    """Circular point-spread function with antialiased rim."""
    half = int(math.ceil(radius))
    yy, xx = np.mgrid[-half:half + 1, -half:half + 1]
    d = np.hypot(yy, xx)
    return Kernel2D.normalized(np.clip(radius + 0.5 - d, 0.0, 1.0))


def _glass_blur(img: ImageBuffer, sigma: float, max_shift: int, iterations: int, stream: RngStream) -> ImageBuffer:
    out = gaussian_blur(img, sigma)
    h, w = img.height, img.width
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    data = out.data
    for _ in range(iterations):
        dy = stream.integers(-max_shift, max_shift + 1, (h, w))
        dx = stream.integers(-max_shift, max_shift + 1, (h, w))
        r = np.clip(rows + dy, 0, h - 1)
        c = np.clip(cols + dx, 0, w - 1)
        data = data[r, c]
    return gaussian_blur(ImageBuffer(clamp01(data)), sigma)


def os_blur(img: ImageBuffer, kind: str, severity: int, stream: RngStream, ladders: LadderConfig) -> ImageBuffer:
    """Optical-system blurs; MB/DB/GauB are convolutions, GB consumes the stream."""
    if kind not in OS_KINDS:
        raise UnknownCorruptionError(f"{kind!r} is not an OS kind")
    p = ladders.params(kind, severity)
    if kind == "MB":
        return convolve_2d(img, motion_blur_kernel(int(p["length"]), float(p["angle_deg"])))
    if kind == "DB":
        return convolve_2d(img, disk_kernel(float(p["radius"])))
    if kind == "GauB":
        return gaussian_blur(img, float(p["sigma"]))
    return _glass_blur(img, float(p["sigma"]), int(p["max_shift"]), int(p["iterations"]), stream)


# --------------------------------------------------------------- SCT family


def _packet_loss(img: ImageBuffer, regions: int, min_frac: float, max_frac: float, stream: RngStream) -> ImageBuffer:
    h, w = img.height, img.width
    out = np.array(img.data)
    source = img.data
    for _ in range(regions):
        rw = max(1, int(round(stream.uniform(min_frac, max_frac) * w)))
        rh = max(1, int(round(stream.uniform(min_frac, max_frac) * h)))
        x0 = stream.integer(0, max(1, w - rw + 1))
        y0 = stream.integer(0, max(1, h - rh + 1))
        duplicate = stream.uniform() < 0.5
        if duplicate:
            # duplicated region: copy from a shifted window of the clean input
            ox = stream.integer(-w // 4, w // 4 + 1)
            oy = stream.integer(-h // 4, h // 4 + 1)
            sx = min(max(0, x0 + ox), w - rw)
            sy = min(max(0, y0 + oy), h - rh)
            out[y0:y0 + rh, x0:x0 + rw] = source[sy:sy + rh, sx:sx + rw]
        else:
            out[y0:y0 + rh, x0:x0 + rw] = 0.0
    return ImageBuffer(out)


def sct_degrade(img: ImageBuffer, kind: str, severity: int, stream: RngStream, ladders: LadderConfig) -> ImageBuffer:
    """Sensor, compression, and transmission artifacts."""
    if kind not in SCT_KINDS:
        raise UnknownCorruptionError(f"{kind!r} is not an SCT kind")
    p = ladders.params(kind, severity)
    if kind == "GauN":
        noise = stream.normals(img.data.shape) * float(p["sigma"])
        return ImageBuffer(clamp01(img.data + noise))
    if kind == "ShN":
        rate = float(p["rate"])
        counts = stream.poissons(img.data * rate)
        return ImageBuffer(clamp01(counts / rate))
    if kind == "S&P":
        prob = float(p["prob"])
        flip = stream.uniforms((img.height, img.width)) < prob
        salt = stream.uniforms((img.height, img.width)) < 0.5
        out = np.array(img.data)
        out[flip & salt] = 1.0
        out[flip & ~salt] = 0.0
        return ImageBuffer(out)
    if kind == "JPEG":
        return imgio.jpeg_roundtrip(img, int(p["quality"]))
    if kind == "SN":
        grain = stream.normals((img.height, img.width, 1)) * float(p["sigma"])
        return ImageBuffer(clamp01(img.data * (1.0 + grain)))
    return _packet_loss(img, int(p["regions"]), float(p["min_frac"]), float(p["max_frac"]), stream)


# ---------------------------------------------------------------- EI family


def _exposure(img: ImageBuffer, gain: float) -> ImageBuffer:
    return ImageBuffer(clamp01(img.data * gain))


def _rainbow(img: ImageBuffer, amplitude: float, bands: float, stream: RngStream) -> ImageBuffer:
    if img.channels != 3:
        raise ValidationError("rainbow effect requires a 3-channel image")
    h, w = img.height, img.width
    theta = stream.uniform(0.0, math.pi)
    phase = stream.uniform(0.0, 2.0 * math.pi)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    diag = math.hypot(h, w)
    t = (xx * math.cos(theta) + yy * math.sin(theta)) / diag
    overlay = np.stack(
        [np.sin(2.0 * math.pi * bands * t + phase + k * 2.0 * math.pi / 3.0) for k in range(3)],
        axis=2,
    )
    return ImageBuffer(clamp01(img.data + amplitude * overlay))


def _occlusion(img: ImageBuffer, count: int, min_cover: float, stream: RngStream) -> ImageBuffer:
    h, w = img.height, img.width
    out = np.array(img.data)
    for _ in range(count):
        area = stream.uniform(min_cover, 2.0 * min_cover) * w * h
        aspect = stream.uniform(0.5, 2.0)
        rw = max(1, int(round(math.sqrt(area * aspect))))
        rw = max(rw, int(math.ceil(area / h)))
        rw = min(w, rw)
        rh = min(h, max(1, int(math.ceil(area / rw))))
        x0 = stream.integer(0, w - rw + 1)
        y0 = stream.integer(0, h - rh + 1)
        out[y0:y0 + rh, x0:x0 + rw] = 0.0
    return ImageBuffer(out)


def _vignette(img: ImageBuffer, inner_radius: float, edge_gain: float) -> ImageBuffer:
    h, w = img.height, img.width
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    r = np.hypot(yy - cy, xx - cx) / math.hypot(cy, cx)
    t = np.clip((r - inner_radius) / max(1e-9, 1.0 - inner_radius), 0.0, 1.0)
    gain = 1.0 - (1.0 - edge_gain) * t * t
    return ImageBuffer(clamp01(img.data * gain[:, :, None]))


def ei_effect(img: ImageBuffer, kind: str, severity: int, stream: RngStream, ladders: LadderConfig) -> ImageBuffer:
    """Environmentally induced effects."""
    if kind not in EI_KINDS:
        raise UnknownCorruptionError(f"{kind!r} is not an EI kind")
    p = ladders.params(kind, severity)
    if kind == "EXP":
        overexpose = stream.uniform() < 0.5
        gain = float(p["over_gain"]) if overexpose else float(p["under_gain"])
        return _exposure(img, gain)
    if kind == "RE":
        return _rainbow(img, float(p["amplitude"]), float(p["bands"]), stream)
    if kind == "OCC":
        return _occlusion(img, int(p["count"]), float(p["min_cover"]), stream)
    return _vignette(img, float(p["inner_radius"]), float(p["edge_gain"]))


# --------------------------------------------------------------- G&S family


def _moire(img: ImageBuffer, amplitude: float, frequency: float, stream: RngStream) -> ImageBuffer:
    h, w = img.height, img.width
    theta = stream.uniform(0.0, math.pi)
    phase1 = stream.uniform(0.0, 2.0 * math.pi)
    phase2 = stream.uniform(0.0, 2.0 * math.pi)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    diag = math.hypot(h, w)
    u = (xx * math.cos(theta) + yy * math.sin(theta)) / diag
    v = (-xx * math.sin(theta) + yy * math.cos(theta)) / diag
    pattern = np.sin(2.0 * math.pi * frequency * u + phase1) * np.sin(2.0 * math.pi * frequency * 0.93 * v + phase2)
    return ImageBuffer(clamp01(img.data + amplitude * pattern[:, :, None]))


def _thicken(mask: np.ndarray, radius: int) -> np.ndarray:
    out = mask.copy()
    for _ in range(radius):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        out = grown
    return out


def _screen_crack(img: ImageBuffer, cracks: int, thickness: int, length_frac: float, stream: RngStream) -> ImageBuffer:
    h, w = img.height, img.width
    diag = math.hypot(h, w)
    cx = stream.uniform(0.2 * w, 0.8 * w)
    cy = stream.uniform(0.2 * h, 0.8 * h)
    crack_mask = np.zeros((h, w), dtype=bool)
    glare_mask = np.zeros((h, w), dtype=bool)
    for i in range(cracks):
        angle = stream.uniform(0.0, 2.0 * math.pi)
        length = stream.uniform(0.6, 1.0) * length_frac * diag
        segments = 6
        x, y = cx, cy
        step = length / segments
        for seg in range(segments):
            angle += stream.uniform(-0.5, 0.5)
            nx = x + step * math.cos(angle)
            ny = y + step * math.sin(angle)
            n = max(2, int(step * 2))
            xs = np.clip(np.linspace(x, nx, n).round().astype(int), 0, w - 1)
            ys = np.clip(np.linspace(y, ny, n).round().astype(int), 0, h - 1)
            crack_mask[ys, xs] = True
            if seg == 0 and i % 3 == 0:
                glare_mask[ys, xs] = True
            x, y = nx, ny
    crack_mask = _thicken(crack_mask, thickness - 1) if thickness > 1 else crack_mask
    glare_mask = _thicken(glare_mask, thickness)
    out = np.array(img.data)
    out[crack_mask] *= 0.25
    out[glare_mask] = np.minimum(1.0, out[glare_mask] + 0.35)
    return ImageBuffer(clamp01(out))


def _elastic(img: ImageBuffer, alpha: float, smooth_sigma: float, stream: RngStream) -> ImageBuffer:
    h, w = img.height, img.width
    raw_dy = stream.uniforms((h, w)) * 2.0 - 1.0
    raw_dx = stream.uniforms((h, w)) * 2.0 - 1.0
    dy = smooth_2d(raw_dy, smooth_sigma)
    dx = smooth_2d(raw_dx, smooth_sigma)
    # normalize so alpha is the actual peak displacement in pixels
    peak = max(np.abs(dy).max(), np.abs(dx).max(), 1e-12)
    dy = dy * (alpha / peak)
    dx = dx * (alpha / peak)
    return warp(img, lambda rows, cols: (rows + dy, cols + dx))


def perspective_matrix(width: int, height: int, inset: float) -> np.ndarray:
    """Forward keystone homography: top corners move inward by `inset` of the width."""
    w1, h1 = width - 1.0, height - 1.0
    src = [(0.0, 0.0), (w1, 0.0), (w1, h1), (0.0, h1)]
    dst = [(inset * w1, 0.0), ((1.0 - inset) * w1, 0.0), (w1, h1), (0.0, h1)]
    a = []
    b = []
    for (sx, sy), (dx_, dy_) in zip(src, dst):
        a.append([sx, sy, 1, 0, 0, 0, -dx_ * sx, -dx_ * sy])
        a.append([0, 0, 0, sx, sy, 1, -dy_ * sx, -dy_ * sy])
        b.extend([dx_, dy_])
    coeff = np.linalg.solve(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))
    return np.append(coeff, 1.0).reshape(3, 3)


def _apply_homography(mat: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    denom = mat[2, 0] * xs + mat[2, 1] * ys + mat[2, 2]
    px = (mat[0, 0] * xs + mat[0, 1] * ys + mat[0, 2]) / denom
    py = (mat[1, 0] * xs + mat[1, 1] * ys + mat[1, 2]) / denom
    return px, py


def _perspective(img: ImageBuffer, inset: float) -> ImageBuffer:
    inverse = np.linalg.inv(perspective_matrix(img.width, img.height, inset))

    def mapper(rows, cols):
        sx, sy = _apply_homography(inverse, cols, rows)
        return sy, sx

    return warp(img, mapper)


def _pixelate(img: ImageBuffer, block: int) -> ImageBuffer:
    h, w = img.height, img.width
    edges_y = list(range(0, h, block)) + [h]
    edges_x = list(range(0, w, block)) + [w]
    integral = np.zeros((h + 1, w + 1, img.channels))
    integral[1:, 1:] = img.data.cumsum(axis=0).cumsum(axis=1)
    ey = np.asarray(edges_y)
    ex = np.asarray(edges_x)
    sums = (
        integral[np.ix_(ey[1:], ex[1:])]
        - integral[np.ix_(ey[:-1], ex[1:])]
        - integral[np.ix_(ey[1:], ex[:-1])]
        + integral[np.ix_(ey[:-1], ex[:-1])]
    )
    counts = np.outer(np.diff(ey), np.diff(ex))[:, :, None].astype(np.float64)
    means = sums / counts
    out = np.repeat(np.repeat(means, np.diff(ey), axis=0), np.diff(ex), axis=1)
    return ImageBuffer(clamp01(out))


def _zoom_blur(img: ImageBuffer, zoom: float, copies: int) -> ImageBuffer:
    h, w = img.height, img.width
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    acc = np.zeros_like(img.data)
    for i in range(copies):
        scale = 1.0 + zoom * i / max(1, copies - 1)
        layer = warp(img, lambda rows, cols, s=scale: (cy + (rows - cy) / s, cx + (cols - cx) / s))
        acc += layer.data
    return ImageBuffer(clamp01(acc / copies))


def gs_distort(img: ImageBuffer, kind: str, severity: int, stream: RngStream, ladders: LadderConfig) -> ImageBuffer:
    """Geometric and scene distortions."""
    if kind not in GS_KINDS:
        raise UnknownCorruptionError(f"{kind!r} is not a G&S kind")
    p = ladders.params(kind, severity)
    if kind == "MP":
        return _moire(img, float(p["amplitude"]), float(p["frequency"]), stream)
    if kind == "SC":
        return _screen_crack(img, int(p["cracks"]), int(p["thickness"]), float(p["length_frac"]), stream)
    if kind == "ET":
        return _elastic(img, float(p["alpha"]), float(p["smooth_sigma"]), stream)
    if kind == "PD":
        return _perspective(img, float(p["inset"]))
    if kind == "PIX":
        return _pixelate(img, int(p["block"]))
    return _zoom_blur(img, float(p["zoom"]), int(p["copies"]))
