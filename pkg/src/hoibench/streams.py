"""Counter-based deterministic random streams keyed by provenance tuples.

Every draw is a pure function of (key, counter), so the sequence produced for
one image never depends on how many other images are being processed or in
which order.  The key is derived from the provenance tuple
(global_seed, image_id, corruption_id, severity) with a splittable 64-bit hash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
# Per-field salts keep permuted provenance tuples from colliding.
_FIELD_SALTS = (
    0xA0761D6478BD642F,
    0xE7037ED1A0B428DB,
    0x8EBC6AF09C88C6E3,
    0x589965CC75374CC3,
)


def _mix64_int(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64(z: np.ndarray) -> np.ndarray:
    # Vectorized splitmix64 finalizer; uint64 arithmetic wraps mod 2^64.
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@dataclass
class RngStream:
    """Splittable counter-based generator; draw i is mix64(key + (i+1)*golden)."""

    key: int
    provenance: tuple[int, int, int, int] | None = None
    counter: int = 0

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return _mix64(np.uint64(self.key) + idx * np.uint64(_GOLDEN))

    def next_u64(self) -> int:
        return int(self._raw(1)[0])

    def uniforms(self, shape) -> np.ndarray:
        """Floats in [0, 1) with 53-bit resolution."""
        n = int(np.prod(shape))
        u = (self._raw(n) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
        return u.reshape(shape)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * float(self.uniforms(1)[0])

    def integers(self, lo: int, hi: int, shape) -> np.ndarray:
        """Integers in [lo, hi), uniform via 53-bit floats (bias negligible for small ranges)."""
        if hi <= lo:
            raise ValueError("empty integer range")
        u = self.uniforms(shape)
        return (lo + np.floor(u * (hi - lo))).astype(np.int64)

    def integer(self, lo: int, hi: int) -> int:
        return int(self.integers(lo, hi, 1)[0])

    def normals(self, shape) -> np.ndarray:
        """Standard normals via Box-Muller on paired uniforms."""
        n = int(np.prod(shape))
        m = (n + 1) // 2
        u1 = 1.0 - self.uniforms(m)  # (0, 1]: keeps log finite
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return z.reshape(shape)

    def poissons(self, lam: np.ndarray) -> np.ndarray:
        """Poisson draws per element; Knuth below lambda 12, normal approximation above."""
        lam = np.asarray(lam, dtype=np.float64)
        out = np.zeros(lam.shape, dtype=np.float64)
        small = lam < 12.0
        if np.any(small):
            ls = lam[small]
            limit = np.exp(-ls)
            prod = self.uniforms(ls.shape)
            k = np.zeros(ls.shape, dtype=np.float64)
            active = prod > limit
            while np.any(active):
                k[active] += 1.0
                prod = prod * self.uniforms(ls.shape)
                active = active & (prod > limit)
            out[small] = k
        if np.any(~small):
            ll = lam[~small]
            z = self.normals(ll.shape)
            out[~small] = np.maximum(0.0, np.round(ll + np.sqrt(ll) * z))
        return out


def derive_stream(global_seed: int, image_id: int, corruption_id: int, severity: int) -> RngStream:
    """Derive the stream for one (image, corruption, severity) benchmark cell."""
    key = _GOLDEN
    for salt, value in zip(_FIELD_SALTS, (global_seed, image_id, corruption_id, severity)):
        key = _mix64_int((key ^ (int(value) & _MASK64)) + salt)
    return RngStream(key=key, provenance=(global_seed, image_id, corruption_id, severity))
