"""Versioned severity-ladder configuration.

All numeric severity parameters live in one JSON file so a benchmark run is
reproducible by config hash; the packaged default can be overridden per run.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ValidationError

# Parameters that must increase strictly with severity, or decrease (prefixed -).
_MONOTONE = {
    "MB": "+length",
    "DB": "+radius",
    "GauB": "+sigma",
    "GB": "+max_shift",
    "GauN": "+sigma",
    "ShN": "-rate",
    "S&P": "+prob",
    "JPEG": "-quality",
    "SN": "+sigma",
    "PL": "+regions",
    "EXP": "+over_gain",
    "RE": "+amplitude",
    "OCC": "+min_cover",
    "VE": "-edge_gain",
    "MP": "+amplitude",
    "SC": "+cracks",
    "ET": "+alpha",
    "PD": "+inset",
    "PIX": "+block",
    "ZB": "+zoom",
}


@dataclass(frozen=True)
class LadderConfig:
    raw: dict
    sha256: str
    source: str

    @property
    def version(self) -> int:
        return int(self.raw.get("version", 0))

    def params(self, kind: str, severity: int) -> dict:
        """Scalar parameters of one kind at severity 1..5."""
        if not 1 <= severity <= 5:
            raise ValidationError(f"severity must be in 1..5, got {severity}")
        try:
            vectors = self.raw["kinds"][kind]
        except KeyError:
            raise ValidationError(f"ladder config has no kind {kind!r}") from None
        out = {}
        for name, vec in vectors.items():
            if isinstance(vec, list):
                out[name] = vec[severity - 1]
            else:
                out[name] = vec
        return out

    def cover_ratios(self) -> dict[int, tuple[float, float]]:
        """Masking cover ratios keyed by level index 2..4."""
        ratios = self.raw["masking"]["cover_ratios"]
        out = {}
        for level in (2, 3, 4):
            rw, rh = ratios[f"w{level}"]
            out[level] = (float(rw), float(rh))
        return out

    def dilation_radius_range(self) -> tuple[int, int]:
        lo, hi = self.raw["masking"]["dilation_radius"]
        return int(lo), int(hi)


def _validate(raw: dict) -> None:
    kinds = raw.get("kinds", {})
    missing = set(_MONOTONE) - set(kinds)
    if missing:
        raise ValidationError(f"ladder config missing kinds: {sorted(missing)}")
    for kind, rule in _MONOTONE.items():
        name = rule[1:]
        vec = kinds[kind].get(name)
        if not isinstance(vec, list) or len(vec) != 5:
            raise ValidationError(f"{kind}.{name} must be a 5-vector")
        diffs = [b - a for a, b in zip(vec, vec[1:])]
        ok = all(d > 0 for d in diffs) if rule[0] == "+" else all(d < 0 for d in diffs)
        if not ok:
            raise ValidationError(f"{kind}.{name} must be strictly {'increasing' if rule[0] == '+' else 'decreasing'}")
        for other in kinds[kind].values():
            if isinstance(other, list) and len(other) != 5:
                raise ValidationError(f"every {kind} parameter vector must have length 5")
    ratios = raw.get("masking", {}).get("cover_ratios", {})
    prev = (0.0, 0.0)
    for level in (2, 3, 4):
        pair = ratios.get(f"w{level}")
        if pair is None:
            raise ValidationError(f"masking cover_ratios missing w{level}")
        rw, rh = float(pair[0]), float(pair[1])
        if not (0.0 < rw <= 1.0 and 0.0 < rh <= 1.0):
            raise ValidationError("cover ratios must be in (0, 1]")
        if rw < prev[0] or rh < prev[1]:
            raise ValidationError("cover ratios must be non-decreasing across levels")
        prev = (rw, rh)


def load_ladders(path: str | Path | None = None) -> LadderConfig:
    """Load and validate a ladder config; None loads the packaged default."""
    if path is None:
        ref = resources.files("hoibench").joinpath("data/severity_ladders.json")
        blob = ref.read_bytes()
        source = "builtin:severity_ladders.json"
    else:
        blob = Path(path).read_bytes()
        source = str(path)
    raw = json.loads(blob)
    _validate(raw)
    return LadderConfig(raw=raw, sha256=hashlib.sha256(blob).hexdigest(), source=source)
