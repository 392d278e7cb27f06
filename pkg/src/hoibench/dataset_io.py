"""Annotation, detection, and corrupted-dataset IO with provenance manifests.

Annotations use one canonical JSON schema (see README); detections travel as
JSON Lines, one triplet per line.  Corrupted images are written as PNG under
`<out>/<kind>/<severity>/<image_id>.png` together with a manifest recording
the provenance of every file, so a rerun with the same seed and ladder config
is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import imgio
from .corruptions import ALL_KINDS, CorruptionSpec, apply_corruption
from .errors import ParseError, ValidationError
from .ladders import LadderConfig, load_ladders
from .masking import InstanceMask, MaskLadder, apply_mask, build_semantic_mask, union_masks
from .metrics import DetectionTriplet, GroundTruthTriplet
from .streams import derive_stream

# provenance slot for mask streams, outside the 0..19 corruption ids
MASKING_STREAM_ID = 63


@dataclass(frozen=True)
class ImageInfo:
    id: int
    path: str
    width: int
    height: int


@dataclass
class AnnotationSet:
    mode: str
    images: dict[int, ImageInfo]
    gts: list[GroundTruthTriplet]
    verbs: list[str]
    objects: list[str]
    root: Path = field(default_factory=Path)

    def image_path(self, image_id: int) -> Path:
        p = Path(self.images[image_id].path)
        return p if p.is_absolute() else self.root / p


def _parse_box(raw, what: str) -> tuple[float, float, float, float] | None:
    if raw is None:
        return None
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise ValidationError(f"{what} must be [x, y, w, h]")
    x, y, w, h = (float(v) for v in raw)
    if w < 0 or h < 0:
        raise ValidationError(f"{what} must have non-negative dimensions")
    return (x, y, w, h)


def load_annotations(path: str | Path, mode: str | None = None) -> AnnotationSet:
    """Load and validate the canonical annotation JSON; rare flags are derived."""
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    file_mode = raw.get("mode", "hico-det")
    mode = mode or file_mode
    if mode not in ("hico-det", "v-coco"):
        raise ValidationError(f"mode must be 'hico-det' or 'v-coco', got {mode!r}")
    images = {}
    for rec in raw.get("images", []):
        info = ImageInfo(int(rec["id"]), str(rec["path"]), int(rec["width"]), int(rec["height"]))
        if info.id in images:
            raise ValidationError(f"duplicate image id {info.id}")
        images[info.id] = info
    verbs = list(raw.get("verbs", []))
    objects = list(raw.get("objects", []))

    counts: dict[tuple[int, int], int] = {}
    parsed = []
    for i, rec in enumerate(raw.get("annotations", [])):
        image_id = int(rec["image_id"])
        if image_id not in images:
            raise ValidationError(f"annotation {i} references missing image_id {image_id}")
        verb = int(rec["verb"])
        category = int(rec["object_category"])
        if verbs and not 0 <= verb < len(verbs):
            raise ValidationError(f"annotation {i}: verb id {verb} outside vocabulary of {len(verbs)}")
        if objects and not 0 <= category < len(objects):
            raise ValidationError(f"annotation {i}: object id {category} outside vocabulary of {len(objects)}")
        human = _parse_box(rec["human_box"], f"annotation {i} human_box")
        obj = _parse_box(rec.get("object_box"), f"annotation {i} object_box")
        if human is None:
            raise ValidationError(f"annotation {i}: human_box is required")
        parsed.append((image_id, human, obj, category, verb))
        counts[(verb, category)] = counts.get((verb, category), 0) + 1

    gts = []
    for image_id, human, obj, category, verb in parsed:
        rare = mode == "hico-det" and counts[(verb, category)] < 10
        gts.append(GroundTruthTriplet(image_id, human, obj, category, verb, rare))
    return AnnotationSet(mode=mode, images=images, gts=gts, verbs=verbs, objects=objects, root=path.parent)


def load_detections(path: str | Path, strict: bool = False) -> tuple[list[DetectionTriplet], list[str]]:
    """Parse a JSON Lines detection file; returns (triplets, per-line error messages)."""
    path = Path(path)
    triplets: list[DetectionTriplet] = []
    errors: list[str] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                score = float(rec["score"])
                if not math.isfinite(score):
                    raise ValidationError("score must be finite")
                triplets.append(
                    DetectionTriplet(
                        image_id=int(rec["image_id"]),
                        human_box=_parse_box(rec["human_box"], "human_box"),
                        object_box=_parse_box(rec.get("object_box"), "object_box"),
                        object_category=int(rec.get("object_category", 0)),
                        verb=int(rec["verb"]),
                        score=score,
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                if strict:
                    raise ParseError(str(exc), line=lineno) from exc
                errors.append(f"line {lineno}: {exc}")
    return triplets, errors


def write_detections(triplets: list[DetectionTriplet], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for t in triplets:
            fh.write(
                json.dumps(
                    {
                        "image_id": t.image_id,
                        "human_box": list(t.human_box),
                        "object_box": None if t.object_box is None else list(t.object_box),
                        "object_category": t.object_category,
                        "verb": t.verb,
                        "score": t.score,
                    }
                )
                + "\n"
            )


@dataclass
class DatasetManifest:
    """One record per written file, keyed by path relative to the output root."""

    records: dict[str, dict]
    global_seed: int
    ladder_sha256: str

    def to_json(self) -> dict:
        return {
            "global_seed": self.global_seed,
            "ladder_sha256": self.ladder_sha256,
            "records": {k: self.records[k] for k in sorted(self.records)},
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    @staticmethod
    def read(path: str | Path) -> "DatasetManifest":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return DatasetManifest(raw["records"], raw["global_seed"], raw["ladder_sha256"])


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_corrupted_dataset(
    ann: AnnotationSet,
    cells: list[tuple[str, int]],
    out_dir: str | Path,
    global_seed: int = 0,
    ladders: LadderConfig | None = None,
    threads: int = 1,
) -> DatasetManifest:
    """Corrupt every image over the selected (kind, level) cells and write PNGs."""
    ladders = ladders or load_ladders()
    out_dir = Path(out_dir)
    for kind, level in cells:
        if kind not in ALL_KINDS:
            raise ValidationError(f"unknown corruption kind {kind!r}")
        if not 1 <= level <= 5:
            raise ValidationError(f"severity must be in 1..5, got {level}")

    def produce(task: tuple[int, str, int]) -> tuple[str, dict]:
        image_id, kind, level = task
        spec = CorruptionSpec(kind=kind, severity=level, seed=global_seed)
        corrupted = apply_corruption(sources[image_id], spec, image_id=image_id, ladders=ladders)
        rel = f"{kind}/{level}/{image_id}.png"
        target = out_dir / rel
        imgio.write_png(corrupted, target)
        return rel, {
            "image_id": image_id,
            "kind": kind,
            "severity": level,
            "seed": global_seed,
            "ladder_sha256": ladders.sha256,
            "sha256": _sha256_file(target),
        }

    # a failed run leaves no manifest: its presence marks a complete dataset
    records: dict[str, dict] = {}
    try:
        sources = {image_id: imgio.read_image(ann.image_path(image_id)) for image_id in sorted(ann.images)}
        tasks = [(image_id, kind, level) for image_id in sorted(ann.images) for kind, level in cells]
        if threads <= 1:
            for rel, record in map(produce, tasks):
                records[rel] = record
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for rel, record in pool.map(produce, tasks):
                    records[rel] = record
    except Exception:
        manifest_path = out_dir / "manifest.json"
        if manifest_path.exists():
            manifest_path.unlink()
        raise
    manifest = DatasetManifest(records=records, global_seed=global_seed, ladder_sha256=ladders.sha256)
    manifest.write(out_dir / "manifest.json")
    return manifest


def load_instance_masks(
    ann: AnnotationSet,
    image_id: int,
    masks_dir: str | Path | None,
) -> list[InstanceMask]:
    """Instance masks for one image: PNG files when present, filled boxes otherwise.

    Mask files follow `<image_id>_<instance_id>.png` where instance_id is the
    0-based index of the image's annotations.
    """
    info = ann.images[image_id]
    shape = (info.height, info.width)
    boxes = []
    for gt in ann.gts:
        if gt.image_id != image_id:
            continue
        for box in (gt.human_box, gt.object_box):
            if box is None:
                continue
            x, y, w, h = (int(round(v)) for v in box)
            x = max(0, min(x, info.width - 1))
            y = max(0, min(y, info.height - 1))
            w = max(1, min(w, info.width - x))
            h = max(1, min(h, info.height - y))
            boxes.append((x, y, w, h))
    masks = []
    for idx, bbox in enumerate(boxes):
        mask_file = None if masks_dir is None else Path(masks_dir) / f"{image_id}_{idx}.png"
        if mask_file is not None and mask_file.exists():
            raster = imgio.read_mask_png(mask_file)
            if raster.shape != shape:
                raise ValidationError(f"mask {mask_file.name} has shape {raster.shape}, expected {shape}")
            masks.append(InstanceMask(raster, bbox))
        else:
            masks.append(InstanceMask.from_bbox(shape, bbox))
    return masks


def write_masked_dataset(
    ann: AnnotationSet,
    level: int,
    out_dir: str | Path,
    global_seed: int = 0,
    mask_ladder: MaskLadder | None = None,
    masks_dir: str | Path | None = None,
    single_instance: bool = False,
    ladder_sha256: str = "",
) -> DatasetManifest:
    """Write per-level masked images (and the masks used) with provenance."""
    mask_ladder = mask_ladder or MaskLadder.default()
    out_dir = Path(out_dir)
    records: dict[str, dict] = {}
    for image_id in sorted(ann.images):
        img = imgio.read_image(ann.image_path(image_id))
        stream = derive_stream(global_seed, image_id, MASKING_STREAM_ID, level)
        instances = load_instance_masks(ann, image_id, masks_dir)
        if level == 1 or not instances:
            masked = img
            combined = None
        else:
            if single_instance:
                instances = [instances[stream.integer(0, len(instances))]]
            built = [build_semantic_mask(inst, level, mask_ladder, stream) for inst in instances]
            combined = union_masks(built)
            masked = apply_mask(img, combined)
        rel = f"w{level}/{image_id}.png"
        imgio.write_png(masked, out_dir / rel)
        record = {"image_id": image_id, "level": level, "seed": global_seed, "ladder_sha256": ladder_sha256}
        record["sha256"] = _sha256_file(out_dir / rel)
        records[rel] = record
        if combined is not None:
            mask_rel = f"w{level}/{image_id}_mask.png"
            imgio.write_mask_png(combined, out_dir / mask_rel)
            records[mask_rel] = dict(record, sha256=_sha256_file(out_dir / mask_rel))
    manifest = DatasetManifest(records=records, global_seed=global_seed, ladder_sha256=ladder_sha256)
    manifest.write(out_dir / "manifest.json")
    return manifest
