"""HOI detection scoring and the robustness indices.

Detection triplets are matched greedily in score order within each
(verb, object-category) class; a prediction is a true positive when both its
human and object boxes overlap an unmatched ground truth at IoU >= 0.5 (the
min of the two IoUs decides).  AP uses the all-point interpolated
precision-recall area.  The robustness matrix aggregates per-cell metric
values into the mean index (mean of per-corruption level means) and the
composite index (clean-normalized means with a log-variance stability
penalty).
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

from .corruptions import ALL_KINDS
from .errors import ValidationError

Box = tuple[float, float, float, float]


@dataclass(frozen=True)
class DetectionTriplet:
    image_id: int
    human_box: Box
    object_box: Box | None
    object_category: int
    verb: int
    score: float

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValidationError("detection score must be finite")
        for box in (self.human_box, self.object_box):
            if box is not None and (box[2] < 0 or box[3] < 0):
                raise ValidationError("boxes must have non-negative dimensions")


@dataclass(frozen=True)
class GroundTruthTriplet:
    image_id: int
    human_box: Box
    object_box: Box | None
    object_category: int
    verb: int
    rare: bool = False


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two (x, y, w, h) boxes."""
    ax0, ay0, aw, ah = a
    bx0, by0, bw, bh = b
    ix = max(0.0, min(ax0 + aw, bx0 + bw) - max(ax0, bx0))
    iy = max(0.0, min(ay0 + ah, by0 + bh) - max(ay0, by0))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def ap(labeled: list[tuple[float, bool]], n_gt: int, interpolation: str = "all-point") -> float | None:
    """Interpolated average precision.

    `labeled` holds (score, is_tp) pairs; ties keep their input order (stable
    sort by descending score).  The default integrates the all-point
    precision envelope; "11-point" averages the envelope at recalls
    0.0, 0.1, ..., 1.0 for cross-checks.  Returns None when the class has
    neither ground truth nor detections, 0.0 when detections exist without
    any GT.
    """
    if n_gt < 0:
        raise ValidationError("n_gt must be >= 0")
    if interpolation not in ("all-point", "11-point"):
        raise ValidationError(f"unknown interpolation mode {interpolation!r}")
    if n_gt == 0:
        return None if not labeled else 0.0
    if not labeled:
        return 0.0
    order = sorted(range(len(labeled)), key=lambda i: -labeled[i][0])
    flags = [labeled[i][1] for i in order]
    # precision at each detection rank, then the running-max envelope from the right
    precisions = []
    tp = 0
    for rank, is_tp in enumerate(flags, start=1):
        tp += int(is_tp)
        precisions.append(tp / rank)
    best = 0.0
    envelope = [0.0] * len(flags)
    for i in range(len(flags) - 1, -1, -1):
        best = max(best, precisions[i])
        envelope[i] = best
    if interpolation == "11-point":
        recalls = []
        tp = 0
        for is_tp in flags:
            tp += int(is_tp)
            recalls.append(tp / n_gt)
        total = 0.0
        for threshold in (0.1 * k for k in range(11)):
            candidates = [envelope[i] for i in range(len(flags)) if recalls[i] >= threshold - 1e-12]
            total += max(candidates) if candidates else 0.0
        return total / 11.0
    area = 0.0
    for i, is_tp in enumerate(flags):
        if is_tp:
            area += envelope[i] / n_gt
    return area


def _interaction_key(verb: int, object_category: int) -> tuple[int, int]:
    return (verb, object_category)


def match_triplets(
    preds: list[DetectionTriplet],
    gts: list[GroundTruthTriplet],
    iou_thresh: float = 0.5,
) -> dict[tuple[int, int], tuple[list[tuple[float, bool]], int]]:
    """Greedy one-to-one matching per interaction class.

    Predictions are visited in descending score order (stable for ties); each
    claims the unmatched same-image GT with the highest pair IoU
    min(iou_human, iou_object), ties broken by GT index, and is a TP when
    that IoU reaches the threshold.
    """
    gt_by_class: dict[tuple[int, int], list[GroundTruthTriplet]] = defaultdict(list)
    for gt in gts:
        gt_by_class[_interaction_key(gt.verb, gt.object_category)].append(gt)
    preds_by_class: dict[tuple[int, int], list[DetectionTriplet]] = defaultdict(list)
    for pred in preds:
        preds_by_class[_interaction_key(pred.verb, pred.object_category)].append(pred)

    results: dict[tuple[int, int], tuple[list[tuple[float, bool]], int]] = {}
    for key in set(gt_by_class) | set(preds_by_class):
        class_gts = gt_by_class.get(key, [])
        class_preds = preds_by_class.get(key, [])
        order = sorted(range(len(class_preds)), key=lambda i: -class_preds[i].score)
        matched: set[int] = set()
        labeled: list[tuple[float, bool]] = []
        for i in order:
            pred = class_preds[i]
            best_iou = 0.0
            best_gt = -1
            for j, gt in enumerate(class_gts):
                if j in matched or gt.image_id != pred.image_id:
                    continue
                if pred.object_box is None or gt.object_box is None:
                    continue
                pair_iou = min(iou(pred.human_box, gt.human_box), iou(pred.object_box, gt.object_box))
                if pair_iou > best_iou:
                    best_iou = pair_iou
                    best_gt = j
            if best_iou >= iou_thresh and best_gt >= 0:
                matched.add(best_gt)
                labeled.append((pred.score, True))
            else:
                labeled.append((pred.score, False))
        results[key] = (labeled, len(class_gts))
    return results


def hico_map(preds: list[DetectionTriplet], gts: list[GroundTruthTriplet]) -> tuple[float, float, float]:
    """Mean AP in percent over all / rare / non-rare interaction classes.

    The class universe comes from the ground-truth set; rare classes are
    flagged on the GT triplets (fewer than 10 training instances).
    """
    matches = match_triplets(preds, gts)
    rare_keys = {_interaction_key(g.verb, g.object_category) for g in gts if g.rare}
    gt_keys = {_interaction_key(g.verb, g.object_category) for g in gts}
    per_class: dict[tuple[int, int], float] = {}
    for key in gt_keys:
        labeled, n_gt = matches.get(key, ([], 0))
        value = ap(labeled, n_gt)
        per_class[key] = 0.0 if value is None else value
    if not per_class:
        return (0.0, 0.0, 0.0)

    def mean_over(keys) -> float:
        keys = list(keys)
        if not keys:
            return 0.0
        return 100.0 * sum(per_class[k] for k in keys) / len(keys)

    full = mean_over(per_class)
    rare = mean_over(k for k in per_class if k in rare_keys)
    non_rare = mean_over(k for k in per_class if k not in rare_keys)
    return (full, rare, non_rare)


def vcoco_ap_role(preds: list[DetectionTriplet], gts: list[GroundTruthTriplet], scenario: int = 2) -> float:
    """Role AP in percent over verb classes.

    Scenario 1 credits a correct human-verb detection when the GT has no role
    object regardless of the predicted box; scenario 2 demands an explicitly
    empty prediction there.  When a role object exists, both scenarios require
    object IoU >= 0.5.
    """
    if scenario not in (1, 2):
        raise ValidationError(f"scenario must be 1 or 2, got {scenario}")
    gt_by_verb: dict[int, list[GroundTruthTriplet]] = defaultdict(list)
    for gt in gts:
        gt_by_verb[gt.verb].append(gt)
    preds_by_verb: dict[int, list[DetectionTriplet]] = defaultdict(list)
    for pred in preds:
        preds_by_verb[pred.verb].append(pred)

    values = []
    for verb in sorted(gt_by_verb):
        class_gts = gt_by_verb[verb]
        class_preds = preds_by_verb.get(verb, [])
        order = sorted(range(len(class_preds)), key=lambda i: -class_preds[i].score)
        matched: set[int] = set()
        labeled: list[tuple[float, bool]] = []
        for i in order:
            pred = class_preds[i]
            best_h = 0.0
            best_gt = -1
            for j, gt in enumerate(class_gts):
                if j in matched or gt.image_id != pred.image_id:
                    continue
                h_iou = iou(pred.human_box, gt.human_box)
                if h_iou >= 0.5 and h_iou > best_h:
                    best_h = h_iou
                    best_gt = j
            ok = False
            if best_gt >= 0:
                gt = class_gts[best_gt]
                if gt.object_box is None:
                    ok = True if scenario == 1 else pred.object_box is None
                else:
                    ok = pred.object_box is not None and iou(pred.object_box, gt.object_box) >= 0.5
            if ok:
                matched.add(best_gt)
                labeled.append((pred.score, True))
            else:
                labeled.append((pred.score, False))
        value = ap(labeled, len(class_gts))
        if value is not None:
            values.append(value)
    if not values:
        return 0.0
    return 100.0 * sum(values) / len(values)


@dataclass
class RobustnessMatrix:
    """Per-(kind, level) metric grid plus the clean-set reference value."""

    cells: dict[tuple[str, int], float]
    clean: float | None = None

    def __post_init__(self):
        for (kind, level), value in self.cells.items():
            if kind not in ALL_KINDS:
                raise ValidationError(f"unknown corruption kind {kind!r} in matrix")
            if not 1 <= level <= 5:
                raise ValidationError(f"level must be in 1..5, got {level}")
            if not 0.0 <= value <= 100.0:
                raise ValidationError(f"metric values must be in [0, 100], got {value}")
        if self.clean is not None and not 0.0 <= self.clean <= 100.0:
            raise ValidationError("clean metric must be in [0, 100]")

    def kinds(self) -> list[str]:
        present = {kind for kind, _ in self.cells}
        return [k for k in ALL_KINDS if k in present]

    def levels_of(self, kind: str) -> list[float]:
        return [self.cells[(kind, lvl)] for lvl in range(1, 6) if (kind, lvl) in self.cells]

    def missing_cells(self) -> list[tuple[str, int]]:
        return [(k, l) for k in ALL_KINDS for l in range(1, 6) if (k, l) not in self.cells]


def mri(matrix: RobustnessMatrix) -> float:
    """Mean over corruptions of the per-corruption mean across its levels."""
    kinds = matrix.kinds()
    if not kinds:
        raise ValidationError("robustness matrix is empty")
    total = 0.0
    for kind in kinds:
        levels = matrix.levels_of(kind)
        total += sum(levels) / len(levels)
    return total / len(kinds)


def _stability_penalty(sigma: float, log_base: float = math.e) -> float:
    return 1.0 / (math.log(1.0 + sigma) / math.log(log_base) + 1.0)


def per_corruption_stats(matrix: RobustnessMatrix, log_base: float = math.e) -> dict[str, dict[str, float]]:
    """Mean, population standard deviation, and stability penalty per corruption."""
    stats = {}
    for kind in matrix.kinds():
        levels = matrix.levels_of(kind)
        mean = sum(levels) / len(levels)
        var = sum((v - mean) ** 2 for v in levels) / len(levels)
        sigma = math.sqrt(var)
        stats[kind] = {"mean": mean, "std": sigma, "penalty": _stability_penalty(sigma, log_base)}
    return stats


def cri(matrix: RobustnessMatrix, log_base: float = math.e) -> float:
    """Clean-normalized mean performance damped by the per-corruption variance penalty."""
    if matrix.clean is None or matrix.clean <= 0:
        raise ValidationError("composite index requires a positive clean metric")
    kinds = matrix.kinds()
    if not kinds:
        raise ValidationError("robustness matrix is empty")
    stats = per_corruption_stats(matrix, log_base)
    total = 0.0
    for kind in kinds:
        s = stats[kind]
        total += (s["mean"] / matrix.clean) * s["penalty"]
    return total / len(kinds)


def robustness_report(matrix: RobustnessMatrix, log_base: float = math.e) -> dict:
    """JSON-ready report: matrix, per-corruption stats, MRI, and CRI when clean is known."""
    stats = per_corruption_stats(matrix, log_base)
    report = {
        "cells": {f"{kind}/{level}": value for (kind, level), value in sorted(matrix.cells.items())},
        "clean": matrix.clean,
        "per_corruption": stats,
        "mri": mri(matrix),
        "cri": None,
        "missing_cells": [f"{k}/{l}" for k, l in matrix.missing_cells()],
    }
    if matrix.clean is not None and matrix.clean > 0:
        report["cri"] = cri(matrix, log_base)
    return report


def render_report_table(report: dict) -> str:
    """Fixed-width text table of the per-corruption statistics."""
    lines = [f"{'kind':<6} {'mean':>8} {'std':>8} {'penalty':>8}"]
    for kind in ALL_KINDS:
        if kind not in report["per_corruption"]:
            continue
        s = report["per_corruption"][kind]
        lines.append(f"{kind:<6} {s['mean']:>8.2f} {s['std']:>8.2f} {s['penalty']:>8.4f}")
    lines.append("-" * 33)
    lines.append(f"MRI: {report['mri']:.2f}")
    if report.get("cri") is not None:
        lines.append(f"CRI: {report['cri']:.4f}")
    clean = report.get("clean")
    if clean is not None:
        lines.append(f"clean: {clean:.2f}")
    return "\n".join(lines)
