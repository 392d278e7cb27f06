"""Deterministic toolkit for HOI robustness benchmarking.

Builds the 20-corruption x 5-severity benchmark from clean images, computes
detection metrics plus the mean/composite robustness indices, and provides
the semantic-masking and score-guided progressive-learning scheduler.
"""

from .corruptions import ALL_KINDS, CorruptionSpec, apply_corruption
from .curriculum import CurriculumState, run as run_curriculum, step as curriculum_step
from .ladders import LadderConfig, load_ladders
from .masking import InstanceMask, MaskLadder, apply_mask, build_semantic_mask, convex_hull, dilate, scale_to_cover
from .metrics import (
    DetectionTriplet,
    GroundTruthTriplet,
    RobustnessMatrix,
    ap,
    cri,
    hico_map,
    iou,
    match_triplets,
    mri,
    vcoco_ap_role,
)
from .raster import ImageBuffer, Kernel2D, convolve_2d, resize, warp
from .streams import RngStream, derive_stream

__version__ = "0.1.0"

__all__ = [
    "ALL_KINDS",
    "CorruptionSpec",
    "CurriculumState",
    "DetectionTriplet",
    "GroundTruthTriplet",
    "ImageBuffer",
    "InstanceMask",
    "Kernel2D",
    "LadderConfig",
    "MaskLadder",
    "RngStream",
    "RobustnessMatrix",
    "ap",
    "apply_corruption",
    "apply_mask",
    "build_semantic_mask",
    "convex_hull",
    "convolve_2d",
    "cri",
    "curriculum_step",
    "derive_stream",
    "dilate",
    "hico_map",
    "iou",
    "load_ladders",
    "match_triplets",
    "mri",
    "resize",
    "run_curriculum",
    "scale_to_cover",
    "vcoco_ap_role",
    "warp",
]
