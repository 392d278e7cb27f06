import json

import numpy as np
import pytest

from conftest import build_tiny_dataset
from hoibench import imgio
from hoibench.dataset_io import (
    DatasetManifest,
    load_annotations,
    load_detections,
    load_instance_masks,
    write_corrupted_dataset,
    write_detections,
    write_masked_dataset,
)
from hoibench.errors import ParseError, ValidationError
from hoibench.ladders import load_ladders
from hoibench.metrics import DetectionTriplet


def test_load_empty_annotation_set(tmp_path):
    path = tmp_path / "ann.json"
    path.write_text(json.dumps({"mode": "hico-det", "images": [], "annotations": []}))
    ann = load_annotations(path)
    assert ann.images == {} and ann.gts == []


def test_load_annotations_counts_and_rare_flags(tmp_path):
    payload = {
        "mode": "hico-det",
        "images": [
            {"id": 0, "path": "a.png", "width": 32, "height": 32},
            {"id": 1, "path": "b.png", "width": 32, "height": 32},
        ],
        "verbs": ["v0", "v1"],
        "objects": ["o0"],
        "annotations": [
            {"image_id": 0, "human_box": [0, 0, 5, 5], "object_box": [8, 8, 5, 5], "object_category": 0, "verb": 0},
            {"image_id": 1, "human_box": [0, 0, 5, 5], "object_box": [8, 8, 5, 5], "object_category": 0, "verb": 0},
            {"image_id": 1, "human_box": [2, 2, 5, 5], "object_box": [9, 9, 5, 5], "object_category": 0, "verb": 1},
        ],
    }
    path = tmp_path / "ann.json"
    path.write_text(json.dumps(payload))
    ann = load_annotations(path)
    assert len(ann.images) == 2 and len(ann.gts) == 3
    # every class has < 10 instances in this fixture, so all are rare
    assert all(gt.rare for gt in ann.gts)


def test_load_annotations_missing_image_names_id(tmp_path):
    payload = {
        "mode": "hico-det",
        "images": [{"id": 0, "path": "a.png", "width": 8, "height": 8}],
        "annotations": [
            {"image_id": 7, "human_box": [0, 0, 2, 2], "object_box": [3, 3, 2, 2], "object_category": 0, "verb": 0}
        ],
    }
    path = tmp_path / "ann.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ValidationError, match="7"):
        load_annotations(path)


def test_load_annotations_vocabulary_bounds(tmp_path):
    payload = {
        "mode": "hico-det",
        "images": [{"id": 0, "path": "a.png", "width": 8, "height": 8}],
        "verbs": ["v0"],
        "objects": ["o0"],
        "annotations": [
            {"image_id": 0, "human_box": [0, 0, 2, 2], "object_box": [3, 3, 2, 2], "object_category": 0, "verb": 5}
        ],
    }
    path = tmp_path / "ann.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ValidationError, match="vocabulary"):
        load_annotations(path)


def test_detections_roundtrip_exact(tmp_path):
    triplets = [
        DetectionTriplet(3, (1.0, 2.0, 3.0, 4.0), (5.0, 6.0, 7.0, 8.0), 2, 9, 0.75),
        DetectionTriplet(4, (0.0, 0.0, 1.0, 1.0), None, 0, 1, 0.5),
    ]
    path = tmp_path / "dets.jsonl"
    write_detections(triplets, path)
    loaded, errors = load_detections(path)
    assert errors == []
    assert loaded == triplets


def test_load_detections_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    loaded, errors = load_detections(path)
    assert loaded == [] and errors == []


def test_load_detections_rejects_nan_score(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        '{"image_id": 0, "human_box": [0,0,1,1], "object_box": null, "verb": 0, "score": NaN}\n'
        '{"image_id": 0, "human_box": [0,0,1,1], "object_box": null, "verb": 0, "score": 0.5}\n'
    )
    loaded, errors = load_detections(path)
    assert len(loaded) == 1
    assert len(errors) == 1 and errors[0].startswith("line 1")
    with pytest.raises(ParseError, match="line 1"):
        load_detections(path, strict=True)


def test_write_corrupted_dataset_cardinality(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    ann = load_annotations(ann_path)
    out = tmp_path / "out"
    cells = [("GauN", level) for level in range(1, 6)]
    manifest = write_corrupted_dataset(ann, cells, out, global_seed=0)
    assert len(manifest.records) == 5
    for level in range(1, 6):
        assert (out / "GauN" / str(level) / "0.png").exists()
    roundtrip = DatasetManifest.read(out / "manifest.json")
    assert roundtrip.content_hash() == manifest.content_hash()


def test_corrupted_dataset_rerun_is_byte_identical(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=2)
    ann = load_annotations(ann_path)
    cells = [("MB", 2), ("S&P", 4)]
    m1 = write_corrupted_dataset(ann, cells, tmp_path / "out1", global_seed=5)
    m2 = write_corrupted_dataset(ann, cells, tmp_path / "out2", global_seed=5)
    assert m1.content_hash() == m2.content_hash()
    for rel in m1.records:
        assert (tmp_path / "out1" / rel).read_bytes() == (tmp_path / "out2" / rel).read_bytes()


def test_corrupted_dataset_thread_count_invariant(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=2)
    ann = load_annotations(ann_path)
    cells = [("GauN", 1), ("PIX", 3), ("OCC", 2)]
    single = write_corrupted_dataset(ann, cells, tmp_path / "s", global_seed=1, threads=1)
    multi = write_corrupted_dataset(ann, cells, tmp_path / "m", global_seed=1, threads=4)
    assert single.content_hash() == multi.content_hash()


def test_unknown_cell_rejected(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    ann = load_annotations(ann_path)
    with pytest.raises(ValidationError):
        write_corrupted_dataset(ann, [("FOG", 1)], tmp_path / "out")
    with pytest.raises(ValidationError):
        write_corrupted_dataset(ann, [("MB", 9)], tmp_path / "out")


def test_manifest_hash_tracks_ladder_config(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    ann = load_annotations(ann_path)
    default_cfg = load_ladders()
    tweaked = json.loads(json.dumps(default_cfg.raw))
    tweaked["kinds"]["GauN"]["sigma"] = [0.05, 0.09, 0.13, 0.19, 0.27]
    tweaked_path = tmp_path / "ladders.json"
    tweaked_path.write_text(json.dumps(tweaked))
    m1 = write_corrupted_dataset(ann, [("GauN", 1)], tmp_path / "a", ladders=default_cfg)
    m2 = write_corrupted_dataset(ann, [("GauN", 1)], tmp_path / "b", ladders=load_ladders(tweaked_path))
    assert m1.ladder_sha256 != m2.ladder_sha256
    assert m1.content_hash() != m2.content_hash()


def test_failed_run_leaves_no_manifest(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    ann = load_annotations(ann_path)
    out = tmp_path / "out"
    out.mkdir()
    (out / "manifest.json").write_text("{}")  # stale marker from an earlier run
    (tmp_path / "data" / "images" / "0.png").unlink()  # force a source IO failure
    with pytest.raises(FileNotFoundError):
        write_corrupted_dataset(ann, [("MB", 1)], out)
    assert not (out / "manifest.json").exists()


def test_masked_dataset_level1_is_byte_identical(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=2)
    ann = load_annotations(ann_path)
    out = tmp_path / "masked"
    write_masked_dataset(ann, level=1, out_dir=out)
    for i in range(2):
        original = (tmp_path / "data" / "images" / f"{i}.png").read_bytes()
        assert (out / "w1" / f"{i}.png").read_bytes() == original


def test_masked_dataset_level4_masks_pixels(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1, size=48)
    ann = load_annotations(ann_path)
    out = tmp_path / "masked"
    write_masked_dataset(ann, level=4, out_dir=out)
    original = imgio.read_image(tmp_path / "data" / "images" / "0.png")
    masked = imgio.read_image(out / "w4" / "0.png")
    changed = np.any(masked.data != original.data, axis=2)
    assert changed.any()
    assert (out / "w4" / "0_mask.png").exists()
    mask = imgio.read_mask_png(out / "w4" / "0_mask.png")
    assert np.all(masked.data[mask] == 0.0)


def test_masked_dataset_reads_instance_mask_files(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1, size=32)
    ann = load_annotations(ann_path)
    masks_dir = tmp_path / "inst"
    masks_dir.mkdir()
    raster = np.zeros((32, 32), dtype=bool)
    raster[2:8, 2:8] = True
    imgio.write_mask_png(raster, masks_dir / "0_0.png")
    loaded = load_instance_masks(ann, 0, masks_dir)
    assert np.array_equal(loaded[0].mask, raster)
    # the second instance (object box) has no file and falls back to its bbox fill
    assert loaded[1].area == loaded[1].bbox[2] * loaded[1].bbox[3]


def test_instance_mask_shape_mismatch_rejected(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1, size=32)
    ann = load_annotations(ann_path)
    masks_dir = tmp_path / "inst"
    masks_dir.mkdir()
    imgio.write_mask_png(np.zeros((8, 8), dtype=bool), masks_dir / "0_0.png")
    with pytest.raises(ValidationError):
        load_instance_masks(ann, 0, masks_dir)
