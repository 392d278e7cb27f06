import json

import numpy as np
import pytest

from conftest import build_tiny_dataset
from hoibench import imgio
from hoibench.cli import main
from hoibench.corruptions import ALL_KINDS, FAMILY_OF
from hoibench.dataset_io import load_annotations, write_detections
from hoibench.metrics import DetectionTriplet


def perfect_detections(ann):
    return [
        DetectionTriplet(g.image_id, g.human_box, g.object_box, g.object_category, g.verb, 1.0)
        for g in ann.gts
    ]


def write_cell_detections(ann, det_dir, kinds, levels):
    dets = perfect_detections(ann)
    write_detections(dets, det_dir / "clean.jsonl")
    for kind in kinds:
        for level in levels:
            write_detections(dets, det_dir / kind / f"{level}.jsonl")


def test_help_lists_all_kinds_with_families(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    for kind in ALL_KINDS:
        assert kind in out
    for family in ("OS", "SCT", "EI", "G&S"):
        assert f"[{family}" in out


def test_corrupt_cardinality_and_idempotence(tmp_path, capsys):
    ann = build_tiny_dataset(tmp_path / "data", n_images=2)
    args = [
        "corrupt",
        "--annotations", str(ann),
        "--out", str(tmp_path / "out1"),
        "--kinds", "GauN",
        "--levels", "1..5",
        "--threads", "1",
        "--format", "json",
    ]
    assert main(args) == 0
    payload1 = json.loads(capsys.readouterr().out)
    assert payload1["files"] == 10

    args[4] = str(tmp_path / "out2")
    assert main(args) == 0
    payload2 = json.loads(capsys.readouterr().out)
    assert payload2["manifest_hash"] == payload1["manifest_hash"]


def test_corrupt_unknown_kind_exits_2(tmp_path, capsys):
    ann = build_tiny_dataset(tmp_path / "data", n_images=1)
    code = main(
        ["corrupt", "--annotations", str(ann), "--out", str(tmp_path / "out"), "--kinds", "fog"]
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "MB" in err and "ZB" in err  # the valid-kind list is printed


def test_corrupt_missing_annotations_exits_3(tmp_path):
    code = main(["corrupt", "--annotations", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
    assert code == 3


def test_mask_level1_outputs_match_inputs(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=2)
    out = tmp_path / "masked"
    assert main(["mask", "--annotations", str(ann_path), "--out", str(out), "--level", "1"]) == 0
    for i in range(2):
        assert (out / "w1" / f"{i}.png").read_bytes() == (tmp_path / "data" / "images" / f"{i}.png").read_bytes()


def test_mask_level4_fraction_within_bounds(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1, size=48)
    out = tmp_path / "masked"
    assert main(["mask", "--annotations", str(ann_path), "--out", str(out), "--level", "4"]) == 0
    ann = load_annotations(ann_path)
    original = imgio.read_image(tmp_path / "data" / "images" / "0.png")
    masked = imgio.read_image(out / "w4" / "0.png")
    changed = float(np.mean(np.any(masked.data != original.data, axis=2)))
    # two instances, each covered at <= 0.6 of its box (plus rasterization slack)
    boxes = [g for g in ann.gts if g.image_id == 0]
    upper = sum(
        (0.6 * b[2] + 2) * (0.6 * b[3] + 2)
        for g in boxes
        for b in (g.human_box, g.object_box)
    ) / (48 * 48)
    assert 0.0 < changed <= upper


def test_mask_rerun_deterministic(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["mask", "--annotations", str(ann_path), "--out", str(out), "--level", "3"]) == 0
    assert (a / "w3" / "0.png").read_bytes() == (b / "w3" / "0.png").read_bytes()


def test_evaluate_perfect_detections(tmp_path, capsys):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=2)
    ann = load_annotations(ann_path)
    det_dir = tmp_path / "dets"
    write_cell_detections(ann, det_dir, ["GauN", "MB"], [1, 2, 3])
    code = main(
        ["evaluate", "--annotations", str(ann_path), "--detections-dir", str(det_dir), "--format", "json"]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["mri"] == 100.0
    assert abs(report["cri"] - 1.0) < 1e-9
    assert report["clean"] == 100.0


def test_evaluate_warns_without_clean(tmp_path, capsys):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    ann = load_annotations(ann_path)
    det_dir = tmp_path / "dets"
    write_detections(perfect_detections(ann), det_dir / "MB" / "1.jsonl")
    code = main(
        ["evaluate", "--annotations", str(ann_path), "--detections-dir", str(det_dir), "--format", "json"]
    )
    assert code == 0
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert report["cri"] is None
    assert "clean" in captured.err and "omitted" in captured.err


def test_evaluate_cri_required_without_clean_fails(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    ann = load_annotations(ann_path)
    det_dir = tmp_path / "dets"
    write_detections(perfect_detections(ann), det_dir / "MB" / "1.jsonl")
    code = main(
        ["evaluate", "--annotations", str(ann_path), "--detections-dir", str(det_dir), "--cri", "require"]
    )
    assert code == 4


def test_evaluate_vcoco_mode(tmp_path, capsys):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=2, mode="v-coco")
    ann = load_annotations(ann_path)
    det_dir = tmp_path / "dets"
    write_cell_detections(ann, det_dir, ["OCC"], [1])
    code = main(
        [
            "evaluate",
            "--annotations", str(ann_path),
            "--detections-dir", str(det_dir),
            "--mode", "v-coco",
            "--scenario", "2",
            "--format", "json",
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["mri"] == 100.0


def test_report_from_matrix_json(tmp_path, capsys):
    matrix = {
        "clean": 20.0,
        "cells": {"MB": {str(l): v for l, v in zip(range(1, 6), (10, 8, 6, 4, 2))}},
    }
    path = tmp_path / "matrix.json"
    path.write_text(json.dumps(matrix))
    assert main(["report", "--matrix", str(path), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert abs(report["mri"] - 6.0) < 1e-12
    assert abs(report["cri"] - 0.12808) < 1e-4


def test_report_accepts_evaluate_output(tmp_path, capsys):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    ann = load_annotations(ann_path)
    det_dir = tmp_path / "dets"
    write_cell_detections(ann, det_dir, ["MB"], [1, 2])
    report_path = tmp_path / "report.json"
    assert main(["evaluate", "--annotations", str(ann_path), "--detections-dir", str(det_dir),
                 "--out", str(report_path), "--format", "json"]) == 0
    capsys.readouterr()
    assert main(["report", "--matrix", str(report_path), "--format", "json"]) == 0
    rendered = json.loads(capsys.readouterr().out)
    assert rendered["mri"] == 100.0


def test_report_reproduces_published_aggregates(tmp_path, capsys):
    from conftest import PUBLISHED_ROWS

    for name, (means, expected) in PUBLISHED_ROWS.items():
        matrix = {"cells": {kind: {"1": value} for kind, value in zip(ALL_KINDS, means)}}
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(matrix))
        assert main(["report", "--matrix", str(path), "--format", "json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert abs(report["mri"] - expected) <= 0.005, name
        assert report["cri"] is None  # no clean reference in these rows


def test_corrupt_honours_ladder_env_var(tmp_path, capsys, monkeypatch):
    from hoibench.ladders import load_ladders

    ann = build_tiny_dataset(tmp_path / "data", n_images=1)
    tweaked = json.loads(json.dumps(load_ladders().raw))
    tweaked["kinds"]["GauN"]["sigma"] = [0.05, 0.09, 0.13, 0.19, 0.27]
    ladder_path = tmp_path / "ladders.json"
    ladder_path.write_text(json.dumps(tweaked))
    monkeypatch.setenv("HOIBENCH_LADDERS", str(ladder_path))
    args = ["corrupt", "--annotations", str(ann), "--out", str(tmp_path / "o"),
            "--kinds", "GauN", "--levels", "1", "--format", "json"]
    assert main(args) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ladder_sha256"] != load_ladders().sha256


def test_evaluate_writes_report_file(tmp_path, capsys):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    ann = load_annotations(ann_path)
    det_dir = tmp_path / "dets"
    write_cell_detections(ann, det_dir, ["MB"], [1])
    report_path = tmp_path / "report.json"
    code = main(
        ["evaluate", "--annotations", str(ann_path), "--detections-dir", str(det_dir),
         "--out", str(report_path)]
    )
    assert code == 0
    assert "MRI" in capsys.readouterr().out  # default text table
    saved = json.loads(report_path.read_text())
    assert saved["mri"] == 100.0


def test_evaluate_strict_aborts_on_bad_line(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1)
    det_dir = tmp_path / "dets"
    (det_dir / "MB").mkdir(parents=True)
    (det_dir / "MB" / "1.jsonl").write_text("not json\n")
    code = main(
        ["evaluate", "--annotations", str(ann_path), "--detections-dir", str(det_dir), "--strict"]
    )
    assert code == 4


def test_mask_single_instance_flag(tmp_path):
    ann_path = build_tiny_dataset(tmp_path / "data", n_images=1, size=48)
    union_out, single_out = tmp_path / "union", tmp_path / "single"
    assert main(["mask", "--annotations", str(ann_path), "--out", str(union_out), "--level", "4"]) == 0
    assert main(["mask", "--annotations", str(ann_path), "--out", str(single_out), "--level", "4",
                 "--single-instance"]) == 0
    union_mask = imgio.read_mask_png(union_out / "w4" / "0_mask.png")
    single_mask = imgio.read_mask_png(single_out / "w4" / "0_mask.png")
    assert single_mask.sum() <= union_mask.sum()


def test_curriculum_sim_synthetic_families(capsys):
    for family in ("linear", "noisy-plateau"):
        code = main(["curriculum-sim", "--epochs", "12", "--synthetic", family, "--format", "json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["summary"]["epochs"] == 12


def test_curriculum_sim_constant(tmp_path, capsys):
    trace_path = tmp_path / "trace.jsonl"
    code = main(
        ["curriculum-sim", "--epochs", "50", "--synthetic", "constant", "--out", str(trace_path), "--format", "json"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["summary"]["final_p"] == 4
    assert payload["summary"]["upgrade_epochs"]
    assert len(trace_path.read_text().strip().splitlines()) == 50


def test_curriculum_sim_replay_determinism(tmp_path, capsys):
    replay = tmp_path / "replay.jsonl"
    rows = [{"t": t, "q_clean": 50.0 + t, "q_p": 45.0 + 2 * t} for t in range(1, 11)]
    replay.write_text("\n".join(json.dumps(r) for r in rows))
    outputs = []
    for _ in range(2):
        assert main(["curriculum-sim", "--replay", str(replay), "--format", "json"]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]


def test_curriculum_sim_bad_replay_row_reports_line(tmp_path, capsys):
    replay = tmp_path / "replay.jsonl"
    replay.write_text('{"t": 1, "q_clean": 50.0, "q_p": 45.0}\n{"t": "x"}\n')
    code = main(["curriculum-sim", "--replay", str(replay)])
    assert code == 4
    assert "line 2" in capsys.readouterr().err


def test_curriculum_sim_zero_epochs_exits_2(capsys):
    assert main(["curriculum-sim", "--epochs", "0"]) == 2


def test_unknown_subcommand_exits_2():
    assert main(["frobnicate"]) == 2
