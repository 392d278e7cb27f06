"""Command-line front door: corrupt, mask, evaluate, report, curriculum-sim.

Exit codes: 0 success, 2 configuration error, 3 IO error, 4 data validation
error, 1 unexpected failure.  Every command accepts --format json for
machine-readable output and is byte-deterministic under a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import curriculum, dataset_io, metrics
from .corruptions import ALL_KINDS, FAMILY_OF, LONG_NAMES, normalize_kind
from .errors import ParseError, UnknownCorruptionError, ValidationError
from .ladders import load_ladders
from .masking import MaskLadder

LADDER_ENV = "HOIBENCH_LADDERS"

_KIND_LINES = "\n".join(f"  {kind:<5} [{FAMILY_OF[kind]:<3}] {LONG_NAMES[kind]}" for kind in ALL_KINDS)
EPILOG = f"corruption kinds (family in brackets):\n{_KIND_LINES}\n"


def _parse_levels(text: str) -> list[int]:
    levels: set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            levels.update(range(int(lo), int(hi) + 1))
        elif part:
            levels.add(int(part))
    if not levels or not all(1 <= l <= 5 for l in levels):
        raise ValidationError(f"levels must be within 1..5, got {text!r}")
    return sorted(levels)


def _parse_kinds(text: str) -> list[str]:
    if text.strip().lower() == "all":
        return list(ALL_KINDS)
    return [normalize_kind(part.strip()) for part in text.split(",") if part.strip()]


def _ladders(args):
    path = args.ladders or os.environ.get(LADDER_ENV)
    return load_ladders(path)


def _mask_ladder(config) -> MaskLadder:
    return MaskLadder(config.cover_ratios(), config.dilation_radius_range())


def cmd_corrupt(args) -> int:
    config = _ladders(args)
    ann = dataset_io.load_annotations(args.annotations)
    cells = [(kind, level) for kind in _parse_kinds(args.kinds) for level in _parse_levels(args.levels)]
    manifest = dataset_io.write_corrupted_dataset(
        ann, cells, args.out, global_seed=args.seed, ladders=config, threads=args.threads
    )
    payload = {
        "files": len(manifest.records),
        "cells": len(cells),
        "images": len(ann.images),
        "manifest": str(Path(args.out) / "manifest.json"),
        "manifest_hash": manifest.content_hash(),
        "ladder_sha256": config.sha256,
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"wrote {payload['files']} files over {payload['cells']} cells x {payload['images']} images")
        print(f"manifest hash {payload['manifest_hash']}")
    return 0


def cmd_mask(args) -> int:
    config = _ladders(args)
    ann = dataset_io.load_annotations(args.annotations)
    if not ann.gts:
        raise ValidationError("no annotated instances available for masking")
    manifest = dataset_io.write_masked_dataset(
        ann,
        level=args.level,
        out_dir=args.out,
        global_seed=args.seed,
        mask_ladder=_mask_ladder(config),
        masks_dir=args.masks_dir,
        single_instance=args.single_instance,
        ladder_sha256=config.sha256,
    )
    payload = {
        "files": len(manifest.records),
        "level": args.level,
        "manifest_hash": manifest.content_hash(),
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"wrote {payload['files']} files at level w{args.level}; manifest hash {payload['manifest_hash']}")
    return 0


def _cell_metric(ann, triplets, mode: str, scenario: int) -> float:
    if mode == "v-coco":
        return metrics.vcoco_ap_role(triplets, ann.gts, scenario)
    return metrics.hico_map(triplets, ann.gts)[0]


def cmd_evaluate(args) -> int:
    ann = dataset_io.load_annotations(args.annotations, mode=args.mode)
    det_dir = Path(args.detections_dir)
    if not det_dir.is_dir():
        raise FileNotFoundError(f"detections directory not found: {det_dir}")
    cells: dict[tuple[str, int], float] = {}
    for kind in ALL_KINDS:
        for level in range(1, 6):
            path = det_dir / kind / f"{level}.jsonl"
            if not path.exists():
                continue
            triplets, errors = dataset_io.load_detections(path, strict=args.strict)
            for err in errors:
                print(f"warning: {path}: {err}", file=sys.stderr)
            cells[(kind, level)] = _cell_metric(ann, triplets, ann.mode, args.scenario)
    if not cells:
        raise ValidationError(f"no detection files found under {det_dir} (expected <kind>/<severity>.jsonl)")

    clean = None
    clean_path = det_dir / "clean.jsonl"
    if clean_path.exists():
        triplets, errors = dataset_io.load_detections(clean_path, strict=args.strict)
        for err in errors:
            print(f"warning: {clean_path}: {err}", file=sys.stderr)
        clean = _cell_metric(ann, triplets, ann.mode, args.scenario)
    if args.cri == "require" and clean is None:
        raise ValidationError("composite index requested but clean detections are missing (clean.jsonl)")
    if clean is None and args.cri != "off":
        print("warning: clean detections absent; composite index omitted", file=sys.stderr)

    matrix = metrics.RobustnessMatrix(cells=cells, clean=clean)
    report = metrics.robustness_report(matrix)
    if args.cri == "off":
        report["cri"] = None
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(metrics.render_report_table(report))
    return 0


def cmd_report(args) -> int:
    raw = json.loads(Path(args.matrix).read_text(encoding="utf-8"))
    cells: dict[tuple[str, int], float] = {}
    # accept both the nested {"MB": {"1": v}} form and evaluate's flat "MB/1" keys
    for key, value in raw.get("cells", {}).items():
        if isinstance(value, dict):
            kind = normalize_kind(key)
            for level, cell in value.items():
                cells[(kind, int(level))] = float(cell)
        else:
            kind, _, level = key.rpartition("/")
            cells[(normalize_kind(kind), int(level))] = float(value)
    matrix = metrics.RobustnessMatrix(cells=cells, clean=raw.get("clean"))
    report = metrics.robustness_report(matrix)
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(metrics.render_report_table(report))
    return 0


def _replay_evaluator(path: Path):
    rows: dict[int, tuple[float, float]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                rows[int(rec["t"])] = (float(rec["q_clean"]), float(rec["q_p"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad replay row: {exc}", line=lineno) from exc

    def evaluate(t: int, level: int) -> float:
        if t not in rows:
            raise ValidationError(f"replay file has no row for epoch {t}")
        return rows[t][0] if level == 1 else rows[t][1]

    return evaluate, len(rows)


def cmd_curriculum_sim(args) -> int:
    if args.replay:
        evaluator, available = _replay_evaluator(Path(args.replay))
        epochs = args.epochs or available
    else:
        epochs = args.epochs
        if args.synthetic == "constant":
            evaluator = curriculum.constant_evaluator(args.score)
        elif args.synthetic == "linear":
            evaluator = curriculum.linear_evaluator(start=args.score, gain=args.gain)
        else:
            evaluator = curriculum.noisy_plateau_evaluator(seed=args.seed, base=args.score)
    records = curriculum.run(
        evaluator,
        epochs,
        tau_init=args.tau_init,
        epsilon=args.epsilon,
        bank_includes_clean=args.bank_includes_clean,
    )
    if args.out:
        curriculum.write_trace_jsonl(records, args.out)
    summary = curriculum.summarize(records)
    if args.format == "json":
        print(json.dumps({"summary": summary, "trace": [r.to_json() for r in records]}, indent=2))
    else:
        for rec in records:
            dq = "-" if rec.dq is None else f"{rec.dq:+.4f}"
            tau = "-" if rec.tau is None else f"{rec.tau:.4f}"
            print(f"t={rec.t:<4d} chose w{rec.chosen} p={rec.p} N={list(rec.counts)} dq={dq} tau={tau}")
        print(f"final p={summary['final_p']} N={summary['N']} upgrades at {summary['upgrade_epochs']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoibench",
        description="Corruption benchmark synthesis, semantic masking, curriculum simulation, and robustness metrics.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    corrupt = sub.add_parser(
        "corrupt",
        help="synthesize corrupted copies of a dataset",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    corrupt.add_argument("--annotations", required=True)
    corrupt.add_argument("--out", required=True)
    corrupt.add_argument("--kinds", default="all", help="comma list of kinds or 'all'")
    corrupt.add_argument("--levels", default="1..5", help="severities, e.g. '1..5' or '1,3,5'")
    corrupt.add_argument("--seed", type=int, default=0)
    corrupt.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    corrupt.add_argument("--ladders", default=None, help=f"ladder config path (default ${LADDER_ENV} or builtin)")
    corrupt.add_argument("--format", choices=("text", "json"), default="text")
    corrupt.set_defaults(func=cmd_corrupt)

    mask = sub.add_parser("mask", help="write semantically masked images for one level")
    mask.add_argument("--annotations", required=True)
    mask.add_argument("--out", required=True)
    mask.add_argument("--level", type=int, choices=(1, 2, 3, 4), required=True)
    mask.add_argument("--masks-dir", default=None, help="instance mask PNGs named <image_id>_<instance_id>.png")
    mask.add_argument("--single-instance", action="store_true", help="mask one instance per image instead of the union")
    mask.add_argument("--seed", type=int, default=0)
    mask.add_argument("--ladders", default=None)
    mask.add_argument("--format", choices=("text", "json"), default="text")
    mask.set_defaults(func=cmd_mask)

    evaluate = sub.add_parser("evaluate", help="score detection files and compute robustness indices")
    evaluate.add_argument("--annotations", required=True)
    evaluate.add_argument("--detections-dir", required=True, help="clean.jsonl plus <kind>/<severity>.jsonl")
    evaluate.add_argument("--mode", choices=("hico-det", "v-coco"), default=None)
    evaluate.add_argument("--scenario", type=int, choices=(1, 2), default=2, help="role AP scenario for v-coco mode")
    evaluate.add_argument("--cri", choices=("auto", "require", "off"), default="auto")
    evaluate.add_argument("--strict", action="store_true", help="abort on the first malformed detection line")
    evaluate.add_argument("--out", default=None, help="write the JSON report here as well")
    evaluate.add_argument("--format", choices=("text", "json"), default="text")
    evaluate.set_defaults(func=cmd_evaluate)

    report = sub.add_parser("report", help="render a robustness report from a matrix JSON")
    report.add_argument("--matrix", required=True, help='JSON: {"clean": x, "cells": {"MB": {"1": v, ...}, ...}}')
    report.add_argument("--format", choices=("text", "json"), default="text")
    report.set_defaults(func=cmd_report)

    sim = sub.add_parser("curriculum-sim", help="simulate the progressive masking scheduler")
    sim.add_argument("--epochs", type=int, default=None)
    sim.add_argument("--replay", default=None, help='JSONL rows {"t": n, "q_clean": x, "q_p": y}')
    sim.add_argument("--synthetic", choices=("constant", "linear", "noisy-plateau"), default="constant")
    sim.add_argument("--score", type=float, default=50.0)
    sim.add_argument("--gain", type=float, default=1.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--tau-init", type=float, default=0.15)
    sim.add_argument("--epsilon", type=float, default=1e-6)
    sim.add_argument("--bank-includes-clean", action="store_true",
                     help="sum all four counts in the frontier score instead of the masked levels only")
    sim.add_argument("--out", default=None, help="write the JSONL trace here")
    sim.add_argument("--format", choices=("text", "json"), default="text")
    sim.set_defaults(func=cmd_curriculum_sim)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "curriculum-sim" and not args.replay and (args.epochs is None or args.epochs < 1):
        print("error: --epochs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UnknownCorruptionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
