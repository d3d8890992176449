"""Command-line front door for the pseudo-label pipeline.

Exit codes: 0 success, 1 validation/usage error, 2 I/O or protocol error.
Every flag has a config-file equivalent (--config pipeline.json); explicit
flags override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .autopoint import PointSet
from .dataset import Manifest, counts, export_excluded, format_counts, split, validate
from .losses import LossWeights, cross_entropy, dice_loss, flame_l1, student_total, teacher_loss
from .pipeline import (
    PipelineConfig,
    ensure_manifest,
    evaluate_run,
    run_pipeline,
    stage_calibrate,
    stage_points,
    stage_propose,
    stage_select,
)
from .pngio import load_mask_png
from .proposer import ProposerError
from .radiometric import TiffLoadError, load_tiff
from .synth import SceneSpec, BlobSpec, gen_corpus, read_spec_file, write_scene

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; this tool reserves 2 for I/O errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="pipeline config JSON; flags override it")
    g = p.add_argument_group("calibration")
    g.add_argument("--clip-min", type=float, dest="clip_min")
    g.add_argument("--clip-max", type=float, dest="clip_max")
    g.add_argument("--caution", type=float, dest="caution")
    g = p.add_argument_group("point prompts")
    g.add_argument("--pos-patch", type=int, dest="pos_patch")
    g.add_argument("--neg-patch", type=int, dest="neg_patch")
    g.add_argument("--epsilon", type=float)
    g.add_argument("--canny-high", type=float, dest="canny_high")
    g.add_argument("--canny-sigma", type=float, dest="canny_sigma")
    g.add_argument("--d-max", type=float, dest="d_max")
    g.add_argument("--max-positive", type=int, dest="max_positive")
    g.add_argument("--max-negative", type=int, dest="max_negative")
    g = p.add_argument_group("selection")
    g.add_argument("--weights", help="five comma-separated criterion weights")
    g.add_argument("--thermal-thresh", type=float, dest="thermal_thresh")
    g = p.add_argument_group("proposer")
    g.add_argument("--baseline", action="store_true", default=None,
                   help="use the built-in classical proposer (no SAM service)")
    g.add_argument("--endpoint", help="external proposer URL")
    g.add_argument("--timeout", type=float)
    g = p.add_argument_group("misc")
    g.add_argument("--tiff-scale", type=float, dest="tiff_scale")
    g.add_argument("--tiff-offset", type=float, dest="tiff_offset")
    g.add_argument("--batch-size", type=int, dest="batch_size")
    g.add_argument("--seed", type=int)
    g.add_argument("--jobs", type=int)


def build_config(args) -> PipelineConfig:
    base = PipelineConfig().to_json()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        for key, value in file_cfg.items():
            if key in ("policy", "autopoint") and isinstance(value, dict):
                base[key].update(value)
            else:
                base[key] = value

    def setif(section, key, value):
        if value is not None:
            if section:
                base[section][key] = value
            else:
                base[key] = value

    setif("policy", "clip_min", args.clip_min)
    setif("policy", "clip_max", args.clip_max)
    setif("policy", "caution_threshold", args.caution)
    for key in ("pos_patch", "neg_patch", "epsilon", "canny_high", "canny_sigma",
                "d_max", "max_positive", "max_negative"):
        setif("autopoint", key, getattr(args, key))
    if args.weights is not None:
        parts = [float(x) for x in args.weights.split(",")]
        base["weights"] = parts
    setif(None, "thermal_thresh", args.thermal_thresh)
    if args.endpoint is not None:
        base["proposer"] = "external"
        base["endpoint"] = args.endpoint
    if args.baseline:
        base["proposer"] = "baseline"
    for key in ("timeout", "tiff_scale", "tiff_offset", "batch_size", "seed", "jobs"):
        setif(None, key, getattr(args, key))
    return PipelineConfig.from_json(base)


def _stage_cmd(args, stages: tuple[str, ...]) -> int:
    cfg = build_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for sub in ("masks", "points", "reports", "proposals", "stats", "cache"):
        (out / sub).mkdir(exist_ok=True)
    manifest = ensure_manifest(args.root, out, cfg)
    manifest.config_snapshot = cfg.to_json()
    for record in manifest.records:
        if "calibrate" in stages:
            stage_calibrate(record, cfg, out)
        if {"points", "propose", "select"} & set(stages):
            points_path = out / "points" / f"{record.id}.json"
            if "points" in stages or not points_path.exists():
                points = stage_points(record, cfg, out)
            else:
                points = PointSet.load(points_path)
                record.points_path = str(points_path)
        if {"propose", "select"} & set(stages):
            proposals = stage_propose(record, cfg, out, points)
        if "select" in stages:
            stage_select(record, cfg, out, points, proposals)
    manifest.save(out / "manifest.jsonl")
    print(f"{len(manifest.records)} records -> {out}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = build_config(args)
    manifest = run_pipeline(args.root, args.out, cfg)
    issues = validate(manifest)
    for issue in issues:
        print(f"warning: {issue.record_id}: {issue.message}", file=sys.stderr)
    print(f"pipeline complete: {len(manifest.records)} records -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    tolerances = tuple(float(x) for x in args.tolerances.split(","))
    aggregate = evaluate_run(
        args.out,
        args.gt,
        batch_size=args.batch_size,
        tolerances=tolerances,
        pred_temp_dir=args.pred_temp_dir,
    )
    print(json.dumps(aggregate, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_losses_eval(args) -> int:
    w = LossWeights(
        lambda_dice=args.lambda_dice,
        lambda_student_dice=args.lambda_student_dice,
        lambda_flame_l1=args.lambda_flame_l1,
    )
    report: dict = {}
    if args.pred_prob and args.target:
        pred = np.load(args.pred_prob)
        target = load_mask_png(args.target)
        report["cross_entropy"] = cross_entropy(pred, target)
        report["dice_loss"] = dice_loss(pred, target)
        report["teacher_loss"] = teacher_loss(pred, target, w)
    if args.pred_temp and args.gt_tiff and args.fire_mask:
        pred_temp = load_tiff(args.pred_temp) if args.pred_temp.endswith((".tif", ".tiff")) else None
        if pred_temp is None:
            from .radiometric import TemperatureGrid

            pred_temp = TemperatureGrid(np.load(args.pred_temp))
        gt = load_tiff(args.gt_tiff)
        fire = load_mask_png(args.fire_mask)
        report["flame_l1"] = flame_l1(pred_temp, gt, fire)
    if {"cross_entropy", "dice_loss", "flame_l1"} <= set(report):
        report["student_total"] = student_total(
            report["cross_entropy"], report["dice_loss"], report["flame_l1"], w
        )
    if not report:
        print("nothing to evaluate: pass --pred-prob/--target and/or "
              "--pred-temp/--gt-tiff/--fire-mask", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_counts(args) -> int:
    manifest = Manifest.load(args.manifest)
    print(format_counts(counts(manifest)))
    if args.excluded_out:
        n = export_excluded(manifest, args.excluded_out)
        print(f"{n} excluded ids -> {args.excluded_out}")
    return EXIT_OK


def cmd_split(args) -> int:
    manifest = Manifest.load(args.manifest)
    train, test = split(manifest, train_fraction=args.fraction, seed=args.seed)
    if args.train_out or args.test_out:
        if args.train_out:
            Path(args.train_out).write_text("\n".join(train) + "\n")
        if args.test_out:
            Path(args.test_out).write_text("\n".join(test) + "\n")
    else:
        print(json.dumps({"train": train, "test": test}, indent=2))
    return EXIT_OK


DEFAULT_SCENE = SceneSpec(
    width=64,
    height=64,
    background_temp=20.0,
    blobs=(BlobSpec(center=(32, 32), size=8, peak_temp=400.0),),
    noise_sigma=2.0,
    seed=0,
)


def cmd_synth_gen(args) -> int:
    spec = read_spec_file(args.spec) if args.spec else DEFAULT_SCENE
    out = Path(args.out)
    for stem, scene in gen_corpus(spec, args.count):
        write_scene(scene, out, stem)
    print(f"wrote {args.count} scenes under {out}")
    return EXIT_OK


def cmd_review_serve(args) -> int:
    import uvicorn

    from .review_service import create_app

    app = create_app(args.manifest)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> _Parser:
    top = _Parser(prog="firelabel", description=__doc__)
    sub = top.add_subparsers(dest="command", metavar="command")

    def stage(name, help_, stages):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--root", help="dataset root (rgb/ thermal/ tiff/)")
        p.add_argument("--out", required=True, help="run output directory")
        _add_config_flags(p)
        p.set_defaults(func=lambda a: _stage_cmd(a, stages))
        return p

    stage("calibrate", "saturation stats per image", ("calibrate",))
    stage("points", "locate point prompts per image", ("points",))
    stage("propose", "produce 3 candidate masks per image", ("propose",))
    stage("select", "TOPSIS-select the pseudo-label per image", ("select",))

    p = sub.add_parser("pipeline", help="all stages end to end")
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("evaluate", help="score selected masks against ground truth")
    p.add_argument("--out", required=True, help="run directory holding manifest.jsonl")
    p.add_argument("--gt", required=True, help="directory of <id>.png ground-truth masks")
    p.add_argument("--pred-temp-dir", dest="pred_temp_dir",
                   help="directory of <id>.npy temperature predictions")
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--tolerances", default="25,50")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("losses", help="loss oracles")
    lsub = p.add_subparsers(dest="losses_command", metavar="subcommand")
    pe = lsub.add_parser("eval", help="evaluate losses on files")
    pe.add_argument("--pred-prob", help=".npy probability map")
    pe.add_argument("--target", help="target mask PNG")
    pe.add_argument("--pred-temp", help=".npy or .tif predicted temperatures")
    pe.add_argument("--gt-tiff", help="ground-truth radiometric TIFF")
    pe.add_argument("--fire-mask", help="fire-region mask PNG")
    pe.add_argument("--lambda-dice", type=float, default=0.5)
    pe.add_argument("--lambda-student-dice", type=float, default=0.5)
    pe.add_argument("--lambda-flame-l1", type=float, default=1.0)
    pe.set_defaults(func=cmd_losses_eval)

    p = sub.add_parser("counts", help="decision tallies per burn location")
    p.add_argument("manifest")
    p.add_argument("--excluded-out", dest="excluded_out",
                   help="also write excluded ids, one per line")
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("split", help="deterministic train/test split of accepted records")
    p.add_argument("manifest")
    p.add_argument("--fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-out")
    p.add_argument("--test-out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("synth", help="synthetic scene corpora")
    ssub = p.add_subparsers(dest="synth_command", metavar="subcommand")
    pg = ssub.add_parser("gen", help="generate a corpus")
    pg.add_argument("--spec", help="scene spec JSON")
    pg.add_argument("--out", required=True)
    pg.add_argument("--count", type=int, default=1)
    pg.set_defaults(func=cmd_synth_gen)

    p = sub.add_parser("review", help="human review service")
    rsub = p.add_subparsers(dest="review_command", metavar="subcommand")
    ps = rsub.add_parser("serve", help="serve the review API")
    ps.add_argument("--manifest", required=True)
    ps.add_argument("--port", type=int, default=8731)
    ps.add_argument("--host", default="127.0.0.1")
    ps.set_defaults(func=cmd_review_serve)

    return top


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    func = getattr(args, "func", None)
    if func is None:
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    try:
        return func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, TiffLoadError, ProposerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
