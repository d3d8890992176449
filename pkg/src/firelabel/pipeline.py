"""End-to-end pseudo-label pipeline: calibrate -> autolocate points ->
propose masks -> TOPSIS-select, stage by stage or in one run.

Per image, the radiometric TIFF drives everything: its Otsu threshold feeds
both the point prompts and the Otsu comparison mask; the thermal JPG is what
the external proposer (or the classical baseline) actually segments.  Every
stage is a pure function of (inputs, config), so re-running a stage with the
same inputs rewrites byte-identical artifacts; external proposals are cached
content-addressed under cache/ keyed by image + points + proposer config.

Output layout under --out: masks/, points/, reports/, proposals/, stats/,
cache/, manifest.jsonl (and aggregate.json once `evaluate` runs).
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from .autopoint import AutopointConfig, PointSet, autolocate
from .cv_kernels import DegenerateHistogramError, binarize, otsu_threshold, thermal_jpg_to_gray
from .dataset import Manifest, discover
from .metrics import SegScores, batch_aggregate, seg_scores, temp_tolerance_accuracy
from .pngio import load_mask_png, save_mask_png
from .proposer import MaskProposal, ProposalSet, propose_baseline, propose_external
from .radiometric import (
    CalibrationPolicy,
    TemperatureGrid,
    calibrate,
    grid_stats,
    load_tiff,
    saturation_report,
)
from .topsis import DEFAULT_CRITERIA, CriterionSpec, select_mask

__all__ = ["PipelineConfig", "run_pipeline", "stage_points", "stage_propose", "stage_select", "evaluate_run"]

BASELINE = "baseline"
EXTERNAL = "external"


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    policy: CalibrationPolicy = CalibrationPolicy()
    autopoint: AutopointConfig = AutopointConfig()
    weights: tuple[float, ...] = tuple(s.weight for s in DEFAULT_CRITERIA)
    thermal_thresh: float | None = None    # None -> second Otsu on the thermal grayscale
    proposer: str = BASELINE               # BASELINE | EXTERNAL
    endpoint: str | None = None
    timeout: float = 120.0
    proposer_inflight: int = 4             # concurrent external proposal calls
    tiff_scale: float | None = None        # integer-sample TIFF decoding
    tiff_offset: float = 0.0
    batch_size: int = 16
    seed: int = 0
    jobs: int = 0                          # 0 -> os.cpu_count()

    def __post_init__(self) -> None:
        if len(self.weights) != len(DEFAULT_CRITERIA):
            raise ValueError(f"expected {len(DEFAULT_CRITERIA)} criterion weights")
        if self.proposer not in (BASELINE, EXTERNAL):
            raise ValueError(f"unknown proposer {self.proposer!r}")
        if self.proposer == EXTERNAL and not self.endpoint:
            raise ValueError("external proposer requires an endpoint")

    def criteria(self) -> tuple[CriterionSpec, ...]:
        return tuple(
            dataclasses.replace(spec, weight=w)
            for spec, w in zip(DEFAULT_CRITERIA, self.weights)
        )

    def to_json(self) -> dict:
        return {
            "policy": dataclasses.asdict(self.policy),
            "autopoint": dataclasses.asdict(self.autopoint),
            "weights": list(self.weights),
            "thermal_thresh": self.thermal_thresh,
            "proposer": self.proposer,
            "endpoint": self.endpoint,
            "timeout": self.timeout,
            "proposer_inflight": self.proposer_inflight,
            "tiff_scale": self.tiff_scale,
            "tiff_offset": self.tiff_offset,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "jobs": self.jobs,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PipelineConfig":
        kwargs = dict(obj)
        if "policy" in kwargs:
            kwargs["policy"] = CalibrationPolicy(**kwargs["policy"])
        if "autopoint" in kwargs:
            kwargs["autopoint"] = AutopointConfig(**kwargs["autopoint"])
        if "weights" in kwargs:
            kwargs["weights"] = tuple(kwargs["weights"])
        fields = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in kwargs.items() if k in fields})


_INFLIGHT_LOCK = threading.Lock()
_INFLIGHT: dict[int, threading.Semaphore] = {}


def _external_slot(cfg: PipelineConfig) -> threading.Semaphore:
    """One semaphore per in-flight limit, shared across worker threads."""
    with _INFLIGHT_LOCK:
        sem = _INFLIGHT.get(cfg.proposer_inflight)
        if sem is None:
            sem = threading.Semaphore(max(1, cfg.proposer_inflight))
            _INFLIGHT[cfg.proposer_inflight] = sem
        return sem


def _out_dirs(out: Path) -> None:
    for sub in ("masks", "points", "reports", "proposals", "stats", "cache"):
        (out / sub).mkdir(parents=True, exist_ok=True)


def _dump_json(obj, path: Path) -> None:
    """Atomic write: concurrent writers of the same (deterministic) content
    cannot tear the file."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _load_thermal(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Returns (rgb for the proposer wire, grayscale for Otsu/criteria)."""
    im = Image.open(path)
    if im.mode == "L":
        gray = np.asarray(im)
        rgb = np.repeat(gray[:, :, None], 3, axis=2)
    else:
        rgb = np.asarray(im.convert("RGB"))
        gray = thermal_jpg_to_gray(rgb)
    return rgb, gray


def _load_grid(record, cfg: PipelineConfig) -> TemperatureGrid:
    return load_tiff(record.tiff_path, int_scale=cfg.tiff_scale, int_offset=cfg.tiff_offset)


def ensure_manifest(root: str | None, out: Path, cfg: PipelineConfig) -> Manifest:
    """Load out/manifest.jsonl if present, otherwise discover from root."""
    manifest_path = out / "manifest.jsonl"
    if manifest_path.exists():
        return Manifest.load(manifest_path)
    if root is None:
        raise ValueError(f"no manifest at {manifest_path} and no --root to discover from")
    manifest = discover(root, config_snapshot=cfg.to_json())
    out.mkdir(parents=True, exist_ok=True)
    manifest.save(manifest_path)
    return manifest


def stage_calibrate(record, cfg: PipelineConfig, out: Path) -> None:
    """Saturation statistics (pre-clip) and grid summary per record."""
    grid = _load_grid(record, cfg)
    stats = saturation_report(grid, cfg.policy)
    summary = grid_stats(grid, cfg.policy)
    _dump_json(
        {
            "pixels_above_caution": stats.pixels_above_caution,
            "pixels_at_or_above_clip_max": stats.pixels_at_or_above_clip_max,
            "fraction_caution": stats.fraction_caution,
            "min": summary.min,
            "max": summary.max,
            "mean": summary.mean,
            "histogram": [int(c) for c in summary.histogram],
        },
        out / "stats" / f"{record.id}.json",
    )


def stage_points(record, cfg: PipelineConfig, out: Path) -> PointSet:
    grid = calibrate(_load_grid(record, cfg), cfg.policy)
    points = autolocate(
        grid, cfg.autopoint, (cfg.policy.clip_min, cfg.policy.clip_max)
    )
    points_path = out / "points" / f"{record.id}.json"
    points.save(points_path)
    record.points_path = str(points_path)
    return points


def _proposal_cache_key(record, cfg: PipelineConfig, points: PointSet) -> str:
    h = hashlib.sha256()
    with open(record.thermal_path, "rb") as fh:
        h.update(fh.read())
    h.update(json.dumps(points.to_json(), sort_keys=True).encode())
    h.update(
        json.dumps(
            {"proposer": cfg.proposer, "endpoint": cfg.endpoint}, sort_keys=True
        ).encode()
    )
    return h.hexdigest()


def stage_propose(record, cfg: PipelineConfig, out: Path, points: PointSet) -> ProposalSet | None:
    """Produce the three candidate masks; None for no-fire frames."""
    if points.is_empty:
        return None
    rgb, gray = _load_thermal(record.thermal_path)

    key = _proposal_cache_key(record, cfg, points)
    cache_path = out / "cache" / f"{key}.json"
    mask_paths = [out / "masks" / f"{record.id}_p{k}.png" for k in range(3)]
    if cache_path.exists() and all(p.exists() for p in mask_paths):
        cached = json.loads(cache_path.read_text())
        proposals = ProposalSet(
            proposals=tuple(
                MaskProposal(mask=load_mask_png(p), confidence=s)
                for p, s in zip(mask_paths, cached["scores"])
            ),
            source=cached["source"],
        )
    else:
        if cfg.proposer == EXTERNAL:
            with _external_slot(cfg):
                proposals = propose_external(rgb, points, cfg.endpoint, timeout=cfg.timeout)
        else:
            proposals = propose_baseline(gray, points)
        for k, mask in enumerate(proposals.masks):
            save_mask_png(mask, out / "masks" / f"{record.id}_p{k}.png")
        _dump_json(
            {"scores": proposals.scores, "source": proposals.source, "cache_key": key},
            cache_path,
        )
    _dump_json(
        {
            "scores": proposals.scores,
            "source": proposals.source,
            "masks": [f"{record.id}_p{k}.png" for k in range(3)],
        },
        out / "proposals" / f"{record.id}.json",
    )
    return proposals


def stage_select(record, cfg: PipelineConfig, out: Path, points: PointSet, proposals: ProposalSet | None) -> None:
    """TOPSIS selection; no-fire frames get an empty pseudo-label and no report."""
    mask_path = out / "masks" / f"{record.id}.png"
    if proposals is None or points.tau is None:
        grid = _load_grid(record, cfg)
        save_mask_png(np.zeros((grid.height, grid.width), dtype=np.uint8), mask_path)
        record.mask_path = str(mask_path)
        return

    grid = calibrate(_load_grid(record, cfg), cfg.policy)
    _, gray = _load_thermal(record.thermal_path)
    otsu_mask = binarize(grid.values, points.tau)
    if cfg.thermal_thresh is not None:
        thermal_mask = binarize(gray, cfg.thermal_thresh)
    else:
        try:
            thermal_mask = binarize(gray, otsu_threshold(gray, (0.0, 255.0)).tau)
        except DegenerateHistogramError:
            thermal_mask = np.zeros_like(gray, dtype=np.uint8)

    chosen, result = select_mask(
        proposals,
        otsu_mask,
        thermal_mask,
        grid,
        specs=cfg.criteria(),
        temp_sentinel=cfg.policy.clip_max,
    )
    save_mask_png(chosen, mask_path)
    report_path = out / "reports" / f"{record.id}.json"
    _dump_json(result.to_report_json(), report_path)
    record.mask_path = str(mask_path)
    record.selection_report_path = str(report_path)


def _process_record(record, cfg: PipelineConfig, out: Path) -> None:
    stage_calibrate(record, cfg, out)
    points = stage_points(record, cfg, out)
    proposals = stage_propose(record, cfg, out, points)
    stage_select(record, cfg, out, points, proposals)


def run_pipeline(root: str | None, out: str | os.PathLike, cfg: PipelineConfig) -> Manifest:
    """All stages for every record, parallel across images, manifest written
    atomically at the end (records in manifest order)."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _out_dirs(out)
    manifest = ensure_manifest(root, out, cfg)
    manifest.config_snapshot = cfg.to_json()

    jobs = cfg.jobs or os.cpu_count() or 1
    if jobs > 1 and len(manifest.records) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda r: _process_record(r, cfg, out), manifest.records))
    else:
        for record in manifest.records:
            _process_record(record, cfg, out)

    manifest.save(out / "manifest.jsonl")
    return manifest


def evaluate_run(
    out: str | os.PathLike,
    gt_dir: str | os.PathLike,
    batch_size: int | None = None,
    tolerances: tuple[float, ...] = (25.0, 50.0),
    pred_temp_dir: str | os.PathLike | None = None,
) -> dict:
    """Score every record's selected mask against gt_dir/<id>.png; when
    pred_temp_dir holds <id>.npy temperature predictions, also score
    tolerance accuracy over the pseudo-label fire region.  Writes
    per_image.csv and aggregate.json under the run directory."""
    out = Path(out)
    gt_dir = Path(gt_dir)
    manifest = Manifest.load(out / "manifest.jsonl")
    if batch_size is None:
        batch_size = int(manifest.config_snapshot.get("batch_size", 16))

    rows = []
    seg_list: list[SegScores] = []
    temp_lists: dict[float, list] = {t: [] for t in tolerances}
    for record in manifest.records:
        if not record.mask_path:
            continue
        pred = load_mask_png(record.mask_path)
        gt = load_mask_png(gt_dir / f"{record.id}.png")
        s = seg_scores(pred, gt)
        seg_list.append(s)
        row = {
            "id": record.id,
            "IoU 0": s.iou_background,
            "IoU 1": s.iou_fire,
            "mIoU": s.miou,
            "Acc 0": s.acc_background,
            "Acc 1": s.acc_fire,
            "mAcc": s.macc,
        }
        if pred_temp_dir is not None:
            pred_temp = TemperatureGrid(np.load(Path(pred_temp_dir) / f"{record.id}.npy"))
            gt_temp = load_tiff(record.tiff_path)
            for tol in tolerances:
                acc = temp_tolerance_accuracy(pred_temp, gt_temp, pred, tol)
                temp_lists[tol].append(acc)
                row[f"±{tol:g}"] = acc.fraction_within if acc.pixels_evaluated else ""
        rows.append(row)

    if not rows:
        raise ValueError("nothing to evaluate: no records with masks")

    csv_path = out / "per_image.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    agg = batch_aggregate(seg_list, batch_size)
    aggregate = {
        "images": len(rows),
        "batch_size": batch_size,
        "IoU 0": agg.iou_background,
        "IoU 1": agg.iou_fire,
        "mIoU": agg.miou,
        "Acc 0": agg.acc_background,
        "Acc 1": agg.acc_fire,
        "mAcc": agg.macc,
    }
    if pred_temp_dir is not None:
        for tol in tolerances:
            if temp_lists[tol]:
                t_agg = batch_aggregate(temp_lists[tol], batch_size)
                aggregate[f"±{tol:g}"] = t_agg.fraction_within
                aggregate[f"±{tol:g} pixels"] = t_agg.pixels_evaluated
    _dump_json(aggregate, out / "aggregate.json")
    return aggregate
