"""Evaluation metrics: per-class IoU/accuracy and temperature tolerance
accuracy, aggregated the way results tables report them (mean of batch means,
not a pooled mean)."""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np

from .cv_kernels import iou
from .radiometric import TemperatureGrid

__all__ = [
    "SegScores",
    "TempAccuracy",
    "seg_scores",
    "temp_tolerance_accuracy",
    "batch_aggregate",
]


@dataclasses.dataclass(frozen=True)
class SegScores:
    """Class 0 = background, class 1 = fire region.  Accuracy is per-class
    recall; a class absent from the ground truth scores 1.0 (vacuous)."""

    iou_background: float
    iou_fire: float
    miou: float
    acc_background: float
    acc_fire: float
    macc: float


@dataclasses.dataclass(frozen=True)
class TempAccuracy:
    tolerance: float
    fraction_within: float
    pixels_evaluated: int


def seg_scores(pred: np.ndarray, gt: np.ndarray) -> SegScores:
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape:
        raise ValueError(f"dimension mismatch: {pred.shape} vs {gt.shape}")

    iou_fire = iou(pred.astype(np.uint8), gt.astype(np.uint8))
    iou_bg = iou((~pred).astype(np.uint8), (~gt).astype(np.uint8))

    def class_recall(cls: bool) -> float:
        in_gt = gt == cls
        total = int(in_gt.sum())
        if total == 0:
            return 1.0
        return int((pred[in_gt] == cls).sum()) / total

    acc_fire = class_recall(True)
    acc_bg = class_recall(False)
    return SegScores(
        iou_background=iou_bg,
        iou_fire=iou_fire,
        miou=(iou_bg + iou_fire) / 2.0,
        acc_background=acc_bg,
        acc_fire=acc_fire,
        macc=(acc_bg + acc_fire) / 2.0,
    )


def temp_tolerance_accuracy(
    pred_temp: TemperatureGrid,
    gt_temp: TemperatureGrid,
    region: np.ndarray,
    tol: float,
) -> TempAccuracy:
    """Fraction of region pixels whose |predicted - true| temperature is
    within +/- tol.  An empty region reports fraction 0 with 0 pixels
    evaluated; aggregation skips such entries."""
    if tol < 0:
        raise ValueError("tolerance must be >= 0")
    r = np.asarray(region).astype(bool)
    if pred_temp.values.shape != gt_temp.values.shape or pred_temp.values.shape != r.shape:
        raise ValueError("pred/gt/region dimensions must agree")
    n = int(r.sum())
    if n == 0:
        return TempAccuracy(tolerance=tol, fraction_within=0.0, pixels_evaluated=0)
    within = int((np.abs(pred_temp.values[r] - gt_temp.values[r]) <= tol).sum())
    return TempAccuracy(tolerance=tol, fraction_within=within / n, pixels_evaluated=n)


def _chunks(seq: Sequence, size: int):
    for i in range(0, len(seq), size):
        yield seq[i : i + size]


def batch_aggregate(per_image: Sequence, batch_size: int):
    """Mean-of-batch-means aggregation over consecutive batches (the final
    partial batch kept).

    For SegScores the aggregate is field-wise.  For TempAccuracy, entries
    with an empty region are excluded from their batch mean, and a batch with
    nothing evaluable drops out entirely.
    """
    if not per_image:
        raise ValueError("cannot aggregate an empty list")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")

    first = per_image[0]
    if isinstance(first, SegScores):
        if not all(isinstance(s, SegScores) for s in per_image):
            raise TypeError("mixed score types in one aggregation")
        fields = [f.name for f in dataclasses.fields(SegScores)]
        batch_means = [
            {f: float(np.mean([getattr(s, f) for s in batch])) for f in fields}
            for batch in _chunks(per_image, batch_size)
        ]
        return SegScores(**{f: float(np.mean([bm[f] for bm in batch_means])) for f in fields})

    if isinstance(first, TempAccuracy):
        if not all(isinstance(s, TempAccuracy) for s in per_image):
            raise TypeError("mixed score types in one aggregation")
        tol = first.tolerance
        if any(s.tolerance != tol for s in per_image):
            raise ValueError("cannot aggregate across different tolerances")
        batch_means = []
        total_pixels = 0
        for batch in _chunks(per_image, batch_size):
            evaluable = [s for s in batch if s.pixels_evaluated > 0]
            total_pixels += sum(s.pixels_evaluated for s in evaluable)
            if evaluable:
                batch_means.append(float(np.mean([s.fraction_within for s in evaluable])))
        fraction = float(np.mean(batch_means)) if batch_means else 0.0
        return TempAccuracy(
            tolerance=tol, fraction_within=fraction, pixels_evaluated=total_pixels
        )

    raise TypeError(f"cannot aggregate {type(first).__name__} entries")
