"""TOPSIS mask selection.

Each of the three candidate masks is scored on five criteria (IoU against the
Otsu mask, IoU against the thresholded thermal image, absolute mean foreground
temperature difference vs. the Otsu mask, the proposer's own confidence, and
SSIM against the Otsu mask), then ranked by closeness to the ideal solution.
The thermal-threshold IoU carries the largest default weight; raw proposer
confidence is deliberately just one voice among five.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .cv_kernels import iou, ssim
from .proposer import ProposalSet
from .radiometric import TemperatureGrid

__all__ = [
    "BENEFIT",
    "COST",
    "CriterionSpec",
    "DecisionMatrix",
    "TopsisResult",
    "DEFAULT_CRITERIA",
    "build_criteria",
    "topsis_rank",
    "select_mask",
]

BENEFIT = "benefit"
COST = "cost"


@dataclasses.dataclass(frozen=True)
class CriterionSpec:
    name: str
    direction: str              # BENEFIT | COST
    weight: float

    def __post_init__(self) -> None:
        if self.direction not in (BENEFIT, COST):
            raise ValueError(f"direction must be benefit or cost, got {self.direction!r}")
        if self.weight <= 0:
            raise ValueError(f"weight must be positive, got {self.weight}")


# The thermal-threshold IoU dominates; the temperature difference is the one
# cost criterion.  Weights are configuration, normalized before use, and
# recorded in every selection report.
DEFAULT_CRITERIA = (
    CriterionSpec("iou_otsu", BENEFIT, 0.15),
    CriterionSpec("iou_thermal", BENEFIT, 0.40),
    CriterionSpec("temp_diff", COST, 0.15),
    CriterionSpec("confidence", BENEFIT, 0.15),
    CriterionSpec("ssim_otsu", BENEFIT, 0.15),
)


@dataclasses.dataclass(frozen=True, eq=False)
class DecisionMatrix:
    values: np.ndarray          # (m alternatives, n criteria) float64
    specs: tuple[CriterionSpec, ...]

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"decision matrix must be m x n with m,n >= 1, got {arr.shape}")
        if arr.shape[1] != len(self.specs):
            raise ValueError(
                f"matrix has {arr.shape[1]} criteria but {len(self.specs)} specs"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("decision matrix must be finite (no NaN/Inf)")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


@dataclasses.dataclass(frozen=True, eq=False)
class TopsisResult:
    closeness: np.ndarray       # (m,) in [0,1]
    chosen_index: int
    report: np.ndarray          # raw criterion values, (m, n)
    weights: np.ndarray         # normalized weights actually used, (n,)

    def to_report_json(self) -> dict:
        return {
            "criteria": [[float(x) for x in row] for row in self.report],
            "weights": [float(w) for w in self.weights],
            "closeness": [float(c) for c in self.closeness],
            "chosen": int(self.chosen_index),
        }


def _masked_mean_temp(tiff: TemperatureGrid, mask: np.ndarray) -> float | None:
    sel = mask.astype(bool)
    if not sel.any():
        return None
    return float(tiff.values[sel].mean())


def build_criteria(
    proposals: ProposalSet,
    otsu_mask: np.ndarray,
    thermal_thresh_mask: np.ndarray,
    tiff: TemperatureGrid,
    specs: tuple[CriterionSpec, ...] = DEFAULT_CRITERIA,
    temp_sentinel: float = 500.0,
) -> DecisionMatrix:
    """Score every proposal on the five criteria.

    A proposal with empty foreground (or an empty Otsu mask) cannot produce a
    mean temperature, so its difference criterion takes ``temp_sentinel``
    (the calibration clip_max): maximally penalized, never NaN.
    """
    otsu_mask = np.asarray(otsu_mask)
    thermal_thresh_mask = np.asarray(thermal_thresh_mask)
    for arr, name in ((otsu_mask, "otsu mask"), (thermal_thresh_mask, "thermal mask")):
        if arr.shape != (tiff.height, tiff.width):
            raise ValueError(f"{name} dimensions {arr.shape} do not match the TIFF")

    otsu_scaled = otsu_mask.astype(np.uint8) * 255
    otsu_mean = _masked_mean_temp(tiff, otsu_mask)

    rows = []
    for proposal in proposals.proposals:
        mask = proposal.mask
        if mask.shape != (tiff.height, tiff.width):
            raise ValueError(f"proposal mask dimensions {mask.shape} do not match the TIFF")
        mask_mean = _masked_mean_temp(tiff, mask)
        if mask_mean is None or otsu_mean is None:
            temp_diff = temp_sentinel
        else:
            temp_diff = abs(mask_mean - otsu_mean)
        rows.append(
            [
                iou(otsu_mask, mask),
                iou(thermal_thresh_mask, mask),
                temp_diff,
                proposal.confidence,
                ssim(otsu_scaled, mask.astype(np.uint8) * 255),
            ]
        )
    return DecisionMatrix(values=np.array(rows, dtype=np.float64), specs=specs)


def topsis_rank(matrix: DecisionMatrix) -> TopsisResult:
    """Rank alternatives by relative closeness to the ideal solution.

    Steps: vector-normalize each column (r = x / sqrt(sum x^2); an all-zero
    column stays zero), apply weights normalized to sum 1, take per-column
    max (benefit) / min (cost) as the ideal and the opposite as the
    anti-ideal, measure Euclidean distances d+ and d-, and score
    C = d- / (d+ + d-) with C = 0 when both distances vanish.  The chosen
    index is the argmax of C, ties resolving to the lowest index.
    """
    x = matrix.values
    m, n = x.shape

    norms = np.sqrt((x * x).sum(axis=0))
    r = np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)

    raw_w = np.array([s.weight for s in matrix.specs], dtype=np.float64)
    w = raw_w / raw_w.sum()
    v = r * w

    benefit = np.array([s.direction == BENEFIT for s in matrix.specs])
    ideal = np.where(benefit, v.max(axis=0), v.min(axis=0))
    anti = np.where(benefit, v.min(axis=0), v.max(axis=0))

    d_pos = np.sqrt(((v - ideal) ** 2).sum(axis=1))
    d_neg = np.sqrt(((v - anti) ** 2).sum(axis=1))
    denom = d_pos + d_neg
    closeness = np.divide(d_neg, denom, out=np.zeros(m), where=denom > 0)

    return TopsisResult(
        closeness=closeness,
        chosen_index=int(np.argmax(closeness)),
        report=x,
        weights=w,
    )


def select_mask(
    proposals: ProposalSet,
    otsu_mask: np.ndarray,
    thermal_thresh_mask: np.ndarray,
    tiff: TemperatureGrid,
    specs: tuple[CriterionSpec, ...] = DEFAULT_CRITERIA,
    temp_sentinel: float = 500.0,
) -> tuple[np.ndarray, TopsisResult]:
    """Build the criteria matrix, rank it, and return (chosen mask, result)."""
    matrix = build_criteria(
        proposals, otsu_mask, thermal_thresh_mask, tiff, specs, temp_sentinel
    )
    result = topsis_rank(matrix)
    return proposals.proposals[result.chosen_index].mask, result
