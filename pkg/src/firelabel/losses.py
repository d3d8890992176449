"""Reference implementations of the distillation loss terms.

These are oracle-grade scalar functions for unit-testing an external training
pipeline, not a training loop: cross-entropy and soft Dice between a
probability map and a binary target, the fire-region-masked L1 temperature
loss, the weighted teacher/student compositions, and the sigmoid scaling that
maps an unbounded regression head onto the physical temperature range.

The intended training protocol (alternating teacher/student updates with the
counterpart frozen and teacher outputs detached) is described in the README;
executing it is out of scope here.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .radiometric import TemperatureGrid

__all__ = [
    "LossWeights",
    "PROB_EPSILON",
    "cross_entropy",
    "dice_loss",
    "teacher_loss",
    "flame_l1",
    "student_total",
    "scale_temperature",
]

# Probabilities are clamped away from {0,1} so hard predictions cannot
# produce log(0).
PROB_EPSILON = 1e-7


@dataclasses.dataclass(frozen=True)
class LossWeights:
    lambda_dice: float = 0.5
    lambda_student_dice: float = 0.5
    lambda_flame_l1: float = 1.0

    def __post_init__(self) -> None:
        if min(self.lambda_dice, self.lambda_student_dice, self.lambda_flame_l1) < 0:
            raise ValueError("loss weights must be >= 0")


def _check_prob_map(pred) -> np.ndarray:
    p = np.asarray(pred, dtype=np.float64)
    if p.ndim != 2:
        raise ValueError(f"probability map must be 2-D, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("probabilities must be finite and within [0, 1]")
    return p


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def cross_entropy(pred, target) -> float:
    """Pixel-mean binary cross-entropy of p_fire against a {0,1} target."""
    p = _check_prob_map(pred)
    t = np.asarray(target, dtype=np.float64)
    _check_same_shape(p, t)
    p = np.clip(p, PROB_EPSILON, 1.0 - PROB_EPSILON)
    return float(np.mean(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p))))


def dice_loss(pred, target, smooth: float = 1.0) -> float:
    """Soft Dice loss on p_fire: 1 - (2*sum(p*t) + smooth) / (sum(p) + sum(t) + smooth)."""
    p = _check_prob_map(pred)
    t = np.asarray(target, dtype=np.float64)
    _check_same_shape(p, t)
    inter = float((p * t).sum())
    return 1.0 - (2.0 * inter + smooth) / (float(p.sum()) + float(t.sum()) + smooth)


def teacher_loss(pred, target, w: LossWeights = LossWeights()) -> float:
    """Cross-entropy plus lambda_dice-weighted Dice against the pseudo-label."""
    return cross_entropy(pred, target) + w.lambda_dice * dice_loss(pred, target)


def flame_l1(pred_temp: TemperatureGrid, gt: TemperatureGrid, fire) -> float:
    """Mean absolute temperature error over fire pixels only; zero when the
    fire mask is empty.  Pixels outside the mask never contribute."""
    f = np.asarray(fire).astype(bool)
    _check_same_shape(pred_temp.values, gt.values)
    _check_same_shape(pred_temp.values, f)
    n = int(f.sum())
    if n == 0:
        return 0.0
    return float(np.abs(pred_temp.values[f] - gt.values[f]).mean())


def student_total(ce: float, dice: float, fl1: float, w: LossWeights = LossWeights()) -> float:
    """Total student objective: ce + lambda_student_dice*dice + lambda_flame_l1*fl1."""
    return ce + w.lambda_student_dice * dice + w.lambda_flame_l1 * fl1


def scale_temperature(z, t_max: float = 500.0) -> TemperatureGrid:
    """Map regression logits onto (0, t_max) via t_max * sigmoid(z)."""
    arr = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("temperature logits must be finite")
    # equivalent stable forms on either sign, avoiding exp overflow
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    e = np.exp(arr[~pos])
    out[~pos] = e / (1.0 + e)
    return TemperatureGrid(t_max * out)
