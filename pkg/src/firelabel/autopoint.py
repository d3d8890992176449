"""Autopoint locator: derive positive/negative point prompts from a calibrated
temperature grid.

The grid's Otsu threshold tau splits fire from background; non-overlapping
patches whose mean clears tau by a dead-zone margin epsilon become candidate
points; candidates survive only if they sit within d_max pixels of a Canny
edge of the grid (the euclidean distance transform provides the lookup), and
each label class is capped to the nearest-to-edge few.

Coordinates are (x, y) = (column, row), origin top-left; this convention is
binding for every serialized point.
"""

from __future__ import annotations

import dataclasses
import json
import os
from typing import Sequence

import numpy as np

from .cv_kernels import (
    DegenerateHistogramError,
    canny,
    euclidean_distance_transform,
    otsu_threshold,
)
from .radiometric import TemperatureGrid

__all__ = [
    "AutopointConfig",
    "PointPrompt",
    "PointSet",
    "scan_patches",
    "filter_by_edges",
    "autolocate",
]

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclasses.dataclass(frozen=True)
class AutopointConfig:
    pos_patch: int = 5
    neg_patch: int = 3
    epsilon: float = 25.0          # degrees C margin around tau
    canny_high: float = 200.0
    canny_sigma: float = 1.0
    d_max: float = 20.0            # max distance to the nearest edge, pixels
    max_positive: int = 10
    max_negative: int = 10

    def __post_init__(self) -> None:
        for name, patch in (("pos_patch", self.pos_patch), ("neg_patch", self.neg_patch)):
            if patch < 3 or patch % 2 == 0:
                raise ValueError(f"{name} must be odd and >= 3, got {patch}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.d_max <= 0:
            raise ValueError("d_max must be positive")
        if self.max_positive < 1 or self.max_negative < 1:
            raise ValueError("point caps must be >= 1")


@dataclasses.dataclass(frozen=True)
class PointPrompt:
    x: int
    y: int
    label: str                      # POSITIVE | NEGATIVE
    patch_mean: float
    edge_distance: float | None = None


@dataclasses.dataclass(frozen=True)
class PointSet:
    positives: tuple[PointPrompt, ...]
    negatives: tuple[PointPrompt, ...]
    tau: float | None               # None marks a no-fire frame
    edge_pixels: int = 0

    @property
    def is_empty(self) -> bool:
        return not self.positives and not self.negatives

    def to_json(self) -> dict:
        def enc(points):
            return [
                {"x": p.x, "y": p.y, "mean": p.patch_mean, "dist": p.edge_distance}
                for p in points
            ]

        return {
            "tau": self.tau,
            "positives": enc(self.positives),
            "negatives": enc(self.negatives),
            "edge_pixels": self.edge_pixels,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PointSet":
        def dec(items, label):
            return tuple(
                PointPrompt(
                    x=int(it["x"]),
                    y=int(it["y"]),
                    label=label,
                    patch_mean=float(it["mean"]),
                    edge_distance=None if it.get("dist") is None else float(it["dist"]),
                )
                for it in items
            )

        tau = obj.get("tau")
        return cls(
            positives=dec(obj.get("positives", []), POSITIVE),
            negatives=dec(obj.get("negatives", []), NEGATIVE),
            tau=None if tau is None else float(tau),
            edge_pixels=int(obj.get("edge_pixels", 0)),
        )

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PointSet":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _window_means(values: np.ndarray, patch: int) -> np.ndarray:
    """Means of the non-overlapping patch x patch tiling (partial borders dropped)."""
    h, w = values.shape
    ny, nx = h // patch, w // patch
    trimmed = values[: ny * patch, : nx * patch]
    return trimmed.reshape(ny, patch, nx, patch).mean(axis=(1, 3))


def scan_patches(
    grid: TemperatureGrid, tau: float, config: AutopointConfig = AutopointConfig()
) -> tuple[list[PointPrompt], list[PointPrompt]]:
    """Tile the grid twice (pos_patch and neg_patch, both non-overlapping,
    row-major from the top-left, partial border windows discarded) and emit a
    candidate per window whose mean clears the dead zone: mean >= tau + epsilon
    for positives, mean <= tau - epsilon for negatives.  Candidate coordinates
    are window centers."""
    v = grid.values
    positives: list[PointPrompt] = []
    negatives: list[PointPrompt] = []
    for label, patch in ((POSITIVE, config.pos_patch), (NEGATIVE, config.neg_patch)):
        if grid.height < patch or grid.width < patch:
            raise ValueError(
                f"grid {grid.height}x{grid.width} smaller than {patch}x{patch} patch"
            )
        means = _window_means(v, patch)
        half = patch // 2
        for iy in range(means.shape[0]):
            for ix in range(means.shape[1]):
                mean = float(means[iy, ix])
                point = PointPrompt(
                    x=ix * patch + half, y=iy * patch + half, label=label, patch_mean=mean
                )
                if label == POSITIVE and mean >= tau + config.epsilon:
                    positives.append(point)
                elif label == NEGATIVE and mean <= tau - config.epsilon:
                    negatives.append(point)
    return positives, negatives


def filter_by_edges(
    candidates: Sequence[PointPrompt],
    field: np.ndarray,
    d_max: float,
    cap: int | None = None,
) -> list[PointPrompt]:
    """Keep candidates within d_max of an edge; if more than `cap` remain,
    keep the cap-many with the smallest edge distance (ties resolve in the
    candidates' original row-major order)."""
    retained = []
    for p in candidates:
        dist = float(field[p.y, p.x])
        if dist <= d_max:
            retained.append(dataclasses.replace(p, edge_distance=dist))
    if cap is not None and len(retained) > cap:
        retained = sorted(retained, key=lambda p: p.edge_distance)[:cap]
    return retained


def autolocate(
    grid: TemperatureGrid,
    config: AutopointConfig = AutopointConfig(),
    value_range: tuple[float, float] = (0.0, 500.0),
) -> PointSet:
    """Full locator: Otsu tau -> Canny edges (low = tau, high = config cap) ->
    distance field -> patch scan -> edge filtering.  A grid whose histogram
    cannot be split (constant frame) yields the no-fire outcome: an empty
    PointSet with tau = None."""
    try:
        tau = otsu_threshold(grid.values, value_range).tau
    except DegenerateHistogramError:
        return PointSet(positives=(), negatives=(), tau=None, edge_pixels=0)

    # tau can exceed the fixed high threshold on very hot frames; Canny
    # requires low <= high, so the low threshold is capped.
    low = min(tau, config.canny_high)
    edges = canny(grid, low=low, high=config.canny_high, sigma=config.canny_sigma)
    field = euclidean_distance_transform(edges)
    pos_c, neg_c = scan_patches(grid, tau, config)
    positives = filter_by_edges(pos_c, field, config.d_max, cap=config.max_positive)
    negatives = filter_by_edges(neg_c, field, config.d_max, cap=config.max_negative)
    return PointSet(
        positives=tuple(positives),
        negatives=tuple(negatives),
        tau=tau,
        edge_pixels=int(edges.sum()),
    )
