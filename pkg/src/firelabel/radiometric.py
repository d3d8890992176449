"""Radiometric TIFF temperature grids: loading, calibration, saturation stats.

A radiometric TIFF is a single-band image whose samples are per-pixel
temperatures in degrees Celsius.  Grids are loaded unmodified, then clipped
to a configurable physical range (default 0..500 C) before entering the
pipeline; readings above the camera caution threshold (default 450 C) are
counted so downstream consumers know how much of a frame to distrust.
"""

from __future__ import annotations

import dataclasses
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = [
    "TiffLoadError",
    "TemperatureGrid",
    "CalibrationPolicy",
    "SaturationStats",
    "GridStats",
    "HISTOGRAM_BINS",
    "load_tiff",
    "calibrate",
    "saturation_report",
    "grid_stats",
]

# Bin count shared with the Otsu discretization in cv_kernels.
HISTOGRAM_BINS = 256

# Pillow modes with one integer sample per pixel (need an explicit scale).
_INT_MODES = {"L", "I", "I;16", "I;16B", "I;16L", "I;16N"}


class TiffLoadError(Exception):
    """Raised when a radiometric TIFF cannot be decoded into a grid."""


@dataclasses.dataclass(frozen=True, eq=False)
class TemperatureGrid:
    """Immutable 2-D temperature field in degrees Celsius.

    ``values`` is a read-only float64 array of shape (height, width).
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"grid must be 2-D with positive dims, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise ValueError(f"grid contains non-finite value at (row={bad[0]}, col={bad[1]})")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclasses.dataclass(frozen=True)
class CalibrationPolicy:
    """Clip range and caution threshold, all in degrees Celsius."""

    clip_min: float = 0.0
    clip_max: float = 500.0
    caution_threshold: float = 450.0

    def __post_init__(self) -> None:
        if not (self.clip_min < self.caution_threshold <= self.clip_max):
            raise ValueError(
                "calibration policy requires clip_min < caution_threshold <= clip_max, "
                f"got ({self.clip_min}, {self.caution_threshold}, {self.clip_max})"
            )


@dataclasses.dataclass(frozen=True)
class SaturationStats:
    """Counts of pixels near or past the sensor's reliable range."""

    pixels_above_caution: int
    pixels_at_or_above_clip_max: int
    fraction_caution: float


@dataclasses.dataclass(frozen=True)
class GridStats:
    """Summary statistics plus a fixed 256-bin histogram over the clip range."""

    min: float
    max: float
    mean: float
    histogram: np.ndarray  # int64, length HISTOGRAM_BINS


def load_tiff(
    path: str | os.PathLike,
    *,
    int_scale: float | None = None,
    int_offset: float = 0.0,
) -> TemperatureGrid:
    """Decode a single-band TIFF into a TemperatureGrid, values unmodified.

    Floating-point samples are taken as degrees Celsius directly.  Integer
    samples have no universal on-disk encoding, so they are only accepted
    when the caller declares one: temperature = sample * int_scale + int_offset.
    No clipping happens at load time.
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such TIFF: {path}")
    try:
        im = Image.open(path)
        im.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise TiffLoadError(f"unsupported/corrupt TIFF: {path} ({exc})") from exc
    if im.format != "TIFF":
        raise TiffLoadError(f"not a TIFF file: {path} (format={im.format})")
    bands = im.getbands()
    if len(bands) != 1:
        raise TiffLoadError(f"multi-band TIFF not supported: {path} (bands={bands})")

    samples = np.asarray(im)
    if im.mode == "F":
        values = samples.astype(np.float64)
    elif im.mode in _INT_MODES:
        if int_scale is None:
            raise TiffLoadError(
                f"integer-sample TIFF requires an explicit scale/offset: {path} (mode={im.mode})"
            )
        values = samples.astype(np.float64) * float(int_scale) + float(int_offset)
    else:
        raise TiffLoadError(f"unsupported sample format: {path} (mode={im.mode})")

    finite = np.isfinite(values)
    if not finite.all():
        bad = np.argwhere(~finite)[0]
        raise TiffLoadError(
            f"non-finite sample at pixel (row={bad[0]}, col={bad[1]}) in {path}"
        )
    return TemperatureGrid(values)


def calibrate(grid: TemperatureGrid, policy: CalibrationPolicy = CalibrationPolicy()) -> TemperatureGrid:
    """Clamp every pixel into [clip_min, clip_max]; in-range values pass through bit-identical."""
    return TemperatureGrid(np.clip(grid.values, policy.clip_min, policy.clip_max))


def saturation_report(
    grid: TemperatureGrid, policy: CalibrationPolicy = CalibrationPolicy()
) -> SaturationStats:
    """Count caution-range and saturated pixels.  Run this before calibrate():
    clipping folds everything above clip_max onto the boundary."""
    above_caution = int(np.count_nonzero(grid.values > policy.caution_threshold))
    at_clip = int(np.count_nonzero(grid.values >= policy.clip_max))
    total = grid.width * grid.height
    return SaturationStats(
        pixels_above_caution=above_caution,
        pixels_at_or_above_clip_max=at_clip,
        fraction_caution=above_caution / total,
    )


def grid_stats(
    grid: TemperatureGrid, policy: CalibrationPolicy = CalibrationPolicy()
) -> GridStats:
    """Min/max/mean plus a 256-bin histogram over [clip_min, clip_max].

    Bin b covers [clip_min + b*w, clip_min + (b+1)*w) with
    w = (clip_max - clip_min) / 256; the final bin is closed on the right.
    Out-of-range values land in the boundary bins so the histogram always
    sums to the pixel count.
    """
    v = grid.values
    w = (policy.clip_max - policy.clip_min) / HISTOGRAM_BINS
    idx = np.floor((v - policy.clip_min) / w).astype(np.int64)
    idx = np.clip(idx, 0, HISTOGRAM_BINS - 1)
    hist = np.bincount(idx.ravel(), minlength=HISTOGRAM_BINS)
    return GridStats(
        min=float(v.min()),
        max=float(v.max()),
        mean=float(v.mean()),
        histogram=hist,
    )
