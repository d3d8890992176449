"""Classical computer-vision primitives the pseudo-labeling pipeline composes.

Array conventions used throughout the package:

- GrayImage:     2-D uint8, intensities 0..255
- BinaryMask:    2-D uint8 with values {0, 1} (1 = fire/foreground)
- EdgeMap:       2-D uint8 with values {0, 1} (1 = edge pixel)
- DistanceField: 2-D float64 >= 0; ``NO_EDGE_DISTANCE`` (+inf) everywhere
                 when the edge map is empty

Coordinates are (x, y) = (column, row) with origin top-left; numpy arrays
index as [row, col].
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .radiometric import TemperatureGrid

__all__ = [
    "DegenerateHistogramError",
    "OtsuResult",
    "NO_EDGE_DISTANCE",
    "OTSU_BINS",
    "otsu_threshold",
    "binarize",
    "gaussian_blur",
    "canny",
    "euclidean_distance_transform",
    "iou",
    "ssim",
    "thermal_jpg_to_gray",
    "dilate",
    "erode",
]

OTSU_BINS = 256

# Distance reported when an edge map contains no edge pixels at all.
NO_EDGE_DISTANCE = np.inf

# Sector boundaries for non-maximum suppression (tan of 22.5 and 67.5 degrees).
_TAN_22_5 = math.tan(math.radians(22.5))
_TAN_67_5 = math.tan(math.radians(67.5))


class DegenerateHistogramError(ValueError):
    """All samples fall into a single histogram bin: no threshold separates anything."""


@dataclasses.dataclass(frozen=True)
class OtsuResult:
    """Otsu threshold: tau in input units, the maximized between-class
    variance (also in input units squared), and the winning bin index."""

    tau: float
    between_class_variance: float
    bin_index: int


def _values_of(x) -> np.ndarray:
    if isinstance(x, TemperatureGrid):
        return x.values
    return np.asarray(x)


def _require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def otsu_threshold(values, value_range: tuple[float, float]) -> OtsuResult:
    """Histogram-based threshold maximizing between-class variance.

    Samples are binned into 256 equal bins over [lo, hi] (out-of-range samples
    clamp to the boundary bins).  For every candidate boundary t the classes
    are bins <= t and bins > t, scored by w0*w1*(mu0 - mu1)^2 on bin indices;
    ties break to the lowest bin index.  The returned tau is
    lo + (bin_index + 1) * (hi - lo) / 256, and the variance is converted to
    input units squared.
    """
    lo, hi = float(value_range[0]), float(value_range[1])
    if hi <= lo:
        raise ValueError(f"value range must satisfy hi > lo, got ({lo}, {hi})")
    v = _values_of(values).astype(np.float64).ravel()
    if v.size < 2:
        raise ValueError("otsu_threshold needs at least 2 samples")

    width = (hi - lo) / OTSU_BINS
    idx = np.floor((v - lo) / width).astype(np.int64)
    idx = np.clip(idx, 0, OTSU_BINS - 1)
    hist = np.bincount(idx, minlength=OTSU_BINS).astype(np.int64)

    total = int(v.size)
    bins = np.arange(OTSU_BINS, dtype=np.int64)
    c0 = np.cumsum(hist)                 # pixels in class 0 for boundary t
    s0 = np.cumsum(bins * hist)          # sum of bin indices in class 0
    c1 = total - c0
    s1 = int(np.sum(bins * hist)) - s0

    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = s0 / c0
        mu1 = s1 / c1
        w0 = c0 / total
        w1 = c1 / total
        diff = mu0 - mu1
        score = (w0 * w1) * (diff * diff)
    score[(c0 == 0) | (c1 == 0)] = 0.0

    best = int(np.argmax(score))         # argmax returns the lowest index on ties
    best_score = float(score[best])
    if best_score <= 0.0:
        raise DegenerateHistogramError(
            "degenerate histogram: all samples fall into a single bin"
        )
    tau = lo + (best + 1) * width
    return OtsuResult(
        tau=float(tau),
        between_class_variance=best_score * width * width,
        bin_index=best,
    )


def binarize(values, threshold: float) -> np.ndarray:
    """Mask of pixels with value >= threshold (foreground includes the threshold)."""
    v = _values_of(values)
    return (v >= threshold).astype(np.uint8)


def _gauss_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def _correlate1d(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """1-D correlation along an axis with clamp-to-border (edge replicate) padding."""
    radius = (kernel.size - 1) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge")
    out = np.zeros_like(arr, dtype=np.float64)
    for i, w in enumerate(kernel):
        if axis == 0:
            out += w * padded[i : i + arr.shape[0], :]
        else:
            out += w * padded[:, i : i + arr.shape[1]]
    return out


def gaussian_blur(values, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing, kernel radius ceil(3*sigma), edges replicated."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    v = _values_of(values).astype(np.float64)
    k = _gauss_kernel(sigma)
    return _correlate1d(_correlate1d(v, k, axis=1), k, axis=0)


def _sobel(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw 3x3 Sobel responses (gx, gy), border replicated, y pointing down."""
    padded = np.pad(arr, 1, mode="edge")
    tl = padded[:-2, :-2]
    tc = padded[:-2, 1:-1]
    tr = padded[:-2, 2:]
    ml = padded[1:-1, :-2]
    mr = padded[1:-1, 2:]
    bl = padded[2:, :-2]
    bc = padded[2:, 1:-1]
    br = padded[2:, 2:]
    gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl)
    gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr)
    return gx, gy


def canny(grid, low: float, high: float, sigma: float = 1.0) -> np.ndarray:
    """Canny edge detection on a temperature grid (or any 2-D field).

    Pipeline: Gaussian blur -> raw 3x3 Sobel gradients -> magnitude ->
    non-maximum suppression with the gradient direction quantized to four
    sectors (0/45/90/135 degrees) -> double-threshold hysteresis where weak
    pixels (low <= mag < high) survive only if 8-connected, transitively, to
    a strong pixel (mag >= high).

    Thresholds compare against the raw Sobel magnitude (the standard,
    unnormalized kernels), matching common Canny implementations.  NMS keeps
    a pixel when its magnitude is >= both neighbors along the gradient
    direction; out-of-bounds neighbors count as zero.
    """
    if low < 0 or low > high:
        raise ValueError(f"thresholds must satisfy 0 <= low <= high, got ({low}, {high})")
    v = _values_of(grid).astype(np.float64)
    blurred = gaussian_blur(v, sigma)
    gx, gy = _sobel(blurred)
    mag = np.sqrt(gx * gx + gy * gy)

    # Quantized gradient direction (mod 180 degrees), computed arithmetically:
    # |gy| < tan(22.5)|gx| -> 0 deg; |gy| >= tan(67.5)|gx| -> 90 deg; otherwise
    # diagonal, split by the sign of gx*gy (y axis points down).
    ax, ay = np.abs(gx), np.abs(gy)
    sector = np.zeros(mag.shape, dtype=np.int8)
    diag = ~(ay < _TAN_22_5 * ax) & ~(ay >= _TAN_67_5 * ax)
    sector[diag & (gx * gy >= 0)] = 1   # down-right / up-left
    sector[ay >= _TAN_67_5 * ax] = 2    # vertical gradient
    sector[diag & (gx * gy < 0)] = 3    # down-left / up-right

    padded = np.pad(mag, 1, mode="constant", constant_values=0.0)
    center = padded[1:-1, 1:-1]
    neigh = {
        0: (padded[1:-1, 2:], padded[1:-1, :-2]),
        1: (padded[2:, 2:], padded[:-2, :-2]),
        2: (padded[2:, 1:-1], padded[:-2, 1:-1]),
        3: (padded[2:, :-2], padded[:-2, 2:]),
    }
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (n1, n2) in neigh.items():
        sel = sector == s
        keep |= sel & (center >= n1) & (center >= n2)
    keep &= mag > 0

    strong = keep & (mag >= high)
    weak = keep & (mag >= low) & (mag < high)

    edges = strong.copy()
    while True:
        grown = _dilate_bool(edges) & (strong | weak)
        if np.array_equal(grown, edges):
            break
        edges = grown
    return edges.astype(np.uint8)


def _dilate_bool(mask: np.ndarray) -> np.ndarray:
    padded = np.pad(mask, 1, mode="constant", constant_values=False)
    out = np.zeros_like(mask)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out |= padded[dy : dy + mask.shape[0], dx : dx + mask.shape[1]]
    return out


def dilate(mask: np.ndarray) -> np.ndarray:
    """One pass of binary dilation with the full 3x3 structuring element."""
    return _dilate_bool(np.asarray(mask).astype(bool)).astype(np.uint8)


def erode(mask: np.ndarray) -> np.ndarray:
    """One pass of binary erosion with the full 3x3 element; outside counts as background."""
    m = np.asarray(mask).astype(bool)
    padded = np.pad(m, 1, mode="constant", constant_values=False)
    out = np.ones_like(m)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out &= padded[dy : dy + m.shape[0], dx : dx + m.shape[1]]
    return out.astype(np.uint8)


def _dt1d_squared(f: np.ndarray) -> np.ndarray:
    """Exact 1-D squared distance transform (lower envelope of parabolas).

    ``f`` holds squared heights and may contain +inf; +inf sites are skipped,
    and an all-inf input stays all-inf.
    """
    n = f.size
    out = np.full(n, np.inf)
    finite = np.flatnonzero(np.isfinite(f))
    if finite.size == 0:
        return out
    v = np.zeros(finite.size, dtype=np.int64)     # parabola sites
    z = np.zeros(finite.size + 1, dtype=np.float64)  # boundaries between parabolas
    k = 0
    v[0] = finite[0]
    z[0] = -np.inf
    z[1] = np.inf
    for q in finite[1:]:
        while True:
            p = v[k]
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * q - 2.0 * p)
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    k = 0
    for x in range(n):
        while z[k + 1] < x:
            k += 1
        p = v[k]
        out[x] = (x - p) * (x - p) + f[p]
    return out


def euclidean_distance_transform(edges: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance to the nearest edge pixel.

    Two-pass separable algorithm: a vertical sweep yields the in-column
    distance, then the parabola transform runs along each row on the squared
    column distances.  Zero exactly on edge pixels; ``NO_EDGE_DISTANCE``
    everywhere when no edges exist.
    """
    e = np.asarray(edges).astype(bool)
    h, w = e.shape

    col = np.where(e, 0.0, np.inf)
    for y in range(1, h):
        col[y] = np.minimum(col[y], col[y - 1] + 1.0)
    for y in range(h - 2, -1, -1):
        col[y] = np.minimum(col[y], col[y + 1] + 1.0)
    sq = np.where(np.isfinite(col), col * col, np.inf)

    out = np.empty_like(sq)
    for y in range(h):
        out[y] = _dt1d_squared(sq[y])
    return np.sqrt(out)


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two binary masks; two empty masks count as 1.0."""
    a = np.asarray(a)
    b = np.asarray(b)
    _require_same_shape(a, b)
    a = a.astype(bool)
    b = b.astype(bool)
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(a & b))
    return inter / union


_SSIM_WINDOW = 8
_SSIM_C1 = (0.01 * 255.0) ** 2
_SSIM_C2 = (0.03 * 255.0) ** 2


def _window_sums(x: np.ndarray, win: int) -> np.ndarray:
    s = np.cumsum(np.cumsum(x, axis=0), axis=1)
    s = np.pad(s, ((1, 0), (1, 0)), mode="constant")
    return s[win:, win:] - s[:-win, win:] - s[win:, :-win] + s[:-win, :-win]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM over 8x8 windows, stride 1, borders dropped.

    Inputs are intensities in [0, 255] (dynamic range L = 255); binary masks
    must be scaled to {0, 255} by the caller before comparison.  Window
    statistics use population moments.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _require_same_shape(a, b)
    h, w = a.shape
    win = _SSIM_WINDOW
    if h < win or w < win:
        raise ValueError(f"image {h}x{w} smaller than the {win}x{win} SSIM window")

    n = float(win * win)
    mu_a = _window_sums(a, win) / n
    mu_b = _window_sums(b, win) / n
    var_a = _window_sums(a * a, win) / n - mu_a * mu_a
    var_b = _window_sums(b * b, win) / n - mu_b * mu_b
    cov = _window_sums(a * b, win) / n - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + _SSIM_C1) * (2.0 * cov + _SSIM_C2)
    den = (mu_a * mu_a + mu_b * mu_b + _SSIM_C1) * (var_a + var_b + _SSIM_C2)
    return float(np.mean(num / den))


def thermal_jpg_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Rec. 601 luminance: Y = round(0.299 R + 0.587 G + 0.114 B)."""
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected a 3-channel image, got shape {arr.shape}")
    arr = arr.astype(np.float64)
    y = 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]
    return np.rint(y).astype(np.uint8)
