"""Synthetic paired scenes with known geometry.

Every pipeline stage gets a desk-scale oracle from here: a temperature grid
with square or gaussian hot blobs on a cool background, the matching thermal
grayscale and RGB renders, and the exact ground-truth fire mask (pixels whose
noiseless temperature reaches FIRE_TEMP_C).  All outputs are deterministic
functions of the spec, including its seed.
"""

from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path

import numpy as np
from PIL import Image

from .pngio import save_gray_png, save_mask_png, save_rgb_png
from .radiometric import TemperatureGrid

__all__ = [
    "FIRE_TEMP_C",
    "BlobSpec",
    "SceneSpec",
    "Scene",
    "ScenePaths",
    "gen_scene",
    "gen_corpus",
    "write_scene",
]

# Fire-region ground truth cutoff: main fire regions in radiometric UAV data
# sit above ~100 C while background stays far below.
FIRE_TEMP_C = 100.0

# Temperatures render to gray by a fixed linear map of [0, TEMP_SPAN_C] -> [0, 255].
TEMP_SPAN_C = 500.0

# Fixed tint blended into fire pixels of the RGB render.
_FIRE_TINT = np.array([255.0, 128.0, 0.0])


@dataclasses.dataclass(frozen=True)
class BlobSpec:
    """One hot blob: a filled square (half-extent) or a gaussian bump (sigma)."""

    center: tuple[int, int]  # (x, y)
    size: float              # half-extent for squares, sigma for gaussians
    peak_temp: float
    shape: str = "square"    # "square" | "gaussian"

    def __post_init__(self) -> None:
        if self.shape not in ("square", "gaussian"):
            raise ValueError(f"unknown blob shape: {self.shape!r}")
        if self.size <= 0:
            raise ValueError("blob size must be positive")


@dataclasses.dataclass(frozen=True)
class SceneSpec:
    width: int = 64
    height: int = 64
    background_temp: float = 20.0
    blobs: tuple[BlobSpec, ...] = ()
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("scene dims must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        for blob in self.blobs:
            x, y = blob.center
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ValueError(f"blob center {blob.center} outside {self.width}x{self.height} scene")

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "background_temp": self.background_temp,
            "blobs": [
                {
                    "center": list(b.center),
                    "size": b.size,
                    "peak_temp": b.peak_temp,
                    "shape": b.shape,
                }
                for b in self.blobs
            ],
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SceneSpec":
        blobs = tuple(
            BlobSpec(
                center=(int(b["center"][0]), int(b["center"][1])),
                size=float(b["size"]),
                peak_temp=float(b["peak_temp"]),
                shape=b.get("shape", "square"),
            )
            for b in obj.get("blobs", [])
        )
        return cls(
            width=int(obj.get("width", 64)),
            height=int(obj.get("height", 64)),
            background_temp=float(obj.get("background_temp", 20.0)),
            blobs=blobs,
            noise_sigma=float(obj.get("noise_sigma", 0.0)),
            seed=int(obj.get("seed", 0)),
        )


@dataclasses.dataclass(frozen=True, eq=False)
class Scene:
    spec: SceneSpec
    temperature: TemperatureGrid   # noisy, clipped, float32-representable
    thermal_gray: np.ndarray       # uint8 (H, W)
    rgb: np.ndarray                # uint8 (H, W, 3)
    gt_mask: np.ndarray            # uint8 {0,1}, from the noiseless field


@dataclasses.dataclass(frozen=True)
class ScenePaths:
    rgb: Path
    thermal: Path
    tiff: Path
    gt_mask: Path


def _noiseless_field(spec: SceneSpec) -> np.ndarray:
    ys, xs = np.mgrid[0 : spec.height, 0 : spec.width]
    field = np.full((spec.height, spec.width), float(spec.background_temp))
    for blob in spec.blobs:
        cx, cy = blob.center
        delta = blob.peak_temp - spec.background_temp
        if blob.shape == "square":
            inside = (np.abs(xs - cx) <= blob.size) & (np.abs(ys - cy) <= blob.size)
            field += delta * inside
        else:
            d2 = (xs - cx) ** 2.0 + (ys - cy) ** 2.0
            field += delta * np.exp(-d2 / (2.0 * blob.size**2))
    return field


def gen_scene(spec: SceneSpec) -> Scene:
    """Render one scene.  The temperature grid is quantized to float32 so the
    TIFF written by write_scene round-trips bit-exactly."""
    clean = _noiseless_field(spec)
    gt_mask = (clean >= FIRE_TEMP_C).astype(np.uint8)

    noisy = clean
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        noisy = clean + rng.normal(0.0, spec.noise_sigma, size=clean.shape)
    temps = np.clip(noisy, 0.0, TEMP_SPAN_C)
    temps = temps.astype(np.float32).astype(np.float64)

    gray = np.rint(temps * (255.0 / TEMP_SPAN_C)).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2).astype(np.float64)
    fire = gt_mask.astype(bool)
    rgb[fire] = 0.5 * rgb[fire] + 0.5 * _FIRE_TINT
    rgb = np.rint(rgb).astype(np.uint8)

    return Scene(
        spec=spec,
        temperature=TemperatureGrid(temps),
        thermal_gray=gray,
        rgb=rgb,
        gt_mask=gt_mask,
    )


def gen_corpus(base: SceneSpec, count: int) -> list[tuple[str, Scene]]:
    """Derive `count` scenes from a base spec, jittering blob geometry per index.

    Scene i gets its own noise seed and blob placement drawn from a generator
    seeded by (base.seed, i), so the corpus is reproducible as a whole.
    """
    scenes = []
    for i in range(count):
        rng = np.random.default_rng((base.seed, i))
        blobs = []
        for blob in base.blobs:
            cx = int(rng.integers(low=int(0.2 * base.width), high=int(0.8 * base.width)))
            cy = int(rng.integers(low=int(0.2 * base.height), high=int(0.8 * base.height)))
            size = float(blob.size * rng.uniform(0.7, 1.3))
            blobs.append(dataclasses.replace(blob, center=(cx, cy), size=size))
        spec = dataclasses.replace(
            base, blobs=tuple(blobs), seed=int(rng.integers(0, 2**31 - 1))
        )
        scenes.append((f"scene_{i:04d}", gen_scene(spec)))
    return scenes


def write_scene(scene: Scene, root: str | os.PathLike, stem: str = "scene") -> ScenePaths:
    """Write rgb/thermal/tiff/gt files under `root` using the dataset layout
    (rgb/, thermal/, tiff/, gt/ subdirectories)."""
    root = Path(root)
    for sub in ("rgb", "thermal", "tiff", "gt"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    paths = ScenePaths(
        rgb=root / "rgb" / f"{stem}.png",
        thermal=root / "thermal" / f"{stem}.png",
        tiff=root / "tiff" / f"{stem}.tif",
        gt_mask=root / "gt" / f"{stem}.png",
    )
    save_rgb_png(scene.rgb, paths.rgb)
    save_gray_png(scene.thermal_gray, paths.thermal)
    Image.fromarray(scene.temperature.values.astype(np.float32), mode="F").save(paths.tiff)
    save_mask_png(scene.gt_mask, paths.gt_mask)
    return paths


def write_spec_file(spec: SceneSpec, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_spec_file(path: str | os.PathLike) -> SceneSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return SceneSpec.from_json(json.load(fh))
