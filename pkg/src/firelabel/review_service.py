"""HTTP review service: serve items, rendered images and overlays, and
persist accept/exclude decisions into the manifest.

The manifest file is the single source of truth.  All mutations go through
one lock and are appended durably (flush + fsync) before the response goes
out, so a killed-and-restarted server always sees every acknowledged
decision.  The server never touches masks, TIFFs, or reports; it only
updates decision fields.  Rendered images are cached by (id, kind, base) and
byte-stable across requests.
"""

from __future__ import annotations

import json
import threading
from collections import OrderedDict
from importlib import resources
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from PIL import Image

from .cv_kernels import dilate
from .dataset import DECISIONS, Manifest, can_transition, counts
from .pngio import load_mask_png, rgb_to_png_bytes
from .radiometric import CalibrationPolicy, calibrate, load_tiff

__all__ = ["create_app", "load_jet_lut", "jet_render", "boundary_overlay"]

PAGE_SIZE_DEFAULT = 50
BOUNDARY_COLOR = (255, 0, 64)

_IMAGE_KINDS = ("rgb", "thermal", "tiff", "overlay_chosen", "overlay_p0", "overlay_p1", "overlay_p2")


def load_jet_lut() -> np.ndarray:
    """The committed 256-entry jet lookup table, shape (256, 3) uint8."""
    with resources.files("firelabel").joinpath("jet_lut.json").open("r") as fh:
        lut = json.load(fh)
    arr = np.asarray(lut, dtype=np.uint8)
    if arr.shape != (256, 3):
        raise ValueError(f"jet LUT golden file corrupt: shape {arr.shape}")
    return arr


def jet_render(values: np.ndarray, lo: float, hi: float, lut: np.ndarray) -> np.ndarray:
    """Map a scalar field to RGB through the jet LUT over [lo, hi]."""
    idx = np.clip((values - lo) / (hi - lo) * 255.0, 0, 255).astype(np.uint8)
    return lut[idx]


def boundary_overlay(base_rgb: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Draw the mask boundary (dilate(mask) - mask) over an RGB render."""
    boundary = (dilate(mask) - mask).astype(bool)
    out = base_rgb.copy()
    out[boundary] = BOUNDARY_COLOR
    return out


class _ReviewService:
    # Rendered PNGs kept in memory; enough for fluid paging, bounded so a
    # large manifest cannot exhaust RAM (renders are deterministic anyway).
    IMAGE_CACHE_ENTRIES = 512

    def __init__(self, manifest_path: str | Path):
        self.manifest_path = Path(manifest_path)
        self.manifest = Manifest.load(self.manifest_path)
        self.lock = threading.Lock()
        self.jet = load_jet_lut()
        snap = self.manifest.config_snapshot.get("policy", {})
        self.policy = CalibrationPolicy(**snap) if snap else CalibrationPolicy()
        self._image_cache: OrderedDict[tuple, bytes] = OrderedDict()
        self._cache_lock = threading.Lock()

    # ---- helpers

    def record(self, rec_id: str):
        try:
            return self.manifest.get(rec_id)
        except KeyError:
            return None

    def _proposal_mask_path(self, record, k: int) -> Path | None:
        if not record.mask_path:
            return None
        p = Path(record.mask_path).parent / f"{record.id}_p{k}.png"
        return p if p.exists() else None

    def _base_render(self, record, base: str) -> np.ndarray:
        if base == "rgb":
            return np.asarray(Image.open(record.rgb_path).convert("RGB"))
        grid = calibrate(load_tiff(record.tiff_path), self.policy)
        return jet_render(grid.values, self.policy.clip_min, self.policy.clip_max, self.jet)

    def render(self, record, kind: str, base: str) -> bytes | None:
        key = (record.id, kind, base, record.mask_path)
        with self._cache_lock:
            if key in self._image_cache:
                self._image_cache.move_to_end(key)
                return self._image_cache[key]
        if kind == "rgb":
            img = np.asarray(Image.open(record.rgb_path).convert("RGB"))
        elif kind == "thermal":
            img = np.asarray(Image.open(record.thermal_path).convert("RGB"))
        elif kind == "tiff":
            grid = calibrate(load_tiff(record.tiff_path), self.policy)
            img = jet_render(grid.values, self.policy.clip_min, self.policy.clip_max, self.jet)
        elif kind == "overlay_chosen":
            if not record.mask_path:
                return None
            mask = load_mask_png(record.mask_path)
            img = boundary_overlay(self._base_render(record, base), mask)
        elif kind.startswith("overlay_p"):
            p = self._proposal_mask_path(record, int(kind[-1]))
            if p is None:
                return None
            img = boundary_overlay(self._base_render(record, base), load_mask_png(p))
        else:
            raise KeyError(kind)
        data = rgb_to_png_bytes(img)
        with self._cache_lock:
            self._image_cache[key] = data
            while len(self._image_cache) > self.IMAGE_CACHE_ENTRIES:
                self._image_cache.popitem(last=False)
        return data

    def item_summary(self, record) -> dict:
        return {
            "id": record.id,
            "burn_location": record.burn_location,
            "decision": record.decision,
            "has_mask": record.mask_path is not None,
            "has_report": record.selection_report_path is not None,
        }

    def item_detail(self, record) -> dict:
        detail = self.item_summary(record)
        detail["reason"] = record.reason
        base = f"/items/{record.id}/image"
        detail["images"] = {
            "rgb": f"{base}/rgb",
            "thermal": f"{base}/thermal",
            "tiff": f"{base}/tiff",
            "overlays": [f"{base}/overlay_p{k}" for k in range(3)],
            "chosen_overlay": f"{base}/overlay_chosen",
        }
        report = None
        if record.selection_report_path and Path(record.selection_report_path).exists():
            report = json.loads(Path(record.selection_report_path).read_text())
        detail["report"] = report
        points = None
        if record.points_path and Path(record.points_path).exists():
            points = json.loads(Path(record.points_path).read_text())
        detail["points"] = points
        return detail


def create_app(manifest_path: str | Path, cors_origins: list[str] | None = None) -> FastAPI:
    service = _ReviewService(manifest_path)
    app = FastAPI(title="firelabel review service")
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    @app.get("/items")
    def list_items(status: str | None = None, location: str | None = None,
                   page: int = 1, page_size: int = PAGE_SIZE_DEFAULT):
        if status is not None and status not in DECISIONS:
            return error(400, f"unknown status {status!r}")
        if page < 1 or page_size < 1:
            return error(400, "page and page_size must be >= 1")
        records = service.manifest.records
        if status is not None:
            records = [r for r in records if r.decision == status]
        if location is not None:
            records = [r for r in records if r.burn_location == location]
        total = len(records)
        start = (page - 1) * page_size
        page_records = records[start : start + page_size]
        return {
            "items": [service.item_summary(r) for r in page_records],
            "total": total,
            "page": page,
            "page_size": page_size,
            "pages": max(1, -(-total // page_size)),
        }

    @app.get("/items/{rec_id}")
    def get_item(rec_id: str):
        record = service.record(rec_id)
        if record is None:
            return error(404, f"unknown item {rec_id!r}")
        if not record.mask_path:
            return error(409, "not yet processed")
        return service.item_detail(record)

    @app.get("/items/{rec_id}/image/{kind}")
    def get_image(rec_id: str, kind: str, base: str = "rgb"):
        record = service.record(rec_id)
        if record is None:
            return error(404, f"unknown item {rec_id!r}")
        if kind not in _IMAGE_KINDS:
            return error(404, f"unknown image kind {kind!r}")
        if base not in ("rgb", "tiff"):
            return error(400, f"unknown base {base!r}")
        data = service.render(record, kind, base)
        if data is None:
            return error(409, "not yet processed")
        return Response(content=data, media_type="image/png")

    @app.post("/items/{rec_id}/decision")
    async def post_decision(rec_id: str, request: Request):
        try:
            body = await request.json()
        except Exception:
            return error(422, "body must be JSON")
        if not isinstance(body, dict) or "decision" not in body:
            return error(422, "body must carry a decision field")
        decision = body["decision"]
        if decision not in ("accepted", "excluded"):
            return error(422, f"decision must be accepted or excluded, got {decision!r}")
        override = body.get("chosen_override")
        if override is not None and override not in (0, 1, 2):
            return error(422, "chosen_override must be 0, 1, or 2")

        with service.lock:
            record = service.record(rec_id)
            if record is None:
                return error(404, f"unknown item {rec_id!r}")
            if not can_transition(record.decision, decision):
                return error(409, f"illegal transition {record.decision} -> {decision}")
            if override is not None:
                p = service._proposal_mask_path(record, override)
                if p is None:
                    return error(409, "not yet processed: no proposal masks to override with")
                record.mask_path = str(p)
            record.decision = decision
            if "reason" in body:
                record.reason = body["reason"]
            Manifest.append_record(service.manifest_path, record)
        return service.item_summary(record) | {"reason": record.reason, "mask_path": record.mask_path}

    @app.get("/counts")
    def get_counts():
        table = counts(service.manifest)
        total = table.pop("All Burn Locations")
        return {
            "locations": {
                name: {"excluded": c.excluded, "final": c.final, "pending": c.pending}
                for name, c in table.items()
            },
            "total": {"excluded": total.excluded, "final": total.final, "pending": total.pending},
        }

    return app
