"""Candidate mask proposers.

Two routes produce the three candidate masks the selector ranks:

- ``propose_external`` calls a promptable-segmentation service (e.g. SAM
  behind a thin HTTP wrapper) over a fixed JSON wire protocol; the adapter
  validates the response hard and never alters mask content.
- ``propose_baseline`` needs no model: Otsu binarization of the thermal
  grayscale plus eroded/dilated variants, with point-coverage fractions as
  deliberately crude confidence scores.

Wire protocol: POST {endpoint}/predict with
``{"image_png_b64": str, "points": [{"x": int, "y": int, "label": 0|1}]}``
(label 1 = positive); response
``{"masks_png_b64": [str, str, str], "scores": [float, float, float]}``
where each mask is a single-channel PNG with values {0, 255}.
"""

from __future__ import annotations

import base64
import dataclasses

import numpy as np
import requests

from .autopoint import PointSet
from .cv_kernels import DegenerateHistogramError, binarize, dilate, erode, otsu_threshold
from .pngio import png_bytes_to_mask, rgb_to_png_bytes

__all__ = [
    "ProposerError",
    "ProposerConnectionError",
    "ProposerProtocolError",
    "MaskProposal",
    "ProposalSet",
    "PROPOSAL_COUNT",
    "propose_external",
    "propose_baseline",
    "points_payload",
]

PROPOSAL_COUNT = 3
DEFAULT_TIMEOUT_S = 120.0


class ProposerError(Exception):
    """Base class for proposal failures."""


class ProposerConnectionError(ProposerError):
    """The proposal service could not be reached."""


class ProposerProtocolError(ProposerError):
    """The service answered, but the response violates the wire contract."""


@dataclasses.dataclass(frozen=True, eq=False)
class MaskProposal:
    mask: np.ndarray        # uint8 {0,1}
    confidence: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")


@dataclasses.dataclass(frozen=True, eq=False)
class ProposalSet:
    proposals: tuple[MaskProposal, ...]
    source: str             # "external" | "baseline"

    def __post_init__(self) -> None:
        if len(self.proposals) != PROPOSAL_COUNT:
            raise ValueError(f"a ProposalSet holds exactly {PROPOSAL_COUNT} proposals")
        shape = self.proposals[0].mask.shape
        for p in self.proposals:
            if p.mask.shape != shape:
                raise ValueError("all proposal masks must share dimensions")

    @property
    def masks(self) -> list[np.ndarray]:
        return [p.mask for p in self.proposals]

    @property
    def scores(self) -> list[float]:
        return [p.confidence for p in self.proposals]


def points_payload(points: PointSet) -> list[dict]:
    """Points in wire order: positives (label 1) then negatives (label 0)."""
    payload = [{"x": p.x, "y": p.y, "label": 1} for p in points.positives]
    payload += [{"x": p.x, "y": p.y, "label": 0} for p in points.negatives]
    return payload


def propose_external(
    image_rgb: np.ndarray,
    points: PointSet,
    endpoint: str,
    timeout: float = DEFAULT_TIMEOUT_S,
) -> ProposalSet:
    """Request three masks from the external service and validate the response."""
    payload = points_payload(points)
    if not payload:
        raise ValueError("propose_external requires at least one point prompt")
    image_rgb = np.asarray(image_rgb)
    h, w = image_rgb.shape[:2]

    body = {
        "image_png_b64": base64.b64encode(rgb_to_png_bytes(image_rgb)).decode("ascii"),
        "points": payload,
    }
    try:
        resp = requests.post(endpoint.rstrip("/") + "/predict", json=body, timeout=timeout)
        resp.raise_for_status()
        data = resp.json()
    except requests.RequestException as exc:
        raise ProposerConnectionError(f"proposal service failed: {exc}") from exc
    except ValueError as exc:
        raise ProposerProtocolError(f"response is not valid JSON: {exc}") from exc

    if not isinstance(data, dict) or "masks_png_b64" not in data or "scores" not in data:
        raise ProposerProtocolError("response must carry masks_png_b64 and scores")
    raw_masks = data["masks_png_b64"]
    scores = data["scores"]
    if len(raw_masks) != PROPOSAL_COUNT:
        raise ProposerProtocolError(
            f"expected {PROPOSAL_COUNT} masks, got {len(raw_masks)}"
        )
    if len(scores) != PROPOSAL_COUNT:
        raise ProposerProtocolError(
            f"expected {PROPOSAL_COUNT} scores, got {len(scores)}"
        )

    proposals = []
    for k, (b64, score) in enumerate(zip(raw_masks, scores)):
        try:
            score = float(score)
        except (TypeError, ValueError) as exc:
            raise ProposerProtocolError(f"score {k} is not a number") from exc
        if not (0.0 <= score <= 1.0):
            raise ProposerProtocolError(f"score {k} outside [0,1]: {score}")
        try:
            mask = png_bytes_to_mask(base64.b64decode(b64), strict=True)
        except Exception as exc:
            raise ProposerProtocolError(f"mask {k} is not a valid {{0,255}} PNG: {exc}") from exc
        if mask.shape != (h, w):
            raise ProposerProtocolError(
                f"mask {k} dimensions {mask.shape} do not match image {(h, w)}"
            )
        proposals.append(MaskProposal(mask=mask, confidence=score))
    return ProposalSet(proposals=tuple(proposals), source="external")


def _point_coverage(mask: np.ndarray, points: PointSet) -> float:
    if not points.positives:
        return 0.0
    covered = sum(1 for p in points.positives if mask[p.y, p.x] == 1)
    return covered / len(points.positives)


def propose_baseline(thermal_gray: np.ndarray, points: PointSet) -> ProposalSet:
    """SAM-free proposals: Otsu mask of the thermal grayscale plus one-step
    eroded and dilated variants.  Confidence is the fraction of positive
    points each mask covers (0 when there are none).  A grayscale whose
    histogram cannot be split yields three empty masks."""
    gray = np.asarray(thermal_gray)
    try:
        tau = otsu_threshold(gray, (0.0, 255.0)).tau
        raw = binarize(gray, tau)
    except DegenerateHistogramError:
        raw = np.zeros(gray.shape, dtype=np.uint8)
    variants = [raw, erode(raw), dilate(raw)]
    proposals = tuple(
        MaskProposal(mask=m, confidence=_point_coverage(m, points)) for m in variants
    )
    return ProposalSet(proposals=proposals, source="baseline")
