"""PNG (de)serialization for masks and images.

Binary masks travel as single-channel PNGs with values {0, 255}; in memory
they are uint8 arrays with values {0, 1}.  Encoding is deterministic: the
same array always yields the same bytes.
"""

from __future__ import annotations

import io
import os

import numpy as np
from PIL import Image

__all__ = [
    "mask_to_png_bytes",
    "png_bytes_to_mask",
    "save_mask_png",
    "load_mask_png",
    "save_gray_png",
    "load_gray_png",
    "save_rgb_png",
    "load_rgb_png",
    "rgb_to_png_bytes",
]


def mask_to_png_bytes(mask: np.ndarray) -> bytes:
    """Encode a {0,1} mask as a single-channel {0,255} PNG."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    buf = io.BytesIO()
    Image.fromarray((arr.astype(np.uint8) * 255), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def png_bytes_to_mask(data: bytes, *, strict: bool = False) -> np.ndarray:
    """Decode a single-channel PNG into a {0,1} uint8 mask.

    With strict=True, any sample outside {0, 255} is an error; otherwise
    values are thresholded at 128.
    """
    im = Image.open(io.BytesIO(data))
    if im.mode != "L":
        if strict:
            raise ValueError(f"mask PNG must be single-channel, got mode {im.mode}")
        im = im.convert("L")
    arr = np.asarray(im)
    if strict and not np.isin(arr, (0, 255)).all():
        raise ValueError("mask PNG contains values outside {0, 255}")
    return (arr >= 128).astype(np.uint8)


def save_mask_png(mask: np.ndarray, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(mask_to_png_bytes(mask))


def load_mask_png(path: str | os.PathLike, *, strict: bool = False) -> np.ndarray:
    with open(path, "rb") as fh:
        return png_bytes_to_mask(fh.read(), strict=strict)


def save_gray_png(gray: np.ndarray, path: str | os.PathLike) -> None:
    arr = np.asarray(gray, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"gray image must be 2-D, got shape {arr.shape}")
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def load_gray_png(path: str | os.PathLike) -> np.ndarray:
    im = Image.open(path)
    if im.mode != "L":
        im = im.convert("L")
    return np.asarray(im)


def save_rgb_png(rgb: np.ndarray, path: str | os.PathLike) -> None:
    arr = np.asarray(rgb, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"rgb image must be HxWx3, got shape {arr.shape}")
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def rgb_to_png_bytes(rgb: np.ndarray) -> bytes:
    arr = np.asarray(rgb, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"rgb image must be HxWx3, got shape {arr.shape}")
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def load_rgb_png(path: str | os.PathLike) -> np.ndarray:
    im = Image.open(path)
    if im.mode != "RGB":
        im = im.convert("RGB")
    return np.asarray(im)
