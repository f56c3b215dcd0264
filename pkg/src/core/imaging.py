"""8-bit rasters of residual maps, written as binary NetPBM (P5 gray, P6 color)."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import Image

from src.core.errors import InvalidInputError


def infer_shape(dim: int, shape: Optional[Sequence[int]] = None) -> tuple[int, int]:
    """The explicit shape, or the square root of dim when dim is a perfect square."""
    if shape is not None:
        h, w = (int(v) for v in shape)
        if h * w != dim:
            raise InvalidInputError(f"image shape {h}x{w} does not hold {dim} values")
        return h, w
    side = int(round(np.sqrt(dim)))
    if side * side != dim:
        raise InvalidInputError(f"dimension {dim} is not square; give an explicit image shape")
    return side, side


def quantize_to_image(residual: np.ndarray, shape: Sequence[int], symmetric: bool = False) -> np.ndarray:
    """Affine map of [min, max] onto [0, 255], rounded half-to-even.

    With ``symmetric`` the range is [−a, a], a = max|v|, so zero lands on 128.
    A constant input (or an all-zero symmetric one) maps to 0.
    """
    values = np.asarray(residual, dtype=float).ravel()
    h, w = infer_shape(values.size, shape)
    if symmetric:
        a = float(np.max(np.abs(values))) if values.size else 0.0
        lo, hi = -a, a
    else:
        lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return np.zeros((h, w), dtype=np.uint8)
    scaled = np.rint((values - lo) / (hi - lo) * 255.0)
    return np.clip(scaled, 0, 255).astype(np.uint8).reshape(h, w)


def write_netpbm(path: Path, raster: np.ndarray) -> Path:
    """P5 for (H, W) rasters, P6 for (H, W, 3); maxval 255."""
    raster = np.asarray(raster)
    if raster.dtype != np.uint8 or not (raster.ndim == 2 or (raster.ndim == 3 and raster.shape[2] == 3)):
        raise InvalidInputError("NetPBM rasters must be uint8 with shape (H, W) or (H, W, 3)")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(raster).save(path, format="PPM")
    return path


def read_netpbm(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.array(im)


def compose_rgb(channels: Sequence[np.ndarray]) -> np.ndarray:
    """Stacks three equally shaped gray rasters into one color raster."""
    if len(channels) != 3:
        raise InvalidInputError("a color raster needs exactly three channels")
    return np.stack(channels, axis=-1).astype(np.uint8)
