"""Raster kernels with a compiled core and a numpy fallback.

The compiled extension (built from ``_rowproj.pyx``) is preferred when
importable; set ``SERPAOI_PURE_PYTHON=1`` to force the numpy fallback.
Both backends produce bit-identical float64 outputs, so pipeline results
never depend on which one is active.
"""

from __future__ import annotations

import os

import numpy as np

from . import fallback

_FORCE_FALLBACK = os.environ.get("SERPAOI_PURE_PYTHON", "") not in ("", "0")

_compiled = None
if not _FORCE_FALLBACK:
    try:
        from . import _rowproj as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else fallback


def backend_name() -> str:
    """Which backend is active: 'compiled' or 'fallback'."""
    return "compiled" if _impl is not fallback else "fallback"


def to_gray(raster: np.ndarray) -> np.ndarray:
    """Collapse an RGB raster to uint8 grayscale via integer BT.601 luma.

    2-D uint8 input passes through unchanged. The integer rounding
    (x*299 + ... + 500) // 1000 keeps the conversion exactly reproducible.
    """
    if raster.ndim == 2:
        if raster.dtype != np.uint8:
            raise ValueError("expected a uint8 raster")
        return raster
    if raster.ndim == 3 and raster.shape[2] >= 3:
        rgb = raster[:, :, :3].astype(np.int64)
        gray = (rgb[:, :, 0] * 299 + rgb[:, :, 1] * 587 + rgb[:, :, 2] * 114 + 500) // 1000
        return gray.astype(np.uint8)
    raise ValueError(f"unsupported raster shape {raster.shape}")


def row_std_profile(gray: np.ndarray, x0: int, x1: int) -> np.ndarray:
    """Per-row population std of intensities over columns [x0, x1)."""
    if _impl is fallback:
        return fallback.row_std_profile(gray, x0, x1)
    return _impl.row_std_profile(np.ascontiguousarray(gray), x0, x1)


def col_std_profile(gray: np.ndarray, y0: int, y1: int) -> np.ndarray:
    """Per-column population std of intensities over rows [y0, y1)."""
    if _impl is fallback:
        return fallback.col_std_profile(gray, y0, y1)
    return _impl.col_std_profile(np.ascontiguousarray(gray), y0, y1)


def point_in_boxes(xs, ys, boxes) -> np.ndarray:
    """Index of the strictly containing box per point (first hit), else -1."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    boxes = np.ascontiguousarray(boxes, dtype=np.int64).reshape(-1, 4)
    if _impl is fallback:
        return fallback.point_in_boxes(xs, ys, boxes)
    return _impl.point_in_boxes(xs, ys, boxes)
