"""Numpy implementations of the raster kernels.

These are the reference semantics; the compiled extension in
``_rowproj.pyx`` must be bit-identical. Both paths compute the per-row
variance from exact integer moments (n*sum(x^2) - sum(x)^2), so the
result does not depend on summation order and the two backends agree to
the last float bit.
"""

from __future__ import annotations

import numpy as np


def row_std_profile(gray: np.ndarray, x0: int, x1: int) -> np.ndarray:
    """Population std of pixel intensities per row, restricted to [x0, x1).

    ``gray`` must be a 2-D uint8 array. Returns float64 of length H.
    """
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise ValueError("row_std_profile expects a 2-D uint8 raster")
    n = x1 - x0
    if n <= 0:
        raise ValueError("empty column range")
    seg = gray[:, x0:x1].astype(np.int64)
    s = seg.sum(axis=1)
    s2 = np.square(seg).sum(axis=1)
    var = (n * s2 - s * s).astype(np.float64) / float(n * n)
    return np.sqrt(np.maximum(var, 0.0))


def col_std_profile(gray: np.ndarray, y0: int, y1: int) -> np.ndarray:
    """Population std of pixel intensities per column, restricted to rows [y0, y1)."""
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise ValueError("col_std_profile expects a 2-D uint8 raster")
    n = y1 - y0
    if n <= 0:
        raise ValueError("empty row range")
    seg = gray[y0:y1, :].astype(np.int64)
    s = seg.sum(axis=0)
    s2 = np.square(seg).sum(axis=0)
    var = (n * s2 - s * s).astype(np.float64) / float(n * n)
    return np.sqrt(np.maximum(var, 0.0))


def point_in_boxes(xs: np.ndarray, ys: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    """Index of the first box strictly containing each point, else -1.

    ``boxes`` is an (M, 4) int64 array of (x, y, w, h); containment is
    half-open: x in [bx, bx+bw) and y in [by, by+bh).
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.int64)
    out = np.full(xs.shape[0], -1, dtype=np.int64)
    if boxes.shape[0] == 0:
        return out
    bx0 = boxes[:, 0]
    by0 = boxes[:, 1]
    bx1 = boxes[:, 0] + boxes[:, 2]
    by1 = boxes[:, 1] + boxes[:, 3]
    inside = (
        (xs[:, None] >= bx0[None, :])
        & (xs[:, None] < bx1[None, :])
        & (ys[:, None] >= by0[None, :])
        & (ys[:, None] < by1[None, :])
    )
    hit_any = inside.any(axis=1)
    out[hit_any] = np.argmax(inside[hit_any], axis=1)
    return out
