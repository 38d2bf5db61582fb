#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--height 12000] [--width 1400]

Times the two hot kernels (per-row std projection, batch point-in-box
hit testing) on a full-page-sized raster and verifies the backends agree
bit-for-bit while timing them.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from serpaoi.kernels import fallback

try:
    from serpaoi.kernels import _rowproj as compiled
except ImportError:
    compiled = None


def _time(fn, *args, repeats: int = 5) -> tuple[float, object]:
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--height", type=int, default=12_000)
    parser.add_argument("--width", type=int, default=1_400)
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--boxes", type=int, default=12)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    gray = rng.integers(0, 256, size=(args.height, args.width), dtype=np.uint8)
    x0, x1 = args.width // 8, args.width - args.width // 4

    rows = []
    t_fb, out_fb = _time(fallback.row_std_profile, gray, x0, x1)
    rows.append(("row_std_profile", "fallback", t_fb))
    if compiled is not None:
        t_cy, out_cy = _time(compiled.row_std_profile, gray, x0, x1)
        rows.append(("row_std_profile", "compiled", t_cy))
        assert (out_fb == out_cy).all(), "backends disagree"

    xs = rng.uniform(0, args.width, size=args.points)
    ys = rng.uniform(0, args.height, size=args.points)
    y = 50
    boxes = []
    for _ in range(args.boxes):
        h = int(rng.integers(80, 320))
        boxes.append((x0, y, x1 - x0, h))
        y += h + int(rng.integers(12, 60))
    boxes = np.asarray(boxes, dtype=np.int64)

    t_fb, hit_fb = _time(fallback.point_in_boxes, xs, ys, boxes)
    rows.append(("point_in_boxes", "fallback", t_fb))
    if compiled is not None:
        t_cy, hit_cy = _time(compiled.point_in_boxes, xs, ys, boxes)
        rows.append(("point_in_boxes", "compiled", t_cy))
        assert (hit_fb == hit_cy).all(), "backends disagree"

    print(f"raster {args.width}x{args.height}, column [{x0},{x1}); "
          f"{args.points} points over {args.boxes} boxes")
    print(f"{'kernel':<18}{'backend':<10}{'best (ms)':>10}")
    base: dict[str, float] = {}
    for kernel, backend, t in rows:
        line = f"{kernel:<18}{backend:<10}{t * 1e3:>10.2f}"
        if backend == "fallback":
            base[kernel] = t
        else:
            line += f"   ({base[kernel] / t:.1f}x)"
        print(line)
    if compiled is None:
        print("compiled extension not built; fallback only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
