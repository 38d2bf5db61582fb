"""Inter-result gap-fill: extend adjacent organic pairs to their midpoint.

For each consecutive main-axis pair where both AOIs are organic and
nothing lies between them, the upper box extends down and the lower box
extends up to the shared midpoint, so every Y inside a maximal organic
run belongs to exactly one box. Pairs involving an ad or widget are left
alone: the gap-fill never extends an organic across a non-organic
surface.
"""

from __future__ import annotations

from dataclasses import replace

from .model import Etype, Flavor, Source, TypedAoi

__all__ = ["gapfill"]


def gapfill(aois: list[TypedAoi]) -> list[TypedAoi]:
    """Produce the typed_gapfill flavor from a typed AOI list.

    The odd-gap tie-break is floor((upper.y1 + lower.y0) / 2): the upper
    AOI takes the smaller half. Etypes, positions, x-extents and all
    non-organic boxes are unchanged (apart from the flavor tag); boxes
    that actually grew are marked source=gapfill_extension. Idempotent.
    """
    main = sorted((a for a in aois if a.main_axis), key=lambda a: a.y)
    off = [a for a in aois if not a.main_axis]

    for a, b in zip(main, main[1:]):
        if b.y < a.y1:
            raise ValueError(
                f"overlapping main-axis AOIs: {a.aoi_id} [{a.y},{a.y1}) vs {b.aoi_id} [{b.y},{b.y1})"
            )

    tops = {a.aoi_id: a.y for a in main}
    bottoms = {a.aoi_id: a.y1 for a in main}
    for a, b in zip(main, main[1:]):
        if a.etype is Etype.ORGANIC and b.etype is Etype.ORGANIC:
            m = (a.y1 + b.y) // 2
            bottoms[a.aoi_id] = m
            tops[b.aoi_id] = m

    out: list[TypedAoi] = []
    for a in main:
        y0, y1 = tops[a.aoi_id], bottoms[a.aoi_id]
        grew = (y0, y1) != (a.y, a.y1)
        out.append(
            replace(
                a,
                y=y0,
                h=y1 - y0,
                flavor=Flavor.TYPED_GAPFILL,
                source=Source.GAPFILL_EXTENSION if grew else a.source,
            )
        )
    out.extend(replace(a, flavor=Flavor.TYPED_GAPFILL) for a in off)
    return out
