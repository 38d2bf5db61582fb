"""Bind HTML labels to screenshot card spans by document order.

Document order is the only axis the saved HTML and the screenshot share,
so the i-th main-axis span (top to bottom) takes the i-th main-axis
label. Geometry always wins over labels on count mismatch: excess spans
become unknown_widget rather than being discarded, because the boxes are
what gaze and clicks are attributed against.
"""

from __future__ import annotations

from dataclasses import replace

from .inventory import iou
from .labeler import EtypeLabel
from .model import AdRect, Etype, Flavor, Source, TypedAoi, is_main_axis
from .segmentation import (
    ActivityProfile,
    CardSpan,
    ColumnBounds,
    SegmentationParams,
    SpanOrigin,
    subdivide_composite,
)

__all__ = [
    "COMPOSITE_ETYPES",
    "assign_positions",
    "bind_labels",
    "expand_composites",
    "finalize_aois",
    "propagate_ad_identity",
]

#: Widgets whose cards stack inner items vertically; over-tall spans of
#: these etypes are subdivided, with children inheriting the label.
COMPOSITE_ETYPES: frozenset[Etype] = frozenset(
    {Etype.IMAGE_PACK, Etype.PAA, Etype.TOP_STORIES}
)

_SPAN_SOURCE = {
    SpanOrigin.CV: Source.CV_SPAN,
    SpanOrigin.SHIPPED_AD: Source.SHIPPED_AD,
    SpanOrigin.SUBDIVISION: Source.SUBDIVISION,
}


def bind_labels(
    spans: list[CardSpan],
    labels: list[EtypeLabel],
    column: ColumnBounds,
) -> tuple[list[TypedAoi], list[str]]:
    """Phase C alignment: i-th main-axis span takes the i-th main-axis label.

    Off-axis labels (chrome, related_searches, dd_right candidates) are
    removed from the alignment stream first. Count mismatches are
    warnings, not errors: excess spans become unknown_widget, excess
    labels are dropped. AOI ids are assigned later by finalize_aois.
    """
    main_labels = [lb for lb in labels if is_main_axis(lb.etype)]
    warnings: list[str] = []
    if len(spans) > len(main_labels):
        warnings.append(
            f"bind_mismatch: {len(spans)} spans vs {len(main_labels)} main-axis labels; "
            f"{len(spans) - len(main_labels)} excess spans typed unknown_widget"
        )
    elif len(main_labels) > len(spans):
        warnings.append(
            f"bind_mismatch: {len(main_labels)} main-axis labels vs {len(spans)} spans; "
            f"{len(main_labels) - len(spans)} excess labels dropped"
        )

    aois: list[TypedAoi] = []
    for i, span in enumerate(sorted(spans, key=lambda s: s.y0)):
        etype = main_labels[i].etype if i < len(main_labels) else Etype.UNKNOWN_WIDGET
        aois.append(
            TypedAoi(
                aoi_id="",
                etype=etype,
                x=column.x0,
                y=span.y0,
                w=column.width,
                h=span.height,
                position=i,
                flavor=Flavor.TYPED,
                source=_SPAN_SOURCE[span.origin],
            )
        )
    return aois, warnings


def expand_composites(
    aois: list[TypedAoi],
    profile: ActivityProfile,
    params: SegmentationParams = SegmentationParams(),
) -> list[TypedAoi]:
    """Subdivide over-tall composite-widget AOIs at interior quiet bands.

    Applies only to CV-derived AOIs labeled image_pack / paa /
    top_stories whose height exceeds the composite trigger; children
    keep the parent's etype and are marked source=subdivision. Positions
    are renumbered afterwards.
    """
    out: list[TypedAoi] = []
    changed = False
    for aoi in aois:
        if (
            aoi.etype in COMPOSITE_ETYPES
            and aoi.source is Source.CV_SPAN
            and aoi.h > params.composite_trigger_height
        ):
            children = subdivide_composite(
                CardSpan(aoi.y, aoi.y1, SpanOrigin.CV), profile, params
            )
            if len(children) > 1:
                changed = True
                out.extend(
                    replace(
                        aoi,
                        y=c.y0,
                        h=c.height,
                        source=Source.SUBDIVISION,
                        position=aoi.position,
                    )
                    for c in children
                )
                continue
        out.append(aoi)
    return _renumber(out) if changed else out


def _renumber(aois: list[TypedAoi]) -> list[TypedAoi]:
    """Canonical order and positions: main-axis by y then off-axis by y."""
    main = sorted((a for a in aois if a.main_axis), key=lambda a: (a.y, a.x))
    off = sorted((a for a in aois if not a.main_axis), key=lambda a: (a.y, a.x))
    out = [replace(a, position=i) for i, a in enumerate(main)]
    out.extend(replace(a, position=-1) for a in off)
    return out


def propagate_ad_identity(
    aois: list[TypedAoi],
    ad_rects: tuple[AdRect, ...] | list[AdRect],
    iou_threshold: float = 0.5,
) -> list[TypedAoi]:
    """Inherit ad identity from the shipped rectangles by spatial overlap.

    An AOI overlapping a main-axis ad rect at IoU >= threshold takes the
    rect's etype and exactly its geometry (the rects are the ad ground
    truth). Unclaimed main-axis rects are inserted as new AOIs; dd_right
    rects are appended off-axis with position -1. An AOI claimed by two
    rects means segmentation's ad-fidelity invariant was violated
    upstream and raises.
    """
    out = list(aois)
    claimed_by: dict[int, AdRect] = {}

    for rect in ad_rects:
        if rect.etype is Etype.DD_RIGHT:
            continue
        rect_box = (rect.x, rect.y, rect.w, rect.h)
        best_i = -1
        best_iou = 0.0
        for i, aoi in enumerate(out):
            if not aoi.main_axis:
                continue
            v = iou((aoi.x, aoi.y, aoi.w, aoi.h), rect_box)
            if v > best_iou:
                best_i, best_iou = i, v
        if best_iou >= iou_threshold:
            if best_i in claimed_by:
                raise ValueError(
                    f"AOI at y={out[best_i].y} claimed by two ad rects "
                    f"({claimed_by[best_i].etype} and {rect.etype})"
                )
            claimed_by[best_i] = rect
            out[best_i] = replace(
                out[best_i],
                etype=rect.etype,
                x=rect.x,
                y=rect.y,
                w=rect.w,
                h=rect.h,
                source=Source.SHIPPED_AD,
            )
        else:
            out.append(
                TypedAoi(
                    aoi_id="",
                    etype=rect.etype,
                    x=rect.x,
                    y=rect.y,
                    w=rect.w,
                    h=rect.h,
                    position=0,
                    flavor=Flavor.TYPED,
                    source=Source.SHIPPED_AD,
                )
            )

    for rect in ad_rects:
        if rect.etype is not Etype.DD_RIGHT:
            continue
        out.append(
            TypedAoi(
                aoi_id="",
                etype=Etype.DD_RIGHT,
                x=rect.x,
                y=rect.y,
                w=rect.w,
                h=rect.h,
                position=-1,
                flavor=Flavor.TYPED,
                source=Source.SHIPPED_AD,
            )
        )

    return _renumber(out)


def assign_positions(aois: list[TypedAoi]) -> list[TypedAoi]:
    """Number main-axis AOIs 0..K-1 in increasing y; off-axis get -1.

    Positions depend on geometry only, so any permutation of the input
    yields the same positions.
    """
    return _renumber(aois)


def finalize_aois(aois: list[TypedAoi], trial_id: str) -> list[TypedAoi]:
    """Assign canonical positions and aoi ids (trial id + ordinal)."""
    ordered = _renumber(aois)
    return [replace(a, aoi_id=f"{trial_id}:{i:03d}") for i, a in enumerate(ordered)]
