"""Card-span segmentation on the main results column of a screenshot.

Works directly on the raster: per-row standard-deviation row-projection
over the main column yields an activity profile; maximal active runs
become card spans, shipped ad rectangles take precedence on overlap, and
over-tall spans are subdivided at interior quiet bands. HTML is never
consulted here; geometry comes from pixels only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import AdRect, Etype

__all__ = [
    "ActivityProfile",
    "CardSpan",
    "ColumnBounds",
    "SegmentationParams",
    "SpanOrigin",
    "apply_ad_precedence",
    "card_spans",
    "main_column_bounds",
    "row_activity_profile",
    "segment_trial",
    "subdivide_composite",
]

_MAIN_AXIS_AD_ETYPES = (Etype.DD_TOP, Etype.NATIVE_AD)


class SpanOrigin(str, enum.Enum):
    CV = "cv"
    SHIPPED_AD = "shipped_ad"
    SUBDIVISION = "subdivision"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class SegmentationParams:
    """Tunable knobs for Phase A. Defaults are tuned on synthetic fixtures
    and overridable from the CLI and config file."""

    activity_threshold: float = 2.0  # intensity-std units
    min_gap_rows: int = 8
    min_card_height: int = 24
    composite_trigger_height: int = 350
    col_merge_gap: int = 24
    column_fallback: tuple[float, float] = (0.10, 0.72)


@dataclass(frozen=True)
class ColumnBounds:
    x0: int
    x1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0


@dataclass(frozen=True, eq=False)
class ActivityProfile:
    """Per-row activity over the main column; length equals screenshot height."""

    values: np.ndarray
    column: ColumnBounds


@dataclass(frozen=True)
class CardSpan:
    y0: int
    y1: int
    origin: SpanOrigin = SpanOrigin.CV

    @property
    def height(self) -> int:
        return self.y1 - self.y0


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal [start, end) runs of True values."""
    if mask.size == 0:
        return []
    padded = np.concatenate(([False], mask, [False]))
    diff = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(diff == 1)
    ends = np.flatnonzero(diff == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def _merge_runs(runs: list[tuple[int, int]], max_gap: int) -> list[tuple[int, int]]:
    """Merge consecutive runs separated by fewer than ``max_gap`` quiet units."""
    if not runs:
        return []
    merged = [runs[0]]
    for start, end in runs[1:]:
        prev_start, prev_end = merged[-1]
        if start - prev_end < max_gap:
            merged[-1] = (prev_start, end)
        else:
            merged.append((start, end))
    return merged


def main_column_bounds(
    raster: np.ndarray,
    ad_rects: tuple[AdRect, ...] | list[AdRect] = (),
    params: SegmentationParams = SegmentationParams(),
) -> ColumnBounds:
    """Locate the horizontal band containing the main results column.

    Picks the contiguous band of active columns with maximal integrated
    activity, after excluding x-bands owned by dd_right rectangles. When
    main-axis ad rectangles exist the bounds are widened to contain their
    x-extent, and dd_right rectangles always lie fully right of x1; the
    shipped rectangles are ground truth for the rail boundary. Uniform
    rasters fall back to a fixed fraction of the page width.
    """
    gray = kernels.to_gray(raster)
    height, width = gray.shape
    if width < 64:
        raise ValueError(f"raster too narrow to segment ({width} px)")

    activity = kernels.col_std_profile(gray, 0, height)
    rail_rects = [r for r in ad_rects if r.etype is Etype.DD_RIGHT]
    for rect in rail_rects:
        activity[max(rect.x, 0) : max(rect.x1, 0)] = 0.0

    active = activity > params.activity_threshold
    runs = _merge_runs(_runs(active), params.col_merge_gap)
    if runs:
        best = max(runs, key=lambda run: float(activity[run[0] : run[1]].sum()))
        x0, x1 = best
    else:
        x0 = int(round(params.column_fallback[0] * width))
        x1 = int(round(params.column_fallback[1] * width))

    for rect in ad_rects:
        if rect.etype in _MAIN_AXIS_AD_ETYPES:
            x0 = min(x0, rect.x)
            x1 = max(x1, rect.x1)
    if rail_rects:
        x1 = min(x1, min(r.x for r in rail_rects))

    if not 0 <= x0 < x1 <= width:
        raise ValueError(f"degenerate main column [{x0}, {x1}) for width {width}")
    return ColumnBounds(x0, x1)


def row_activity_profile(raster: np.ndarray, column: ColumnBounds) -> ActivityProfile:
    """Per-row std of intensities restricted to the main column.

    RGB rasters are collapsed to BT.601 luma first. Pure and
    deterministic: identical raster and column give bit-identical values.
    """
    gray = kernels.to_gray(raster)
    height, width = gray.shape
    if not 0 <= column.x0 < column.x1 <= width:
        raise ValueError(f"column {column} outside raster width {width}")
    values = kernels.row_std_profile(gray, column.x0, column.x1)
    return ActivityProfile(values=values, column=column)


def card_spans(profile: ActivityProfile, params: SegmentationParams = SegmentationParams()) -> list[CardSpan]:
    """Maximal runs of rows with activity above threshold.

    Runs separated by fewer than ``min_gap_rows`` quiet rows are merged,
    and merged runs shorter than ``min_card_height`` are dropped. Output
    is sorted by y0 and pairwise non-overlapping.
    """
    active = profile.values > params.activity_threshold
    merged = _merge_runs(_runs(active), params.min_gap_rows)
    return [
        CardSpan(y0, y1, SpanOrigin.CV)
        for y0, y1 in merged
        if y1 - y0 >= params.min_card_height
    ]


def apply_ad_precedence(
    spans: list[CardSpan],
    ad_rects: tuple[AdRect, ...] | list[AdRect],
    params: SegmentationParams = SegmentationParams(),
) -> list[CardSpan]:
    """Give shipped main-axis ad rectangles precedence over CV spans.

    Each dd_top / native_ad rect becomes exactly one span with exactly
    its vertical extent; CV spans overlapping it are trimmed, and trim
    leftovers shorter than ``min_card_height`` are dropped. dd_right
    rects are off-axis and ignored here.
    """
    main_rects = sorted(
        (r for r in ad_rects if r.etype in _MAIN_AXIS_AD_ETYPES),
        key=lambda r: (r.y, r.x),
    )
    for a, b in zip(main_rects, main_rects[1:]):
        if b.y < a.y1:
            raise ValueError(
                f"main-axis ad rects overlap in y: [{a.y},{a.y1}) vs [{b.y},{b.y1})"
            )

    fragments = list(spans)
    for rect in main_rects:
        trimmed: list[CardSpan] = []
        for span in fragments:
            if span.y1 <= rect.y or span.y0 >= rect.y1:
                trimmed.append(span)
                continue
            head = CardSpan(span.y0, min(span.y1, rect.y), span.origin)
            tail = CardSpan(max(span.y0, rect.y1), span.y1, span.origin)
            if head.height >= params.min_card_height:
                trimmed.append(head)
            if tail.height >= params.min_card_height:
                trimmed.append(tail)
        fragments = trimmed

    out = fragments + [CardSpan(r.y, r.y1, SpanOrigin.SHIPPED_AD) for r in main_rects]
    out.sort(key=lambda s: s.y0)
    return out


def subdivide_composite(
    span: CardSpan,
    profile: ActivityProfile,
    params: SegmentationParams = SegmentationParams(),
) -> list[CardSpan]:
    """Split an over-tall CV span at its interior quiet bands.

    Spans at or below ``composite_trigger_height`` pass through
    unchanged. Otherwise the span is split at the center row of each
    interior run of quiet rows (activity <= threshold), subject to every
    child being at least ``min_card_height`` tall; the children partition
    the parent exactly.
    """
    if span.origin is not SpanOrigin.CV:
        raise ValueError("subdivision applies to CV spans only")
    if span.height <= params.composite_trigger_height:
        return [span]

    interior = profile.values[span.y0 : span.y1] <= params.activity_threshold
    centers = [span.y0 + (a + b) // 2 for a, b in _runs(interior)]

    boundaries = [span.y0]
    for center in centers:
        if center - boundaries[-1] >= params.min_card_height:
            boundaries.append(center)
    if span.y1 - boundaries[-1] < params.min_card_height and len(boundaries) > 1:
        boundaries.pop()
    boundaries.append(span.y1)

    if len(boundaries) == 2:
        return [span]
    return [
        CardSpan(a, b, SpanOrigin.SUBDIVISION)
        for a, b in zip(boundaries, boundaries[1:])
    ]


@dataclass(frozen=True, eq=False)
class SegmentationResult:
    column: ColumnBounds
    profile: ActivityProfile
    spans: list[CardSpan]


def segment_trial(
    raster: np.ndarray,
    ad_rects: tuple[AdRect, ...] | list[AdRect] = (),
    params: SegmentationParams = SegmentationParams(),
) -> SegmentationResult:
    """Full Phase A for one trial: column, profile, card spans with ad
    precedence applied.

    Composite subdivision is applied after binding, once the labels say
    which tall spans are composite widgets; see binder.expand_composites.
    """
    column = main_column_bounds(raster, ad_rects, params)
    profile = row_activity_profile(raster, column)
    spans = card_spans(profile, params)
    spans = apply_ad_precedence(spans, ad_rects, params)
    return SegmentationResult(column=column, profile=profile, spans=spans)
