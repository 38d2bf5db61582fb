"""Shared domain types for SERP trial bundles and typed AOIs.

Coordinate conventions used throughout the package:

* origin at the top-left of the screenshot, y grows downward;
* all geometry lives in screenshot pixel space (the space the fixation
  and cursor streams are recorded in);
* a box covers the half-open region [x, x+w) x [y, y+h), so midpoint
  tiling is exact and no pixel row is owned twice;
* timestamps are integer milliseconds relative to trial start.

All types are immutable values after construction and safe to share
across threads or worker processes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AD_ETYPES",
    "AdRect",
    "ClickEvent",
    "CursorEvent",
    "Etype",
    "FixationEvent",
    "Flavor",
    "IngestError",
    "MAIN_AXIS_ETYPES",
    "Source",
    "TrialBundle",
    "TrialMeta",
    "TypedAoi",
    "ValidationReport",
    "Violation",
    "is_main_axis",
    "validate_trial_bundle",
]


class IngestError(Exception):
    """Raised when a trial's raw inputs cannot be read at all.

    Distinct from validation failures: an unreadable raster or an
    unreadable HTML file is a hard ingest error, while a readable but
    inconsistent bundle yields a ValidationReport.
    """


class Etype(str, enum.Enum):
    """Element type label for an AOI."""

    ORGANIC = "organic"
    DD_TOP = "dd_top"
    NATIVE_AD = "native_ad"
    DD_RIGHT = "dd_right"
    TOP_PLACES = "top_places"
    KNOWLEDGE_PANEL = "knowledge_panel"
    PAA = "paa"
    IMAGE_PACK = "image_pack"
    TOP_STORIES = "top_stories"
    OTHER_WIDGET = "other_widget"
    UNKNOWN_WIDGET = "unknown_widget"
    CHROME = "chrome"
    RELATED_SEARCHES = "related_searches"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


#: Etypes that live on the central results column and receive positions 0..N.
MAIN_AXIS_ETYPES: frozenset[Etype] = frozenset(
    {
        Etype.ORGANIC,
        Etype.DD_TOP,
        Etype.NATIVE_AD,
        Etype.TOP_PLACES,
        Etype.KNOWLEDGE_PANEL,
        Etype.PAA,
        Etype.IMAGE_PACK,
        Etype.TOP_STORIES,
        Etype.OTHER_WIDGET,
        Etype.UNKNOWN_WIDGET,
    }
)

#: Ad surfaces for which ground-truth rectangles ship with a corpus.
AD_ETYPES: frozenset[Etype] = frozenset({Etype.DD_TOP, Etype.NATIVE_AD, Etype.DD_RIGHT})


def is_main_axis(etype: Etype) -> bool:
    return etype in MAIN_AXIS_ETYPES


class Flavor(str, enum.Enum):
    """AOI output variant."""

    TYPED = "typed"
    TYPED_GAPFILL = "typed_gapfill"
    ORGANIC_HYBRID = "organic_hybrid"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


class Source(str, enum.Enum):
    """Where an AOI's geometry came from."""

    CV_SPAN = "cv_span"
    SHIPPED_AD = "shipped_ad"
    SUBDIVISION = "subdivision"
    GAPFILL_EXTENSION = "gapfill_extension"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class TrialMeta:
    trial_id: str
    viewport_width: int
    viewport_height: int
    screenshot_width: int
    screenshot_height: int
    query_text: str = ""
    entry_timestamp: int | None = None


@dataclass(frozen=True)
class FixationEvent:
    x: float
    y: float
    start: int
    end: int

    @property
    def duration(self) -> int:
        return self.end - self.start

    @property
    def midpoint(self) -> float:
        return (self.start + self.end) / 2


@dataclass(frozen=True)
class ClickEvent:
    t: int
    x: float
    y: float
    is_final: bool = False


@dataclass(frozen=True)
class CursorEvent:
    t: int
    x: float
    y: float
    kind: str = "move"  # move | click | scroll


@dataclass(frozen=True)
class AdRect:
    etype: Etype
    x: int
    y: int
    w: int
    h: int

    @property
    def x1(self) -> int:
        return self.x + self.w

    @property
    def y1(self) -> int:
        return self.y + self.h


@dataclass(frozen=True)
class TypedAoi:
    """One typed bounding box on the screenshot.

    ``position`` is the main-axis display ordinal (0..N in increasing y);
    off-axis AOIs (dd_right, chrome, related_searches) carry -1.
    """

    aoi_id: str
    etype: Etype
    x: int
    y: int
    w: int
    h: int
    position: int
    flavor: Flavor
    source: Source

    @property
    def x1(self) -> int:
        return self.x + self.w

    @property
    def y1(self) -> int:
        return self.y + self.h

    @property
    def main_axis(self) -> bool:
        return self.etype in MAIN_AXIS_ETYPES

    def contains(self, px: float, py: float) -> bool:
        """Strict half-open containment test."""
        return self.x <= px < self.x1 and self.y <= py < self.y1

    def distance_to(self, px: float, py: float) -> float:
        """Euclidean distance from a point to the box closure (0 inside)."""
        dx = max(self.x - px, px - self.x1, 0.0)
        dy = max(self.y - py, py - self.y1, 0.0)
        return math.hypot(dx, dy)

    def overlaps(self, other: "TypedAoi") -> bool:
        return (
            self.x < other.x1
            and other.x < self.x1
            and self.y < other.y1
            and other.y < self.y1
        )


@dataclass(frozen=True)
class TrialBundle:
    """One trial's raw inputs.

    ``meta`` may be None when the metadata file is missing or unusable;
    such bundles are flagged ``trial_dropped`` by validation rather than
    rejected at ingest time.
    """

    meta: TrialMeta | None
    screenshot: np.ndarray  # HxW uint8 grayscale or HxWx3 uint8 RGB
    html: str
    ad_rects: tuple[AdRect, ...] = ()
    fixations: tuple[FixationEvent, ...] = ()
    clicks: tuple[ClickEvent, ...] = ()
    cursor: tuple[CursorEvent, ...] = ()


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(v.code for v in self.violations)

    @property
    def dropped(self) -> bool:
        return "trial_dropped" in self.codes


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def validate_trial_bundle(bundle: TrialBundle) -> ValidationReport:
    """Check a trial bundle against the per-trial input invariants.

    Pure: the same bundle always yields an identical report. An empty
    report means the bundle is valid. A bundle with missing meta or zero
    fixations yields the ``trial_dropped`` code used by the corpus drop
    rule.
    """
    out: list[Violation] = []

    if bundle.meta is None:
        out.append(Violation("trial_dropped", "missing trial meta"))
    elif not bundle.fixations:
        out.append(Violation("trial_dropped", "no fixations recorded"))

    meta = bundle.meta
    if meta is not None:
        if not meta.trial_id:
            out.append(Violation("trial_id_empty", "trial_id must be non-empty"))
        if meta.viewport_width > meta.screenshot_width or meta.viewport_height > meta.screenshot_height:
            out.append(
                Violation(
                    "viewport_exceeds_screenshot",
                    f"viewport {meta.viewport_width}x{meta.viewport_height} exceeds "
                    f"screenshot {meta.screenshot_width}x{meta.screenshot_height}",
                )
            )
        shape = bundle.screenshot.shape
        if shape[0] != meta.screenshot_height or shape[1] != meta.screenshot_width:
            out.append(
                Violation(
                    "raster_dim_mismatch",
                    f"raster is {shape[1]}x{shape[0]} but meta says "
                    f"{meta.screenshot_width}x{meta.screenshot_height}",
                )
            )
        for i, rect in enumerate(bundle.ad_rects):
            if rect.w <= 0 or rect.h <= 0:
                out.append(Violation("ad_rect_degenerate", f"ad rect {i} has non-positive size"))
            elif rect.x < 0 or rect.y < 0 or rect.x1 > meta.screenshot_width or rect.y1 > meta.screenshot_height:
                out.append(Violation("ad_rect_out_of_bounds", f"ad rect {i} extends past screenshot bounds"))

    for i, fx in enumerate(bundle.fixations):
        if fx.end < fx.start or not _finite(fx.x, fx.y):
            out.append(Violation("fixation_invalid", f"fixation {i} has end < start or non-finite coords"))

    n_final = sum(1 for c in bundle.clicks if c.is_final)
    if n_final > 1:
        out.append(Violation("click_multiple_final", f"{n_final} clicks marked final"))
    for i, c in enumerate(bundle.clicks):
        if not _finite(c.x, c.y):
            out.append(Violation("click_nonfinite", f"click {i} has non-finite coords"))

    ts = [c.t for c in bundle.cursor]
    if any(b < a for a, b in zip(ts, ts[1:])):
        out.append(Violation("cursor_unsorted", "cursor timestamps decrease within the stream"))

    return ValidationReport(tuple(out))
