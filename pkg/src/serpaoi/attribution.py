"""Click and fixation attribution against main-axis AOIs.

Click attribution requires X and Y containment: Y-only rules would route
right-rail and chrome clicks into main-axis AOIs that merely share their
Y band. A small tolerance expansion (default +/-5 px in X, +/-10 px in Y)
recovers link-padding clicks; fixation assignment is strict containment
only, since the padding phenomenon is click-specific and a tolerance
would double-count fixations near shared boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import AdRect, ClickEvent, Etype, FixationEvent, TrialMeta, TypedAoi

__all__ = [
    "AttributionParams",
    "AttributionResult",
    "TrialClickStatus",
    "above_fold",
    "assign_fixations",
    "attribute_point",
    "is_main_axis_click",
    "is_pathological_click",
    "regression_flags",
]


@dataclass(frozen=True)
class AttributionParams:
    tolerance_x: float = 5.0
    tolerance_y: float = 10.0
    # Final-click coordinates beyond screenshot bounds by more than this
    # margin (or negative / non-finite) count as pathological.
    pathological_margin_px: float = 50.0


@dataclass(frozen=True)
class AttributionResult:
    aoi_id: str | None
    mode: str  # strict | tolerance | miss

    @property
    def hit(self) -> bool:
        return self.aoi_id is not None


@dataclass(frozen=True)
class TrialClickStatus:
    main_axis: bool
    reason: str  # attributed | dd_right | chrome_or_far | no_click


def _check_non_overlapping(aois: list[TypedAoi]) -> None:
    ordered = sorted(aois, key=lambda a: (a.y, a.x))
    for a, b in zip(ordered, ordered[1:]):
        if a.overlaps(b):
            raise ValueError(f"overlapping AOIs: {a.aoi_id} and {b.aoi_id}")


def attribute_point(
    aois: list[TypedAoi],
    x: float,
    y: float,
    params: AttributionParams = AttributionParams(),
) -> AttributionResult:
    """Attribute one point to one trial's main-axis AOIs of one flavor.

    Strict pass first: the unique AOI whose half-open box contains the
    point. Tolerance pass second: AOIs whose box expanded by the X/Y
    tolerances contain the point, tie-broken by smallest Euclidean
    distance to the unexpanded box, then lowest position. Otherwise a
    miss.
    """
    _check_non_overlapping(aois)

    for aoi in aois:
        if aoi.contains(x, y):
            return AttributionResult(aoi.aoi_id, "strict")

    candidates = [
        aoi
        for aoi in aois
        if aoi.x - params.tolerance_x <= x < aoi.x1 + params.tolerance_x
        and aoi.y - params.tolerance_y <= y < aoi.y1 + params.tolerance_y
    ]
    if candidates:
        best = min(candidates, key=lambda a: (a.distance_to(x, y), a.position))
        return AttributionResult(best.aoi_id, "tolerance")

    return AttributionResult(None, "miss")


def _final_click(clicks: tuple[ClickEvent, ...] | list[ClickEvent]) -> ClickEvent | None:
    for c in clicks:
        if c.is_final:
            return c
    return None


def is_pathological_click(
    click: ClickEvent,
    meta: TrialMeta | None,
    params: AttributionParams = AttributionParams(),
) -> bool:
    """Non-finite, negative, or beyond screenshot bounds by more than the
    configured margin. One rule shared by the trial filter and the
    registration probe."""
    if not (math.isfinite(click.x) and math.isfinite(click.y)):
        return True
    m = params.pathological_margin_px
    if click.x < -m or click.y < -m:
        return True
    if meta is not None and (
        click.x > meta.screenshot_width + m or click.y > meta.screenshot_height + m
    ):
        return True
    return False


def is_main_axis_click(
    trial_aois: list[TypedAoi],
    clicks: tuple[ClickEvent, ...] | list[ClickEvent],
    ad_rects: tuple[AdRect, ...] | list[AdRect],
    meta: TrialMeta | None = None,
    params: AttributionParams = AttributionParams(),
) -> TrialClickStatus:
    """Trial-level filter: does the final click land in a main-axis AOI?

    ``trial_aois`` should be the gap-fill flavor main-axis set. Trials
    with no final click or pathological final-click coordinates are
    (False, no_click); final clicks inside a dd_right rect (expanded by
    the same tolerances) are (False, dd_right); everything else that
    misses is (False, chrome_or_far).
    """
    final = _final_click(clicks)
    if final is None or is_pathological_click(final, meta, params):
        return TrialClickStatus(False, "no_click")

    result = attribute_point([a for a in trial_aois if a.main_axis], final.x, final.y, params)
    if result.hit:
        return TrialClickStatus(True, "attributed")

    for rect in ad_rects:
        if rect.etype is not Etype.DD_RIGHT:
            continue
        if (
            rect.x - params.tolerance_x <= final.x < rect.x1 + params.tolerance_x
            and rect.y - params.tolerance_y <= final.y < rect.y1 + params.tolerance_y
        ):
            return TrialClickStatus(False, "dd_right")

    return TrialClickStatus(False, "chrome_or_far")


def assign_fixations(
    aois: list[TypedAoi],
    fixations: tuple[FixationEvent, ...] | list[FixationEvent],
) -> tuple[dict[str, list[int]], list[str | None]]:
    """Assign each fixation to the unique AOI strictly containing it.

    Returns (per-AOI fixation index lists ordered by start time,
    per-fixation aoi_id or None). No tolerance expansion here.
    """
    _check_non_overlapping(aois)
    order = sorted(range(len(fixations)), key=lambda i: (fixations[i].start, i))
    per_aoi: dict[str, list[int]] = {a.aoi_id: [] for a in aois}
    per_fix: list[str | None] = [None] * len(fixations)
    for i in order:
        fx = fixations[i]
        for aoi in aois:
            if aoi.contains(fx.x, fx.y):
                per_aoi[aoi.aoi_id].append(i)
                per_fix[i] = aoi.aoi_id
                break
    return per_aoi, per_fix


def regression_flags(fixation_aois: list[str | None]) -> dict[str, bool]:
    """Per-AOI regressive flag from a time-ordered fixation aoi sequence.

    Consecutive same-AOI fixations collapse into one visit; unassigned
    fixations do not form visits and do not separate them. An AOI is
    regressive iff it is visited again after at least one intervening
    visit to a different AOI, i.e. it appears twice in the collapsed
    visit sequence. AOIs with no fixations are absent from the result.
    """
    visits: list[str] = []
    for aoi_id in fixation_aois:
        if aoi_id is None:
            continue
        if not visits or visits[-1] != aoi_id:
            visits.append(aoi_id)
    counts: dict[str, int] = {}
    for v in visits:
        counts[v] = counts.get(v, 0) + 1
    return {aoi_id: n >= 2 for aoi_id, n in counts.items()}


def above_fold(aois: list[TypedAoi], meta: TrialMeta) -> dict[str, bool]:
    """An AOI is above the fold iff its box intersects the initial
    viewport band y in [0, viewport_height) by at least one pixel."""
    return {a.aoi_id: a.y < meta.viewport_height and a.y1 > 0 for a in aois}
