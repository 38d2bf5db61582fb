"""Per-trial result records shared by the pipeline and the aggregators."""

from __future__ import annotations

from dataclasses import dataclass, field

from .attribution import AttributionResult, TrialClickStatus
from .model import (
    AdRect,
    ClickEvent,
    CursorEvent,
    FixationEvent,
    Flavor,
    TrialMeta,
    TypedAoi,
)

__all__ = ["AoiStats", "TrialRecord"]


@dataclass(frozen=True)
class AoiStats:
    n_fixations: int = 0
    regressive: bool = False
    above_fold: bool = False
    n_clicks_attributed: int = 0

    @property
    def fixated(self) -> bool:
        return self.n_fixations > 0


@dataclass
class TrialRecord:
    """Everything computed for one trial; the single in-memory source all
    emitted artifacts derive from."""

    trial_id: str
    meta: TrialMeta | None = None
    dropped: bool = False
    drop_codes: tuple[str, ...] = ()
    error: str | None = None
    warnings: tuple[str, ...] = ()
    label_tiers: tuple[tuple[str, int], ...] = ()
    column: tuple[int, int] | None = None
    aois: dict[Flavor, tuple[TypedAoi, ...]] = field(default_factory=dict)
    aoi_stats: dict[Flavor, dict[str, AoiStats]] = field(default_factory=dict)
    click_attr: dict[Flavor, tuple[AttributionResult, ...]] = field(default_factory=dict)
    fixation_aoi: dict[Flavor, tuple[str | None, ...]] = field(default_factory=dict)
    click_status: TrialClickStatus = TrialClickStatus(False, "no_click")
    # (card doc_index, etype, type-token ratio, query overlap) per main-axis card
    content_features: tuple[tuple[int, str, float, float], ...] = ()
    ad_rects: tuple[AdRect, ...] = ()
    fixations: tuple[FixationEvent, ...] = ()
    clicks: tuple[ClickEvent, ...] = ()
    cursor: tuple[CursorEvent, ...] = ()
    channels: dict[str, tuple[float, ...]] = field(default_factory=dict)

    @property
    def processed(self) -> bool:
        return not self.dropped and self.error is None
