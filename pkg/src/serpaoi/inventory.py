"""Corpus-level aggregates and audits.

All aggregation here is a commutative fold over per-trial records, so
results never depend on trial processing order. Percentiles use the
nearest-rank convention throughout: the P-th percentile of n sorted
values is the value at 1-based index ceil(P/100 * n).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .attribution import is_pathological_click
from .model import Etype, Flavor
from .records import TrialRecord

__all__ = [
    "AdAudit",
    "InventoryRow",
    "PositionRates",
    "RegistrationRecord",
    "RegistrationStats",
    "ad_consistency_audit",
    "aggregate_registration",
    "etype_inventory",
    "gaze_cursor_registration",
    "iou",
    "nearest_rank_percentile",
    "position_click_rates",
    "snippet_features",
    "spearman",
]

Box = tuple[float, float, float, float]  # x, y, w, h


def iou(a: Box, b: Box) -> float:
    """Intersection-over-union of two (x, y, w, h) boxes; 0 when the
    union is empty."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    if union <= 0:
        return 0.0
    return inter / union


def _overlap_area(a: Box, b: Box) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    return ix * iy


def nearest_rank_percentile(values: list[float], p: float) -> float:
    """Nearest-rank percentile: value at 1-based index ceil(p/100 * n)."""
    if not values:
        raise ValueError("empty vector has no percentiles")
    ordered = sorted(values)
    idx = max(1, math.ceil(p / 100.0 * len(ordered)))
    return ordered[idx - 1]


# ---------------------------------------------------------------------------
# Spearman rank correlation


def _mean_ranks(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based); tied values share the mean of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: list[float], ys: list[float]) -> float | None:
    """Spearman rho: Pearson correlation of average-ranked values.

    Returns None when either rank vector has zero variance (rho is
    undefined there). Requires equal lengths of at least 3.
    """
    if len(xs) != len(ys):
        raise ValueError("vectors must have equal length")
    if len(xs) < 3:
        raise ValueError("need at least 3 observations")
    rx = _mean_ranks(np.asarray(xs, dtype=np.float64))
    ry = _mean_ranks(np.asarray(ys, dtype=np.float64))
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        return None
    return float((dx * dy).sum() / (sx * sy))


# ---------------------------------------------------------------------------
# Behavioral inventory


@dataclass(frozen=True)
class InventoryRow:
    etype: Etype
    n_aois: int
    fixated_pct: float
    n_clicks: int
    click_pct: float
    regressive_pct: float
    above_fold_pct: float


def etype_inventory(
    records: list[TrialRecord],
    flavor: Flavor = Flavor.TYPED_GAPFILL,
) -> list[InventoryRow]:
    """Per-etype behavioral table over the main-axis AOI population.

    Column denominators differ deliberately: fixated % is over the
    etype's full AOI population, click % over all AOI-attributed click
    events, regressive % over the fixated subset, and above-fold % over
    all trials in the corpus (processed or not). Rows are ordered by
    n_aois descending.
    """
    n_trials = len(records)
    n_aois: dict[Etype, int] = {}
    n_fixated: dict[Etype, int] = {}
    n_clicks: dict[Etype, int] = {}
    n_regressive: dict[Etype, int] = {}
    trials_above_fold: dict[Etype, int] = {}

    for rec in records:
        if not rec.processed or flavor not in rec.aois:
            continue
        stats = rec.aoi_stats.get(flavor, {})
        fold_seen: set[Etype] = set()
        for aoi in rec.aois[flavor]:
            if not aoi.main_axis:
                continue
            st = stats.get(aoi.aoi_id)
            n_aois[aoi.etype] = n_aois.get(aoi.etype, 0) + 1
            if st is None:
                continue
            if st.fixated:
                n_fixated[aoi.etype] = n_fixated.get(aoi.etype, 0) + 1
                if st.regressive:
                    n_regressive[aoi.etype] = n_regressive.get(aoi.etype, 0) + 1
            n_clicks[aoi.etype] = n_clicks.get(aoi.etype, 0) + st.n_clicks_attributed
            if st.above_fold:
                fold_seen.add(aoi.etype)
        for etype in fold_seen:
            trials_above_fold[etype] = trials_above_fold.get(etype, 0) + 1

    total_clicks = sum(n_clicks.values())
    rows: list[InventoryRow] = []
    for etype, count in n_aois.items():
        fixated = n_fixated.get(etype, 0)
        clicks = n_clicks.get(etype, 0)
        regressive = n_regressive.get(etype, 0)
        rows.append(
            InventoryRow(
                etype=etype,
                n_aois=count,
                fixated_pct=100.0 * fixated / count,
                n_clicks=clicks,
                click_pct=100.0 * clicks / total_clicks if total_clicks else 0.0,
                regressive_pct=100.0 * regressive / fixated if fixated else 0.0,
                above_fold_pct=100.0 * trials_above_fold.get(etype, 0) / n_trials if n_trials else 0.0,
            )
        )
    rows.sort(key=lambda r: (-r.n_aois, r.etype.value))
    return rows


# ---------------------------------------------------------------------------
# Position-convention rank analysis


@dataclass(frozen=True)
class PositionRates:
    convention: str  # organic_only | all_main_axis
    flavor: Flavor
    positions: tuple[int, ...]
    n_aois: tuple[int, ...]
    n_clicked: tuple[int, ...]
    click_rate: tuple[float, ...]
    pooled_n_aois: int  # positions beyond max_position, excluded from rho
    rho: float | None


def position_click_rates(
    records: list[TrialRecord],
    convention: str,
    flavor: Flavor = Flavor.TYPED_GAPFILL,
    max_position: int = 9,
) -> PositionRates:
    """Click rate by main-axis position under one numbering convention.

    ``organic_only`` renumbers each trial's organic AOIs 0.. by display
    order; ``all_main_axis`` uses the Phase C positions. An AOI counts as
    clicked when at least one click event was attributed to it. Rho is
    the Spearman correlation of position index vs click rate over the
    kept positions and is absent when fewer than 3 positions exist.
    """
    if convention not in ("organic_only", "all_main_axis"):
        raise ValueError(f"unknown convention {convention!r}")

    n_at: dict[int, int] = {}
    clicked_at: dict[int, int] = {}
    pooled = 0

    for rec in records:
        if not rec.processed or flavor not in rec.aois:
            continue
        stats = rec.aoi_stats.get(flavor, {})
        main = [a for a in rec.aois[flavor] if a.main_axis]
        main.sort(key=lambda a: a.position)
        if convention == "organic_only":
            numbered = [
                (i, a)
                for i, a in enumerate(a for a in main if a.etype is Etype.ORGANIC)
            ]
        else:
            numbered = [(a.position, a) for a in main]
        for pos, aoi in numbered:
            if pos > max_position:
                pooled += 1
                continue
            st = stats.get(aoi.aoi_id)
            n_at[pos] = n_at.get(pos, 0) + 1
            if st is not None and st.n_clicks_attributed > 0:
                clicked_at[pos] = clicked_at.get(pos, 0) + 1

    positions = sorted(n_at)
    n_aois = [n_at[p] for p in positions]
    n_clicked = [clicked_at.get(p, 0) for p in positions]
    rates = [c / n for c, n in zip(n_clicked, n_aois)]
    rho = spearman([float(p) for p in positions], rates) if len(positions) >= 3 else None
    return PositionRates(
        convention=convention,
        flavor=flavor,
        positions=tuple(positions),
        n_aois=tuple(n_aois),
        n_clicked=tuple(n_clicked),
        click_rate=tuple(rates),
        pooled_n_aois=pooled,
        rho=rho,
    )


# ---------------------------------------------------------------------------
# Gaze-cursor registration probe


@dataclass(frozen=True)
class RegistrationRecord:
    trial_id: str
    status: str  # included | excluded | skipped
    min_lead_distance: float | None = None
    n_window_fixations: int = 0
    concurrent_distance: float | None = None
    flagged: bool | None = None


@dataclass(frozen=True)
class RegistrationStats:
    n_included: int
    n_excluded: int
    n_skipped: int
    median: float | None
    p25: float | None
    p75: float | None
    p95: float | None
    flagged_share: float | None
    concurrent_median: float | None


def gaze_cursor_registration(
    rec: TrialRecord,
    window_ms: int = 1500,
    threshold_px: float = 250.0,
) -> RegistrationRecord:
    """Spatial-registration probe for one trial.

    Over fixations whose midpoint falls in [t_click - window, t_click],
    take the minimum Euclidean distance to the final-click coordinates.
    Trials without a usable final click (none recorded, or pathological
    coordinates under the same rule the trial filter uses) are skipped;
    trials with a final click but no in-window fixation are excluded
    from aggregates but counted. The concurrent distance uses the
    fixation whose [start, end] spans t_click and is reported only to
    separate the lead-window question from the at-click question.
    """
    final = next((c for c in rec.clicks if c.is_final), None)
    if final is None or is_pathological_click(final, rec.meta):
        return RegistrationRecord(rec.trial_id, "skipped")

    lo, hi = final.t - window_ms, final.t
    dists = [
        math.hypot(fx.x - final.x, fx.y - final.y)
        for fx in rec.fixations
        if lo <= fx.midpoint <= hi
    ]
    concurrent = next(
        (
            math.hypot(fx.x - final.x, fx.y - final.y)
            for fx in sorted(rec.fixations, key=lambda f: f.start)
            if fx.start <= final.t <= fx.end
        ),
        None,
    )
    if not dists:
        return RegistrationRecord(
            rec.trial_id, "excluded", None, 0, concurrent, None
        )
    dmin = min(dists)
    return RegistrationRecord(
        rec.trial_id, "included", dmin, len(dists), concurrent, dmin > threshold_px
    )


def aggregate_registration(probes: list[RegistrationRecord]) -> RegistrationStats:
    """Fold per-trial probes into corpus stats (nearest-rank percentiles)."""
    included = [p for p in probes if p.status == "included"]
    n_excluded = sum(1 for p in probes if p.status == "excluded")
    n_skipped = sum(1 for p in probes if p.status == "skipped")
    dists = [p.min_lead_distance for p in included if p.min_lead_distance is not None]
    concurrent = [p.concurrent_distance for p in probes if p.concurrent_distance is not None]

    def pct(p: float) -> float | None:
        return nearest_rank_percentile(dists, p) if dists else None

    return RegistrationStats(
        n_included=len(included),
        n_excluded=n_excluded,
        n_skipped=n_skipped,
        median=pct(50),
        p25=pct(25),
        p75=pct(75),
        p95=pct(95),
        flagged_share=(sum(1 for p in included if p.flagged) / len(included)) if included else None,
        concurrent_median=nearest_rank_percentile(concurrent, 50) if concurrent else None,
    )


# ---------------------------------------------------------------------------
# Ad internal-consistency audit


@dataclass(frozen=True)
class AdAudit:
    n_classifications: int
    n_disagreements: int
    mean_iou: float | None
    n_organic_overlapping_ads: int
    disagreement_trials: tuple[str, ...] = ()


def ad_consistency_audit(
    records: list[TrialRecord],
    flavor: Flavor = Flavor.TYPED,
    iou_threshold: float = 0.5,
) -> AdAudit:
    """Check pipeline outputs against the shipped ad rectangles.

    A shipped rect counts as a disagreement when no AOI of its etype
    overlaps it at IoU >= threshold. Also counts tight-flavor organic
    AOIs overlapping any shipped rect; the binder is supposed to make
    both numbers zero by construction.
    """
    n_classifications = 0
    n_disagreements = 0
    matched_ious: list[float] = []
    n_organic_overlap = 0
    bad_trials: list[str] = []

    for rec in records:
        if not rec.processed or flavor not in rec.aois:
            continue
        aois = rec.aois[flavor]
        for rect in rec.ad_rects:
            n_classifications += 1
            rect_box = (rect.x, rect.y, rect.w, rect.h)
            best = 0.0
            for aoi in aois:
                if aoi.etype is not rect.etype:
                    continue
                best = max(best, iou((aoi.x, aoi.y, aoi.w, aoi.h), rect_box))
            if best >= iou_threshold:
                matched_ious.append(best)
            else:
                n_disagreements += 1
                bad_trials.append(rec.trial_id)
        for aoi in aois:
            if aoi.etype is not Etype.ORGANIC:
                continue
            box = (aoi.x, aoi.y, aoi.w, aoi.h)
            if any(
                _overlap_area(box, (r.x, r.y, r.w, r.h)) > 0 for r in rec.ad_rects
            ):
                n_organic_overlap += 1

    return AdAudit(
        n_classifications=n_classifications,
        n_disagreements=n_disagreements,
        mean_iou=(sum(matched_ious) / len(matched_ious)) if matched_ious else None,
        n_organic_overlapping_ads=n_organic_overlap,
        disagreement_trials=tuple(bad_trials),
    )


# ---------------------------------------------------------------------------
# Snippet lexical features

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def snippet_features(snippet_text: str, query_text: str) -> tuple[float, float]:
    """(type-token ratio, query-token overlap) for one snippet.

    Tokenization is lowercase with splits on non-alphanumeric runs. TTR
    is distinct/total tokens (0 for empty snippets); overlap is the share
    of distinct query tokens present in the snippet (0 for empty
    queries).
    """
    s_tokens = _tokens(snippet_text)
    q_tokens = set(_tokens(query_text))
    ttr = len(set(s_tokens)) / len(s_tokens) if s_tokens else 0.0
    overlap = len(q_tokens & set(s_tokens)) / len(q_tokens) if q_tokens else 0.0
    return ttr, overlap
