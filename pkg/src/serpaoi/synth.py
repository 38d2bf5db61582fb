"""Deterministic synthetic SERP generator with exact ground truth.

Stands in for a real corpus at desk scale: renders a full-page raster
(text simulated as high-variance pixel bands, which is all the
row-projection consumes), emits matching HTML carrying the default
rules-file signatures, plants ad rectangles, and synthesizes fixation /
click / cursor streams. The returned GroundTruth holds the exact AOIs,
labels, attribution answers and flags the pipeline must reproduce.

Everything is drawn from one seeded generator, so (spec, seed) fully
determines the bundle bytes. Inter-card gaps are drawn from the 12-60 px
range: real layouts go as low as ~5 px, but gaps below the segmentation
merge distance would fuse adjacent cards and make exact ground truth
unattainable by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import (
    AdRect,
    ClickEvent,
    CursorEvent,
    Etype,
    FixationEvent,
    Flavor,
    Source,
    TrialBundle,
    TrialMeta,
    TypedAoi,
)

__all__ = [
    "CardPlan",
    "GroundTruth",
    "LayoutSpec",
    "generate_corpus_specs",
    "generate_trial",
    "random_layout_spec",
]

_BG = 250  # uniform page background intensity

_COMPOSITE = frozenset({Etype.IMAGE_PACK, Etype.PAA, Etype.TOP_STORIES})
_AD_MAIN = frozenset({Etype.DD_TOP, Etype.NATIVE_AD})

_VOCAB = (
    "ergonomic office chair lumbar mesh support desk adjustable review best "
    "budget price warranty shipping herman aeron staples wirecutter reddit "
    "guide comfort back pain height armrest tilt headrest fabric leather"
).split()


@dataclass(frozen=True)
class CardPlan:
    """One planted main-column card, top to bottom."""

    etype: Etype
    height: int
    gap_after: int = 24
    children: tuple[int, ...] = ()  # composite child heights
    kp_variant: str = "class"  # class | attrid (knowledge_panel only)
    widget_variant: str = "table"  # table | fallback (other_widget only)


@dataclass(frozen=True)
class LayoutSpec:
    trial_id: str
    cards: tuple[CardPlan, ...]
    width: int = 1024
    viewport_height: int = 900
    column_x0: int = 160
    column_x1: int = 700
    rail_x0: int = 760
    rail_x1: int = 980
    top_margin: int = 80
    bottom_margin: int = 60
    child_gap: int = 6
    dd_right: tuple[int, int] | None = None  # (y, h)
    footer_card: bool = True
    footer_organic_shaped: bool = False  # footer containing h3+cite (sweep case)
    related_card: bool = False
    # telemetry plan: fixation targets are main-axis AOI ordinals,
    # "gap:<i>" (gap below main AOI i), "rail", or "margin".
    fixation_targets: tuple = ()
    fixation_dwells: tuple[int, ...] = ()
    final_click: int | str | None = None  # ordinal | dd_right | chrome | pathological | None
    extra_clicks: tuple[int, ...] = ()
    registration_silence_ms: int = 0  # delay between last fixation and final click
    drop_fixations: bool = False
    noise_sigma: float = 0.0
    composite_trigger_height: int = 350
    plant_channels: bool = False


@dataclass
class GroundTruth:
    """Exact expected pipeline output for a generated trial."""

    trial_id: str
    column: tuple[int, int]
    label_etypes: tuple[str, ...]  # document-order HTML card labels
    aois: dict[str, list[TypedAoi]] = field(default_factory=dict)  # flavor value -> aois
    click_status: tuple[bool, str] = (False, "no_click")
    click_attr: dict[str, list[tuple[str | None, str]]] = field(default_factory=dict)
    fixation_aoi: dict[str, list[str | None]] = field(default_factory=dict)
    regressive: dict[str, bool] = field(default_factory=dict)  # gapfill aoi_id -> flag
    above_fold: dict[str, bool] = field(default_factory=dict)  # gapfill aoi_id -> flag

    def to_json_dict(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "column": list(self.column),
            "label_etypes": list(self.label_etypes),
            "aois": {
                fl: [
                    {
                        "aoi_id": a.aoi_id,
                        "etype": a.etype.value,
                        "x": a.x,
                        "y": a.y,
                        "w": a.w,
                        "h": a.h,
                        "position": a.position,
                        "flavor": a.flavor.value,
                        "source": a.source.value,
                    }
                    for a in aois
                ]
                for fl, aois in self.aois.items()
            },
            "click_status": {"main_axis": self.click_status[0], "reason": self.click_status[1]},
            "click_attr": {
                fl: [{"aoi_id": aid, "mode": mode} for aid, mode in pairs]
                for fl, pairs in self.click_attr.items()
            },
            "fixation_aoi": self.fixation_aoi,
            "regressive": self.regressive,
            "above_fold": self.above_fold,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "GroundTruth":
        gt = cls(
            trial_id=doc["trial_id"],
            column=tuple(doc["column"]),
            label_etypes=tuple(doc["label_etypes"]),
        )
        gt.aois = {
            fl: [
                TypedAoi(
                    aoi_id=d["aoi_id"],
                    etype=Etype(d["etype"]),
                    x=d["x"],
                    y=d["y"],
                    w=d["w"],
                    h=d["h"],
                    position=d["position"],
                    flavor=Flavor(d["flavor"]),
                    source=Source(d["source"]),
                )
                for d in aois
            ]
            for fl, aois in doc["aois"].items()
        }
        gt.click_status = (doc["click_status"]["main_axis"], doc["click_status"]["reason"])
        gt.click_attr = {
            fl: [(d["aoi_id"], d["mode"]) for d in pairs]
            for fl, pairs in doc["click_attr"].items()
        }
        gt.fixation_aoi = {fl: list(v) for fl, v in doc["fixation_aoi"].items()}
        gt.regressive = dict(doc["regressive"])
        gt.above_fold = dict(doc["above_fold"])
        return gt


def _validate_spec(spec: LayoutSpec) -> None:
    if not 0 <= spec.column_x0 < spec.column_x1 <= spec.width:
        raise ValueError("main column outside raster")
    if spec.dd_right is not None and not spec.column_x1 < spec.rail_x0 < spec.rail_x1 <= spec.width:
        raise ValueError("rail band overlaps main column or raster edge")
    for card in spec.cards:
        if card.height <= 0 or card.gap_after < 0:
            raise ValueError(f"overlapping or degenerate planted cards: {card}")
        if card.children:
            inner = sum(card.children) + (len(card.children) - 1) * spec.child_gap
            if inner != card.height:
                raise ValueError(
                    f"composite children {card.children} + gaps do not tile height {card.height}"
                )


# ---------------------------------------------------------------------------
# Geometry


def _card_extents(spec: LayoutSpec) -> tuple[list[tuple[CardPlan, int, int]], int]:
    """Per-card (plan, y0, y1) and total page height."""
    out = []
    y = spec.top_margin
    for card in spec.cards:
        out.append((card, y, y + card.height))
        y = y + card.height + card.gap_after
    bottom = y - (spec.cards[-1].gap_after if spec.cards else 0)
    if spec.dd_right is not None:
        bottom = max(bottom, spec.dd_right[0] + spec.dd_right[1])
    return out, bottom + spec.bottom_margin


def _typed_aois(spec: LayoutSpec, extents) -> list[TypedAoi]:
    """Expected typed-flavor AOIs: planted cards expanded to subdivision
    children where the composite trigger fires, plus the rail ad."""
    col_w = spec.column_x1 - spec.column_x0
    boxes: list[tuple[Etype, int, int, Source]] = []
    for card, y0, y1 in extents:
        if (
            card.etype in _COMPOSITE
            and card.children
            and card.height > spec.composite_trigger_height
        ):
            # Split at the floor center of each interior quiet band.
            cuts = []
            cy = y0
            for h in card.children[:-1]:
                band_start = cy + h
                cuts.append((2 * band_start + spec.child_gap) // 2)
                cy = band_start + spec.child_gap
            edges = [y0, *cuts, y1]
            for a, b in zip(edges, edges[1:]):
                boxes.append((card.etype, a, b, Source.SUBDIVISION))
        else:
            source = Source.SHIPPED_AD if card.etype in _AD_MAIN else Source.CV_SPAN
            boxes.append((card.etype, y0, y1, source))

    aois = [
        TypedAoi(
            aoi_id="",
            etype=etype,
            x=spec.column_x0,
            y=a,
            w=col_w,
            h=b - a,
            position=i,
            flavor=Flavor.TYPED,
            source=source,
        )
        for i, (etype, a, b, source) in enumerate(boxes)
    ]
    if spec.dd_right is not None:
        ry, rh = spec.dd_right
        aois.append(
            TypedAoi(
                aoi_id="",
                etype=Etype.DD_RIGHT,
                x=spec.rail_x0,
                y=ry,
                w=spec.rail_x1 - spec.rail_x0,
                h=rh,
                position=-1,
                flavor=Flavor.TYPED,
                source=Source.SHIPPED_AD,
            )
        )
    return [replace(a, aoi_id=f"{spec.trial_id}:{i:03d}") for i, a in enumerate(aois)]


def _gapfill_aois(typed: list[TypedAoi]) -> list[TypedAoi]:
    """Independent midpoint arithmetic over the planted boxes."""
    main = [a for a in typed if a.main_axis]
    tops = {a.aoi_id: a.y for a in main}
    bots = {a.aoi_id: a.y1 for a in main}
    for a, b in zip(main, main[1:]):
        if a.etype is Etype.ORGANIC and b.etype is Etype.ORGANIC:
            m = (a.y1 + b.y) // 2
            bots[a.aoi_id] = m
            tops[b.aoi_id] = m
    out = []
    for a in typed:
        if a.main_axis:
            y0, y1 = tops[a.aoi_id], bots[a.aoi_id]
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
        else:
            out.append(replace(a, flavor=Flavor.TYPED_GAPFILL))
    return out


def _hybrid_aois(typed: list[TypedAoi]) -> list[TypedAoi]:
    out = []
    for a in typed:
        if not a.main_axis:
            continue
        etype = a.etype if a.etype in _AD_MAIN else Etype.ORGANIC
        out.append(replace(a, etype=etype, flavor=Flavor.ORGANIC_HYBRID))
    return out


# ---------------------------------------------------------------------------
# Raster


def _render(spec: LayoutSpec, extents, height: int, rng: np.random.Generator) -> np.ndarray:
    raster = np.full((height, spec.width), _BG, dtype=np.uint8)

    def band(y0: int, y1: int, x0: int, x1: int) -> None:
        raster[y0:y1, x0:x1] = rng.integers(0, 256, size=(y1 - y0, x1 - x0), dtype=np.uint8)

    for card, y0, y1 in extents:
        if card.children:
            cy = y0
            for h in card.children:
                band(cy, cy + h, spec.column_x0, spec.column_x1)
                cy += h + spec.child_gap
        else:
            band(y0, y1, spec.column_x0, spec.column_x1)

    if spec.dd_right is not None:
        ry, rh = spec.dd_right
        band(ry, ry + rh, spec.rail_x0, spec.rail_x1)

    if spec.noise_sigma > 0:
        noise = rng.normal(0.0, spec.noise_sigma, size=raster.shape)
        raster = np.clip(np.rint(raster.astype(np.float64) + noise), 0, 255).astype(np.uint8)
    return raster


# ---------------------------------------------------------------------------
# HTML


def _words(rng: np.random.Generator, n: int, query_tokens: tuple[str, ...]) -> str:
    picks = []
    for _ in range(n):
        if query_tokens and rng.random() < 0.3:
            picks.append(query_tokens[int(rng.integers(0, len(query_tokens)))])
        else:
            picks.append(_VOCAB[int(rng.integers(0, len(_VOCAB)))])
    return " ".join(picks)


def _card_html(
    card: CardPlan,
    idx: int,
    rng: np.random.Generator,
    query_tokens: tuple[str, ...],
) -> str:
    words = lambda n: _words(rng, n, query_tokens)
    if card.etype is Etype.ORGANIC:
        return (
            f'<div class="serp-card g"><h3><a href="#r{idx}">Result {idx}: {words(3)}</a></h3>'
            f'<cite>example{idx}.com/page</cite><span class="snippet">{words(14)}</span></div>'
        )
    if card.etype is Etype.DD_TOP:
        return (
            f'<div class="serp-card ad-block-top"><span>Sponsored</span>'
            f'<a href="#ad{idx}">{words(4)}</a><span class="snippet">{words(10)}</span></div>'
        )
    if card.etype is Etype.NATIVE_AD:
        return (
            f'<div class="serp-card native-ad"><span>Ad</span>'
            f'<a href="#ad{idx}">{words(4)}</a><span class="snippet">{words(9)}</span></div>'
        )
    if card.etype is Etype.PAA:
        qs = "".join(f"<div><a>{words(5)}?</a></div>" for _ in range(3))
        return f'<div class="serp-card"><h2>People also ask</h2>{qs}</div>'
    if card.etype is Etype.IMAGE_PACK:
        return f'<div class="serp-card"><h2>Images</h2><div>{words(6)}</div></div>'
    if card.etype is Etype.TOP_STORIES:
        return f'<div class="serp-card"><h2>Top stories</h2><div>{words(8)}</div></div>'
    if card.etype is Etype.TOP_PLACES:
        return f'<div class="serp-card"><h2>Places</h2><div>{words(6)}</div></div>'
    if card.etype is Etype.KNOWLEDGE_PANEL:
        if card.kp_variant == "attrid":
            return (
                f'<div class="serp-card" data-attrid="kc:/thing:{idx}">'
                f"<h2>{words(2)}</h2><div>{words(12)}</div></div>"
            )
        return f'<div class="serp-card kp-wholepage"><h2>{words(2)}</h2><div>{words(12)}</div></div>'
    if card.etype is Etype.OTHER_WIDGET:
        heading = "Videos" if card.widget_variant == "table" else "Shopping picks"
        return f'<div class="serp-card"><h2>{heading}</h2><div>{words(7)}</div></div>'
    if card.etype is Etype.UNKNOWN_WIDGET:
        return f'<div class="serp-card"><span>{words(9)}</span></div>'
    raise ValueError(f"no HTML template for planted etype {card.etype}")


def _page_html(spec: LayoutSpec, rng: np.random.Generator, query_text: str) -> str:
    query_tokens = tuple(query_text.lower().split())
    parts = [
        "<!doctype html><html><head><meta charset='utf-8'>"
        f"<title>{query_text}</title></head><body><div id='search'>"
    ]
    for idx, card in enumerate(spec.cards):
        parts.append(_card_html(card, idx, rng, query_tokens))
    if spec.dd_right is not None:
        parts.append(
            f'<div class="serp-card ad-right"><span>Ad</span><a>{_words(rng, 4, query_tokens)}</a></div>'
        )
    if spec.related_card:
        rel = "".join(f"<a>{_words(rng, 3, query_tokens)}</a>" for _ in range(4))
        parts.append(f'<div class="serp-card"><h2>Related searches</h2>{rel}</div>')
    if spec.footer_card:
        if spec.footer_organic_shaped:
            parts.append(
                '<div class="serp-card fbar"><h3>More results</h3><cite>google.com</cite></div>'
            )
        else:
            parts.append('<div class="serp-card fbar"><span>Terms Privacy Settings Help</span></div>')
    parts.append("</div></body></html>")
    return "".join(parts)


def _label_etypes(spec: LayoutSpec) -> tuple[str, ...]:
    out = [c.etype.value for c in spec.cards]
    if spec.dd_right is not None:
        out.append(Etype.DD_RIGHT.value)
    if spec.related_card:
        out.append(Etype.RELATED_SEARCHES.value)
    if spec.footer_card:
        out.append(Etype.CHROME.value)
    return tuple(out)


# ---------------------------------------------------------------------------
# Telemetry


def _point_in(rng: np.random.Generator, aoi: TypedAoi) -> tuple[int, int]:
    """Integer point strictly inside the box, clear of the tolerance band."""
    x = int(rng.integers(aoi.x + 5, aoi.x1 - 5))
    y = int(rng.integers(aoi.y + 5, aoi.y1 - 5))
    return x, y


def _scan_point(aois: list[TypedAoi], x: float, y: float) -> str | None:
    for a in aois:
        if a.contains(x, y):
            return a.aoi_id
    return None


def generate_trial(
    spec: LayoutSpec, seed: int
) -> tuple[TrialBundle, GroundTruth, dict[str, tuple[float, ...]]]:
    """Render one synthetic trial: (bundle, ground truth, opaque channels).

    Pure in (spec, seed): repeated calls produce identical bundle bytes.
    """
    _validate_spec(spec)
    rng = np.random.default_rng(seed)

    extents, height = _card_extents(spec)
    typed = _typed_aois(spec, extents)
    gapfilled = _gapfill_aois(typed)
    hybrid = _hybrid_aois(typed)
    flavors: dict[str, list[TypedAoi]] = {
        Flavor.TYPED.value: typed,
        Flavor.TYPED_GAPFILL.value: gapfilled,
        Flavor.ORGANIC_HYBRID.value: hybrid,
    }
    main_typed = [a for a in typed if a.main_axis]
    main_gap = [a for a in gapfilled if a.main_axis]

    query_text = f"query {spec.trial_id} " + " ".join(
        _VOCAB[int(rng.integers(0, len(_VOCAB)))] for _ in range(3)
    )
    raster = _render(spec, extents, height, rng)
    html = _page_html(spec, rng, query_text)

    ad_rects: list[AdRect] = []
    for aoi in main_typed:
        if aoi.etype in _AD_MAIN:
            ad_rects.append(AdRect(aoi.etype, aoi.x, aoi.y, aoi.w, aoi.h))
    if spec.dd_right is not None:
        ry, rh = spec.dd_right
        ad_rects.append(AdRect(Etype.DD_RIGHT, spec.rail_x0, ry, spec.rail_x1 - spec.rail_x0, rh))

    rail_aoi = next((a for a in typed if a.etype is Etype.DD_RIGHT), None)

    # Fixations per plan
    fixations: list[FixationEvent] = []
    t = 500
    if not spec.drop_fixations:
        for step_i, target in enumerate(spec.fixation_targets):
            dwell = (
                spec.fixation_dwells[step_i]
                if step_i < len(spec.fixation_dwells)
                else int(rng.integers(80, 351))
            )
            if isinstance(target, int):
                x, y = _point_in(rng, main_typed[target])
            elif target == "rail" and rail_aoi is not None:
                x, y = _point_in(rng, rail_aoi)
            elif target == "margin" or target == "rail":
                x, y = int(rng.integers(5, 60)), int(rng.integers(5, spec.top_margin - 5))
            elif isinstance(target, str) and target.startswith("gap:"):
                i = int(target.split(":", 1)[1])
                a, b = main_typed[i], main_typed[i + 1]
                x = int(rng.integers(a.x + 5, a.x1 - 5))
                y = int(rng.integers(a.y1, b.y))
            else:
                raise ValueError(f"bad fixation target {target!r}")
            fixations.append(FixationEvent(float(x), float(y), t, t + dwell))
            t += dwell + int(rng.integers(30, 81))

    # Clicks per plan
    clicks: list[ClickEvent] = []
    for ordinal in spec.extra_clicks:
        x, y = _point_in(rng, main_typed[ordinal])
        clicks.append(ClickEvent(t, float(x), float(y), False))
        t += int(rng.integers(120, 400))

    t += spec.registration_silence_ms
    status: tuple[bool, str]
    if spec.final_click is None:
        status = (False, "no_click")
    elif spec.final_click == "pathological":
        clicks.append(ClickEvent(t, -9999.0, -9999.0, True))
        status = (False, "no_click")
    elif spec.final_click == "dd_right":
        if rail_aoi is None:
            raise ValueError("dd_right click planted without a rail ad")
        x, y = _point_in(rng, rail_aoi)
        clicks.append(ClickEvent(t, float(x), float(y), True))
        status = (False, "dd_right")
    elif spec.final_click == "chrome":
        x = (spec.column_x0 + spec.column_x1) // 2
        y = max(2, spec.top_margin // 2 - 10)
        clicks.append(ClickEvent(t, float(x), float(y), True))
        status = (False, "chrome_or_far")
    else:
        x, y = _point_in(rng, main_typed[int(spec.final_click)])
        clicks.append(ClickEvent(t, float(x), float(y), True))
        status = (True, "attributed")

    if spec.drop_fixations:
        # Dropped trials land in the no_click bucket of the trial filter.
        status = (False, "no_click")

    # Cursor polyline: a move near each fixation midpoint plus click events.
    cursor: list[CursorEvent] = []
    for fx in fixations:
        cursor.append(
            CursorEvent(
                (fx.start + fx.end) // 2,
                fx.x + float(rng.integers(-20, 21)),
                fx.y + float(rng.integers(10, 45)),
                "move",
            )
        )
    for c in clicks:
        cursor.append(CursorEvent(c.t, c.x, c.y, "click"))
    cursor.sort(key=lambda c: c.t)

    meta = TrialMeta(
        trial_id=spec.trial_id,
        viewport_width=spec.width,
        viewport_height=min(spec.viewport_height, height),
        screenshot_width=spec.width,
        screenshot_height=height,
        query_text=query_text,
    )

    channels: dict[str, tuple[float, ...]] = {}
    if spec.plant_channels:
        channels["pupil"] = tuple(
            round(3.0 + 0.5 * math.sin(i / 5.0), 4) for i in range(max(len(cursor), 8))
        )

    bundle = TrialBundle(
        meta=meta,
        screenshot=raster,
        html=html,
        ad_rects=tuple(ad_rects),
        fixations=tuple(fixations),
        clicks=tuple(clicks),
        cursor=tuple(cursor),
    )

    gt = GroundTruth(
        trial_id=spec.trial_id,
        column=(spec.column_x0, spec.column_x1),
        label_etypes=_label_etypes(spec),
    )
    gt.aois = flavors
    gt.click_status = status

    for fl, aois in flavors.items():
        main = [a for a in aois if a.main_axis]
        attr: list[tuple[str | None, str]] = []
        for c in clicks:
            aid = _scan_point(main, c.x, c.y)
            attr.append((aid, "strict" if aid else "miss"))
        gt.click_attr[fl] = attr
        gt.fixation_aoi[fl] = [_scan_point(list(aois), fx.x, fx.y) for fx in fixations]

    visits: list[str] = []
    for aid in gt.fixation_aoi[Flavor.TYPED_GAPFILL.value]:
        if aid is None:
            continue
        if not visits or visits[-1] != aid:
            visits.append(aid)
    gt.regressive = {aid: visits.count(aid) >= 2 for aid in set(visits)}
    gt.above_fold = {
        a.aoi_id: a.y < meta.viewport_height and a.y1 > 0 for a in main_gap
    }

    return bundle, gt, channels


# ---------------------------------------------------------------------------
# Randomized corpus plans


def random_layout_spec(
    trial_id: str,
    seed: int,
    noise_sigma: float = 0.0,
    drop_fixations: bool = False,
) -> LayoutSpec:
    """A randomized but valid layout plan mixing organics, ads and widgets.

    Card heights are drawn from the 80-320 px range, inter-card gaps from
    12-60 px. Final-click plans cover all four trial-filter buckets so a
    corpus exercises the full partition.
    """
    rng = np.random.default_rng(seed)

    def h() -> int:
        return int(rng.integers(80, 321))

    def gap() -> int:
        return int(rng.integers(12, 61))

    cards: list[CardPlan] = []
    if rng.random() < 0.45:
        cards.append(CardPlan(Etype.DD_TOP, int(rng.integers(90, 261)), gap()))

    middle: list[CardPlan] = [
        CardPlan(Etype.ORGANIC, h(), gap()) for _ in range(int(rng.integers(3, 7)))
    ]
    for _ in range(int(rng.integers(0, 3))):
        middle.append(CardPlan(Etype.NATIVE_AD, int(rng.integers(90, 201)), gap()))
    if rng.random() < 0.35:
        etype = (Etype.PAA, Etype.IMAGE_PACK, Etype.TOP_STORIES)[int(rng.integers(0, 3))]
        n_children = int(rng.integers(2, 5))
        child_gap = 6
        children = tuple(int(rng.integers(90, 141)) for _ in range(n_children))
        height = sum(children) + (n_children - 1) * child_gap
        middle.append(CardPlan(etype, height, gap(), children=children))
    if rng.random() < 0.25:
        variant = "attrid" if rng.random() < 0.5 else "class"
        middle.append(CardPlan(Etype.KNOWLEDGE_PANEL, h(), gap(), kp_variant=variant))
    if rng.random() < 0.12:
        middle.append(CardPlan(Etype.TOP_PLACES, int(rng.integers(80, 181)), gap()))
    if rng.random() < 0.15:
        variant = "table" if rng.random() < 0.5 else "fallback"
        middle.append(CardPlan(Etype.OTHER_WIDGET, int(rng.integers(80, 161)), gap(), widget_variant=variant))
    if rng.random() < 0.18:
        middle.append(CardPlan(Etype.UNKNOWN_WIDGET, int(rng.integers(80, 141)), gap()))
    rng.shuffle(middle)
    cards.extend(middle)

    dd_right = None
    if rng.random() < 0.5:
        dd_right = (int(rng.integers(80, 200)), int(rng.integers(120, 401)))

    n_main = _count_main_aois(cards, 350, 6)
    n_fix = int(rng.integers(3, 11))
    targets: list = []
    for _ in range(n_fix):
        roll = rng.random()
        if roll < 0.78 or n_main == 0:
            targets.append(int(rng.integers(0, n_main)) if n_main else "margin")
        elif roll < 0.86:
            pair = _adjacent_organic_pair(cards, 350, 6)
            targets.append(f"gap:{pair}" if pair is not None else int(rng.integers(0, n_main)))
        elif roll < 0.93 and dd_right is not None:
            targets.append("rail")
        else:
            targets.append("margin")

    roll = rng.random()
    final_click: int | str | None
    if roll < 0.70:
        final_click = int(rng.integers(0, n_main))
        if rng.random() < 0.85:
            # Gaze normally leads the click onto the clicked card.
            targets.append(final_click)
    elif roll < 0.78 and dd_right is not None:
        final_click = "dd_right"
    elif roll < 0.88:
        final_click = "chrome"
    elif roll < 0.94:
        final_click = None
    else:
        final_click = "pathological"

    extra = tuple(
        int(rng.integers(0, n_main)) for _ in range(int(rng.integers(0, 3)))
    )
    silence = 2500 if rng.random() < 0.08 else 0

    return LayoutSpec(
        trial_id=trial_id,
        cards=tuple(cards),
        dd_right=dd_right,
        footer_card=bool(rng.random() < 0.8),
        footer_organic_shaped=bool(rng.random() < 0.2),
        related_card=bool(rng.random() < 0.4),
        fixation_targets=tuple(targets),
        final_click=final_click,
        extra_clicks=extra,
        registration_silence_ms=silence,
        drop_fixations=drop_fixations,
        noise_sigma=noise_sigma,
        plant_channels=bool(rng.random() < 0.2),
    )


def _count_main_aois(cards: list[CardPlan], trigger: int, child_gap: int) -> int:
    n = 0
    for c in cards:
        if c.etype in _COMPOSITE and c.children and c.height > trigger:
            n += len(c.children)
        else:
            n += 1
    return n


def _adjacent_organic_pair(cards: list[CardPlan], trigger: int, child_gap: int) -> int | None:
    """Main-AOI ordinal of the upper member of the first adjacent organic pair."""
    ordinals: list[Etype] = []
    for c in cards:
        if c.etype in _COMPOSITE and c.children and c.height > trigger:
            ordinals.extend([c.etype] * len(c.children))
        else:
            ordinals.append(c.etype)
    for i, (a, b) in enumerate(zip(ordinals, ordinals[1:])):
        if a is Etype.ORGANIC and b is Etype.ORGANIC:
            return i
    return None


def generate_corpus_specs(
    n_trials: int,
    seed: int,
    noise_sigma: float = 0.0,
    drop_every: int = 0,
) -> list[tuple[LayoutSpec, int]]:
    """(spec, render-seed) plans for a corpus; trial i uses a seed derived
    from the master seed so any subset regenerates identically."""
    out = []
    for i in range(n_trials):
        trial_seed = seed * 100_003 + i
        drop = drop_every > 0 and (i + 1) % drop_every == 0
        spec = random_layout_spec(
            trial_id=f"synth-{i:04d}",
            seed=trial_seed,
            noise_sigma=noise_sigma,
            drop_fixations=drop,
        )
        out.append((spec, trial_seed + 1))
    return out
