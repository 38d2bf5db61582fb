"""Corpus runner and artifact emission.

Each valid trial flows segmentation -> labeling -> binding -> gap-fill ->
attribution; dropped trials are listed with reasons and never abort the
run. All artifacts derive from one in-memory record per trial and are
emitted after a deterministic sort, so a fixed config and fixed inputs
yield a bit-identical artifact set whatever the worker count.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__ as _pkg_version
from .attribution import (
    AttributionParams,
    TrialClickStatus,
    above_fold,
    assign_fixations,
    attribute_point,
    is_main_axis_click,
    regression_flags,
)
from .binder import bind_labels, expand_composites, finalize_aois, propagate_ad_identity
from .gapfill import gapfill
from .ingest import iter_trial_dirs, load_trial_channels, load_trial_dir
from .inventory import (
    ad_consistency_audit,
    aggregate_registration,
    etype_inventory,
    gaze_cursor_registration,
    position_click_rates,
    snippet_features,
)
from .labeler import RulesTable, default_rules, label_sequence, load_rules, parse_doc_cards
from .model import MAIN_AXIS_ETYPES, Etype, Flavor, TrialBundle, validate_trial_bundle
from .records import AoiStats, TrialRecord
from .segmentation import SegmentationParams, segment_trial

__all__ = [
    "CSV_HEADER",
    "PipelineConfig",
    "emit_corpus_csv",
    "emit_trial_json",
    "pool_to_hybrid",
    "process_trial",
    "run_corpus",
]

CSV_HEADER = [
    "trial_id",
    "aoi_id",
    "etype",
    "position",
    "x",
    "y",
    "w",
    "h",
    "flavor",
    "source",
    "fixated",
    "n_fixations",
    "regressive",
    "above_fold",
    "n_clicks_attributed",
]

_ALL_FLAVORS = (Flavor.TYPED, Flavor.TYPED_GAPFILL, Flavor.ORGANIC_HYBRID)


@dataclass(frozen=True)
class PipelineConfig:
    input_dir: str = ""
    out_dir: str = ""
    flavors: tuple[Flavor, ...] = _ALL_FLAVORS
    jobs: int = 1
    rules_path: str | None = None
    csv_prefix: str = "aois_by_trial_id"
    segmentation: SegmentationParams = SegmentationParams()
    attribution: AttributionParams = AttributionParams()
    seed: int = 0  # only the synth subcommand consumes this


def pool_to_hybrid(aois: list) -> list:
    """3-etype pooled flavor from the typed (tight) flavor.

    Main-axis etypes outside {dd_top, native_ad} become organic;
    positions keep the all-main-axis numbering; off-axis AOIs are dropped
    from this flavor entirely.
    """
    out = []
    for a in aois:
        if not a.main_axis:
            continue
        etype = a.etype if a.etype in (Etype.DD_TOP, Etype.NATIVE_AD) else Etype.ORGANIC
        out.append(replace(a, etype=etype, flavor=Flavor.ORGANIC_HYBRID))
    return out


def process_trial(
    trial_id: str,
    bundle: TrialBundle,
    rules: RulesTable | None = None,
    seg_params: SegmentationParams = SegmentationParams(),
    attr_params: AttributionParams = AttributionParams(),
    channels: dict[str, tuple[float, ...]] | None = None,
) -> TrialRecord:
    """Run the full per-trial pipeline; never raises on bad trial data."""
    rules = rules or default_rules()
    rec = TrialRecord(
        trial_id=trial_id,
        meta=bundle.meta,
        ad_rects=bundle.ad_rects,
        fixations=bundle.fixations,
        clicks=bundle.clicks,
        cursor=bundle.cursor,
        channels=channels or {},
    )

    report = validate_trial_bundle(bundle)
    if report.dropped:
        rec.dropped = True
        rec.drop_codes = report.codes
        rec.click_status = TrialClickStatus(False, "no_click")
        return rec
    warnings = [f"{v.code}: {v.message}" for v in report.violations]

    try:
        seg = segment_trial(bundle.screenshot, bundle.ad_rects, seg_params)
        cards = parse_doc_cards(bundle.html, rules)
        labels = label_sequence(cards, rules)
        rec.label_tiers = tuple((lb.etype.value, lb.tier) for lb in labels)
        rec.column = (seg.column.x0, seg.column.x1)

        query = bundle.meta.query_text if bundle.meta else ""
        features = []
        for card, label in zip(cards, labels):
            if label.etype not in MAIN_AXIS_ETYPES:
                continue
            ttr, overlap = snippet_features(card.snippet_text, query)
            features.append((card.doc_index, label.etype.value, ttr, overlap))
        rec.content_features = tuple(features)

        aois, bind_warnings = bind_labels(seg.spans, labels, seg.column)
        warnings.extend(bind_warnings)
        aois = expand_composites(aois, seg.profile, seg_params)
        aois = propagate_ad_identity(aois, bundle.ad_rects)
        typed = finalize_aois(aois, trial_id)

        flavor_sets: dict[Flavor, list] = {
            Flavor.TYPED: typed,
            Flavor.TYPED_GAPFILL: gapfill(typed),
            Flavor.ORGANIC_HYBRID: pool_to_hybrid(typed),
        }

        time_order = sorted(
            range(len(bundle.fixations)), key=lambda i: (bundle.fixations[i].start, i)
        )
        for flavor, aoi_list in flavor_sets.items():
            main = [a for a in aoi_list if a.main_axis]
            click_attr = tuple(
                attribute_point(main, c.x, c.y, attr_params) for c in bundle.clicks
            )
            per_aoi, per_fix = assign_fixations(aoi_list, bundle.fixations)
            flags = regression_flags([per_fix[i] for i in time_order])
            folds = above_fold(aoi_list, bundle.meta)
            clicks_per_aoi: dict[str, int] = {}
            for res in click_attr:
                if res.aoi_id is not None:
                    clicks_per_aoi[res.aoi_id] = clicks_per_aoi.get(res.aoi_id, 0) + 1
            rec.aois[flavor] = tuple(aoi_list)
            rec.click_attr[flavor] = click_attr
            rec.fixation_aoi[flavor] = tuple(per_fix)
            rec.aoi_stats[flavor] = {
                a.aoi_id: AoiStats(
                    n_fixations=len(per_aoi[a.aoi_id]),
                    regressive=flags.get(a.aoi_id, False),
                    above_fold=folds[a.aoi_id],
                    n_clicks_attributed=clicks_per_aoi.get(a.aoi_id, 0),
                )
                for a in aoi_list
            }

        gap_main = [a for a in flavor_sets[Flavor.TYPED_GAPFILL] if a.main_axis]
        rec.click_status = is_main_axis_click(
            gap_main, bundle.clicks, bundle.ad_rects, bundle.meta, attr_params
        )
        rec.warnings = tuple(warnings)
    except Exception as exc:  # failure isolation: record, never abort the corpus
        rec.error = f"{type(exc).__name__}: {exc}"
        rec.click_status = TrialClickStatus(False, "no_click")
    return rec


# ---------------------------------------------------------------------------
# Emission


def _flavor_rows(rec: TrialRecord, flavor: Flavor) -> list[dict]:
    if not rec.processed or flavor not in rec.aois:
        return []
    stats = rec.aoi_stats[flavor]
    rows = []
    for aoi in rec.aois[flavor]:
        st = stats[aoi.aoi_id]
        rows.append(
            {
                "trial_id": rec.trial_id,
                "aoi_id": aoi.aoi_id,
                "etype": aoi.etype.value,
                "position": aoi.position,
                "x": aoi.x,
                "y": aoi.y,
                "w": aoi.w,
                "h": aoi.h,
                "flavor": aoi.flavor.value,
                "source": aoi.source.value,
                "fixated": "true" if st.fixated else "false",
                "n_fixations": st.n_fixations,
                "regressive": "true" if st.regressive else "false",
                "above_fold": "true" if st.above_fold else "false",
                "n_clicks_attributed": st.n_clicks_attributed,
            }
        )
    return rows


def emit_corpus_csv(records: list[TrialRecord], flavor: Flavor, path: str | Path) -> Path:
    """One corpus CSV per flavor; UTF-8, LF endings, minimal quoting,
    rows sorted by (trial_id, position, y)."""
    rows: list[dict] = []
    for rec in records:
        rows.extend(_flavor_rows(rec, flavor))
    rows.sort(key=lambda r: (r["trial_id"], r["position"], r["y"]))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


def _aoi_json(aoi, st: AoiStats) -> dict:
    return {
        "aoi_id": aoi.aoi_id,
        "etype": aoi.etype.value,
        "position": aoi.position,
        "x": aoi.x,
        "y": aoi.y,
        "w": aoi.w,
        "h": aoi.h,
        "flavor": aoi.flavor.value,
        "source": aoi.source.value,
        "fixated": st.fixated,
        "n_fixations": st.n_fixations,
        "regressive": st.regressive,
        "above_fold": st.above_fold,
        "n_clicks_attributed": st.n_clicks_attributed,
    }


def trial_json_doc(
    rec: TrialRecord,
    screenshot_path: str = "",
    content_features: list[dict] | None = None,
    provenance: dict | None = None,
) -> dict:
    """Schema serpaoi.trial_result@1; one document per trial."""
    doc: dict = {
        "schema": "serpaoi.trial_result@1",
        "trial_id": rec.trial_id,
        "meta": None,
        "dropped": rec.dropped,
        "drop_codes": list(rec.drop_codes),
        "error": rec.error,
        "column": list(rec.column) if rec.column else None,
        "click_status": {
            "main_axis": rec.click_status.main_axis,
            "reason": rec.click_status.reason,
        },
        "aois": {},
        "attribution": {},
        "fixation_assignment": {},
        "diagnostics": {
            "warnings": list(rec.warnings),
            "label_tiers": [list(t) for t in rec.label_tiers],
        },
        "replay": {
            "screenshot": screenshot_path,
            "fixations": [
                {"x": f.x, "y": f.y, "start": f.start, "end": f.end}
                for f in sorted(rec.fixations, key=lambda f: (f.start, f.end))
            ],
            "cursor": [
                {"t": c.t, "x": c.x, "y": c.y, "kind": c.kind} for c in rec.cursor
            ],
            "clicks": [
                {"t": c.t, "x": c.x, "y": c.y, "is_final": c.is_final}
                for c in rec.clicks
            ],
            "ad_rects": [
                {"etype": r.etype.value, "x": r.x, "y": r.y, "w": r.w, "h": r.h}
                for r in rec.ad_rects
            ],
            "channels": {k: list(v) for k, v in sorted(rec.channels.items())},
        },
    }
    if rec.meta is not None:
        doc["meta"] = {
            "trial_id": rec.meta.trial_id,
            "viewport_width": rec.meta.viewport_width,
            "viewport_height": rec.meta.viewport_height,
            "screenshot_width": rec.meta.screenshot_width,
            "screenshot_height": rec.meta.screenshot_height,
            "query_text": rec.meta.query_text,
            "entry_timestamp": rec.meta.entry_timestamp,
        }
    for flavor, aoi_list in rec.aois.items():
        stats = rec.aoi_stats[flavor]
        doc["aois"][flavor.value] = [_aoi_json(a, stats[a.aoi_id]) for a in aoi_list]
        doc["attribution"][flavor.value] = [
            {"click_index": i, "aoi_id": res.aoi_id, "mode": res.mode}
            for i, res in enumerate(rec.click_attr[flavor])
        ]
        doc["fixation_assignment"][flavor.value] = list(rec.fixation_aoi[flavor])
    if content_features is not None:
        doc["content_features"] = content_features
    if provenance is not None:
        doc["provenance"] = provenance
    return doc


def emit_trial_json(doc: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", "utf-8")
    return path


# ---------------------------------------------------------------------------
# Corpus run


@dataclass
class CorpusResult:
    records: list[TrialRecord] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)
    n_processed: int = 0
    n_dropped: int = 0
    n_failed: int = 0


def _work_one(args) -> TrialRecord:
    trial_dir, rules_path, seg_params, attr_params = args
    rules = load_rules(rules_path) if rules_path else default_rules()
    try:
        trial_id, bundle = load_trial_dir(trial_dir)
        channels = load_trial_channels(trial_dir)
    except Exception as exc:
        rec = TrialRecord(trial_id=Path(trial_dir).name)
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    return process_trial(trial_id, bundle, rules, seg_params, attr_params, channels)


def _provenance(config: PipelineConfig, rules: RulesTable) -> dict:
    return {
        "package": "serpaoi",
        "version": _pkg_version,
        "rules_version": rules.version,
        "config": {
            "flavors": [f.value for f in config.flavors],
            "csv_prefix": config.csv_prefix,
            "segmentation": {
                "activity_threshold": config.segmentation.activity_threshold,
                "min_gap_rows": config.segmentation.min_gap_rows,
                "min_card_height": config.segmentation.min_card_height,
                "composite_trigger_height": config.segmentation.composite_trigger_height,
            },
            "attribution": {
                "tolerance_x": config.attribution.tolerance_x,
                "tolerance_y": config.attribution.tolerance_y,
                "pathological_margin_px": config.attribution.pathological_margin_px,
            },
        },
    }


def run_corpus(config: PipelineConfig) -> CorpusResult:
    """Process every trial under input_dir and emit the artifact set.

    Per-trial failures are recorded and never abort the run. Outputs are
    deterministic regardless of the worker count: records are sorted by
    trial_id before any emission.
    """
    trial_dirs = iter_trial_dirs(config.input_dir)
    rules = load_rules(config.rules_path) if config.rules_path else default_rules()
    work = [
        (str(d), config.rules_path, config.segmentation, config.attribution)
        for d in trial_dirs
    ]

    if config.jobs > 1 and len(work) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_work_one, work))
    else:
        records = [_work_one(w) for w in work]
    records.sort(key=lambda r: r.trial_id)

    result = CorpusResult(records=records)
    result.n_processed = sum(1 for r in records if r.processed)
    result.n_dropped = sum(1 for r in records if r.dropped)
    result.n_failed = sum(1 for r in records if r.error is not None)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prov = _provenance(config, rules)

    for flavor in config.flavors:
        path = out_dir / f"{config.csv_prefix}_{flavor.value}.csv"
        result.artifacts.append(emit_corpus_csv(records, flavor, path))

    trials_dir = out_dir / "trials"
    for rec in records:
        doc = trial_json_doc(
            rec,
            screenshot_path=f"../screenshots/{rec.trial_id}.png",
            content_features=_content_features(rec),
            provenance=prov,
        )
        result.artifacts.append(emit_trial_json(doc, trials_dir / f"{rec.trial_id}.json"))

    reports = out_dir / "reports"
    reports.mkdir(exist_ok=True)

    inv_rows = etype_inventory(records, Flavor.TYPED_GAPFILL)
    inv_doc = [
        {
            "etype": r.etype.value,
            "n_aois": r.n_aois,
            "fixated_pct": r.fixated_pct,
            "n_clicks": r.n_clicks,
            "click_pct": r.click_pct,
            "regressive_pct": r.regressive_pct,
            "above_fold_pct": r.above_fold_pct,
        }
        for r in inv_rows
    ]
    _write_json(reports / "inventory.json", {"flavor": "typed_gapfill", "rows": inv_doc, "provenance": prov})
    result.artifacts.append(reports / "inventory.json")
    inv_csv = reports / "inventory.csv"
    with inv_csv.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["etype", "n_aois", "fixated_pct", "n_clicks", "click_pct", "regressive_pct", "above_fold_pct"],
            lineterminator="\n",
        )
        writer.writeheader()
        writer.writerows(inv_doc)
    result.artifacts.append(inv_csv)

    rank_doc = {}
    for convention in ("organic_only", "all_main_axis"):
        pr = position_click_rates(records, convention, Flavor.TYPED_GAPFILL)
        rank_doc[convention] = {
            "positions": list(pr.positions),
            "n_aois": list(pr.n_aois),
            "n_clicked": list(pr.n_clicked),
            "click_rate": list(pr.click_rate),
            "pooled_n_aois": pr.pooled_n_aois,
            "rho": pr.rho,
        }
    _write_json(reports / "rank_analysis.json", {"flavor": "typed_gapfill", "conventions": rank_doc, "provenance": prov})
    result.artifacts.append(reports / "rank_analysis.json")

    audit = ad_consistency_audit(records)
    _write_json(
        reports / "ad_consistency.json",
        {
            "n_classifications": audit.n_classifications,
            "n_disagreements": audit.n_disagreements,
            "mean_iou": audit.mean_iou,
            "n_organic_overlapping_ads": audit.n_organic_overlapping_ads,
            "disagreement_trials": list(audit.disagreement_trials),
            "provenance": prov,
        },
    )
    result.artifacts.append(reports / "ad_consistency.json")

    probes = [gaze_cursor_registration(r) for r in records if r.processed]
    stats = aggregate_registration(probes)
    _write_json(
        reports / "registration_probe.json",
        {
            "window_ms": 1500,
            "threshold_px": 250.0,
            "aggregate": {
                "n_included": stats.n_included,
                "n_excluded": stats.n_excluded,
                "n_skipped": stats.n_skipped,
                "median": stats.median,
                "p25": stats.p25,
                "p75": stats.p75,
                "p95": stats.p95,
                "flagged_share": stats.flagged_share,
                "concurrent_median": stats.concurrent_median,
            },
            "trials": [
                {
                    "trial_id": p.trial_id,
                    "status": p.status,
                    "min_lead_distance": p.min_lead_distance,
                    "n_window_fixations": p.n_window_fixations,
                    "concurrent_distance": p.concurrent_distance,
                    "flagged": p.flagged,
                }
                for p in probes
            ],
            "provenance": prov,
        },
    )
    result.artifacts.append(reports / "registration_probe.json")

    tier_counts: dict[int, int] = {}
    for rec in records:
        for _, tier in rec.label_tiers:
            tier_counts[tier] = tier_counts.get(tier, 0) + 1
    _write_json(
        reports / "run_summary.json",
        {
            "n_trials": len(records),
            "n_processed": result.n_processed,
            "n_dropped": result.n_dropped,
            "n_failed": result.n_failed,
            "dropped": [
                {"trial_id": r.trial_id, "codes": list(r.drop_codes)}
                for r in records
                if r.dropped
            ],
            "failed": [
                {"trial_id": r.trial_id, "error": r.error}
                for r in records
                if r.error is not None
            ],
            "label_tier_distribution": {str(k): v for k, v in sorted(tier_counts.items())},
            "trial_filter": _filter_counts(records),
            "provenance": prov,
        },
    )
    result.artifacts.append(reports / "run_summary.json")
    return result


def _filter_counts(records: list[TrialRecord]) -> dict:
    counts = {"attributed": 0, "dd_right": 0, "chrome_or_far": 0, "no_click": 0}
    for rec in records:
        counts[rec.click_status.reason] += 1
    return counts


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", "utf-8")


def _content_features(rec: TrialRecord) -> list[dict] | None:
    """Lexical features per main-axis HTML card in document order.

    Keyed to the label stream, not AOI geometry, so composite subdivision
    does not change the card indexing. Lexical diversity correlates with
    rank position; consumers must control for rank before claiming
    per-position content effects.
    """
    if not rec.processed or not rec.content_features:
        return None
    return [
        {
            "card_index": idx,
            "etype": etype,
            "type_token_ratio": ttr,
            "query_overlap": overlap,
        }
        for idx, etype, ttr, overlap in rec.content_features
    ]