"""serpaoi: screenshot-anchored typed AOI extraction and behavioral
enrichment for SERP trial corpora.

The pipeline derives every bounding box from the screenshot raster and
uses the saved HTML only for structural type labels, binding the two by
document order. Downstream it attributes clicks and fixations per typed
AOI under three output flavors (typed, typed_gapfill, organic_hybrid)
and aggregates a per-etype behavioral inventory with audits.
"""

__version__ = "0.1.0"

from .attribution import (
    AttributionParams,
    AttributionResult,
    TrialClickStatus,
    above_fold,
    assign_fixations,
    attribute_point,
    is_main_axis_click,
    regression_flags,
)
from .binder import assign_positions, bind_labels, expand_composites, finalize_aois, propagate_ad_identity
from .gapfill import gapfill
from .inventory import (
    ad_consistency_audit,
    aggregate_registration,
    etype_inventory,
    gaze_cursor_registration,
    iou,
    position_click_rates,
    snippet_features,
    spearman,
)
from .labeler import DocCard, EtypeLabel, classify_card, label_sequence, load_rules, parse_doc_cards
from .model import (
    AdRect,
    ClickEvent,
    CursorEvent,
    Etype,
    FixationEvent,
    Flavor,
    IngestError,
    Source,
    TrialBundle,
    TrialMeta,
    TypedAoi,
    validate_trial_bundle,
)
from .pipeline import PipelineConfig, pool_to_hybrid, process_trial, run_corpus
from .segmentation import (
    SegmentationParams,
    apply_ad_precedence,
    card_spans,
    main_column_bounds,
    row_activity_profile,
    segment_trial,
    subdivide_composite,
)
from .synth import CardPlan, GroundTruth, LayoutSpec, generate_trial, random_layout_spec
