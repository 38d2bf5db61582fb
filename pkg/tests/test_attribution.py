"""Click/fixation attribution, trial filter, regression and fold flags."""

from __future__ import annotations

import random

import pytest

from serpaoi.attribution import (
    AttributionParams,
    above_fold,
    assign_fixations,
    attribute_point,
    is_main_axis_click,
    regression_flags,
)
from serpaoi.model import AdRect, ClickEvent, Etype, FixationEvent, TrialMeta

from tests.conftest import make_aoi, random_main_axis_layout
from tests.oracles import assign_fixations_oracle, attribute_oracle, regression_oracle

META = TrialMeta("t", 1024, 900, 1024, 2000, "q")


def _stack():
    return [
        make_aoi(0, Etype.DD_TOP, 100, 120),  # y [100, 220)
        make_aoi(1, Etype.ORGANIC, 260, 120),  # y [260, 380)
        make_aoi(2, Etype.ORGANIC, 420, 120),  # y [420, 540)
    ]


# -- attribute_point ---------------------------------------------------------


def test_strict_containment_hit():
    res = attribute_point(_stack(), 400, 210)
    assert (res.aoi_id, res.mode) == ("t:000", "strict")


def test_tolerance_hit_left_of_x0():
    # x = 156 with x0 = 160: 4 px outside, within the +/-5 tolerance.
    res = attribute_point(_stack(), 156, 210)
    assert (res.aoi_id, res.mode) == ("t:000", "tolerance")


def test_tolerance_boundaries():
    assert attribute_point(_stack(), 155, 210).mode == "tolerance"  # exactly 5 px
    assert attribute_point(_stack(), 154.9, 210).mode == "miss"
    assert attribute_point(_stack(), 400, 229.9).mode == "tolerance"  # 9.9 px below y1
    assert attribute_point(_stack(), 400, 230).mode == "miss"


def test_far_point_misses():
    res = attribute_point(_stack(), 900, 210)
    assert res.aoi_id is None and res.mode == "miss"


def test_x_refusal_despite_y_containment():
    # Shares Y with AOI 0 but sits far right: never attributed.
    res = attribute_point(_stack(), 760, 150)
    assert res.mode == "miss"


def test_tolerance_tie_break_nearest_then_lowest_position():
    # Point in the 40 px gap between AOIs 1 and 2, nearer AOI 2.
    res = attribute_point(_stack(), 400, 412)
    assert res.aoi_id == "t:002"
    # Equidistant (5 px from both): lowest position wins.
    aois = [make_aoi(0, Etype.ORGANIC, 100, 100), make_aoi(1, Etype.ORGANIC, 210, 100)]
    res = attribute_point(aois, 400, 205)
    assert res.aoi_id == "t:000"


def test_overlapping_aois_rejected():
    aois = [make_aoi(0, Etype.ORGANIC, 0, 100), make_aoi(1, Etype.ORGANIC, 50, 100)]
    with pytest.raises(ValueError):
        attribute_point(aois, 10, 10)


def test_attribution_matches_oracle_fuzz(rng):
    mismatches = 0
    for _ in range(2000):
        layout = random_main_axis_layout(rng)
        x = rng.uniform(-50, 1100)
        y = rng.uniform(-50, max(a.y1 for a in layout) + 100)
        got = attribute_point(layout, x, y)
        want_id, want_mode = attribute_oracle(layout, x, y)
        if (got.aoi_id, got.mode) != (want_id, want_mode):
            mismatches += 1
    assert mismatches == 0


def test_strict_uniqueness_fuzz(rng):
    for _ in range(200):
        layout = random_main_axis_layout(rng)
        x = rng.uniform(100, 800)
        y = rng.uniform(0, max(a.y1 for a in layout))
        inside = [a for a in layout if a.contains(x, y)]
        assert len(inside) <= 1


# -- is_main_axis_click ------------------------------------------------------

RAIL = AdRect(Etype.DD_RIGHT, 780, 90, 200, 300)


def test_filter_no_clicks():
    status = is_main_axis_click(_stack(), [], [RAIL], META)
    assert (status.main_axis, status.reason) == (False, "no_click")


def test_filter_no_final_click():
    clicks = [ClickEvent(10, 400, 300, False)]
    status = is_main_axis_click(_stack(), clicks, [RAIL], META)
    assert status.reason == "no_click"


def test_filter_pathological_coordinates():
    for bad in [(-9999.0, 300.0), (float("nan"), 300.0), (400.0, 9999.0)]:
        clicks = [ClickEvent(10, bad[0], bad[1], True)]
        status = is_main_axis_click(_stack(), clicks, [RAIL], META)
        assert status.reason == "no_click", bad


def test_filter_attributed():
    clicks = [ClickEvent(10, 400, 300, True)]
    status = is_main_axis_click(_stack(), clicks, [RAIL], META)
    assert (status.main_axis, status.reason) == (True, "attributed")


def test_filter_dd_right():
    clicks = [ClickEvent(10, 850, 200, True)]
    status = is_main_axis_click(_stack(), clicks, [RAIL], META)
    assert (status.main_axis, status.reason) == (False, "dd_right")


def test_filter_chrome_or_far():
    clicks = [ClickEvent(10, 400, 1900, True)]  # far below the last AOI
    status = is_main_axis_click(_stack(), clicks, [RAIL], META)
    assert (status.main_axis, status.reason) == (False, "chrome_or_far")


def test_filter_tolerance_click_counts_as_attributed():
    clicks = [ClickEvent(10, 156, 300, True)]
    status = is_main_axis_click(_stack(), clicks, [RAIL], META)
    assert status.reason == "attributed"


# -- assign_fixations --------------------------------------------------------


def test_fixation_assigned_at_center():
    aois = _stack()
    fx = [FixationEvent(400, 160, 0, 100)]
    per_aoi, per_fix = assign_fixations(aois, fx)
    assert per_fix == ["t:000"]
    assert per_aoi["t:000"] == [0]


def test_fixation_strict_no_tolerance():
    fx = [FixationEvent(156, 160, 0, 100)]  # would be a tolerance click hit
    _, per_fix = assign_fixations(_stack(), fx)
    assert per_fix == [None]


def test_fixation_rail_unassigned_without_rail_aoi():
    fx = [FixationEvent(850, 200, 0, 100)]
    _, per_fix = assign_fixations(_stack(), fx)
    assert per_fix == [None]


def test_fixation_lists_ordered_by_start_time():
    aois = _stack()
    fx = [
        FixationEvent(400, 300, 500, 600),
        FixationEvent(401, 301, 100, 200),
        FixationEvent(402, 302, 300, 400),
    ]
    per_aoi, _ = assign_fixations(aois, fx)
    assert per_aoi["t:001"] == [1, 2, 0]


def test_fixation_assignment_matches_oracle_fuzz(rng):
    for _ in range(300):
        layout = random_main_axis_layout(rng)
        pts = [
            (rng.uniform(0, 1000), rng.uniform(0, max(a.y1 for a in layout) + 50))
            for _ in range(rng.randint(0, 20))
        ]
        fx = [FixationEvent(x, y, 10 * i, 10 * i + 5) for i, (x, y) in enumerate(pts)]
        _, per_fix = assign_fixations(layout, fx)
        assert per_fix == assign_fixations_oracle(layout, pts)


# -- regression_flags --------------------------------------------------------


def test_regression_aba():
    flags = regression_flags(["a", "b", "a"])
    assert flags == {"a": True, "b": False}


def test_regression_consecutive_collapse():
    flags = regression_flags(["a", "a", "a"])
    assert flags == {"a": False}


def test_regression_none_gap_does_not_separate():
    flags = regression_flags(["a", None, "a"])
    assert flags == {"a": False}


def test_regression_matches_oracle_fuzz(rng):
    ids = ["a", "b", "c", "d", None]
    for _ in range(2000):
        seq = [rng.choice(ids) for _ in range(rng.randint(0, 15))]
        assert regression_flags(seq) == regression_oracle(seq)


# -- above_fold --------------------------------------------------------------


def test_above_fold_rules():
    aois = [
        make_aoi(0, Etype.ORGANIC, 100, 100),  # fully above
        make_aoi(1, Etype.ORGANIC, 1200, 100),  # fully below
        make_aoi(2, Etype.ORGANIC, 850, 100),  # straddles 900
    ]
    meta = TrialMeta("t", 1024, 900, 1024, 2000, "")
    folds = above_fold(aois, meta)
    assert folds == {"t:000": True, "t:001": False, "t:002": True}
