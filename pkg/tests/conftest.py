"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import random

import numpy as np
import pytest

from serpaoi.model import Etype, Flavor, Source, TypedAoi

MAIN_ETYPES = [
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
]


def make_aoi(
    i: int,
    etype: Etype,
    y: int,
    h: int,
    x: int = 160,
    w: int = 540,
    position: int | None = None,
    flavor: Flavor = Flavor.TYPED,
    source: Source = Source.CV_SPAN,
) -> TypedAoi:
    return TypedAoi(
        aoi_id=f"t:{i:03d}",
        etype=etype,
        x=x,
        y=y,
        w=w,
        h=h,
        position=i if position is None else position,
        flavor=flavor,
        source=source,
    )


def random_main_axis_layout(rng: random.Random, organic_bias: float = 0.5) -> list[TypedAoi]:
    """Random non-overlapping main-axis AOI stack for property tests."""
    n = rng.randint(1, 10)
    y = rng.randint(0, 120)
    out = []
    for i in range(n):
        h = rng.randint(24, 320)
        etype = (
            Etype.ORGANIC
            if rng.random() < organic_bias
            else rng.choice(MAIN_ETYPES)
        )
        out.append(make_aoi(i, etype, y, h))
        y += h + rng.randint(1, 80)
    return out


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240811)


@pytest.fixture
def np_rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
