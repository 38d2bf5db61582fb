"""Filesystem adapters for per-trial input bundles.

Canonical per-trial directory layout::

    <trial_dir>/
      meta.json        trial_id, viewport/screenshot dims, query_text, entry_timestamp
      page.html        saved SERP HTML
      screenshot.png   full-page raster (grayscale or RGB)
      ads.csv          etype,x,y,w,h        (shipped ad rectangles)
      fixations.csv    x,y,start,end
      clicks.csv       t,x,y,is_final
      cursor.csv       t,x,y,kind
      channels.json    optional opaque numeric tracks (passed through to replay)
      ground_truth.json  optional, written by the synth generator

Missing meta or missing event files yield a loadable-but-droppable
bundle; an unreadable raster or HTML file raises IngestError.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .model import (
    AdRect,
    ClickEvent,
    CursorEvent,
    Etype,
    FixationEvent,
    IngestError,
    TrialBundle,
    TrialMeta,
)

__all__ = [
    "iter_trial_dirs",
    "load_adserp_trial",
    "load_trial_channels",
    "load_trial_dir",
    "write_trial_dir",
]

_BOOL_TRUE = {"1", "true", "yes"}


def _read_csv(path: Path) -> list[dict[str, str]]:
    if not path.exists():
        return []
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _parse_bool(raw: str) -> bool:
    return raw.strip().lower() in _BOOL_TRUE


def _load_raster(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode not in ("L", "RGB"):
                img = img.convert("RGB")
            return np.asarray(img, dtype=np.uint8)
    except Exception as exc:
        raise IngestError(f"unreadable raster {path}: {exc}") from exc


def _load_meta(path: Path) -> TrialMeta | None:
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError):
        return None
    try:
        return TrialMeta(
            trial_id=str(doc["trial_id"]),
            viewport_width=int(doc["viewport_width"]),
            viewport_height=int(doc["viewport_height"]),
            screenshot_width=int(doc["screenshot_width"]),
            screenshot_height=int(doc["screenshot_height"]),
            query_text=str(doc.get("query_text", "")),
            entry_timestamp=doc.get("entry_timestamp"),
        )
    except (KeyError, TypeError, ValueError):
        return None


_CANONICAL_FILES = {
    "meta": "meta.json",
    "html": "page.html",
    "screenshot": "screenshot.png",
    "ads": "ads.csv",
    "fixations": "fixations.csv",
    "clicks": "clicks.csv",
    "cursor": "cursor.csv",
}


def load_trial_dir(
    trial_dir: str | Path,
    files: dict[str, str] = _CANONICAL_FILES,
) -> tuple[str, TrialBundle]:
    """Load one trial directory.

    Returns (trial_id, bundle); the directory name is the fallback
    trial_id when meta is missing or unusable. ``files`` maps the seven
    logical inputs to filenames, so alternative volume layouts only need
    a different name table.
    """
    trial_dir = Path(trial_dir)
    raster_path = trial_dir / files["screenshot"]
    if not raster_path.exists():
        raise IngestError(f"missing screenshot: {raster_path}")
    screenshot = _load_raster(raster_path)

    html_path = trial_dir / files["html"]
    if not html_path.exists():
        raise IngestError(f"missing html: {html_path}")
    try:
        html = html_path.read_bytes().decode("utf-8", errors="replace")
    except OSError as exc:
        raise IngestError(f"unreadable html {html_path}: {exc}") from exc

    meta = _load_meta(trial_dir / files["meta"])

    ad_rects = []
    for row in _read_csv(trial_dir / files["ads"]):
        try:
            etype = Etype(row["etype"].strip())
        except ValueError as exc:
            raise IngestError(f"unknown ad etype {row['etype']!r} in {trial_dir}") from exc
        ad_rects.append(
            AdRect(etype, int(row["x"]), int(row["y"]), int(row["w"]), int(row["h"]))
        )

    fixations = tuple(
        FixationEvent(float(r["x"]), float(r["y"]), int(r["start"]), int(r["end"]))
        for r in _read_csv(trial_dir / files["fixations"])
    )
    clicks = tuple(
        ClickEvent(int(r["t"]), float(r["x"]), float(r["y"]), _parse_bool(r["is_final"]))
        for r in _read_csv(trial_dir / files["clicks"])
    )
    cursor = tuple(
        CursorEvent(int(r["t"]), float(r["x"]), float(r["y"]), r["kind"].strip())
        for r in _read_csv(trial_dir / files["cursor"])
    )

    trial_id = meta.trial_id if meta is not None else trial_dir.name
    bundle = TrialBundle(
        meta=meta,
        screenshot=screenshot,
        html=html,
        ad_rects=tuple(ad_rects),
        fixations=fixations,
        clicks=clicks,
        cursor=cursor,
    )
    return trial_id, bundle


def load_trial_channels(trial_dir: str | Path) -> dict[str, tuple[float, ...]]:
    """Optional opaque numeric tracks (pupil etc.); never interpreted."""
    path = Path(trial_dir) / "channels.json"
    if not path.exists():
        return {}
    try:
        doc = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError):
        return {}
    out: dict[str, tuple[float, ...]] = {}
    for name, values in doc.items():
        if isinstance(values, list):
            out[str(name)] = tuple(float(v) for v in values)
    return out


def iter_trial_dirs(input_dir: str | Path) -> list[Path]:
    """Trial directories under input_dir, sorted by name for determinism."""
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise IngestError(f"input directory not found: {input_dir}")
    return sorted(
        (p for p in input_dir.iterdir() if p.is_dir() and (p / "screenshot.png").exists()),
        key=lambda p: p.name,
    )


def write_trial_dir(
    trial_dir: str | Path,
    meta: TrialMeta,
    screenshot: np.ndarray,
    html: str,
    ad_rects: tuple[AdRect, ...] = (),
    fixations: tuple[FixationEvent, ...] = (),
    clicks: tuple[ClickEvent, ...] = (),
    cursor: tuple[CursorEvent, ...] = (),
    channels: dict[str, tuple[float, ...]] | None = None,
    ground_truth: dict | None = None,
) -> Path:
    """Write a bundle in the canonical layout; inverse of load_trial_dir."""
    trial_dir = Path(trial_dir)
    trial_dir.mkdir(parents=True, exist_ok=True)

    meta_doc = {
        "trial_id": meta.trial_id,
        "viewport_width": meta.viewport_width,
        "viewport_height": meta.viewport_height,
        "screenshot_width": meta.screenshot_width,
        "screenshot_height": meta.screenshot_height,
        "query_text": meta.query_text,
    }
    if meta.entry_timestamp is not None:
        meta_doc["entry_timestamp"] = meta.entry_timestamp
    (trial_dir / "meta.json").write_text(json.dumps(meta_doc, indent=2) + "\n", "utf-8")
    (trial_dir / "page.html").write_text(html, "utf-8")

    mode = "L" if screenshot.ndim == 2 else "RGB"
    Image.fromarray(screenshot, mode=mode).save(trial_dir / "screenshot.png")

    def dump(path: Path, header: list[str], rows: list[list]) -> None:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)

    dump(
        trial_dir / "ads.csv",
        ["etype", "x", "y", "w", "h"],
        [[r.etype.value, r.x, r.y, r.w, r.h] for r in ad_rects],
    )
    dump(
        trial_dir / "fixations.csv",
        ["x", "y", "start", "end"],
        [[f.x, f.y, f.start, f.end] for f in fixations],
    )
    dump(
        trial_dir / "clicks.csv",
        ["t", "x", "y", "is_final"],
        [[c.t, c.x, c.y, int(c.is_final)] for c in clicks],
    )
    dump(
        trial_dir / "cursor.csv",
        ["t", "x", "y", "kind"],
        [[c.t, c.x, c.y, c.kind] for c in cursor],
    )
    if channels:
        (trial_dir / "channels.json").write_text(
            json.dumps({k: list(v) for k, v in channels.items()}, indent=2) + "\n", "utf-8"
        )
    if ground_truth is not None:
        (trial_dir / "ground_truth.json").write_text(
            json.dumps(ground_truth, indent=2, sort_keys=True) + "\n", "utf-8"
        )
    return trial_dir


# ---------------------------------------------------------------------------
# AdSERP Zenodo volume adapter

_ADSERP_FILES = {
    "meta": "metadata.json",
    "html": "serp.html",
    "screenshot": "screenshot.png",
    "ads": "ad_boxes.csv",
    "fixations": "gaze_fixations.csv",
    "clicks": "mouse_clicks.csv",
    "cursor": "cursor_trace.csv",
}


def load_adserp_trial(trial_dir: str | Path) -> tuple[str, TrialBundle]:
    """Thin mapping from an AdSERP-volume trial directory onto the
    canonical schema: same column semantics, different filenames.

    Directories that already use the canonical names load as-is, so a
    volume converted once keeps working. Adjust ``_ADSERP_FILES`` if a
    volume revision renames files.
    """
    trial_dir = Path(trial_dir)
    if (trial_dir / _CANONICAL_FILES["meta"]).exists():
        return load_trial_dir(trial_dir)
    return load_trial_dir(trial_dir, files=_ADSERP_FILES)
