"""Command-line entry point.

Subcommands:
  build-aois   run the full pipeline over a corpus and emit all artifacts
  audit        ad internal-consistency + gaze-cursor registration reports
  inventory    per-etype behavioral table and rank analysis
  synth        generate a seeded synthetic corpus with ground truth
  replay-emit  stage per-trial JSONs + screenshots for the replay viewer

Exit codes: 0 success, 1 hard error, 2 completed with per-trial
processing failures. Option precedence: CLI flag > config file >
built-in default.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import shutil
import sys
from pathlib import Path

from .attribution import AttributionParams
from .ingest import IngestError, iter_trial_dirs, write_trial_dir
from .model import Flavor
from .pipeline import PipelineConfig, run_corpus
from .segmentation import SegmentationParams
from .synth import generate_corpus_specs, generate_trial

_SEG_FIELDS = (
    "activity_threshold",
    "min_gap_rows",
    "min_card_height",
    "composite_trigger_height",
)
_ATTR_FIELDS = ("tolerance_x", "tolerance_y", "pathological_margin_px")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input-dir", required=True, help="corpus directory of trial bundles")
    parser.add_argument("--out-dir", required=True, help="artifact output directory")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes (default 1)")
    parser.add_argument("--rules", default=None, help="rules file path (default: packaged rules)")
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument(
        "--flavor",
        choices=["typed", "typed_gapfill", "organic_hybrid", "all"],
        default=None,
        help="which AOI flavor(s) to emit (default all)",
    )
    for name in _SEG_FIELDS:
        parser.add_argument(f"--{name.replace('_', '-')}", type=float, default=None)


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    file_cfg: dict = {}
    if getattr(args, "config", None):
        file_cfg = json.loads(Path(args.config).read_text("utf-8"))

    def pick(cli_val, file_key, default):
        if cli_val is not None:
            return cli_val
        return file_cfg.get(file_key, default)

    seg_file = file_cfg.get("segmentation", {})
    seg_kwargs = {}
    for name in _SEG_FIELDS:
        val = pick(getattr(args, name, None), None, None)
        if val is None:
            val = seg_file.get(name)
        if val is not None:
            default = getattr(SegmentationParams(), name)
            seg_kwargs[name] = type(default)(val)
    seg = dataclasses.replace(SegmentationParams(), **seg_kwargs)

    attr_file = file_cfg.get("attribution", {})
    attr_kwargs = {k: attr_file[k] for k in _ATTR_FIELDS if k in attr_file}
    attr = dataclasses.replace(AttributionParams(), **attr_kwargs)

    flavor = pick(getattr(args, "flavor", None), "flavor", "all")
    flavors = (
        (Flavor.TYPED, Flavor.TYPED_GAPFILL, Flavor.ORGANIC_HYBRID)
        if flavor == "all"
        else (Flavor(flavor),)
    )

    return PipelineConfig(
        input_dir=args.input_dir,
        out_dir=args.out_dir,
        flavors=flavors,
        jobs=int(pick(getattr(args, "jobs", None), "jobs", 1)),
        rules_path=pick(getattr(args, "rules", None), "rules", None),
        csv_prefix=file_cfg.get("csv_prefix", "aois_by_trial_id"),
        segmentation=seg,
        attribution=attr,
    )


def _exit_code(result) -> int:
    return 2 if result.n_failed > 0 else 0


def _cmd_build_aois(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    result = run_corpus(config)
    print(
        f"processed {result.n_processed}/{len(result.records)} trials "
        f"({result.n_dropped} dropped, {result.n_failed} failed); "
        f"{len(result.artifacts)} artifacts in {config.out_dir}"
    )
    return _exit_code(result)


def _cmd_audit(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    result = run_corpus(config)
    reports = Path(config.out_dir) / "reports"
    audit = json.loads((reports / "ad_consistency.json").read_text("utf-8"))
    probe = json.loads((reports / "registration_probe.json").read_text("utf-8"))
    print(
        f"ad consistency: {audit['n_disagreements']} disagreements over "
        f"{audit['n_classifications']} classifications, mean IoU {audit['mean_iou']}, "
        f"{audit['n_organic_overlapping_ads']} organic-over-ad overlaps"
    )
    agg = probe["aggregate"]
    print(
        f"registration: n={agg['n_included']} median={agg['median']} "
        f"IQR=({agg['p25']}, {agg['p75']}) p95={agg['p95']} flagged={agg['flagged_share']}"
    )
    return _exit_code(result)


def _cmd_inventory(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    result = run_corpus(config)
    reports = Path(config.out_dir) / "reports"
    inv = json.loads((reports / "inventory.json").read_text("utf-8"))
    header = f"{'etype':<16}{'n_aois':>8}{'fixated%':>10}{'n_clicks':>10}{'click%':>8}{'regr%':>8}{'fold%':>8}"
    print(header)
    for row in inv["rows"]:
        print(
            f"{row['etype']:<16}{row['n_aois']:>8}{row['fixated_pct']:>10.1f}"
            f"{row['n_clicks']:>10}{row['click_pct']:>8.1f}{row['regressive_pct']:>8.1f}"
            f"{row['above_fold_pct']:>8.1f}"
        )
    return _exit_code(result)


def _cmd_synth(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    plans = generate_corpus_specs(
        n_trials=args.trials,
        seed=args.seed,
        noise_sigma=args.noise_sigma,
        drop_every=args.drop_every,
    )
    for spec, render_seed in plans:
        bundle, gt, channels = generate_trial(spec, render_seed)
        write_trial_dir(
            out_dir / spec.trial_id,
            meta=bundle.meta,
            screenshot=bundle.screenshot,
            html=bundle.html,
            ad_rects=bundle.ad_rects,
            fixations=bundle.fixations,
            clicks=bundle.clicks,
            cursor=bundle.cursor,
            channels=channels or None,
            ground_truth=gt.to_json_dict(),
        )
    print(f"wrote {len(plans)} synthetic trials to {out_dir}")
    return 0


def _cmd_replay_emit(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    result = run_corpus(config)
    out_dir = Path(config.out_dir)
    shots = out_dir / "screenshots"
    shots.mkdir(parents=True, exist_ok=True)
    manifest = []
    for trial_dir in iter_trial_dirs(config.input_dir):
        trial_id = trial_dir.name
        meta_path = trial_dir / "meta.json"
        if meta_path.exists():
            try:
                trial_id = str(json.loads(meta_path.read_text("utf-8"))["trial_id"])
            except (json.JSONDecodeError, KeyError, OSError):
                pass
        shutil.copy(trial_dir / "screenshot.png", shots / f"{trial_id}.png")
    for rec in result.records:
        manifest.append({"trial_id": rec.trial_id, "json": f"trials/{rec.trial_id}.json"})
    (out_dir / "trials.json").write_text(
        json.dumps({"trials": manifest}, indent=2, sort_keys=True) + "\n", "utf-8"
    )
    print(f"replay bundle ready: {out_dir} ({len(manifest)} trials)")
    return _exit_code(result)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="serpaoi",
        description="Screenshot-anchored typed AOI extraction for SERP trial corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-aois", help="run the pipeline and emit CSV/JSON artifacts")
    _add_common(p)
    p.add_argument("--seed", type=int, default=0, help="unused here; synth consumes seeds")
    p.set_defaults(func=_cmd_build_aois)

    p = sub.add_parser("audit", help="ad consistency + registration probe")
    _add_common(p)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("inventory", help="per-etype behavioral inventory")
    _add_common(p)
    p.set_defaults(func=_cmd_inventory)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--drop-every", type=int, default=0, help="plant a dropped trial every N trials")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("replay-emit", help="stage replay JSONs, screenshots and manifest")
    _add_common(p)
    p.set_defaults(func=_cmd_replay_emit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
