"""Command-line pipeline driver.

Subcommands operate on a shared run directory:

  synth    generate a ground-truth field
  perturb  draw ensemble members around it
  compute  build all summary artifacts
  render   write PNG visualizations
  query    print the destination distribution at a point
  serve    serve the artifacts over HTTP

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .formats import FormatError
from .pipeline import (
    ConfigError,
    DataError,
    PipelineConfig,
    compute_run,
    perturb_run,
    query_run,
    render_run,
    synth_run,
)

DEFAULT_PORT = int(os.environ.get("MORSE_UNC_PORT", "8765"))


def _add_dir(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dir", default="run", help="run directory (default: run)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morsemaps", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a ground-truth field")
    _add_dir(p)
    p.add_argument("--fn", required=True, choices=["ackley", "himmelblau", "four-gaussians"])
    p.add_argument("--size", type=int, default=256, help="square grid size")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)

    p = sub.add_parser("perturb", help="draw ensemble members")
    _add_dir(p)
    p.add_argument("--config", default=None, help="JSON config file (flags override)")
    p.add_argument("--noise", default=None, choices=["uniform", "uniform-signed", "gaussian", "multimodal"])
    p.add_argument("--scale", type=float, default=None, help="amplitude as a fraction of half the smallest feature persistence")
    p.add_argument("--amplitude", type=float, default=None, help="absolute amplitude bound")
    p.add_argument("--sigma", type=float, default=None, help="sigma for gaussian noise")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("compute", help="compute summary artifacts")
    _add_dir(p)
    p.add_argument("--config", default=None)
    p.add_argument("--manifest", default=None, help="ensemble manifest (default: <dir>/manifest.json)")
    p.add_argument("--l-override", type=int, default=None, dest="l_override",
                   help="force this label count via position clustering")
    p.add_argument("--cleanup", type=float, default=None, help="persistence floor for envelope peaks")
    p.add_argument("--normalization", default=None, choices=["none", "by_member_total"])
    p.add_argument("--bins", type=int, default=None, help="survival quantization bin count")
    p.add_argument("--thresholds", default=None, help="comma separated agreement thresholds")

    p = sub.add_parser("render", help="write PNG visualizations")
    _add_dir(p)

    p = sub.add_parser("query", help="print the distribution at a grid point")
    _add_dir(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--c", type=int, required=True)

    p = sub.add_parser("serve", help="serve artifacts over HTTP")
    _add_dir(p)
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    doc: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as f:
                doc = json.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    overrides = {
        "noise": getattr(args, "noise", None),
        "scale": getattr(args, "scale", None),
        "amplitude": getattr(args, "amplitude", None),
        "sigma": getattr(args, "sigma", None),
        "n": getattr(args, "n", None),
        "seed": getattr(args, "seed", None),
        "l_override": getattr(args, "l_override", None),
        "cleanup_persistence": getattr(args, "cleanup", None),
        "survival_normalization": getattr(args, "normalization", None),
        "quantization_k": getattr(args, "bins", None),
    }
    thresholds = getattr(args, "thresholds", None)
    if thresholds is not None:
        try:
            overrides["agreement_thresholds"] = tuple(float(x) for x in thresholds.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad thresholds {thresholds!r}") from exc
    explicit = {k for k, v in overrides.items() if v is not None}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    # A flag for one of scale and amplitude silences the other's default.
    if "amplitude" in explicit and "scale" not in explicit:
        doc["scale"] = None
    if "scale" in explicit and "amplitude" not in explicit:
        doc["amplitude"] = None
    return PipelineConfig.from_json(doc)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            w = args.width or args.size
            h = args.height or args.size
            path = synth_run(args.dir, args.fn, w, h)
            print(json.dumps({"ground_truth": str(path), "fn": args.fn, "width": w, "height": h}))
        elif args.command == "perturb":
            config = _load_config(args)
            manifest = perturb_run(args.dir, config)
            print(json.dumps({"manifest": str(manifest), "n": config.n, "seed": config.seed}))
        elif args.command == "compute":
            config = _load_config(args)
            summary = compute_run(args.dir, config, manifest=args.manifest)
            print(json.dumps(summary, sort_keys=True))
        elif args.command == "render":
            written = render_run(args.dir)
            print(json.dumps({"written": [str(p) for p in written]}))
        elif args.command == "query":
            print(json.dumps(query_run(args.dir, args.r, args.c), sort_keys=True))
        elif args.command == "serve":
            from .service import serve

            serve(args.dir, host=args.host, port=args.port, ui_dir=args.ui)
        return 0
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except (DataError, FormatError, FileNotFoundError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
