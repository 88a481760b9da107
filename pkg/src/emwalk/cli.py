"""Command-line entry point: one subcommand per experiment.

Examples:

    emwalk invariants --out-dir runs/check
    emwalk bloch --out-dir runs/bloch --override steps=630
    emwalk drift_speed --out-dir runs/drift --config my_config.json --threads 4

A config file is JSON of the form
{"experiment": "...", "params": {...}, "out_dir": "..."}; overrides are
key=value pairs whose values parse as JSON (falling back to strings).
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import EXPERIMENT_NAMES, make_config, run_experiment, validate_config

_ALIASES = {"spread_vs_e": "spread_vs_E"}


def _parse_override(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emwalk",
        description="Crossed-field discrete-time quantum walk experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENT_NAMES:
        aliases = [alias for alias, target in _ALIASES.items() if target == name]
        p = sub.add_parser(name, aliases=aliases, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out-dir", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker processes for independent sweep cells")
        p.add_argument("--override", action="append", type=_parse_override,
                       default=[], metavar="KEY=VALUE",
                       help="parameter override (repeatable)")
        p.add_argument("--check-only", action="store_true",
                       help="validate the config and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    experiment = _ALIASES.get(args.experiment, args.experiment)
    try:
        cfg = make_config(experiment, args.out_dir, config_file=args.config,
                          overrides=dict(args.override))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    diags = validate_config(cfg)
    if diags:
        for d in diags:
            print(f"config problem: {d}", file=sys.stderr)
        return 2
    if args.check_only:
        print("config ok")
        return 0
    artifact = run_experiment(cfg, threads=args.threads)
    for name, path in artifact.csv_paths.items():
        print(f"{name}: {path}")
    print(f"metadata: {artifact.metadata_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
