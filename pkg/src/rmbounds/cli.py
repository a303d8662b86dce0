"""Command line entry point ``rmb``.

    rmb <experiment> [--config FILE.json] --out FILE.csv [--seed N]
    rmb validate-map MAP.json

Exit status is 0 on success, 1 when a soundness row fails, and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import sys

from rmbounds import kernels
from rmbounds.harness import EXPERIMENTS, ExperimentConfig, run_experiment
from rmbounds.mapmodel import load_map, proximity_coefficient
from rmbounds.parallel import thread_count
from rmbounds.spectral import derivative_bound


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmb", description="Radio map interpolation bounds experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON experiment config (defaults used when omitted)")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", type=int, help="override the config seed")
    v = sub.add_parser("validate-map", help="check a map description file")
    v.add_argument("map", help="map JSON file")
    return parser


def _validate_map(path: str) -> int:
    try:
        fmap = load_map(path)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"invalid map {path}: {exc}", file=sys.stderr)
        return 2
    print(f"ok: {fmap.n_sources} source(s), dim={fmap.dim}, gamma={fmap.gamma:g}, dmin={fmap.dmin:g}")
    if fmap.dim == 1:
        print(f"proximity coefficient: {proximity_coefficient(fmap):.17g}")
        print(f"derivative bound: {derivative_bound(fmap):.17g}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "validate-map":
        return _validate_map(args.map)
    try:
        thread_count()
        data = {}
        if args.config:
            with open(args.config) as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise ValueError("config must be a JSON object")
        data.setdefault("experiment", args.command)
        config = ExperimentConfig.from_dict(data, seed=args.seed, out_path=args.out)
        if config.experiment != args.command:
            raise ValueError(f"config is for {config.experiment!r}, not {args.command!r}")
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"rmb: {exc}", file=sys.stderr)
        return 2
    result = run_experiment(config)
    result.write(args.out)
    print(f"{args.command}: {len(result.rows)} rows -> {args.out} (backend {kernels.BACKEND})")
    for msg in result.failures:
        print(f"FAIL {msg}", file=sys.stderr)
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
