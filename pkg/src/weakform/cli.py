"""Command-line driver.

One subcommand per experiment kind; the configuration document decides
everything else.  Exit codes: 0 success, 2 configuration error, 3 guard
exceeded, 4 internal invariant violation (a repro bundle is dumped).
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .config import EXPERIMENT_KINDS, parse_config
from .errors import ConfigError, GuardExceeded
from .harness import render_report, run_experiment, write_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_INTERNAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakform",
        description="Seeded, reproducible experiments over finite task spaces.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="path to the JSON configuration")
        p.add_argument("--seed", type=int, default=None, help="override the seed list")
        p.add_argument("--out", default=None, help="report path (default: from config)")
        p.add_argument(
            "--format", choices=("csv", "json"), default=None,
            help="report format (default: from config)",
        )
        p.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
        p.add_argument(
            "--timing", action="store_true",
            help="fill the wall_ms column (breaks byte-identical reruns)",
        )
    return parser


def _dump_repro_bundle(args: argparse.Namespace, config_text: str | None, exc: BaseException) -> Path:
    bundle = {
        "argv": sys.argv[1:],
        "config": config_text,
        "error": repr(exc),
        "traceback": traceback.format_exc(),
    }
    out_dir = Path(args.out).parent if args.out else Path.cwd()
    path = out_dir / "weakform-repro.json"
    try:
        path.write_text(json.dumps(bundle, indent=2), encoding="utf-8")
    except OSError:
        path = Path.cwd() / "weakform-repro.json"
        path.write_text(json.dumps(bundle, indent=2), encoding="utf-8")
    return path


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config_text: str | None = None
    try:
        config_path = Path(args.config)
        try:
            config_text = config_path.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        config = parse_config(
            config_text,
            base_dir=config_path.parent,
            default_experiment=args.subcommand,
        )
        config = config.with_overrides(
            seeds=(args.seed,) if args.seed is not None else None,
            output_path=args.out,
            output_format=args.format,
        )
        rows = run_experiment(config, jobs=args.jobs, timing=args.timing)
        if config.output_path:
            write_report(rows, config.output_path, config.output_format)
            print(f"wrote {len(rows)} rows to {config.output_path}")
        else:
            sys.stdout.write(render_report(rows, config.output_format))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except Exception as exc:  # noqa: BLE001 - dump a bundle, report code 4
        path = _dump_repro_bundle(args, config_text, exc)
        print(f"internal error: {exc}\nrepro bundle: {path}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
