"""Command line entry point: preset runs, config-file runs, preset listing.

Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.
"""

import argparse
import os
import sys

from .presets import (
    ConfigError,
    config_from_mapping,
    parse_config_text,
    preset_config,
    preset_names,
    run_config,
)
from .solvers import SolverStepError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spectral-vms",
        description="Spectral VMS solvers for 1D advection-diffusion(-reaction) problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_preset = sub.add_parser("preset", help="run a named preset")
    p_preset.add_argument("name")
    p_preset.add_argument("--out", default=None, help="output directory")
    p_preset.add_argument(
        "--no-figures", action="store_true", help="skip PNG rendering"
    )

    p_run = sub.add_parser("run", help="run a key = value config file")
    p_run.add_argument("config_path")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    sub.add_parser("list-presets", help="list available preset names")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return 2 if exc.code not in (0,) else 0

    if args.command == "list-presets":
        for name in preset_names():
            print(name)
        return 0

    try:
        if args.command == "preset":
            try:
                cfg = preset_config(args.name)
            except KeyError:
                print(f"error: unknown preset {args.name!r}", file=sys.stderr)
                print("available: " + ", ".join(preset_names()), file=sys.stderr)
                return 2
        else:
            try:
                with open(args.config_path, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return 2
            cfg = config_from_mapping(parse_config_text(text))
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2

    outdir = args.out or os.path.join("out", cfg.label)
    try:
        paths = run_config(cfg, outdir, figures=not args.no_figures)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except SolverStepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
