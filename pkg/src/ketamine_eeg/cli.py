"""Command-line entry point: ``ketamine-eeg {simulate,features,stats,predict,report}``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import StudyConfig
from .errors import ConfigError, EEGError
from .pipeline import COMMANDS

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


def _parse_band(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like 1:12, got {text!r}") from None
    return [lo, hi]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ketamine-eeg",
        description="Forehead qEEG pipeline for ketamine treatment-response studies.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["all"]:
        p = sub.add_parser(name, help=("simulate, features, stats, predict and report in turn"
                                       if name == "all" else f"run the {name} step"))
        p.add_argument("--config", help="StudyConfig JSON file")
        p.add_argument("--out", help="output directory (config key out_dir)")
        p.add_argument("--seed", type=int, help="seed for simulation and cross-validation")
        p.add_argument("--manifest", help="input manifest JSON (config key manifest)")
        p.add_argument("--features-csv", help="feature table path (config key features_csv)")
        p.add_argument("--filter-order", type=int, help="FIR order (filter.order)")
        p.add_argument("--band", type=_parse_band, help="bandpass edges, e.g. 1:12 (filter.band)")
        p.add_argument("--min-seconds", type=float, help="minimum recording length to pass QC")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args) -> StudyConfig:
    cfg = StudyConfig.load(args.config, {
        "out_dir": args.out,
        "seed": args.seed,
        "manifest": args.manifest,
        "features_csv": args.features_csv,
        "min_seconds": args.min_seconds,
    })
    if args.filter_order is not None:
        cfg["filter"]["order"] = args.filter_order
    if args.band is not None:
        cfg["filter"]["band"] = args.band
    cfg.check()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        steps = list(COMMANDS) if args.command == "all" else [args.command]
        status = EXIT_OK
        for step in steps:
            status = max(status, COMMANDS[step](cfg))
        return status
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EEGError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
