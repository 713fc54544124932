"""Command-line entry point: ``nfpolar <subcommand> [options]``."""

import argparse
import logging
import sys

from .experiments import RUNNERS, ConfigError, build_config, read_config_file
from .validation import run_all

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 2, 3

log = logging.getLogger("nearfield_polar")

PARAMETERS = [
    ("--D", float, "UE distance (design distance for focus-sweep), meters"),
    ("--M", str, "half element count; the array has 2M+1 elements (comma list for eigenvalues)"),
    ("--delta-t", float, "element spacing, meters"),
    ("--L", float, "array length 2*M*delta_t, meters"),
    ("--snr-db", float, "SNR in dB"),
    ("--rpol", int, "receive dipoles (2 or 3)"),
    ("--tpol", int, "transmit dipoles (2 or 3)"),
    ("--lambda", float, "wavelength, meters"),
    ("--eta", float, "medium constant"),
    ("--sweep-min", float, "first sweep value"),
    ("--sweep-max", float, "last sweep value"),
    ("--sweep-count", int, "number of sweep points"),
    ("--drop", float, "focal-region threshold below the peak, bits/s/Hz"),
    ("--cases", str, "focus-sweep cases 'RxT:L:M, ...'"),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nfpolar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--jobs", type=int, default=None, help="worker processes")
        p.add_argument("--reactive", action="store_const", const=True, default=None,
                       help="include the reactive near-field term")
        p.add_argument("--allow-noncanonical", action="store_const", const=True, default=None,
                       help="permit the (rpol, tpol) = (2, 3) combination")
        p.add_argument("--timestamp", action="store_const", const=True, default=None,
                       help="add a generation timestamp to the metadata")
        for flag, kind, help_ in PARAMETERS:
            p.add_argument(flag, type=kind, default=None, help=help_,
                           dest=flag[2:].replace("-", "_"))
    sub.add_parser("validate", help="run the invariant checks and print pass/fail")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        results = run_all()
        for r in results:
            print(r.line())
        return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT

    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "out")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(args.command, file_values, overrides)
        if cfg.rpol is not None and (cfg.rpol, cfg.tpol or 3) == (2, 3):
            log.warning("running non-canonical polarization config 2x3")
        table = RUNNERS[args.command](cfg)
    except (ConfigError, OSError) as exc:
        print(f"nfpolar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = table.to_text()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
