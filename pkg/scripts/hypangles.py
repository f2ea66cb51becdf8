#!/usr/bin/env python3
"""
Command-line entry point: pair correlation of hyperbolic lattice angles
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
sys.path.append(str(Path(__file__).parent.parent))

from config.settings import settings
from src.reporting.commands import COMMANDS, EXIT_ERROR
from src.reporting.run_config import build_config
from src.utils.exceptions import HypAnglesError
from src.utils.logger import bind_run, get_logger, setup_logging

logger = get_logger(__name__)


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a comma separated list of numbers") from None


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per table; flag defaults stay None so
    only explicitly given flags override the config file"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON file with run parameters")
    common.add_argument("--lattice", type=str, default=None,
                        help="Built-in lattice: psl2z, psl2z-generators, trivial")
    common.add_argument("--generators", type=str, default=None,
                        help="JSON generator file (overrides --lattice)")
    common.add_argument("--Q", type=float, default=None, help="Ball radius")
    common.add_argument("--xi-max", dest="xi_max", type=float, default=None,
                        help="Largest xi of the grid")
    common.add_argument("--xi-step", dest="xi_step", type=float, default=None,
                        help="Grid step")
    common.add_argument("--interval", type=str, default=None,
                        help="Angular sub-arc lo:hi, e.g. 0:pi")
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo samples")
    common.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    common.add_argument("--tolerance", type=float, default=None,
                        help="Largest accepted relative R2 gap")
    common.add_argument("--slack", type=float, default=None,
                        help="Multiplier of Q^(2/3)||M||^2 in the volume check")
    common.add_argument("--M", type=str, default=None,
                        help="Element for volcheck: a,b,c,d or T, S, TS, ST")
    common.add_argument("--q-values", dest="q_values", type=_float_list, default=None,
                        help="Comma separated radii for volcheck")
    common.add_argument("--xi-values", dest="xi_values", type=_float_list, default=None,
                        help="Comma separated xi values for volcheck")
    common.add_argument("--truncation", dest="theory_truncation", type=float, default=None,
                        help="Truncation radius of the theoretical lattice sums")
    common.add_argument("--method", type=str, default=None, choices=["closed_form", "quad"],
                        help="Evaluation of the theoretical R2")
    common.add_argument("--out", dest="output_dir", type=str, default=None,
                        help="Output directory")
    common.add_argument("--threads", type=int, default=None,
                        help="Worker count (capped by HYPANGLES_THREADS)")
    common.add_argument("--log-level", dest="log_level", type=str, default=settings.LOG_LEVEL,
                        help="Logging level")
    common.add_argument("--log-file", dest="log_file", type=str, default=settings.LOG_FILE,
                        help="Optional log file")
    common.add_argument("--log-json", dest="log_json", action="store_true",
                        help="Write the log file as JSON lines")

    parser = argparse.ArgumentParser(
        prog="hypangles",
        description="Pair correlation of hyperbolic angles in lattice orbits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("enumerate", parents=[common], help="List lattice elements in a ball")
    sub.add_parser("paircorr", parents=[common], help="Empirical vs theoretical pair correlation")
    sub.add_parser("density", parents=[common], help="Theoretical g2 and R2 curves")
    sub.add_parser("volcheck", parents=[common], help="Monte Carlo check of region volumes")
    return parser


CONFIG_FIELDS = (
    "lattice", "generators", "Q", "xi_max", "xi_step", "interval", "samples", "seed",
    "tolerance", "slack", "M", "q_values", "xi_values", "theory_truncation", "method",
    "output_dir",
)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(log_level=args.log_level.upper(), log_file=args.log_file, json_logs=args.log_json)

    try:
        overrides = {name: getattr(args, name) for name in CONFIG_FIELDS}
        config = build_config(args.config, overrides)
        bind_run(args.command, config.digest())
        logger.info(f"hypangles {settings.VERSION} {args.command} (config {config.digest()})")
        return COMMANDS[args.command](config, n_jobs=args.threads)
    except HypAnglesError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
