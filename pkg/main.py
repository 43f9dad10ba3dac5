"""
qpmkit - Main Entry Point
Description: Design and simulate quasi-phase-matched thin-film lithium niobate
waveguides: modes, poling period, SHG/DFG response and photon-pair statistics
"""

import argparse
import logging
import sys

from config.settings import CACHE_ENV_VAR, CONFIG_DIR, PAPER_CONFIG_FILE, VERSION, ExitCode

COMMANDS = {
    "design": "solve the mode pair and report n_eff, overlap, poling period and efficiency",
    "tune": "SHG tuning curve CSV with peak, FWHM and optional facet fringes",
    "dfg": "DFG spectrum CSV and 3-dB bandwidth",
    "pairs": "CAR table, Monte-Carlo comparison and channel matrix CSVs",
    "metrics": "facet de-embedding, efficiency from measured powers, Q to loss",
    "paper": "all stages of the reference device plus an acceptance summary",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qpmkit",
        description="Quasi-phase-matched thin-film waveguide toolkit",
        epilog=f"The mode cache root can be set with the {CACHE_ENV_VAR} environment variable.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument(
            "--config",
            default=str(CONFIG_DIR / PAPER_CONFIG_FILE),
            help="project config JSON (default: the shipped reference device)",
        )
        p.add_argument("--out", help="output directory (overrides run.output_dir)")
        p.add_argument("--threads", type=int, help="worker processes for mode solves and Monte-Carlo")
        p.add_argument("--seed", type=int, help="Monte-Carlo seed")
        p.add_argument(
            "--fringes", choices=("on", "off"), help="include facet Fabry-Perot fringes in tune"
        )
        p.add_argument("--no-cache", action="store_true", help="do not read or write the mode cache")
        level = p.add_mutually_exclusive_group()
        level.add_argument("-v", "--verbose", action="store_true", help="debug logging")
        level.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    return parser


def main(argv=None):
    """Main application entry point"""
    args = build_parser().parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)-7s %(name)s: %(message)s")
    log = logging.getLogger("qpmkit")

    from cli.runner import exit_code_for, load_project, run_command
    from utils.exceptions import QpmKitError

    try:
        config = load_project(
            args.config,
            seed=args.seed,
            threads=args.threads,
            fringes=None if args.fringes is None else args.fringes == "on",
            output_dir=args.out,
        )
        return run_command(args.command, config, use_cache=not args.no_cache)
    except QpmKitError as e:
        log.error("✗ %s: %s", type(e).__name__, e)
        return exit_code_for(e)
    except Exception:
        log.exception("✗ Unexpected failure")
        return ExitCode.FAILURE


if __name__ == "__main__":
    sys.exit(main())
