"""
Cavity Wave Packet Engine - Command Line
Run propagations, model comparisons, Landau-Zener sweeps, revival scans,
Dicke spectra, potential curves and analytic references from config files
"""

import argparse
import logging
import sys
from typing import List, Optional

import config
from src.errors import ConfigError, NumericalAbort, WavePacketError
from src.runner import SimulationRunner, load_config

logger = logging.getLogger("wavepacket_cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3

VERB_HELP = {
    "propagate": "Propagate every model in the config and write observable series",
    "compare": "Propagate two models from the same state and compare their inversions",
    "lz-sweep": "Landau-Zener formula against measured adiabatic following",
    "revival-scan": "Detect packet revivals and compare with the predicted times",
    "dicke-spectrum": "Holstein-Primakoff normal modes across the Dicke transition",
    "oracle": "Evaluate the analytic references for the configured parameters",
    "curves": "Write adiabatic and diabatic potential curves",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="Run config file (key = value)")
    common.add_argument("--out", default=config.RESULTS_DIR, help="Root folder for output bundles")
    common.add_argument("--dt-override", type=float, default=None, help="Replace propagation.dt")
    common.add_argument(
        "--check-convergence", action="store_true",
        help="Repeat propagations at dt/2 and record the deltas in the manifest",
    )
    common.add_argument("--workers", type=int, default=1, help="Worker processes for lz-sweep")
    common.add_argument("--excel", action="store_true", help="Also write all tables to one workbook")
    common.add_argument("--no-progress", action="store_true", help="Hide progress bars")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        description="Wave-packet dynamics of cavity QED models in the conjugate-variable picture"
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in VERB_HELP.items():
        sub.add_parser(verb, parents=[common], help=help_text)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else config.LOG_LEVEL,
        format=config.LOG_FORMAT,
    )

    try:
        run_config = load_config(args.config)
        runner = SimulationRunner(
            run_config,
            out_dir=args.out,
            dt_override=args.dt_override,
            check_convergence=args.check_convergence,
            workers=args.workers,
            excel=args.excel,
            show_progress=not args.no_progress,
        )
        runner.run(args.verb)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except NumericalAbort as e:
        logger.error(f"Run aborted: {e}")
        return EXIT_ABORT
    except WavePacketError as e:
        # remaining library errors come from parameters the config supplied
        logger.error(f"Invalid run parameters: {e}")
        return EXIT_CONFIG

    print(runner.bundle_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
