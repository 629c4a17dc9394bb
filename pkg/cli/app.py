"""
Command-line application for anisodrop
Parses arguments, loads the experiment config and dispatches to a command
"""
import argparse
import logging
import sys
from typing import List, Optional

import config
from src.lab_config import load_config
from src.report_writer import ReportWriterError
from src.run_manifest import RunManifestError

from cli.commands.common import exit_code_for
from cli.commands.energy import run_energy_command
from cli.commands.experiment import run_experiment_command
from cli.commands.optimize import run_minimize_command, run_scan_command
from cli.commands.verify import run_verify_command
from cli.commands.wulff import run_wulff_command

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

COMMANDS = {
    "wulff": run_wulff_command,
    "energy": run_energy_command,
    "verify": run_verify_command,
    "experiment": run_experiment_command,
    "minimize": run_minimize_command,
    "scan": run_scan_command,
}


class AnisodropApp:
    """Main command-line application"""

    def __init__(self):
        """Initialize the application"""
        self.parser = None
        self.setup()

    def setup(self):
        """Set up logging and the argument parser"""
        level = logging.DEBUG if config.DEBUG else getattr(logging, config.LOG_LEVEL, logging.INFO)
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

        parser = argparse.ArgumentParser(prog=config.APP_NAME, description="Anisotropic liquid drop energies")
        parser.add_argument("--config", metavar="PATH", help="experiment config (JSON)")
        parser.add_argument("--out", metavar="DIR", help="output directory")
        parser.add_argument("--seed", type=int, help="random seed")
        parser.add_argument("--tol", type=float, help="quadrature tolerance")
        parser.add_argument("--mc-samples", type=int, dest="mc_samples", help="Monte Carlo oracle samples")
        parser.add_argument("--parallel-sweep", action="store_true", default=None, dest="parallel_sweep", help="solve sweep points in parallel")

        parser.add_argument("--version", action="version", version=f"%(prog)s {config.APP_VERSION}")
        sub = parser.add_subparsers(dest="command", required=True)

        wulff = sub.add_parser("wulff", help="build and export the Wulff shape")
        wulff.add_argument("--samples", type=int, help="boundary samples")

        energy = sub.add_parser("energy", help="evaluate the energies of a shape file")
        energy.add_argument("shape", nargs="?", help="shape file (JSON or PNG mask)")
        energy.add_argument("--kind", action="append", help="nonlocal term, repeatable (V, Vf, U1, U2, U3)")
        energy.add_argument("--h", type=float, help="cell size of PNG masks")
        energy.add_argument("--profile", action="store_true", help="write the Euler-Lagrange profile of star domains")

        verify = sub.add_parser("verify", help="run the invariant suites")
        verify.add_argument("--suite", action="append", help="suite name, repeatable; all when omitted")

        experiment = sub.add_parser("experiment", help="run a named experiment")
        experiment.add_argument("name", nargs="?", help="experiment name, defaults to the config's")

        sub.add_parser("minimize", help="minimize over the configured family")
        sub.add_parser("scan", help="minimize along the configured sweep")
        self.parser = parser

    def overrides(self, args) -> dict:
        """Config keys set on the command line"""
        return {
            "out": args.out,
            "seed": args.seed,
            "tol": args.tol,
            "mc_samples": args.mc_samples,
            "parallel_sweep": args.parallel_sweep,
        }

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Run one command

        Args:
            argv: Command-line arguments, sys.argv[1:] when None

        Returns:
            Exit code: 0 pass, 1 assertion failure, 2 config error, 3 non-convergence
        """
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return 0 if e.code in (0, None) else 2

        try:
            cfg = load_config(args.config, self.overrides(args))
            logger.info("%s %s: %s (config %s)", config.APP_NAME, config.APP_VERSION, args.command, cfg.digest[:12])
            return COMMANDS[args.command](args, cfg)
        except (ReportWriterError, RunManifestError) as e:
            logger.error("output error: %s", e)
            return 1
        except Exception as e:
            code = exit_code_for(e)
            if code == 2:
                logger.error("invalid input: %s", e)
            else:
                logger.exception("%s failed", args.command)
            return code
