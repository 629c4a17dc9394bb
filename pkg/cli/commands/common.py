"""
Run context shared by the CLI commands
Output directory, report writer and manifest of one command invocation
"""
import logging
from pathlib import Path

from pydantic import ValidationError

from src.anisotropy import AnisotropyError
from src.energy import EnergyError, ScalingRegimeError
from src.experiments.base import ExperimentError
from src.families import FamilyError
from src.lab_config import ExperimentConfig, LabConfigError
from src.optimize import OptimizationError
from src.potentials import PotentialBoundError, PotentialError
from src.report_writer import ReportWriter
from src.run_manifest import RunManifest
from src.shape_io import ShapeIOError
from src.shapes import ShapeError
from src.verify_suites import VerifySuiteError

logger = logging.getLogger(__name__)

STATUS = {0: "pass", 1: "assertion failure", 2: "config error", 3: "non-convergence"}

# invalid inputs, reported as config errors
CONFIG_ERRORS = (
    LabConfigError,
    ValidationError,
    ShapeIOError,
    ShapeError,
    AnisotropyError,
    PotentialError,
    EnergyError,
    FamilyError,
    OptimizationError,
    VerifySuiteError,
    ExperimentError,
)

# numerical failures, checked before CONFIG_ERRORS since they subclass them
ASSERTION_ERRORS = (PotentialBoundError,)
NONCONVERGENCE_ERRORS = (ScalingRegimeError,)


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, ASSERTION_ERRORS):
        return 1
    if isinstance(error, NONCONVERGENCE_ERRORS):
        return 3
    return 2 if isinstance(error, CONFIG_ERRORS) else 1


class RunContext:
    """Writes the effective config first and the manifest last"""

    def __init__(self, cfg: ExperimentConfig, command: str):
        self.cfg = cfg
        self.out_dir = Path(cfg.out)
        self.writer = ReportWriter(self.out_dir, cfg.digest)
        self.manifest = RunManifest(cfg.digest, command, cfg.quadrature.seed)
        self.writer.write_json("config.json", cfg.document())

    def track(self, path: Path) -> None:
        """Include a file written outside the report writer in the manifest"""
        self.writer.written.append(Path(path))

    def finish(self, code: int) -> int:
        """
        Checksum every written file and write the manifest

        Args:
            code: Exit code of the command

        Returns:
            The same exit code
        """
        for path in self.writer.written:
            self.manifest.add(path)
        self.manifest.finish(code, STATUS.get(code, "error"))
        self.manifest.write(self.out_dir)
        logger.info("%s finished with exit code %d (%s)", self.manifest.command, code, STATUS.get(code, "error"))
        return code
