"""
Base experiment module
Defines the interface for named experiment runners
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List

from src.energy import EnergyParams
from src.lab_config import ExperimentConfig, LabConfigError

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_ASSERTION = 1
EXIT_NONCONVERGENCE = 3


@dataclass
class ExperimentOutcome:
    """Acceptance verdict, JSON summary and CSV tables of one run"""

    name: str
    passed: bool
    summary: Dict[str, Any]
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    converged: bool = True

    @property
    def exit_code(self) -> int:
        if self.passed:
            return EXIT_PASS
        return EXIT_NONCONVERGENCE if not self.converged else EXIT_ASSERTION


class BaseExperiment(ABC):
    """Base class for experiment runners"""

    name: str = ""

    def __init__(self, cfg: ExperimentConfig):
        """Initialize the runner with its validated config"""
        self.cfg = cfg
        self.spec = cfg.quadrature
        self.tables: Dict[str, List[Dict[str, Any]]] = {}

    @abstractmethod
    def run(self) -> ExperimentOutcome:
        """
        Run the experiment and evaluate its acceptance assertion

        Returns:
            ExperimentOutcome
        """
        pass

    def record(self, table: str, row: Dict[str, Any]) -> None:
        """
        Append a row to a named table; rows recorded before a failure are still written

        Args:
            table: CSV file stem
            row: Table row
        """
        self.tables.setdefault(table, []).append(row)

    def option(self, key: str, default: Any) -> Any:
        return self.cfg.options.get(key, default)

    def params(self, **defaults) -> EnergyParams:
        """Config params, or params built from defaults when the config has none"""
        if self.cfg.params is not None:
            return self.cfg.params
        try:
            return EnergyParams(**defaults)
        except ValueError as e:
            raise LabConfigError(f"params: {e}") from e

    def with_epsilon(self, params: EnergyParams, epsilon: float) -> EnergyParams:
        """Same params at another eps, with m rederived"""
        return EnergyParams(**params.model_dump(exclude={"m", "epsilon"}), epsilon=float(epsilon))

    def outcome(self, passed: bool, summary: Dict[str, Any], converged: bool = True) -> ExperimentOutcome:
        logger.info("%s: %s", self.name, "pass" if passed else "FAIL")
        return ExperimentOutcome(self.name, bool(passed), summary, self.tables, converged)


EXPERIMENTS = (
    "crystal-min",
    "wulff-noncritical",
    "riesz-constancy",
    "dual-potential-min",
    "nonexistence-slice",
    "energy-scaling",
    "fuglede",
    "capacity-probe",
)


def get_experiment(name: str, cfg: ExperimentConfig) -> BaseExperiment:
    """
    Factory function to get the runner for a named experiment

    Args:
        name: Experiment name, one of EXPERIMENTS
        cfg: Validated experiment config

    Returns:
        Experiment runner instance
    """
    name = name.lower()

    if name == "crystal-min":
        from .crystal_min import CrystalMinExperiment
        return CrystalMinExperiment(cfg)
    elif name == "wulff-noncritical":
        from .wulff_noncritical import WulffNoncriticalExperiment
        return WulffNoncriticalExperiment(cfg)
    elif name == "riesz-constancy":
        from .riesz_constancy import RieszConstancyExperiment
        return RieszConstancyExperiment(cfg)
    elif name == "dual-potential-min":
        from .dual_potential_min import DualPotentialMinExperiment
        return DualPotentialMinExperiment(cfg)
    elif name == "nonexistence-slice":
        from .nonexistence_slice import NonexistenceSliceExperiment
        return NonexistenceSliceExperiment(cfg)
    elif name == "energy-scaling":
        from .energy_scaling import EnergyScalingExperiment
        return EnergyScalingExperiment(cfg)
    elif name == "fuglede":
        from .fuglede import FugledeExperiment
        return FugledeExperiment(cfg)
    elif name == "capacity-probe":
        from .capacity_probe import CapacityProbeExperiment
        return CapacityProbeExperiment(cfg)
    else:
        raise ExperimentError(f"Unsupported experiment: {name}")


class ExperimentError(Exception):
    """Exception raised for errors in experiment runners."""
    pass
