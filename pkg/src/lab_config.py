"""
Experiment configuration
Pydantic models for experiment configs, loading from JSON and CLI overrides
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

import config
from src.anisotropy import AnisotropyError, SurfaceTension, tension_from_dict
from src.energy import NONLOCAL_TERMS, EnergyParams
from src.quadrature import QuadratureSpec
from src.run_manifest import config_hash

logger = logging.getLogger(__name__)


class FamilySpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    variant: Literal["rectangle", "box", "polygon", "star"]
    options: Dict[str, Any] = Field(default_factory=dict)


class SweepSpec(BaseModel):
    """Sweep over eps or m, given as explicit values or as a log-spaced range"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    key: Literal["epsilon", "m"] = "epsilon"
    values: Optional[List[float]] = None
    log_range: Optional[Tuple[float, float, int]] = None

    @model_validator(mode="after")
    def _one_source(self) -> "SweepSpec":
        if (self.values is None) == (self.log_range is None):
            raise ValueError("give exactly one of values or log_range")
        if self.log_range is not None:
            lo, hi, count = self.log_range
            if not 0 < lo < hi or count < 2:
                raise ValueError("log_range needs 0 < low < high and at least 2 points")
        elif not self.values:
            raise ValueError("values must not be empty")
        return self

    def points(self) -> List[float]:
        if self.values is not None:
            return [float(v) for v in self.values]
        lo, hi, count = self.log_range
        return np.logspace(np.log10(lo), np.log10(hi), int(count)).tolist()


class ReportFormats(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    csv: bool = True
    json_summary: bool = Field(True, alias="json")
    boundary_samples: int = Field(256, ge=3)


class ExperimentConfig(BaseModel):
    """
    One run of the lab: which experiment, on what tension and parameters,
    with which discretization, and the acceptance thresholds it asserts
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    experiment: Optional[str] = None
    tension: Dict[str, Any] = Field(default_factory=lambda: {"variant": "euclidean", "n": 2})
    params: Optional[EnergyParams] = None
    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    family: Optional[FamilySpec] = None
    sweep: Optional[SweepSpec] = None
    nonlocal_kind: str = "V"
    out: str = Field(default_factory=lambda: config.DEFAULT_OUTPUT_DIR)
    formats: ReportFormats = Field(default_factory=ReportFormats)
    suites: List[str] = Field(default_factory=list)
    shape: Optional[str] = None
    parallel_sweep: bool = False
    thresholds: Dict[str, float] = Field(default_factory=dict)
    options: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("tension")
    @classmethod
    def _valid_tension(cls, value: Dict[str, Any]) -> Dict[str, Any]:
        try:
            tension_from_dict(value)
        except AnisotropyError as e:
            raise ValueError(str(e)) from e
        return value

    @field_validator("nonlocal_kind")
    @classmethod
    def _known_term(cls, value: str) -> str:
        if value not in NONLOCAL_TERMS:
            raise ValueError(f"nonlocal_kind must be one of {NONLOCAL_TERMS}")
        return value

    def surface_tension(self) -> SurfaceTension:
        return tension_from_dict(self.tension)

    def threshold(self, name: str, default: Optional[float] = None) -> float:
        """Acceptance threshold from the config; a missing one without default is a config error"""
        if name in self.thresholds:
            return float(self.thresholds[name])
        if default is None:
            raise LabConfigError(f"thresholds.{name}: required by experiment {self.experiment!r}")
        return default

    def require_params(self) -> EnergyParams:
        if self.params is None:
            raise LabConfigError("params: required for this command")
        return self.params

    def document(self) -> Dict[str, Any]:
        """Canonical JSON form, the input of the config hash"""
        return self.model_dump(mode="json", by_alias=True, exclude={"out"})

    @property
    def digest(self) -> str:
        return config_hash(self.document())


def _field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(p) for p in error["loc"]) or "<root>"


def parse_config(document: Dict[str, Any], source: str = "<config>") -> ExperimentConfig:
    """
    Validate a config document

    Args:
        document: Parsed JSON
        source: Name used in error messages

    Returns:
        ExperimentConfig
    """
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        raise LabConfigError(f"{source}: {_field_path(first)}: {first['msg']}") from e


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Read a config file and apply CLI overrides

    Args:
        path: JSON config; None starts from defaults
        overrides: Top-level keys (out, experiment, shape, suites, parallel_sweep)
            and quadrature keys (seed, tol, mc_samples)

    Returns:
        ExperimentConfig
    """
    document: Dict[str, Any] = {}
    source = "<defaults>"
    if path is not None:
        source = str(path)
        try:
            with open(Path(path), encoding="utf-8") as f:
                document = json.load(f)
        except OSError as e:
            raise LabConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise LabConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
        if not isinstance(document, dict):
            raise LabConfigError(f"{path}: top level must be an object")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("seed", "tol", "mc_samples"):
            document.setdefault("quadrature", {})[key] = value
        else:
            document[key] = value
    cfg = parse_config(document, source)
    logger.debug("config %s hash %s", source, cfg.digest)
    return cfg


class LabConfigError(Exception):
    """Exception raised for invalid experiment configurations."""
    pass
