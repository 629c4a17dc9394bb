"""
Wulff non-criticality experiment
Euler-Lagrange residual of the unit-volume Wulff shape: it vanishes only for the Euclidean norm
"""
import logging

from src.anisotropy import Euclidean, build_wulff
from src.energy import el_residual
from src.experiments.base import BaseExperiment, ExperimentOutcome
from src.shapes import rescale_to_volume

logger = logging.getLogger(__name__)


class WulffNoncriticalExperiment(BaseExperiment):
    name = "wulff-noncritical"

    def run(self) -> ExperimentOutcome:
        f = self.cfg.surface_tension()
        params = self.params(n=2, alpha=1.0, epsilon=0.1)
        critical = self.option("expect", "critical" if isinstance(f, Euclidean) else "noncritical") == "critical"
        wulff = build_wulff(f, self.spec.boundary_samples)
        K = rescale_to_volume(wulff.to_shape(), 1.0)
        report = el_residual(K, f, params, self.spec)
        for row in report.rows():
            self.record("el_profile", row)

        if critical:
            threshold = self.cfg.threshold("residual_max")
            passed = report.residual <= threshold
        else:
            threshold = self.cfg.threshold("residual_min")
            passed = report.residual >= threshold
        logger.info("%s Wulff shape: EL residual %.6g (threshold %g)", f.variant, report.residual, threshold)
        summary = {
            "tension": f.to_dict(),
            "expect": "critical" if critical else "noncritical",
            "threshold": threshold,
            **report.to_dict(),
        }
        return self.outcome(passed, summary)
