"""
Capacity probe
Boundary spread of the potential of K under the kernels f_*^{-alpha} and |.|^{-alpha}; records only
"""
import logging

import numpy as np

from src.anisotropy import Quadratic, build_wulff, half_l1
from src.experiments.base import BaseExperiment, ExperimentOutcome
from src.potentials import PowerKernel, potential_at

logger = logging.getLogger(__name__)


class CapacityProbeExperiment(BaseExperiment):
    name = "capacity-probe"

    def run(self) -> ExperimentOutcome:
        alphas = self.option("alphas", [0.5, 1.0, 1.5])
        tensions = {"square": half_l1(2), "quadratic": Quadratic(np.diag([1.0, 2.0]))}
        for label, f in tensions.items():
            K = build_wulff(f, self.spec.boundary_samples).to_shape()
            pts = K.boundary_points(max(256, self.spec.boundary_samples))
            for alpha in alphas:
                for kernel_name, kernel in (("anisotropic", PowerKernel(float(alpha), f)), ("euclidean", PowerKernel(float(alpha)))):
                    values = potential_at(K, pts, kernel, self.spec)
                    row = {
                        "tension": label,
                        "alpha": float(alpha),
                        "kernel": kernel_name,
                        "maximum": float(values.max()),
                        "minimum": float(values.min()),
                        "residual": float(values.max() - values.min()),
                    }
                    self.record("capacity", row)
                    logger.info("%s %s alpha=%g: residual %.6g", label, kernel_name, alpha, row["residual"])
        return self.outcome(True, {"alphas": list(alphas), "rows": len(self.tables.get("capacity", []))})
