"""
Riesz constancy experiment
Spread of v_E over the boundary: zero on disks, bounded away from zero on ellipses and squares
"""
import logging

import numpy as np

from src.anisotropy import Quadratic, build_wulff
from src.experiments.base import BaseExperiment, ExperimentOutcome
from src.oracle import mc_potential
from src.potentials import potential_constancy_residual, riesz_potential_many
from src.shapes import Ball, Box

logger = logging.getLogger(__name__)


class RieszConstancyExperiment(BaseExperiment):
    name = "riesz-constancy"

    def _shapes(self):
        ellipse = build_wulff(Quadratic(np.diag([1.0, 2.0])), self.spec.boundary_samples).to_shape()
        return {
            "ball": (Ball(2, 1.0), self.cfg.threshold("ball_max"), False),
            "ellipse": (ellipse, self.cfg.threshold("ellipse_min"), True),
            "square": (Box([1.0, 1.0]), self.cfg.threshold("square_min"), True),
        }

    def _oracle(self, E, alpha):
        """Monte Carlo check of the extreme boundary values"""
        pts = E.boundary_points(max(256, self.spec.boundary_samples))
        values = riesz_potential_many(E, pts, alpha, self.spec)
        out = {}
        for label, k in (("max", int(np.argmax(values))), ("min", int(np.argmin(values)))):
            est = mc_potential(E, pts[k], alpha, self.spec.mc_samples, self.spec.seed)
            out[f"oracle_{label}"] = est.value
            out[f"oracle_{label}_stderr"] = est.stderr
            out[f"oracle_{label}_agrees"] = est.agrees_with(float(values[k]), 1e-3)
        return out

    def run(self) -> ExperimentOutcome:
        alphas = self.option("alphas", [0.5, 1.0, 1.5])
        use_oracle = self.option("oracle", False)
        passed = True
        for label, (E, threshold, lower) in self._shapes().items():
            for alpha in alphas:
                report = potential_constancy_residual(E, float(alpha), self.spec)
                ok = report.residual >= threshold if lower else report.residual <= threshold
                row = {"shape": label, "alpha": float(alpha), **report.to_dict(), "threshold": threshold, "passed": ok}
                if use_oracle:
                    row.update(self._oracle(E, float(alpha)))
                    ok &= row["oracle_max_agrees"] and row["oracle_min_agrees"]
                self.record("constancy", row)
                logger.info("%s alpha=%g: residual %.6g", label, alpha, report.residual)
                passed &= ok
        summary = {"alphas": list(alphas), "oracle": use_oracle, "rows": len(self.tables.get("constancy", []))}
        return self.outcome(passed, summary)
