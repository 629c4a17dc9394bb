"""
Fuglede experiment
Perimeter deficit against ||u||^2_{H^1} for small Fourier perturbations of a smooth Wulff shape
"""
import logging

import numpy as np

from src.anisotropy import build_wulff
from src.energy import fuglede_ratio
from src.experiments.base import BaseExperiment, ExperimentOutcome

logger = logging.getLogger(__name__)


class FugledeExperiment(BaseExperiment):
    name = "fuglede"

    def run(self) -> ExperimentOutcome:
        f = self.cfg.surface_tension()
        K = build_wulff(f, self.spec.boundary_samples)
        deltas = self.option("deltas", [0.002, 0.005, 0.01])
        modes = self.option("modes", [2, 3, 4])
        low, high = self.cfg.threshold("ratio_min"), self.cfg.threshold("ratio_max")

        passed = True
        ratios = []
        for k in modes:
            for delta in deltas:
                u = float(delta) * np.cos(int(k) * K.angles)
                report = fuglede_ratio(K, u, f)
                ok = report.deficit > 0 and not report.degenerate and low <= report.ratio <= high
                self.record("fuglede", {"mode": int(k), "delta": float(delta), **report.to_dict(), "passed": ok})
                passed &= ok
                ratios.append(report.ratio)
        summary = {
            "tension": f.to_dict(),
            "ratio_min_observed": float(np.nanmin(ratios)) if ratios else None,
            "ratio_max_observed": float(np.nanmax(ratios)) if ratios else None,
            "accepted_range": [low, high],
        }
        return self.outcome(passed, summary)
