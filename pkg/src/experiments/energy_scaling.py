"""
Energy scaling experiment
Minimum over N of the N-drop split bound scales like eps^{1/(n+1-alpha)}
"""
import logging

import numpy as np

from src.anisotropy import build_wulff
from src.energy import ScalingRegimeError, minimize_over_N, split_scaling_slope
from src.experiments.base import BaseExperiment, ExperimentOutcome

logger = logging.getLogger(__name__)


class EnergyScalingExperiment(BaseExperiment):
    name = "energy-scaling"

    def run(self) -> ExperimentOutcome:
        f = self.cfg.surface_tension()
        wulff_volume = build_wulff(f).volume
        cases = self.option("cases", [[2, 1.0], [2, 0.5]])
        low, high, count = self.option("epsilon_range", [1e-3, 1e3, 25])
        epsilons = np.logspace(np.log10(low), np.log10(high), int(count))
        n_max = int(self.option("n_max", 10**6))
        min_count = int(self.option("min_count", 10))
        rtol = self.cfg.threshold("slope_rtol")

        passed, converged = True, True
        fits = []
        for n, alpha in cases:
            n, alpha = int(n), float(alpha)
            if n != f.dim:
                logger.warning("case n=%d skipped: tension has dimension %d", n, f.dim)
                continue
            for eps in epsilons:
                N, value = minimize_over_N(float(eps), wulff_volume, alpha, n, n_max)
                self.record("split_bound", {"n": n, "alpha": alpha, "epsilon": float(eps), "N_star": N, "energy": value})
            target = 1.0 / (n + 1 - alpha)
            try:
                slope = split_scaling_slope(epsilons, wulff_volume, alpha, n, n_max, min_count)
            except ScalingRegimeError as e:
                logger.warning("n=%d alpha=%g: %s", n, alpha, e)
                fits.append({"n": n, "alpha": alpha, "slope": None, "target": target, "relative_error": None})
                passed, converged = False, False
                continue
            error = abs(slope - target) / target
            fits.append({"n": n, "alpha": alpha, "slope": slope, "target": target, "relative_error": error})
            logger.info("n=%d alpha=%g: slope %.6f vs %.6f", n, alpha, slope, target)
            passed &= error <= rtol
        return self.outcome(passed and bool(fits), {"wulff_volume": wulff_volume, "fits": fits, "tolerance": rtol}, converged)
