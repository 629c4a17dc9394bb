"""
Energy minimization
Golden-section and restarted simplex searches over shape families, sweeps,
and the truncation non-optimality check
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

import config
from src.anisotropy import SurfaceTension
from src.energy import EnergyBreakdown, EnergyError, EnergyParams, el_residual, total_energy
from src.families import FamilyError, RectangleFamily, ShapeFamily, StarFourierFamily
from src.parallel import ordered_map
from src.potentials import PotentialError
from src.quadrature import QuadratureSpec
from src.shapes import Ball, Polygon2D, Shape, ShapeError, polygonal_part, rescale_to_volume

logger = logging.getLogger(__name__)

PRESCAN_POINTS = 64
BRACKET_TOL = 1e-6
RESTARTS = 5
TIE_TOL = 1e-12
BALL_VERTICES = 64


@dataclass
class OptimizationReport:
    """Result of one minimization over a family"""

    family: str
    parameters: np.ndarray
    shape: Shape
    breakdown: EnergyBreakdown
    converged: bool
    wall_time: float
    trace: List[Dict[str, Any]] = field(default_factory=list, repr=False)
    residual: Optional[float] = None
    boundary: bool = False
    described: Dict[str, float] = field(default_factory=dict)
    wulff_energy: Optional[float] = None

    @property
    def energy(self) -> float:
        return self.breakdown.total

    def row(self, sweep_value: Optional[float] = None) -> Dict[str, Any]:
        """Flat CSV row"""
        out: Dict[str, Any] = {}
        if sweep_value is not None:
            out["sweep"] = sweep_value
        out.update(self.described)
        out.update(
            {
                "P_f": self.breakdown.perimeter,
                "nonlocal": self.breakdown.nonlocal_term,
                "total": self.breakdown.total,
                "residual": self.residual,
                "converged": self.converged,
            }
        )
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "parameters": self.parameters.tolist(),
            "named_parameters": self.described,
            "energy": self.breakdown.to_dict(),
            "converged": self.converged,
            "boundary": self.boundary,
            "residual": self.residual,
            "iterations": len(self.trace),
            "wulff_energy": self.wulff_energy,
        }


def _traced(family: ShapeFamily, params: EnergyParams, spec: QuadratureSpec, kind: str, trace: list):
    def objective(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        value = family.energy(x, params, spec, kind).total
        trace.append({"parameters": x.tolist(), "energy": value})
        return value

    return objective


def _residual(family: ShapeFamily, shape: Shape, params: EnergyParams, spec: QuadratureSpec, kind: str) -> Optional[float]:
    if not isinstance(family, StarFourierFamily) or kind != "V":
        return None
    try:
        return el_residual(shape, family.tension, params, spec).residual
    except (EnergyError, PotentialError) as e:
        logger.warning("EL residual unavailable: %s", e)
        return None


def _report(family, x, params, spec, kind, converged, start, trace, boundary=False) -> OptimizationReport:
    x = family.clip(np.atleast_1d(np.asarray(x, dtype=float)))
    shape = family.shape(x)
    return OptimizationReport(
        family=family.variant,
        parameters=x,
        shape=shape,
        breakdown=family.energy(x, params, spec, kind),
        converged=converged,
        wall_time=time.perf_counter() - start,
        trace=trace,
        residual=_residual(family, shape, params, spec, kind),
        boundary=boundary,
        described=family.describe(x),
        wulff_energy=family.energy(family.initial(), params, spec, kind).total,
    )


def _bracket(objective, grid: np.ndarray, values: np.ndarray, k: int):
    """Three-point bracket around prescan index k; ties with a neighbour move the middle point between them"""
    a, b, c = grid[k - 1], grid[k], grid[k + 1]
    fa, fb, fc = values[k - 1], values[k], values[k + 1]
    if fb == fc:
        b = np.sqrt(grid[k] * grid[k + 1])
        fb = objective(b)
    elif fb == fa:
        b = np.sqrt(grid[k - 1] * grid[k])
        fb = objective(b)
    if fb < fa and fb < fc:
        return a, b, c
    return a, None, c


def minimize_1d(family: RectangleFamily, params: EnergyParams, spec: QuadratureSpec, nonlocal_kind: str = "V") -> OptimizationReport:
    """
    Golden-section search over a one-parameter family

    A 64-point log-spaced prescan picks the bracket; a minimum at either end
    of the range is reported with boundary=True and converged=False.

    Args:
        family: One-parameter family, usually RectangleFamily
        params: Energy parameters
        spec: Quadrature controls
        nonlocal_kind: Nonlocal term of the energy

    Returns:
        OptimizationReport
    """
    if family.dimension != 1:
        raise OptimizationError("minimize_1d needs a one-parameter family")
    start = time.perf_counter()
    trace: List[Dict[str, Any]] = []
    objective = _traced(family, params, spec, nonlocal_kind, trace)
    lo, hi = family.bounds()[0]
    grid = np.exp(np.linspace(np.log(lo), np.log(hi), PRESCAN_POINTS))
    values = np.array([objective(a) for a in grid])
    k = int(np.argmin(values))
    if k == 0 or k == len(grid) - 1:
        logger.warning("%s: minimum at the end of the range a = %g", family.variant, grid[k])
        return _report(family, grid[k], params, spec, nonlocal_kind, False, start, trace, boundary=True)
    a, b, c = _bracket(objective, grid, values, k)
    if b is None:
        logger.warning("%s: flat prescan around a = %g, falling back to bounded search", family.variant, grid[k])
        res = minimize_scalar(objective, bounds=(a, c), method="bounded", options={"xatol": BRACKET_TOL})
    else:
        res = minimize_scalar(objective, bracket=(a, b, c), method="golden", tol=BRACKET_TOL)
    logger.debug("golden section: a* = %.10g after %d evaluations", res.x, res.nfev)
    return _report(family, res.x, params, spec, nonlocal_kind, bool(res.success), start, trace)


def _simplex(family: ShapeFamily, x0: np.ndarray) -> np.ndarray:
    lo, hi = np.array(family.bounds()).T
    step = 0.1 * (hi - lo)
    simplex = [x0]
    for j in range(x0.size):
        v = x0.copy()
        v[j] = v[j] + step[j] if v[j] + step[j] <= hi[j] else v[j] - step[j]
        simplex.append(v)
    return np.array(simplex)


def minimize_nd(
    family: ShapeFamily,
    params: EnergyParams,
    spec: QuadratureSpec,
    nonlocal_kind: str = "V",
    restarts: int = RESTARTS,
    seed: Optional[int] = None,
    x0: Optional[np.ndarray] = None,
    max_evaluations: int = 2000,
) -> OptimizationReport:
    """
    Nelder-Mead with bounds, from the Wulff start (or x0) plus seeded random restarts

    The lowest energy wins; ties go to the smallest parameter norm.

    Args:
        family: Shape family with at most 16 parameters
        params: Energy parameters
        spec: Quadrature controls
        nonlocal_kind: Nonlocal term of the energy
        restarts: Number of random restarts
        seed: Restart seed, defaults to spec.seed
        x0: Warm start replacing the Wulff start
        max_evaluations: Energy evaluations per trajectory

    Returns:
        OptimizationReport; converged is False when the winning trajectory ran out of budget
    """
    if family.dimension > 16:
        raise OptimizationError(f"parameter dimension {family.dimension} exceeds 16")
    start_time = time.perf_counter()
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    starts = [family.initial() if x0 is None else family.clip(np.asarray(x0, dtype=float))]
    starts += [family.random_start(rng) for _ in range(restarts)]

    def run(x_start):
        trace: List[Dict[str, Any]] = []
        objective = _traced(family, params, spec, nonlocal_kind, trace)
        res = minimize(
            objective,
            x_start,
            method="Nelder-Mead",
            bounds=family.bounds(),
            options={
                "initial_simplex": _simplex(family, x_start),
                "xatol": BRACKET_TOL,
                "fatol": 1e-12,
                "maxfev": max_evaluations,
            },
        )
        return family.clip(res.x), float(res.fun), bool(res.success), trace

    results = ordered_map(run, starts)
    best = 0
    for k, (x, value, _, _) in enumerate(results):
        bx, bv = results[best][0], results[best][1]
        if value < bv - TIE_TOL or (abs(value - bv) <= TIE_TOL and np.linalg.norm(x) < np.linalg.norm(bx)):
            best = k
    x, value, success, trace = results[best]
    if not success:
        logger.warning("%s: simplex search stopped before convergence", family.variant)
    logger.info("%s: best energy %.12g from start %d", family.variant, value, best)
    return _report(family, x, params, spec, nonlocal_kind, success, start_time, trace)


def minimize_family(family: ShapeFamily, params: EnergyParams, spec: QuadratureSpec, nonlocal_kind: str = "V", **options) -> OptimizationReport:
    """Dispatch to minimize_1d or minimize_nd by parameter count"""
    if family.dimension == 1:
        return minimize_1d(family, params, spec, nonlocal_kind)
    return minimize_nd(family, params, spec, nonlocal_kind, **options)


@dataclass
class TruncationRow:
    rho: float
    inner_volume: float
    outer_volume: float
    small_gain: bool
    small: bool
    energy: Optional[float] = None
    truncated_energy: Optional[float] = None
    improved: bool = False
    certified: bool = False

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class TruncationReport:
    rows: List[TruncationRow]
    perimeter_error: float
    threshold: float

    @property
    def certified(self) -> bool:
        return any(r.certified for r in self.rows)

    def to_dict(self):
        return {
            "rows": [r.to_dict() for r in self.rows],
            "perimeter_error": self.perimeter_error,
            "threshold": self.threshold,
            "certified": self.certified,
        }


def truncation_check(
    F: Polygon2D,
    epsilon: float,
    f: SurfaceTension,
    alpha: float,
    rhos: Sequence[float],
    spec: QuadratureSpec,
    delta: float = 0.05,
) -> TruncationReport:
    """
    Split F by balls B_rho and test whether keeping the inner piece lowers the energy

    B_rho is a regular 64-gon centered at the barycenter of the largest
    component of F. A split is admissible when
    P_f(F1) + P_f(F2) - P_f(F) <= P_f(F2)/2 and
    |F2| <= delta min(1, eps^{-n/(n+1-alpha)}); for those, the energy of F1
    dilated to unit volume is compared with that of F.

    Args:
        F: Planar polygon, rescaled to unit volume if needed
        epsilon: Nonlocal weight
        f: Surface tension
        alpha: Riesz exponent
        rhos: Ball radii
        spec: Quadrature controls
        delta: Smallness constant for the cut-off piece

    Returns:
        TruncationReport
    """
    if not isinstance(F, Polygon2D):
        raise OptimizationError("truncation checks need a polygon")
    if abs(F.volume() - 1.0) > 1e-12:
        logger.info("truncation check: rescaling F from volume %.6g to 1", F.volume())
        F = rescale_to_volume(F, 1.0)
    n = 2
    params = EnergyParams(n=n, alpha=alpha, epsilon=epsilon)
    threshold = delta * min(1.0, epsilon ** (-n / (n + 1 - alpha))) if epsilon > 0 else delta
    largest = max(F.components(), key=lambda c: c.volume())
    center = largest.barycenter()
    per_f = F.aniso_perimeter(f)
    energy_F = None
    rows = []
    worst_perimeter = 0.0
    for rho in rhos:
        ball = Polygon2D.regular(BALL_VERTICES, rho, center)
        worst_perimeter = max(worst_perimeter, abs(Ball(2, rho).aniso_perimeter(f) - ball.aniso_perimeter(f)))
        inner = polygonal_part(F.geometry.intersection(ball.geometry))
        outer = polygonal_part(F.geometry.difference(ball.geometry))
        if inner is None or outer is None:
            rows.append(TruncationRow(rho, inner.volume() if inner else 0.0, outer.volume() if outer else 0.0, False, False))
            continue
        gain = inner.aniso_perimeter(f) + outer.aniso_perimeter(f) - per_f
        small_gain = gain <= 0.5 * outer.aniso_perimeter(f)
        small = outer.volume() <= threshold
        row = TruncationRow(rho, inner.volume(), outer.volume(), bool(small_gain), bool(small))
        if small_gain and small:
            if energy_F is None:
                energy_F = total_energy(F, f, params, spec)
            hat = total_energy(inner, f, params, spec)
            row.energy = energy_F.total
            row.truncated_energy = hat.total
            row.improved = hat.total + hat.error < energy_F.total - energy_F.error
            row.certified = row.improved
        rows.append(row)
    return TruncationReport(rows=rows, perimeter_error=worst_perimeter, threshold=threshold)


@dataclass
class ScanPoint:
    value: float
    report: Optional[OptimizationReport] = None
    error: Optional[str] = None

    def row(self) -> Dict[str, Any]:
        if self.report is None:
            return {"sweep": self.value, "error": self.error}
        out = self.report.row(self.value)
        out["error"] = ""
        return out


def _sweep_params(params: EnergyParams, key: str, value: float) -> EnergyParams:
    if key not in ("epsilon", "m"):
        raise OptimizationError(f"Unsupported sweep key: {key}")
    doc = params.model_dump(exclude={"m", "epsilon"})
    doc[key] = value
    return EnergyParams(**doc)


def scan(
    family: ShapeFamily,
    params: EnergyParams,
    sweep: Sequence[float],
    spec: QuadratureSpec,
    nonlocal_kind: str = "V",
    key: str = "epsilon",
    parallel: bool = False,
) -> List[ScanPoint]:
    """
    Minimize at every sweep value of eps (or m)

    Sequential sweeps warm-start each point from the previous minimizer;
    parallel sweeps start every point cold. A failing point is recorded and
    the sweep continues.
    """
    if not sweep:
        raise OptimizationError("sweep is empty")

    def solve(value, x0=None):
        try:
            p = _sweep_params(params, key, value)
            if family.dimension == 1:
                report = minimize_1d(family, p, spec, nonlocal_kind)
            else:
                report = minimize_nd(family, p, spec, nonlocal_kind, x0=x0)
            return ScanPoint(value, report)
        except (EnergyError, PotentialError, ShapeError, FamilyError, OptimizationError, ValueError) as e:
            logger.warning("sweep point %s = %g failed: %s", key, value, e)
            return ScanPoint(value, error=str(e))

    if parallel:
        return ordered_map(solve, list(sweep), config.ANISODROP_THREADS)
    points = []
    warm = None
    for value in sweep:
        point = solve(value, warm)
        if point.report is not None:
            warm = point.report.parameters
        points.append(point)
    return points


def roundtrip_check(family: ShapeFamily, report: OptimizationReport, params: EnergyParams, spec: QuadratureSpec, nonlocal_kind: str = "V") -> float:
    """Relative difference between the reported energy and a fresh evaluation at the stored parameters"""
    again = family.energy(report.parameters, params, spec, nonlocal_kind).total
    return abs(again - report.energy) / max(1.0, abs(report.energy))


class OptimizationError(Exception):
    """Exception raised for errors in energy minimization."""
    pass
