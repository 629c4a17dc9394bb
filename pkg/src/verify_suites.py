"""
Invariant suites
Named property checks run by the verify command: closed forms, scaling laws,
slicing identities, Lipschitz bounds, dual-potential maximality and curvature
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from src.anisotropy import Euclidean, PerturbedEuclidean2D, Quadratic, build_wulff, half_l1
from src.energy import EnergyParams, aniso_curvature, first_variation_fd, first_variation_Ui, rectangle_derivatives, rectangle_energy_d2
from src.parallel import ordered_map
from src.potentials import (
    PowerKernel,
    dual_potential,
    interaction_energy,
    lipschitz_gap_bound,
    potential_at,
    potential_constancy_residual,
    riesz_bound,
    riesz_potential,
    slicing_inequality,
)
from src.quadrature import QuadratureSpec
from src.shapes import Ball, Box, Polygon2D, SlicingPlane, StarDomain, rescale_to_volume, slice_shape, symmetric_difference_measure

logger = logging.getLogger(__name__)

RANDOM_VERTICES = 8


@dataclass
class CheckResult:
    """One named check: passed when value <= threshold (or >= for lower bounds)"""

    suite: str
    name: str
    value: float
    threshold: float
    lower_bound: bool = False
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.value - self.threshold if self.lower_bound else self.threshold - self.value

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value)) and self.margin >= 0.0

    def row(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "check": self.name,
            "value": self.value,
            "threshold": self.threshold,
            "margin": self.margin,
            "passed": self.passed,
        }


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _random_polygons(rng: np.random.Generator, count: int) -> List[Polygon2D]:
    return [Polygon2D.random_star(rng, RANDOM_VERTICES) for _ in range(count)]


def suite_ball(spec: QuadratureSpec, rng: np.random.Generator) -> List[CheckResult]:
    """Center potential of disks against n w_n r^{n-alpha}/(n-alpha), and boundary constancy"""
    out = []
    for r, alpha in ((1.0, 0.5), (2.0, 1.0), (0.5, 1.5), (1.5, 0.25)):
        expected = 2.0 * np.pi * r ** (2.0 - alpha) / (2.0 - alpha)
        value = riesz_potential(Ball(2, r), np.zeros(2), alpha, spec)
        out.append(CheckResult("ball", f"v_B(0) r={r} alpha={alpha}", _rel(value, expected), 1e-3, details={"value": value, "expected": expected}))
    report = potential_constancy_residual(Ball(2, 1.0), 1.0, spec)
    out.append(CheckResult("ball", "boundary constancy r=1 alpha=1", report.residual, 1e-3))
    return out


def suite_bounded(spec: QuadratureSpec, rng: np.random.Generator) -> List[CheckResult]:
    """max v_E over interior sample points never exceeds the ball bound"""
    shapes = [Box([1.0, 1.0]), Box([2.0, 0.5]), Box([1.0, 1.0, 1.0])] + _random_polygons(rng, 3)
    out = []
    for k, E in enumerate(shapes):
        lo, hi = E.bounding_box()
        trial = lo + (hi - lo) * rng.random((64, E.dim))
        points = np.vstack([E.barycenter()[None], trial[E.contains(trial)][: 16 if E.dim == 2 else 4]])
        for alpha in (0.5, 1.0):
            worst = float(potential_at(E, points, PowerKernel(alpha), spec).max())
            bound = riesz_bound(E, alpha)
            out.append(CheckResult("bounded", f"{E.variant}#{k} alpha={alpha}", worst / bound, 1.0 + 1e-6, details={"max": worst, "bound": bound}))
    return out


def suite_crystalline(spec: QuadratureSpec, rng: np.random.Generator) -> List[CheckResult]:
    """P_f(R_a) = a + 1/a for f = 1/2 ||.||_1, exact for boxes and their polygons"""
    f = half_l1(2)
    out = []
    for a in np.logspace(np.log10(0.25), np.log10(4.0), 20):
        R = Box([a, 1.0 / a])
        expected = a + 1.0 / a
        worst = max(_rel(R.aniso_perimeter(f), expected), _rel(R.to_polygon().aniso_perimeter(f), expected))
        out.append(CheckResult("crystalline", f"P_f(R_a) a={a:.6g}", worst, 1e-12))
    square = build_wulff(f).to_shape()
    out.append(CheckResult("crystalline", "P_f(square)", abs(square.aniso_perimeter(f) - 2.0), 1e-12))
    return out


def suite_rectangle(spec: QuadratureSpec, rng: np.random.Generator, epsilons: Sequence[float] = (1e-3, 1e-2, 1e-1)) -> List[CheckResult]:
    """Criticality of R_1 for V and eps-independence of C(alpha) in d^2E/da^2 = 2 - C eps"""
    out = []
    for alpha in (0.5, 1.0, 1.5):
        d = rectangle_derivatives(alpha, epsilons[0], spec)
        out.append(CheckResult("rectangle", f"dV/da alpha={alpha}", abs(d.d_interaction), 1e-4))
        d2E = [rectangle_energy_d2(alpha, eps, spec) for eps in epsilons]
        measured = [(2.0 - v) / eps for v, eps in zip(d2E, epsilons)]
        spread = (max(measured) - min(measured)) / max(abs(np.mean(measured)), 1e-300)
        out.append(CheckResult("rectangle", f"C(alpha) spread alpha={alpha}", spread, 0.02, details={"C": measured}))
        out.append(CheckResult("rectangle", f"d2E/da2 eps={epsilons[0]} alpha={alpha}", d2E[0], 0.5, lower_bound=True))
    return out


def suite_scaling(spec: QuadratureSpec, rng: np.random.Generator, count: int = 10, alpha: float = 1.0) -> List[CheckResult]:
    """V(rE) = r^{2n-alpha} V(E) and P_f(rE) = r^{n-1} P_f(E) on random polygons"""
    fs = (Euclidean(2), half_l1(2))

    def check(E):
        rows = []
        v = interaction_energy(E, alpha, spec).value
        for r in (0.5, 2.0):
            rE = E.dilated(r)
            vr = interaction_energy(rE, alpha, spec).value
            rows.append(("V", r, abs(vr - r ** (4.0 - alpha) * v) / vr))
            for f in fs:
                rows.append((f"P_{f.variant}", r, _rel(rE.aniso_perimeter(f), r * E.aniso_perimeter(f))))
        return rows

    out = []
    for k, rows in enumerate(ordered_map(check, _random_polygons(rng, count))):
        for what, r, err in rows:
            threshold = 1e-4 if what == "V" else 1e-12
            out.append(CheckResult("scaling", f"{what} polygon#{k} r={r}", err, threshold))
    return out


def suite_slicing(spec: QuadratureSpec, rng: np.random.Generator, count: int = 20) -> List[CheckResult]:
    """P_f(E+) + P_f(E-) - P_f(E) = (f(nu) + f(-nu)) H^1(E n H), and the slicing inequality for small squares"""
    fs = (Euclidean(2), half_l1(2), Quadratic(np.diag([1.0, 2.0])))
    out = []
    for k, E in enumerate(_random_polygons(rng, count)):
        phi = rng.uniform(0.0, 2.0 * np.pi)
        nu = np.array([np.cos(phi), np.sin(phi)])
        heights = E.vertices @ nu
        plane = SlicingPlane(tuple(nu), float(rng.uniform(heights.min(), heights.max())))
        plus, minus, cut = slice_shape(E, plane)
        for f in fs:
            pieces = sum(p.aniso_perimeter(f) for p in (plus, minus) if p is not None)
            jump = float(f.value(nu) + f.value(-nu)) * cut
            defect = abs(pieces - E.aniso_perimeter(f) - jump) / max(1.0, E.aniso_perimeter(f))
            out.append(CheckResult("slicing", f"identity polygon#{k} f={f.variant}", defect, 1e-12))
        volumes = sum(p.volume() for p in (plus, minus) if p is not None)
        out.append(CheckResult("slicing", f"volume polygon#{k}", _rel(volumes, E.volume()), 1e-12))
    f = half_l1(2)
    for m in (1e-2, 1e-1):
        check = slicing_inequality(rescale_to_volume(Box([1.0, 1.0]), m), f, 1.0, spec)
        out.append(CheckResult("slicing", f"inequality square m={m}", check.ratio, 1.0, details=check.to_dict()))
    return out


def suite_lipschitz(spec: QuadratureSpec, rng: np.random.Generator, count: int = 20, alpha: float = 1.0) -> List[CheckResult]:
    """|V(E) - V(F)| <= c_{n,alpha} m^{(n-alpha)/n} |E sym-diff F| on random pairs"""

    def check(pair):
        E, F = pair
        return lipschitz_gap_bound(E, F, alpha, spec)

    polys = _random_polygons(rng, 2 * count)
    pairs = list(zip(polys[::2], polys[1::2]))
    out = []
    for k, report in enumerate(ordered_map(check, pairs)):
        ratio = report.gap / report.bound if report.bound > 0 else 0.0
        out.append(CheckResult("lipschitz", f"pair#{k}", ratio, 1.0, details=report.to_dict()))
    return out


DUAL_EXPONENTS = {1: 0.5, 2: 1.0, 3: None}


def suite_dual(spec: QuadratureSpec, rng: np.random.Generator, count: int = 20) -> List[CheckResult]:
    """U_i(K) > U_i(E) for same-volume competitors, and first variations at K"""
    f = half_l1(2)
    K = build_wulff(f).to_shape()
    competitors = [rescale_to_volume(p, K.volume()) for p in _random_polygons(rng, count)]
    out = []
    for i, exponent in DUAL_EXPONENTS.items():
        top = dual_potential(K, f, i, exponent, spec).value

        def value(E, i=i, exponent=exponent):
            return dual_potential(E, f, i, exponent, spec).value

        for k, (E, u) in enumerate(zip(competitors, ordered_map(value, competitors))):
            strict = symmetric_difference_measure(E, K) > 0.01
            out.append(
                CheckResult("dual", f"U_{i}(K) > U_{i}(E#{k})", top - u, 0.0 if strict else -spec.tol, lower_bound=True, details={"U_K": top, "U_E": u})
            )

    smooth = build_wulff(Euclidean(2), 64)
    u = 0.3 + 0.2 * np.cos(2 * smooth.angles) + 0.1 * np.sin(3 * smooth.angles)
    params = EnergyParams(n=2, alpha=0.5, beta=1.0, epsilon=1.0)
    for i in DUAL_EXPONENTS:
        exact = first_variation_Ui(smooth, u, i, params)
        fd = first_variation_fd(smooth, u, i, params, spec)
        if i == 3:
            out.append(CheckResult("dual", "delta U_3(K) = 0", abs(fd), 1e-6))
        else:
            out.append(CheckResult("dual", f"delta U_{i}(K)", _rel(fd, exact), 1e-3, details={"fd": fd, "exact": exact}))
    return out


def suite_curvature(spec: QuadratureSpec, rng: np.random.Generator, samples: int = 512, r: float = 1.5) -> List[CheckResult]:
    """H^f on the boundary of K_r equals 1/r for smooth tensions"""
    tensions = (Euclidean(2), Quadratic(np.diag([1.0, 2.0])), PerturbedEuclidean2D(0.05, ((4, 1.0),)))
    out = []
    for f in tensions:
        K_r = StarDomain(build_wulff(f, samples), np.zeros(samples), scale=r)
        H = aniso_curvature(K_r, f, samples)
        out.append(CheckResult("curvature", f"H^f(K_r) f={f.variant}", float(np.abs(H * r - 1.0).max()), 1e-2))
    return out


def suite_wulff(spec: QuadratureSpec, rng: np.random.Generator, count: int = 10) -> List[CheckResult]:
    """Wulff inequality P_f(E) >= n |E|^{(n-1)/n} |K|^{1/n}, with equality on dilates of K"""
    tensions = (Euclidean(2), Quadratic(np.diag([1.0, 2.0])), half_l1(2))
    polys = _random_polygons(rng, count)
    out = []
    for f in tensions:
        K = build_wulff(f)
        for r in (0.5, 2.0):
            E = K.to_shape().dilated(r)
            lower = 2.0 * np.sqrt(E.volume() * K.volume)
            out.append(CheckResult("wulff", f"equality rK r={r} f={f.variant}", _rel(E.aniso_perimeter(f), lower), 1e-6))
        for k, E in enumerate(polys):
            lower = 2.0 * np.sqrt(E.volume() * K.volume)
            out.append(CheckResult("wulff", f"inequality polygon#{k} f={f.variant}", E.aniso_perimeter(f) - lower, -1e-9, lower_bound=True))
    return out


SUITES: Dict[str, Callable[..., List[CheckResult]]] = {
    "ball": suite_ball,
    "bounded": suite_bounded,
    "crystalline": suite_crystalline,
    "rectangle": suite_rectangle,
    "scaling": suite_scaling,
    "slicing": suite_slicing,
    "lipschitz": suite_lipschitz,
    "dual": suite_dual,
    "curvature": suite_curvature,
    "wulff": suite_wulff,
}


@dataclass
class SuiteReport:
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def rows(self) -> List[Dict[str, Any]]:
        return [c.row() for c in self.checks]

    def to_dict(self) -> Dict[str, Any]:
        suites: Dict[str, Dict[str, Any]] = {}
        for c in self.checks:
            entry = suites.setdefault(c.suite, {"checks": 0, "failed": 0, "worst_margin": float("inf")})
            entry["checks"] += 1
            entry["failed"] += 0 if c.passed else 1
            entry["worst_margin"] = min(entry["worst_margin"], c.margin)
        return {"passed": self.passed, "suites": suites, "failures": [c.row() for c in self.failures]}


def run_suites(names: Optional[Sequence[str]], spec: QuadratureSpec) -> SuiteReport:
    """
    Run named suites, all of them when names is empty

    Every suite draws its random inputs from its own generator seeded by
    spec.seed, so selecting a subset does not change the inputs of the others.

    Args:
        names: Suite names
        spec: Quadrature controls

    Returns:
        SuiteReport
    """
    names = list(names) if names else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise VerifySuiteError(f"unknown suites {unknown}, expected some of {sorted(SUITES)}")
    checks: List[CheckResult] = []
    for name in names:
        logger.info("running suite %s", name)
        results = SUITES[name](spec, np.random.default_rng(spec.seed))
        failed = sum(not c.passed for c in results)
        logger.info("suite %s: %d checks, %d failed", name, len(results), failed)
        checks.extend(results)
    return SuiteReport(checks)


class VerifySuiteError(Exception):
    """Exception raised for unknown or misconfigured verification suites."""
    pass
