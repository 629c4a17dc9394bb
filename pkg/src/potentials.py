"""
Nonlocal potentials
Riesz potentials v_E, interaction energies V and V_f, and the dual-norm potentials U_1, U_2, U_3
"""
import itertools
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from math import pi
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.signal import fftconvolve
from scipy.spatial import cKDTree
from scipy.special import betainc

from src.anisotropy import Euclidean, Quadratic, SurfaceTension
from src.quadrature import (
    QuadratureSpec,
    composite_gauss,
    fan_integral,
    graded_breaks,
    triangle_fan_rule,
)
from src.shapes import (
    Ball,
    Box,
    GridMask,
    Polygon2D,
    Shape,
    StarDomain,
    symmetric_difference_measure,
    unit_ball_volume,
)

logger = logging.getLogger(__name__)

BOUND_RTOL = 1e-6
NEAR_SPACINGS = 4.0
GRID_NEAR = 3
DESCENT_STOP = 1e-6
DESCENT_BUDGET = 4000


class QuadratureResult(NamedTuple):
    value: float
    error: float


class Kernel(ABC):
    """Interaction kernel k(z), z = integration point minus evaluation point"""

    tension: Optional[SurfaceTension] = None

    @property
    def isotropic(self) -> bool:
        return self.tension is None or isinstance(self.tension, Euclidean)

    def gauge(self, z: np.ndarray) -> np.ndarray:
        """f_*(z), or |z| for isotropic kernels"""
        if self.isotropic:
            return np.linalg.norm(z, axis=-1)
        return self.tension.dual(z)

    @property
    def kinks(self) -> Optional[np.ndarray]:
        return None if self.tension is None else self.tension.kink_directions()

    @abstractmethod
    def pointwise(self, z: np.ndarray) -> np.ndarray:
        """k(z)"""

    @abstractmethod
    def radial(self, R: np.ndarray, e: np.ndarray) -> np.ndarray:
        """Integral of k(r e) r dr over [0, R], for unit directions e in 2D"""

    @abstractmethod
    def cone(self, g: np.ndarray, coeffs: np.ndarray, n: int) -> np.ndarray:
        """Integral over [0, 1] of lam^{n-1} k(lam w) sum_k coeffs[..., k] lam^k, given g = f_*(w)"""

    @abstractmethod
    def ball_center(self, n: int, r: float) -> float:
        """Potential of the ball B_r at its center (isotropic kernels only)"""


@dataclass(frozen=True, eq=False)
class PowerKernel(Kernel):
    """k(z) = f_*(z)^{-p}; p < 0 gives the moment kernels of U_2"""

    exponent: float
    tension: Optional[SurfaceTension] = None

    def pointwise(self, z):
        return self.gauge(z) ** (-self.exponent)

    def radial(self, R, e):
        p = self.exponent
        base = R ** (2.0 - p) / (2.0 - p)
        if self.isotropic:
            return base
        return base * self.tension.dual(e) ** (-p)

    def cone(self, g, coeffs, n):
        p = self.exponent
        k = np.arange(coeffs.shape[-1])
        return g ** (-p) * (coeffs @ (1.0 / (n - p + k)))

    def ball_center(self, n, r):
        if not self.isotropic:
            raise PotentialError("closed-form ball potentials need an isotropic kernel")
        p = self.exponent
        return n * unit_ball_volume(n) * r ** (n - p) / (n - p)


@dataclass(frozen=True, eq=False)
class LogKernel(Kernel):
    """k(z) = log f_*(z), the kernel of U_3"""

    tension: Optional[SurfaceTension] = None

    def pointwise(self, z):
        return np.log(self.gauge(z))

    def radial(self, R, e):
        R = np.asarray(R, dtype=float)
        R2 = np.where(R > 0, R, 1.0)
        out = 0.5 * R**2 * (np.log(R2) - 0.5)
        if not self.isotropic:
            out = out + 0.5 * R**2 * np.log(self.tension.dual(e))
        return out

    def cone(self, g, coeffs, n):
        k = np.arange(coeffs.shape[-1])
        return coeffs @ (1.0 / (n + k)) * np.log(g) - coeffs @ (1.0 / (n + k) ** 2)

    def ball_center(self, n, r):
        if not self.isotropic:
            raise PotentialError("closed-form ball potentials need an isotropic kernel")
        return unit_ball_volume(n) * r**n * (np.log(r) - 1.0 / n)


def dual_kernel(f: SurfaceTension, i: int, exponent: Optional[float] = None) -> Kernel:
    """Kernel of U_i: f_*^{-alpha}, f_*^{beta} or log f_*"""
    tension = None if isinstance(f, Euclidean) else f
    if i == 1:
        return PowerKernel(exponent, tension)
    if i == 2:
        return PowerKernel(-exponent, tension)
    if i == 3:
        return LogKernel(tension)
    raise PotentialError(f"Unsupported dual potential index: {i}")


def _check_exponent(alpha: float, n: int):
    if not 0.0 < alpha < n:
        raise PotentialError(f"Riesz exponent must lie in (0, {n}), got {alpha}")


# ---------------------------------------------------------------------------
# potentials at points
# ---------------------------------------------------------------------------


def _polygon_potential(E: Polygon2D, points, kernel: Kernel, spec: QuadratureSpec) -> np.ndarray:
    starts, ends = E.edges()
    return fan_integral(points, starts, ends, kernel.radial, spec, kernel.kinks)


def _box_faces(kernel: Kernel, extents: np.ndarray, sigma: np.ndarray, sides: Optional[np.ndarray], order: int) -> float:
    """
    Integral of k(sigma * z) P(z) over the box [0, extents]

    The box is split into pyramids with apex at the origin over its far
    faces; the radial integral is analytic and each face carries a tensor
    Gauss rule graded toward the corner nearest the apex. P(z) is
    prod_j (sides_j - z_j) when `sides` is given, else 1.
    """
    n = extents.size
    total = 0.0
    for i in range(n):
        a_i = extents[i]
        axes = [
            (np.array([a_i]), np.array([1.0])) if j == i else composite_gauss(graded_breaks(extents[j], a_i), order)
            for j in range(n)
        ]
        nodes = np.stack(np.meshgrid(*[x for x, _ in axes], indexing="ij"), axis=-1).reshape(-1, n)
        weights = np.prod(np.stack(np.meshgrid(*[w for _, w in axes], indexing="ij"), axis=-1), axis=-1).ravel()
        g = np.linalg.norm(nodes, axis=1) if kernel.isotropic else kernel.gauge(nodes * sigma)
        if sides is None:
            coeffs = np.ones((len(nodes), 1))
        else:
            # coefficients in lam of prod_j (sides_j - lam w_j)
            coeffs = np.zeros((len(nodes), n + 1))
            coeffs[:, 0] = 1.0
            for j in range(n):
                shifted = np.zeros_like(coeffs)
                shifted[:, 1:] = coeffs[:, :-1]
                coeffs = sides[j] * coeffs - nodes[:, j : j + 1] * shifted
        total += a_i * float(weights @ kernel.cone(g, coeffs, n))
    return total


def _box_potential(E: Box, x: np.ndarray, kernel: Kernel, spec: QuadratureSpec) -> float:
    lo, hi = E.bounding_box()
    per_dim = []
    for j in range(E.dim):
        if lo[j] < x[j] < hi[j]:
            terms = [(1.0, hi[j] - x[j], 1.0), (-1.0, x[j] - lo[j], 1.0)]
        elif x[j] >= hi[j]:
            terms = [(-1.0, x[j] - lo[j], 1.0), (-1.0, x[j] - hi[j], -1.0)]
        else:
            terms = [(1.0, hi[j] - x[j], 1.0), (1.0, lo[j] - x[j], -1.0)]
        per_dim.append([t for t in terms if t[1] > 0])
    total = 0.0
    for combo in itertools.product(*per_dim):
        sigma = np.array([c[0] for c in combo])
        extents = np.array([c[1] for c in combo])
        sign = np.prod([c[2] for c in combo])
        total += sign * _box_faces(kernel, extents, sigma, None, spec.outer_order)
    return total


def _disk_potential(rel: np.ndarray, r: float, kernel: Kernel, spec: QuadratureSpec) -> float:
    rho = float(np.hypot(*rel))
    if rho <= 1e-14 * r and kernel.isotropic:
        return kernel.ball_center(2, r)
    if abs(rho - r) <= 1e-12 * r:
        # directions pointing into the disk see a chord of length 2r cos(psi)
        inward = np.arctan2(-rel[1], -rel[0])
        half = graded_breaks(pi / 2, 1e-4)
        t, w = composite_gauss(half, spec.fan_order)
        psi = np.concatenate([pi / 2 - t, t - pi / 2])
        w = np.concatenate([w, w])
        e = np.stack([np.cos(inward + psi), np.sin(inward + psi)], axis=1)
        return float(w @ kernel.radial(2.0 * r * np.cos(psi), e))
    if rho < r:
        depth = r - rho
        m = int(np.clip(np.ceil(32.0 * r / depth), 256, 1 << 16))
        theta = 2.0 * pi * np.arange(m) / m
        e = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        proj = e @ rel
        R = -proj + np.sqrt(r * r - rho * rho + proj * proj)
        return float(np.sum(kernel.radial(R, e)) * 2.0 * pi / m)
    toward = np.arctan2(-rel[1], -rel[0])
    t, w = composite_gauss(np.linspace(-pi / 2, pi / 2, 5), spec.outer_order)
    ratio = r / rho
    psi = np.arcsin(ratio * np.sin(t))
    e = np.stack([np.cos(toward + psi), np.sin(toward + psi)], axis=1)
    far = rho * np.cos(psi) + r * np.cos(t)
    near = rho * np.cos(psi) - r * np.cos(t)
    jac = ratio * np.cos(t) / np.cos(psi)
    return float(w @ ((kernel.radial(far, e) - kernel.radial(near, e)) * jac))


def _ball_potential(E: Ball, points: np.ndarray, kernel: Kernel, spec: QuadratureSpec) -> np.ndarray:
    rel = points - E.center
    if E.n != 2:
        if np.any(np.linalg.norm(rel, axis=1) > 1e-14 * E.radius):
            raise PotentialError("ball potentials in n > 2 are evaluated at the center only")
        return np.full(len(points), kernel.ball_center(E.n, E.radius))
    return np.array([_disk_potential(x, E.radius, kernel, spec) for x in rel])


def _boundary_trapezoid(curve: np.ndarray, tangent: np.ndarray, points: np.ndarray, kernel: Kernel, spec: QuadratureSpec) -> np.ndarray:
    # v(x) = closed integral of F(R, e) (y - x) x y' / R^2, spectrally accurate away from the curve
    step = 2.0 * pi / len(curve)
    batch = max(1, spec.pair_budget // len(curve))
    out = np.empty(len(points))
    for lo in range(0, len(points), batch):
        rel = curve[None, :, :] - points[lo : lo + batch, None, :]
        R = np.linalg.norm(rel, axis=-1)
        e = rel / R[..., None]
        cross = rel[..., 0] * tangent[None, :, 1] - rel[..., 1] * tangent[None, :, 0]
        out[lo : lo + batch] = np.sum(kernel.radial(R, e) * cross / R**2, axis=1) * step
    return out


def _star_potential(E: StarDomain, points: np.ndarray, kernel: Kernel, spec: QuadratureSpec) -> np.ndarray:
    fine, tangent = E.fine_curve(spec.upsample)
    spacing = np.linalg.norm(np.diff(fine, axis=0, append=fine[:1]), axis=1).max()
    dist, _ = cKDTree(fine).query(points)
    near = dist < NEAR_SPACINGS * spacing
    out = np.empty(len(points))
    if np.any(~near):
        out[~near] = _boundary_trapezoid(fine, tangent, points[~near], kernel, spec)
    if np.any(near):
        out[near] = _polygon_potential(Polygon2D.from_vertices(fine), points[near], kernel, spec)
    return out


def _cell_edges(corners: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    square = np.array([[0.0, 0.0], [h, 0.0], [h, h], [0.0, h]])
    starts = (corners[:, None, :] + square[None]).reshape(-1, 2)
    ends = (corners[:, None, :] + np.roll(square, -1, axis=0)[None]).reshape(-1, 2)
    return starts, ends


def _grid_potential(E: GridMask, points: np.ndarray, kernel: Kernel, spec: QuadratureSpec) -> np.ndarray:
    h = E.h
    ii, jj = np.nonzero(E.occupancy)
    cells = np.stack([jj, ii], axis=1)
    corners = E.origin + h * cells
    centers = corners + 0.5 * h
    out = np.empty(len(points))
    for k, x in enumerate(points):
        home = np.floor((x - E.origin) / h).astype(int)
        near = np.all(np.abs(cells - home) <= GRID_NEAR, axis=1)
        value = h * h * float(np.sum(kernel.pointwise(centers[~near] - x))) if np.any(~near) else 0.0
        if np.any(near):
            starts, ends = _cell_edges(corners[near], h)
            value += float(fan_integral(x[None], starts, ends, kernel.radial, spec, kernel.kinks)[0])
        out[k] = value
    return out


def potential_at(E: Shape, points, kernel: Kernel, spec: QuadratureSpec) -> np.ndarray:
    """
    Integral of kernel(y - x) over y in E, for each point x

    Args:
        E: Shape
        points: (P, n) evaluation points
        kernel: Interaction kernel
        spec: Quadrature controls

    Returns:
        (P,) array of potentials
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != E.dim:
        raise PotentialError(f"points have dimension {points.shape[1]}, shape has {E.dim}")
    if isinstance(E, Polygon2D):
        return _polygon_potential(E, points, kernel, spec)
    if isinstance(E, Box):
        if E.dim == 2:
            return _polygon_potential(E.to_polygon(), points, kernel, spec)
        return np.array([_box_potential(E, x, kernel, spec) for x in points])
    if isinstance(E, Ball):
        return _ball_potential(E, points, kernel, spec)
    if isinstance(E, StarDomain):
        return _star_potential(E, points, kernel, spec)
    if isinstance(E, GridMask):
        return _grid_potential(E, points, kernel, spec)
    raise PotentialError(f"Unsupported shape for potentials: {E.variant}")


def riesz_bound(E: Shape, alpha: float) -> float:
    """n omega_n r^{n-alpha}/(n-alpha) for the ball of the same volume, the largest value of v_E"""
    n = E.dim
    r = (E.volume() / unit_ball_volume(n)) ** (1.0 / n)
    return n * unit_ball_volume(n) * r ** (n - alpha) / (n - alpha)


def _assert_bounded(E: Shape, values: np.ndarray, alpha: float):
    bound = riesz_bound(E, alpha)
    worst = float(np.max(values))
    if worst > bound * (1.0 + BOUND_RTOL):
        raise PotentialBoundError(f"potential {worst:.12g} exceeds the ball bound {bound:.12g}")


def riesz_potential_many(E: Shape, points, alpha: float, spec: QuadratureSpec) -> np.ndarray:
    """v_E at several points, checked against the ball bound"""
    _check_exponent(alpha, E.dim)
    values = potential_at(E, points, PowerKernel(alpha), spec)
    _assert_bounded(E, values, alpha)
    return values


def riesz_potential(E: Shape, x, alpha: float, spec: QuadratureSpec) -> float:
    """
    Riesz potential v_E(x) = integral over E of |x - y|^{-alpha}

    Args:
        E: Shape with positive volume
        x: Evaluation point
        alpha: Exponent in (0, n)
        spec: Quadrature controls

    Returns:
        Nonnegative potential value
    """
    return float(riesz_potential_many(E, np.atleast_2d(x), alpha, spec)[0])


# ---------------------------------------------------------------------------
# self-interaction energies
# ---------------------------------------------------------------------------


def _polygon_self_energy(E: Polygon2D, kernel: Kernel, spec: QuadratureSpec, order: int) -> float:
    starts, ends = E.edges()
    total = 0.0
    for part in E.components():
        ps, pe = part.edges()
        nodes, weights = triangle_fan_rule(part.barycenter(), ps, pe, order)
        v = fan_integral(nodes, starts, ends, kernel.radial, spec, kernel.kinks)
        total += float(weights @ v)
    return total


def _box_self_energy(E: Box, kernel: Kernel, order: int) -> float:
    if E.dim > 4:
        raise PotentialError("box interaction energies are supported for n <= 4")
    if kernel.isotropic:
        return 2**E.dim * _box_faces(kernel, E.sides, np.ones(E.dim), E.sides, order)
    return sum(
        _box_faces(kernel, E.sides, np.array(sigma), E.sides, order)
        for sigma in itertools.product((1.0, -1.0), repeat=E.dim)
    )


def _ball_self_energy(E: Ball, kernel: Kernel, spec: QuadratureSpec) -> QuadratureResult:
    if not (isinstance(kernel, PowerKernel) and kernel.isotropic):
        if E.n == 2:
            return _star_self_energy(E.as_star_domain(spec.boundary_samples), kernel, spec)
        raise PotentialError("anisotropic ball energies are supported in 2D only")
    n, r, p = E.n, E.radius, kernel.exponent
    omega = unit_ball_volume(n)

    def lens(rho):
        return n * omega * omega * r**n * betainc(0.5 * (n + 1), 0.5, 1.0 - (rho / (2.0 * r)) ** 2)

    value, err = quad(lens, 0.0, 2.0 * r, weight="alg", wvar=(n - 1 - p, 0.0), epsabs=0.0, epsrel=spec.tol)
    return QuadratureResult(value, err)


def _double_boundary(curve: np.ndarray, tangent: np.ndarray, kernel: "PowerKernel", spec: QuadratureSpec) -> float:
    # V = -1/((2-p)(3-p)) double integral of (z.nu_x)(z.nu_y) k(z), z = x - y
    p = kernel.exponent
    m = len(curve)
    step = 2.0 * pi / m
    normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)
    batch = max(1, spec.pair_budget // m)
    total = 0.0
    for lo in range(0, m, batch):
        z = curve[lo : lo + batch, None, :] - curve[None, :, :]
        zx = np.einsum("abk,ak->ab", z, normal[lo : lo + batch])
        zy = np.einsum("abk,bk->ab", z, normal)
        g = kernel.gauge(z)
        safe = np.where(g > 0, g, 1.0)
        total += float(np.sum(np.where(g > 0, zx * zy * safe ** (-p), 0.0)))
    return -total * step * step / ((2.0 - p) * (3.0 - p))


def _star_self_energy(E: StarDomain, kernel: Kernel, spec: QuadratureSpec) -> QuadratureResult:
    if not isinstance(kernel, PowerKernel):
        raise PotentialError("star-domain self energies need a power kernel")
    coarse = _double_boundary(*E.fine_curve(spec.upsample), kernel, spec)
    fine = _double_boundary(*E.fine_curve(2 * spec.upsample), kernel, spec)
    return QuadratureResult(fine, abs(fine - coarse))


def _near_cell_table(h: float, kernel: Kernel, spec: QuadratureSpec) -> Dict[Tuple[int, int], float]:
    base = np.zeros((1, 2))
    nodes, weights = triangle_fan_rule(np.array([0.5 * h, 0.5 * h]), *_cell_edges(base, h), spec.outer_order)
    table = {}
    for dx in range(-GRID_NEAR, GRID_NEAR + 1):
        for dy in range(-GRID_NEAR, GRID_NEAR + 1):
            starts, ends = _cell_edges(np.array([[dx * h, dy * h]]), h)
            v = fan_integral(nodes, starts, ends, kernel.radial, spec, kernel.kinks)
            table[(dx, dy)] = float(weights @ v)
    return table


def _grid_self_energy(E: GridMask, kernel: Kernel, spec: QuadratureSpec) -> QuadratureResult:
    occ = E.occupancy.astype(float)
    ny, nx = occ.shape
    pairs = np.rint(fftconvolve(occ, occ[::-1, ::-1], mode="full"))
    iy, ix = np.meshgrid(np.arange(2 * ny - 1) - (ny - 1), np.arange(2 * nx - 1) - (nx - 1), indexing="ij")
    offsets = E.h * np.stack([ix, iy], axis=-1).astype(float)
    with np.errstate(divide="ignore"):
        table = E.h**4 * kernel.pointwise(offsets)
    midpoint = table.copy()
    for (dx, dy), value in _near_cell_table(E.h, kernel, spec).items():
        if abs(dy) < ny and abs(dx) < nx:
            table[dy + ny - 1, dx + nx - 1] = value
    value = float(np.sum(pairs * table))
    # midpoint error decays like (h / distance)^2; calibrate it on the outermost exact ring
    dist = np.maximum(np.abs(ix), np.abs(iy))
    ring = (dist == GRID_NEAR) & (pairs > 0)
    far = dist > GRID_NEAR
    error = 0.0
    if np.any(ring) and np.any(far):
        rel = float(np.max(np.abs(table[ring] - midpoint[ring]) / np.abs(midpoint[ring])))
        error = rel * float(np.sum(pairs[far] * np.abs(midpoint[far]) * (GRID_NEAR / dist[far]) ** 2))
    return QuadratureResult(value, error)


def self_energy(E: Shape, kernel: Kernel, spec: QuadratureSpec) -> QuadratureResult:
    """
    Double integral of kernel(x - y) over E x E

    Args:
        E: Shape
        kernel: Interaction kernel
        spec: Quadrature controls

    Returns:
        QuadratureResult(value, error) with the error from node halving
    """
    half = max(2, spec.outer_order // 2)
    if isinstance(E, Polygon2D):
        value = _polygon_self_energy(E, kernel, spec, spec.outer_order)
        coarse = _polygon_self_energy(E, kernel, spec, half)
        result = QuadratureResult(value, abs(value - coarse))
    elif isinstance(E, Box):
        value = _box_self_energy(E, kernel, spec.outer_order)
        result = QuadratureResult(value, abs(value - _box_self_energy(E, kernel, half)))
    elif isinstance(E, Ball):
        result = _ball_self_energy(E, kernel, spec)
    elif isinstance(E, StarDomain):
        result = _star_self_energy(E, kernel, spec)
    elif isinstance(E, GridMask):
        result = _grid_self_energy(E, kernel, spec)
    else:
        raise PotentialError(f"Unsupported shape for interaction energies: {E.variant}")
    logger.debug("self energy of %s: %.12g (+- %.2e)", E.variant, result.value, result.error)
    return result


def interaction_energy(E: Shape, alpha: float, spec: QuadratureSpec) -> QuadratureResult:
    """V(E) = double integral of |x - y|^{-alpha} over E x E"""
    _check_exponent(alpha, E.dim)
    return self_energy(E, PowerKernel(alpha), spec)


def interaction_energy_aniso(E: Shape, f: SurfaceTension, alpha: float, spec: QuadratureSpec) -> QuadratureResult:
    """V_f(E) = double integral of f_*(x - y)^{-alpha}; equals V(E) for Euclidean f"""
    _check_exponent(alpha, E.dim)
    if f.dim != E.dim:
        raise PotentialError("tension dimension does not match the shape")
    return self_energy(E, PowerKernel(alpha, None if isinstance(f, Euclidean) else f), spec)


def quadratic_change_of_variables(E: Polygon2D, f: Quadratic, alpha: float, spec: QuadratureSpec) -> Tuple[float, float]:
    """
    Both sides of V_f(E) = det(A)^2 V(A^{-1} E) for f(nu) = |A nu|

    The substitution x = A x' turns f_*(x - y) = |A^{-1}(x - y)| into the
    Euclidean distance and contributes det(A) for each of the two integrals.
    """
    lhs = interaction_energy_aniso(E, f, alpha, spec).value
    rhs = f.determinant**2 * interaction_energy(E.linear_image(f.inverse), alpha, spec).value
    return lhs, rhs


# ---------------------------------------------------------------------------
# dual-norm potentials
# ---------------------------------------------------------------------------


@dataclass
class DualPotentialResult:
    """U_i(E) with its optimizer and convergence flags"""

    value: float
    argopt: np.ndarray
    index: int
    converged: bool
    out_of_range: bool
    evaluations: int
    grid_restart: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "argopt": self.argopt.tolist(),
            "index": self.index,
            "converged": self.converged,
            "out_of_range": self.out_of_range,
            "evaluations": self.evaluations,
            "grid_restart": self.grid_restart,
        }


def _coordinate_descent(objective, start: np.ndarray, step: float, budget: int):
    """Minimize with axis moves of shrinking size; returns (x, value, evaluations, converged)"""
    x = start.copy()
    best = float(objective(x[None])[0])
    evals = 1
    n = x.size
    moves = np.vstack([np.eye(n), -np.eye(n)])
    while step > DESCENT_STOP:
        if evals >= budget:
            return x, best, evals, False
        trial = x + step * moves
        values = objective(trial)
        evals += len(trial)
        k = int(np.argmin(values))
        if values[k] < best:
            x, best = trial[k], float(values[k])
        else:
            step *= 0.5
    return x, best, evals, True


def dual_potential(E: Shape, f: SurfaceTension, i: int, exponent: Optional[float], spec: QuadratureSpec) -> DualPotentialResult:
    """
    U_1 = sup_y integral of f_*(x - y)^{-alpha}, U_2 = -inf_y integral of f_*(x - y)^beta,
    U_3 = -inf_y integral of log f_*(x - y), all over x in E

    The inner optimization runs coordinate descent from the barycenter with
    step 0.25 diam(E), then probes a 5 x 5 grid over the bounding box and
    restarts once from the best grid point if it beats the descent.

    Args:
        E: Shape
        f: Surface tension
        i: 1, 2 or 3
        exponent: alpha for U_1, beta for U_2, ignored for U_3
        spec: Quadrature controls

    Returns:
        DualPotentialResult
    """
    if i not in (1, 2, 3):
        raise PotentialError(f"Unsupported dual potential index: {i}")
    out_of_range = False
    if i == 1:
        if exponent is None:
            raise PotentialError("U_1 needs an exponent alpha")
        _check_exponent(exponent, E.dim)
        out_of_range = not 0.0 < exponent < 1.0
        if out_of_range:
            logger.warning("U_1 with alpha = %g lies outside (0, 1)", exponent)
    if i == 2 and (exponent is None or exponent <= 0):
        raise PotentialError("U_2 needs a positive exponent beta")
    kernel = dual_kernel(f, i, exponent)
    sign = -1.0 if i == 1 else 1.0

    def objective(ys):
        return sign * potential_at(E, ys, kernel, spec)

    start = E.barycenter()
    step = 0.25 * E.diameter()
    x, best, evals, converged = _coordinate_descent(objective, start, step, DESCENT_BUDGET)

    lo, hi = E.bounding_box()
    axes = [np.linspace(lo[j], hi[j], 5) for j in range(E.dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, E.dim)
    grid_values = objective(grid)
    evals += len(grid)
    restarted = False
    k = int(np.argmin(grid_values))
    if grid_values[k] < best - spec.tol * max(1.0, abs(best)):
        logger.info("dual potential U_%d: restarting descent from grid point %s", i, grid[k])
        restarted = True
        x2, best2, more, conv2 = _coordinate_descent(objective, grid[k], step, DESCENT_BUDGET)
        evals += more
        if best2 < best:
            x, best, converged = x2, best2, conv2
    if not converged:
        logger.warning("dual potential U_%d did not reach the step tolerance", i)
    return DualPotentialResult(
        value=-best,
        argopt=x,
        index=i,
        converged=converged,
        out_of_range=out_of_range,
        evaluations=evals,
        grid_restart=restarted,
    )


def dual_potential_scaling(i: int, n: int, exponent: Optional[float], r: float, value: float, volume: float) -> float:
    """Predicted U_i(rE) from U_i(E): r^{n-alpha}, r^{n+beta}, or r^n U_3 - r^n log(r) |E|"""
    if i == 1:
        return r ** (n - exponent) * value
    if i == 2:
        return r ** (n + exponent) * value
    if i == 3:
        return r**n * value - r**n * np.log(r) * volume
    raise PotentialError(f"Unsupported dual potential index: {i}")


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass
class ConstancyReport:
    """Spread of v_E over boundary samples"""

    maximum: float
    minimum: float
    residual: float
    error: float
    samples: int

    def to_dict(self):
        return dict(self.__dict__)


def potential_constancy_residual(E: Shape, alpha: float, spec: QuadratureSpec, samples: Optional[int] = None) -> ConstancyReport:
    """
    Max, min and spread of v_E on the boundary of a 2D shape

    The error estimate is the largest change of any sample under the refined
    quadrature spec.
    """
    if E.dim != 2:
        raise PotentialError("boundary constancy is checked for 2D shapes")
    count = max(256, samples or spec.boundary_samples)
    pts = E.boundary_points(count)
    values = riesz_potential_many(E, pts, alpha, spec)
    refined = riesz_potential_many(E, pts, alpha, spec.refined())
    return ConstancyReport(
        maximum=float(values.max()),
        minimum=float(values.min()),
        residual=float(values.max() - values.min()),
        error=float(np.abs(refined - values).max()),
        samples=len(pts),
    )


def lipschitz_constant(n: int, alpha: float) -> float:
    """c_{n,alpha} = 2 n omega_n^{alpha/n} / (n - alpha)"""
    return 2.0 * n * unit_ball_volume(n) ** (alpha / n) / (n - alpha)


@dataclass
class LipschitzReport:
    bound: float
    gap: float
    symmetric_difference: float
    holds: bool

    def to_dict(self):
        return dict(self.__dict__)


def lipschitz_gap_bound(E: Shape, F: Shape, alpha: float, spec: QuadratureSpec) -> LipschitzReport:
    """
    c_{n,alpha} m^{(n-alpha)/n} |E sym-diff F| with m the larger volume,
    checked against |V(E) - V(F)|
    """
    n = E.dim
    _check_exponent(alpha, n)
    sym = symmetric_difference_measure(E, F)
    m = max(E.volume(), F.volume())
    bound = lipschitz_constant(n, alpha) * m ** ((n - alpha) / n) * sym
    ve = interaction_energy(E, alpha, spec)
    vf = interaction_energy(F, alpha, spec)
    gap = abs(ve.value - vf.value)
    slack = ve.error + vf.error
    return LipschitzReport(bound=bound, gap=gap, symmetric_difference=sym, holds=gap <= bound + slack)


def slicing_interaction_lhs(E: Shape, alpha: float, spec: QuadratureSpec) -> QuadratureResult:
    """2 omega_{n-1} times the double integral of |x - y|^{1-alpha} over E x E"""
    if E.dim != 2:
        raise PotentialError("the slicing estimate is evaluated in 2D")
    if not 0.0 < alpha < 2.0:
        raise PotentialError(f"slicing exponent must lie in (0, 2), got {alpha}")
    factor = 2.0 * unit_ball_volume(E.dim - 1)
    if alpha == 1.0:
        m = E.volume()
        return QuadratureResult(factor * m * m, 0.0)
    result = self_energy(E, PowerKernel(alpha - 1.0), spec)
    return QuadratureResult(factor * result.value, factor * result.error)


@dataclass
class SlicingCheck:
    lhs: float
    rhs: float
    ratio: float
    holds: bool

    def to_dict(self):
        return dict(self.__dict__)


def slicing_inequality(E: Shape, f: SurfaceTension, alpha: float, spec: QuadratureSpec) -> SlicingCheck:
    """Compare the slicing left side with 2 P_f(B_1) |E|"""
    lhs = slicing_interaction_lhs(E, alpha, spec).value
    rhs = 2.0 * Ball(E.dim, 1.0).aniso_perimeter(f) * E.volume()
    return SlicingCheck(lhs=lhs, rhs=rhs, ratio=lhs / rhs, holds=lhs <= rhs)


class PotentialError(Exception):
    """Exception raised for errors in potential and interaction energy evaluation."""
    pass


class PotentialBoundError(PotentialError):
    """Exception raised when a computed potential exceeds the equal-volume ball bound."""
    pass
