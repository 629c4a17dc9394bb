"""
Surface tensions and Wulff shapes
Evaluates anisotropies f and their duals f_*, and builds sampled Wulff shapes K = {f_* < 1}
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from math import factorial
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import ConvexHull, QhullError

import config
from src.quadrature import gauss_legendre, spectral_derivative

logger = logging.getLogger(__name__)

CONVEXITY_GRID = 4096
DUAL_GRID = 512
HULL_TOL = 1e-12

ArrayLike = Union[Sequence[float], np.ndarray]


def _scalar_or_array(values: np.ndarray):
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


class SurfaceTension(ABC):
    """Positively one-homogeneous, convex, positive function on R^n"""

    variant: str = ""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Ambient dimension"""

    @property
    def is_smooth(self) -> bool:
        return True

    @abstractmethod
    def value(self, nu: ArrayLike) -> np.ndarray:
        """f evaluated on the last axis of `nu`"""

    @abstractmethod
    def dual(self, x: ArrayLike) -> np.ndarray:
        """f_* evaluated on the last axis of `x`"""

    @abstractmethod
    def gradient(self, nu: ArrayLike) -> np.ndarray:
        """Gradient of f (a subgradient where f is not differentiable)"""

    @abstractmethod
    def tension_range(self) -> Tuple[float, float]:
        """(min, max) of f on the unit sphere"""

    @abstractmethod
    def scaled(self, factor: float) -> "SurfaceTension":
        """The tension factor * f"""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """JSON document with flat arrays"""

    def kink_directions(self) -> Optional[np.ndarray]:
        """Unit directions where f_* fails to be smooth, None if it is smooth"""
        return None


@dataclass(frozen=True, eq=False)
class Euclidean(SurfaceTension):
    n: int = 2
    variant = "euclidean"

    def __post_init__(self):
        if self.n < 1:
            raise AnisotropyError(f"dimension must be positive, got {self.n}")

    @property
    def dim(self) -> int:
        return self.n

    def value(self, nu):
        return np.linalg.norm(np.asarray(nu, dtype=float), axis=-1)

    def dual(self, x):
        return np.linalg.norm(np.asarray(x, dtype=float), axis=-1)

    def gradient(self, nu):
        nu = np.asarray(nu, dtype=float)
        norm = np.linalg.norm(nu, axis=-1, keepdims=True)
        return np.divide(nu, norm, out=np.zeros_like(nu), where=norm > 0)

    def tension_range(self):
        return 1.0, 1.0

    def scaled(self, factor):
        return Quadratic(factor * np.eye(self.n))

    def to_dict(self):
        return {"variant": self.variant, "n": self.n}


@dataclass(frozen=True, eq=False)
class Quadratic(SurfaceTension):
    """f(nu) = |A nu| for a symmetric positive-definite A"""

    A: np.ndarray
    variant = "quadratic"

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise AnisotropyError(f"A must be square, got shape {A.shape}")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
            raise AnisotropyError("A must be symmetric")
        eig = np.linalg.eigvalsh(A)
        if eig.min() <= 0:
            raise AnisotropyError(f"A must be positive definite, smallest eigenvalue {eig.min():g}")
        A.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "_inverse", np.linalg.inv(A))
        object.__setattr__(self, "_square", A @ A)
        object.__setattr__(self, "_eig", eig)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    @property
    def determinant(self) -> float:
        return float(np.prod(self._eig))

    def value(self, nu):
        return np.linalg.norm(np.asarray(nu, dtype=float) @ self.A.T, axis=-1)

    def dual(self, x):
        return np.linalg.norm(np.asarray(x, dtype=float) @ self._inverse.T, axis=-1)

    def gradient(self, nu):
        nu = np.asarray(nu, dtype=float)
        norm = self.value(nu)[..., None]
        grad = nu @ self._square.T
        return np.divide(grad, norm, out=np.zeros_like(grad), where=norm > 0)

    def tension_range(self):
        return float(self._eig.min()), float(self._eig.max())

    def scaled(self, factor):
        return Quadratic(factor * self.A)

    def to_dict(self):
        return {"variant": self.variant, "n": self.dim, "A": self.A.ravel().tolist()}


@dataclass(frozen=True, eq=False)
class Crystalline(SurfaceTension):
    """f(nu) = max_i x_i . nu over a finite point set; K is the convex hull of the points"""

    points: np.ndarray
    variant = "crystalline"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < pts.shape[1] + 1:
            raise AnisotropyError("crystalline tension needs at least n+1 points in R^n")
        try:
            hull = ConvexHull(pts)
        except QhullError as e:
            raise AnisotropyError(f"degenerate crystalline point set: {e}") from e
        normals = hull.equations[:, :-1]
        offsets = -hull.equations[:, -1]
        scale = np.abs(pts).max()
        if offsets.min() <= HULL_TOL * scale:
            raise AnisotropyError(
                "origin is not interior to the convex hull; the Wulff shape is unbounded"
            )
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_hull", hull)
        object.__setattr__(self, "_normals", normals)
        object.__setattr__(self, "_offsets", offsets)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_smooth(self) -> bool:
        return False

    @property
    def hull(self) -> ConvexHull:
        return self._hull

    @property
    def vertices(self) -> np.ndarray:
        """Hull vertices (counter-clockwise in 2D)"""
        return self.points[self._hull.vertices]

    @property
    def facet_normals(self) -> np.ndarray:
        return self._normals

    @property
    def facet_offsets(self) -> np.ndarray:
        return self._offsets

    def value(self, nu):
        nu = np.asarray(nu, dtype=float)
        return np.max(nu @ self.points.T, axis=-1)

    def dual(self, x):
        x = np.asarray(x, dtype=float)
        return np.max((x @ self._normals.T) / self._offsets, axis=-1)

    def gradient(self, nu):
        nu = np.asarray(nu, dtype=float)
        return self.points[np.argmax(nu @ self.points.T, axis=-1)]

    def tension_range(self):
        return float(self._offsets.min()), float(np.linalg.norm(self.vertices, axis=1).max())

    def scaled(self, factor):
        return Crystalline(factor * self.points)

    def to_dict(self):
        return {"variant": self.variant, "n": self.dim, "points": self.points.ravel().tolist()}

    def kink_directions(self):
        v = self.vertices
        return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class PerturbedEuclidean2D(SurfaceTension):
    """f(nu) = scale * |nu| * g(theta_nu) with g = 1 + delta * sum_k c_k cos(k theta)"""

    delta: float
    harmonics: Tuple[Tuple[int, float], ...]
    scale: float = 1.0
    variant = "perturbed"

    def __post_init__(self):
        harmonics = tuple((int(k), float(c)) for k, c in self.harmonics)
        object.__setattr__(self, "harmonics", harmonics)
        object.__setattr__(self, "_k", np.array([k for k, _ in harmonics], dtype=float))
        object.__setattr__(self, "_c", np.array([c for _, c in harmonics], dtype=float))
        if self.scale <= 0:
            raise AnisotropyError("scale must be positive")

        theta = 2.0 * np.pi * np.arange(CONVEXITY_GRID) / CONVEXITY_GRID
        g = self._g(theta)
        certificate = g + self._g2(theta)
        if g.min() <= 0 or certificate.min() <= 0:
            raise AnisotropyError(
                f"convexity certificate failed: min g = {g.min():.3e}, "
                f"min g + g'' = {certificate.min():.3e}"
            )
        grid = 2.0 * np.pi * np.arange(DUAL_GRID) / DUAL_GRID
        object.__setattr__(self, "_dual_grid", grid)
        object.__setattr__(self, "_dual_g", self._g(grid))

    def _g(self, theta):
        theta = np.asarray(theta, dtype=float)
        return 1.0 + self.delta * np.cos(theta[..., None] * self._k) @ self._c

    def _g1(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -self.delta * np.sin(theta[..., None] * self._k) @ (self._c * self._k)

    def _g2(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -self.delta * np.cos(theta[..., None] * self._k) @ (self._c * self._k**2)

    @property
    def dim(self) -> int:
        return 2

    def value(self, nu):
        nu = np.asarray(nu, dtype=float)
        r = np.hypot(nu[..., 0], nu[..., 1])
        return self.scale * r * self._g(np.arctan2(nu[..., 1], nu[..., 0]))

    def gradient(self, nu):
        nu = np.asarray(nu, dtype=float)
        theta = np.arctan2(nu[..., 1], nu[..., 0])
        g, g1 = self._g(theta), self._g1(theta)
        c, s = np.cos(theta), np.sin(theta)
        return self.scale * np.stack([g * c - g1 * s, g * s + g1 * c], axis=-1)

    def _support_ratio(self, phi: np.ndarray) -> np.ndarray:
        # max over theta of cos(theta - phi) / g(theta): grid start, then Newton
        grid = self._dual_grid
        h = grid[1] - grid[0]
        ratio = np.cos(grid[None, :] - phi[:, None]) / self._dual_g[None, :]
        theta = grid[np.argmax(ratio, axis=1)]
        for _ in range(8):
            p, p1 = np.cos(theta - phi), -np.sin(theta - phi)
            g, g1, g2 = self._g(theta), self._g1(theta), self._g2(theta)
            d1 = p1 / g - p * g1 / g**2
            d2 = -p / g - 2.0 * p1 * g1 / g**2 - p * g2 / g**2 + 2.0 * p * g1**2 / g**3
            step = np.where(d2 < 0, -d1 / np.where(d2 < 0, d2, -1.0), 0.0)
            theta = theta + np.clip(step, -h, h)
        return np.cos(theta - phi) / self._g(theta)

    def dual(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 2)
        r = np.hypot(flat[:, 0], flat[:, 1])
        phi = np.arctan2(flat[:, 1], flat[:, 0])
        ratio = np.empty(len(flat))
        for lo in range(0, len(flat), 1024):
            ratio[lo : lo + 1024] = self._support_ratio(phi[lo : lo + 1024])
        return (r * ratio / self.scale).reshape(x.shape[:-1])

    def tension_range(self):
        theta = 2.0 * np.pi * np.arange(CONVEXITY_GRID) / CONVEXITY_GRID
        g = self._g(theta)
        h = theta[1] - theta[0]
        extremes = []
        for sign, idx in ((1.0, np.argmin(g)), (-1.0, np.argmax(g))):
            t0 = theta[idx]
            res = minimize_scalar(
                lambda t: sign * float(self._g(np.array(t))),
                bounds=(t0 - h, t0 + h),
                method="bounded",
                options={"xatol": 1e-12},
            )
            extremes.append(float(self._g(np.array(res.x))))
        return self.scale * extremes[0], self.scale * extremes[1]

    def scaled(self, factor):
        return replace(self, scale=self.scale * factor)

    def to_dict(self):
        return {
            "variant": self.variant,
            "delta": self.delta,
            "k": [k for k, _ in self.harmonics],
            "c": [c for _, c in self.harmonics],
            "scale": self.scale,
        }


@dataclass(frozen=True, eq=False)
class WulffShape:
    """Sampled realization of K = {f_* < 1}"""

    tension: SurfaceTension
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    volume: float
    ell: float
    ell_cap: float
    polygon_vertices: Optional[np.ndarray] = None
    angles: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.tension.dim

    @property
    def is_smooth(self) -> bool:
        """Samples form a uniform grid in the normal angle"""
        return self.angles is not None

    def perimeter(self) -> float:
        """Sum of w * f(nu) over the boundary samples, approximates P_f(K)"""
        return float(np.sum(self.weights * self.tension.value(self.normals)))

    def to_shape(self):
        """The Wulff shape as a concrete Shape"""
        from src.shapes import Box, Polygon2D, StarDomain

        if self.polygon_vertices is not None:
            return Polygon2D.from_vertices(self.polygon_vertices)
        if self.is_smooth:
            return StarDomain(base=self, u=np.zeros(len(self.points)))
        verts = self.tension.vertices
        lo, hi = verts.min(axis=0), verts.max(axis=0)
        sides = hi - lo
        if np.allclose(lo, -hi, atol=1e-12) and abs(np.prod(sides) - self.volume) <= 1e-10 * self.volume:
            return Box(sides=sides)
        raise AnisotropyError("only box-shaped crystalline Wulff shapes are supported for n > 2")

    def to_dict(self) -> Dict[str, Any]:
        doc = {
            "tension": self.tension.to_dict(),
            "volume": self.volume,
            "ell": self.ell,
            "ell_cap": self.ell_cap,
            "perimeter": self.perimeter(),
            "points": self.points.tolist(),
            "normals": self.normals.tolist(),
            "weights": self.weights.tolist(),
        }
        if self.polygon_vertices is not None:
            doc["polygon_vertices"] = self.polygon_vertices.tolist()
        return doc


def _crystalline_wulff(f: Crystalline, samples: int, ell: float, ell_cap: float) -> WulffShape:
    if f.dim == 2:
        verts = f.vertices
        edge = np.roll(verts, -1, axis=0) - verts
        length = np.linalg.norm(edge, axis=1)
        normals = np.stack([edge[:, 1], -edge[:, 0]], axis=1) / length[:, None]
        per_edge = max(2, int(np.ceil(samples / len(verts))))
        x, w = gauss_legendre(per_edge)
        points = verts[:, None, :] + x[None, :, None] * edge[:, None, :]
        weights = length[:, None] * w[None, :]
        volume = 0.5 * float(np.sum(verts[:, 0] * np.roll(verts[:, 1], -1) - np.roll(verts[:, 0], -1) * verts[:, 1]))
        return WulffShape(
            tension=f,
            points=points.reshape(-1, 2),
            normals=np.repeat(normals, per_edge, axis=0),
            weights=weights.ravel(),
            volume=volume,
            ell=ell,
            ell_cap=ell_cap,
            polygon_vertices=verts,
        )

    hull = f.hull
    n = f.dim
    simplex = f.points[hull.simplices]
    spans = simplex[:, 1:, :] - simplex[:, :1, :]
    gram = np.einsum("fik,fjk->fij", spans, spans)
    areas = np.sqrt(np.abs(np.linalg.det(gram))) / factorial(n - 1)
    return WulffShape(
        tension=f,
        points=simplex.mean(axis=1),
        normals=hull.equations[:, :-1],
        weights=areas,
        volume=float(hull.volume),
        ell=ell,
        ell_cap=ell_cap,
    )


def build_wulff(f: SurfaceTension, samples: int = config.DEFAULT_WULFF_SAMPLES) -> WulffShape:
    """
    Build the Wulff shape K = {x : x.nu < f(nu) for all nu}

    Smooth tensions use the support-function parameterization x = grad f(nu)
    on a uniform grid of normal angles, with arclength weights from the
    radius of curvature h + h''. Crystalline tensions give the exact hull.

    Args:
        f: Surface tension
        samples: Number of boundary samples (at least 16)

    Returns:
        WulffShape with samples, volume and the constants ell_f, L_f
    """
    if samples < 16:
        raise AnisotropyError(f"need at least 16 samples, got {samples}")
    ell, ell_cap = f.tension_range()
    if isinstance(f, Crystalline):
        shape = _crystalline_wulff(f, samples, ell, ell_cap)
    elif f.dim != 2:
        raise AnisotropyError("smooth Wulff shapes are built in two dimensions only")
    else:
        theta = 2.0 * np.pi * np.arange(samples) / samples
        nu = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        h = f.value(nu)
        curvature_radius = h + spectral_derivative(h, order=2)
        if curvature_radius.min() <= 0:
            raise AnisotropyError("support function is not strictly convex at this resolution")
        weights = curvature_radius * (2.0 * np.pi / samples)
        shape = WulffShape(
            tension=f,
            points=f.gradient(nu),
            normals=nu,
            weights=weights,
            volume=0.5 * float(np.sum(weights * h)),
            ell=ell,
            ell_cap=ell_cap,
            angles=theta,
        )
    logger.debug("Wulff shape for %s: volume %.12g", f.variant, shape.volume)
    return shape


def eval_tension(f: SurfaceTension, nu: ArrayLike):
    """f(nu), with f(0) = 0"""
    return _scalar_or_array(f.value(nu))


def eval_dual(f: SurfaceTension, x: ArrayLike):
    """f_*(x) = sup{x.nu : f(nu) <= 1}"""
    return _scalar_or_array(f.dual(x))


def tension_range(f: SurfaceTension) -> Tuple[float, float]:
    """(ell_f, L_f): the extreme values of f on the unit sphere"""
    return f.tension_range()


def density_constant(f: SurfaceTension) -> float:
    """c_0 = ell_f^n / (4^n L_f^n), reported as metadata"""
    ell, ell_cap = f.tension_range()
    return (ell / (4.0 * ell_cap)) ** f.dim


def confinement_constant(wulff: WulffShape) -> float:
    """c_{n,f} = 2 L_f |K|^{-1/n}; B(c m^{1/n}) contains the Wulff shape of mass m twice over"""
    return 2.0 * wulff.ell_cap * wulff.volume ** (-1.0 / wulff.n)


def wulff_metadata(wulff: WulffShape) -> Dict[str, float]:
    """Constants attached to exported Wulff shapes"""
    n = wulff.n
    return {
        "ell": wulff.ell,
        "ell_cap": wulff.ell_cap,
        "volume": wulff.volume,
        "perimeter": wulff.perimeter(),
        "isoperimetric_gap": wulff.perimeter() - n * wulff.volume,
        "density_constant": density_constant(wulff.tension),
        "confinement_constant": confinement_constant(wulff),
    }


def tension_from_dict(doc: Dict[str, Any]) -> SurfaceTension:
    """
    Factory for surface tensions from their JSON documents

    Args:
        doc: {"variant": "euclidean"|"quadratic"|"crystalline"|"perturbed", ...}

    Returns:
        SurfaceTension instance
    """
    variant = str(doc.get("variant", "")).lower()
    try:
        if variant == "euclidean":
            return Euclidean(n=int(doc.get("n", 2)))
        if variant == "quadratic":
            n = int(doc.get("n", 2))
            return Quadratic(np.asarray(doc["A"], dtype=float).reshape(n, n))
        if variant == "crystalline":
            n = int(doc.get("n", 2))
            return Crystalline(np.asarray(doc["points"], dtype=float).reshape(-1, n))
        if variant == "perturbed":
            k, c = doc.get("k", []), doc.get("c", [])
            if len(k) != len(c):
                raise AnisotropyError("perturbed tension needs equally long 'k' and 'c'")
            return PerturbedEuclidean2D(
                delta=float(doc["delta"]),
                harmonics=tuple(zip(k, c)),
                scale=float(doc.get("scale", 1.0)),
            )
    except KeyError as e:
        raise AnisotropyError(f"tension field missing: {e.args[0]}") from e
    except ValueError as e:
        raise AnisotropyError(f"malformed tension: {e}") from e
    raise AnisotropyError(f"Unsupported tension variant: {variant!r}")


def half_l1(n: int = 2) -> Crystalline:
    """f = 1/2 ||nu||_1, whose Wulff shape is the unit cube centered at 0"""
    corners = np.array(np.meshgrid(*[[-0.5, 0.5]] * n, indexing="ij")).reshape(n, -1).T
    return Crystalline(corners)


class AnisotropyError(Exception):
    """Exception raised for invalid surface tensions and Wulff constructions."""
    pass
