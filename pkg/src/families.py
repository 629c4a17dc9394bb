"""
Shape families
Finite-dimensional shape families explored by the optimizers; every parameter
vector maps to a shape renormalized to the family's target volume
"""
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from shapely.geometry import Polygon

from src.anisotropy import Crystalline, SurfaceTension, WulffShape, build_wulff, half_l1, tension_from_dict
from src.energy import EnergyBreakdown, EnergyParams, total_energy
from src.quadrature import QuadratureSpec
from src.shapes import Box, Polygon2D, Shape, ShapeError, StarDomain, polygonal_part, rescale_to_volume

logger = logging.getLogger(__name__)

STAR_SAMPLES = 64
C1_REGIME = 0.05


class ShapeFamily(ABC):
    """Base class for parameterized shape families"""

    variant: str = ""

    def __init__(self, tension: SurfaceTension, target_volume: float = 1.0):
        """Initialize the family with its surface tension and the volume every member is rescaled to"""
        if target_volume <= 0:
            raise FamilyError("target volume must be positive")
        self.tension = tension
        self.target_volume = target_volume

    @property
    def dimension(self) -> int:
        return len(self.bounds())

    @abstractmethod
    def bounds(self) -> List[Tuple[float, float]]:
        """
        Box constraints on the parameters

        Returns:
            List of (low, high) pairs, one per parameter
        """
        pass

    @abstractmethod
    def initial(self) -> np.ndarray:
        """
        Parameters of the Wulff shape within the family

        Returns:
            Parameter vector
        """
        pass

    @abstractmethod
    def build(self, x: np.ndarray) -> Shape:
        """
        Shape for a parameter vector, before volume renormalization

        Args:
            x: Parameter vector

        Returns:
            Shape
        """
        pass

    def shape(self, x) -> Shape:
        """Member of the family at x with volume equal to target_volume"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != self.dimension:
            raise FamilyError(f"{self.variant} expects {self.dimension} parameters, got {x.size}")
        return rescale_to_volume(self.build(self.clip(x)), self.target_volume)

    def clip(self, x: np.ndarray) -> np.ndarray:
        lo, hi = np.array(self.bounds()).T
        return np.clip(x, lo, hi)

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        lo, hi = np.array(self.bounds()).T
        return lo + (hi - lo) * rng.random(lo.size)

    def energy(self, x, params: EnergyParams, spec: QuadratureSpec, nonlocal_kind: str = "V") -> EnergyBreakdown:
        return total_energy(self.shape(x), self.tension, params, spec, nonlocal_kind)

    def describe(self, x) -> Dict[str, Any]:
        """Named parameters for reports"""
        return {f"x{k}": float(v) for k, v in enumerate(np.atleast_1d(x))}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "tension": self.tension.to_dict(),
            "target_volume": self.target_volume,
            "bounds": [list(b) for b in self.bounds()],
        }


class RectangleFamily(ShapeFamily):
    """R_a = [a x 1/a] with f = 1/2 ||.||_1"""

    variant = "rectangle"

    def __init__(self, a_range: Sequence[float] = (0.5, 2.0), target_volume: float = 1.0):
        lo, hi = (float(v) for v in a_range)
        if not 0 < lo < 1.0 < hi:
            raise FamilyError(f"a-range must lie in (0, inf) and contain 1, got {a_range}")
        super().__init__(half_l1(2), target_volume)
        self.a_range = (lo, hi)

    def bounds(self):
        return [self.a_range]

    def initial(self):
        return np.array([1.0])

    def build(self, x):
        a = float(x[0])
        return Box([a, 1.0 / a])

    def describe(self, x):
        return {"a": float(np.atleast_1d(x)[0])}


class BoxNDFamily(ShapeFamily):
    """Unit-volume boxes in R^n parameterized by log-sides s_1..s_{n-1}; the last side is 1/prod(s)"""

    variant = "box"

    def __init__(self, n: int = 3, side_range: Sequence[float] = (0.5, 2.0), target_volume: float = 1.0):
        if n not in (2, 3, 4):
            raise FamilyError(f"box families are supported for n in 2..4, got {n}")
        lo, hi = (float(v) for v in side_range)
        if not 0 < lo < 1.0 < hi:
            raise FamilyError(f"side range must contain 1, got {side_range}")
        super().__init__(half_l1(n), target_volume)
        self.n = n
        self.side_range = (lo, hi)

    def bounds(self):
        return [(np.log(self.side_range[0]), np.log(self.side_range[1]))] * (self.n - 1)

    def initial(self):
        return np.zeros(self.n - 1)

    def sides(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(np.append(x, -x.sum()))

    def build(self, x):
        return Box(self.sides(x))

    def describe(self, x):
        return {f"s{k + 1}": float(s) for k, s in enumerate(self.sides(self.clip(np.atleast_1d(x))))}


class PolygonFixedNormalsFamily(ShapeFamily):
    """Convex polygons {x . nu_i <= h_i} with the facet normals of a crystalline Wulff shape"""

    variant = "polygon"

    def __init__(self, tension: Crystalline, offset_range: Sequence[float] = (0.25, 4.0), target_volume: float = 1.0):
        if not isinstance(tension, Crystalline) or tension.dim != 2:
            raise FamilyError("fixed-normal polygons need a planar crystalline tension")
        super().__init__(tension, target_volume)
        self.normals = tension.facet_normals
        self.reference = tension.facet_offsets
        if len(self.reference) > 16:
            raise FamilyError("at most 16 facets are supported")
        self.offset_range = tuple(float(v) for v in offset_range)

    def bounds(self):
        lo, hi = self.offset_range
        return [(lo * h, hi * h) for h in self.reference]

    def initial(self):
        return self.reference.copy()

    def build(self, x):
        reach = 10.0 * float(np.max(x)) / float(np.min(self.reference)) + 10.0
        region = Polygon([(-reach, -reach), (reach, -reach), (reach, reach), (-reach, reach)])
        for nu, h in zip(self.normals, x):
            tau = np.array([-nu[1], nu[0]])
            base = h * nu
            half = Polygon([base - 4 * reach * tau, base + 4 * reach * tau, base + 4 * reach * tau - 8 * reach * nu, base - 4 * reach * tau - 8 * reach * nu])
            region = region.intersection(half)
        shape = polygonal_part(region)
        if shape is None:
            raise FamilyError("offsets produce an empty polygon")
        return shape

    def describe(self, x):
        return {f"h{k}": float(v) for k, v in enumerate(np.atleast_1d(x))}


class StarFourierFamily(ShapeFamily):
    """
    Star domains over a smooth Wulff shape with offsets
    u = sum_{k=2}^{k_max} a_k cos(k theta) + b_k sin(k theta)

    Coefficient bounds mu / (2 (k + 1) (k_max - 1)) keep ||u||_{C^1} <= mu;
    members are dilated to the target volume and recentered at the origin.
    """

    variant = "star"

    def __init__(self, tension: SurfaceTension, k_max: int = 4, mu: float = C1_REGIME, target_volume: Optional[float] = None, samples: int = STAR_SAMPLES):
        if not tension.is_smooth or tension.dim != 2:
            raise FamilyError("Fourier star families need a smooth planar tension")
        if not 2 <= k_max <= 9:
            raise FamilyError(f"k_max must lie in 2..9, got {k_max}")
        base = build_wulff(tension, samples)
        super().__init__(tension, base.volume if target_volume is None else target_volume)
        self.base: WulffShape = base
        self.k_max = k_max
        self.mu = mu
        self.harmonics = np.arange(2, k_max + 1)

    def bounds(self):
        out = []
        for k in self.harmonics:
            b = self.mu / (2.0 * (k + 1) * (self.k_max - 1))
            out.extend([(-b, b), (-b, b)])
        return out

    def initial(self):
        return np.zeros(2 * self.harmonics.size)

    def offsets(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        theta = self.base.angles
        return np.cos(np.outer(theta, self.harmonics)) @ x[:, 0] + np.sin(np.outer(theta, self.harmonics)) @ x[:, 1]

    def build(self, x):
        return StarDomain(self.base, self.offsets(x))

    def shape(self, x):
        E = super().shape(x)
        return E.translated(-E.barycenter())

    def describe(self, x):
        x = np.atleast_1d(x).reshape(-1, 2)
        out = {}
        for k, (a, b) in zip(self.harmonics, x):
            out[f"a{k}"] = float(a)
            out[f"b{k}"] = float(b)
        return out


def get_family(variant: str, tension: Optional[Dict[str, Any]] = None, **options) -> ShapeFamily:
    """
    Factory function to build a shape family from its config

    Args:
        variant: 'rectangle', 'box', 'polygon' or 'star'
        tension: Tension document for the polygon and star families
        **options: Family-specific settings (a_range, n, side_range,
            offset_range, k_max, mu, target_volume)

    Returns:
        ShapeFamily instance
    """
    variant = variant.lower()
    try:
        if variant == "rectangle":
            return RectangleFamily(**options)
        if variant == "box":
            return BoxNDFamily(**options)
        if variant == "polygon":
            return PolygonFixedNormalsFamily(tension_from_dict(tension or {"variant": "crystalline", "points": half_l1(2).points.ravel().tolist()}), **options)
        if variant == "star":
            return StarFourierFamily(tension_from_dict(tension or {"variant": "euclidean"}), **options)
    except TypeError as e:
        raise FamilyError(f"invalid options for family {variant!r}: {e}") from e
    except ShapeError as e:
        raise FamilyError(str(e)) from e
    raise FamilyError(f"Unsupported family: {variant}")


class FamilyError(Exception):
    """Exception raised for invalid shape families and parameters."""
    pass
