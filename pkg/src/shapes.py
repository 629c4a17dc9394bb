"""
Shape representations
Polygons, star domains over Wulff shapes, boxes, balls and grid masks, with
volume, anisotropic perimeter, barycenter, rescaling, slicing and distances
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from math import gamma, pi
from typing import Any, Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
import shapely
from shapely.geometry import GeometryCollection, LineString, MultiPolygon, Polygon
from shapely.geometry.polygon import orient
from shapely.ops import unary_union
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.distance import pdist

from src.anisotropy import SurfaceTension, WulffShape, build_wulff, Euclidean
from src.quadrature import spectral_derivative, spectral_upsample

logger = logging.getLogger(__name__)

AREA_EPS = 1e-12
BALL_PERIMETER_NODES = 4096


def unit_ball_volume(n: int) -> float:
    """omega_n, the volume of the unit ball in R^n"""
    return pi ** (n / 2.0) / gamma(n / 2.0 + 1.0)


class Shape(ABC):
    """A bounded set E in R^n with the geometry the energies need"""

    variant: str = ""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Ambient dimension"""

    @abstractmethod
    def volume(self) -> float:
        """Lebesgue measure |E|"""

    @abstractmethod
    def barycenter(self) -> np.ndarray:
        """|E|^{-1} times the first moment of E"""

    @abstractmethod
    def aniso_perimeter(self, f: SurfaceTension) -> float:
        """P_f(E), the boundary integral of f(nu_E)"""

    @abstractmethod
    def dilated(self, r: float) -> "Shape":
        """rE, dilation about the origin"""

    @abstractmethod
    def translated(self, z) -> "Shape":
        """E + z"""

    @abstractmethod
    def diameter(self) -> float:
        """Largest distance between two points of E"""

    @abstractmethod
    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points lying in E"""

    @abstractmethod
    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        """(lower corner, upper corner)"""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """JSON document"""

    def max_radius(self) -> float:
        """Largest |x| over E, used for confinement"""
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))

    def to_polygon(self, resolution: int = 256) -> "Polygon2D":
        raise ShapeError(f"{self.variant} has no polygonal form")

    def boundary_points(self, count: int) -> np.ndarray:
        """Points on the boundary, roughly equidistributed in arclength"""
        return self.to_polygon(max(count, 64)).boundary_points(count)


@dataclass(frozen=True, eq=False)
class Polygon2D(Shape):
    """Polygonal region: one or more components, holes allowed

    Exterior rings are stored counter-clockwise and holes clockwise, so every
    boundary edge has the region on its left.
    """

    geometry: Union[Polygon, MultiPolygon]
    variant = "polygon"

    def __post_init__(self):
        geom = self.geometry
        if isinstance(geom, Polygon):
            parts = [geom]
        elif isinstance(geom, MultiPolygon):
            parts = list(geom.geoms)
        else:
            raise ShapeError(f"expected a polygon, got {geom.geom_type}")
        if geom.is_empty or geom.area <= 0:
            raise ShapeError("polygon has no area")
        if not geom.is_valid:
            raise ShapeError(f"invalid polygon: {shapely.is_valid_reason(geom)}")
        parts = [orient(p, sign=1.0) for p in parts]
        geom = parts[0] if len(parts) == 1 else MultiPolygon(parts)
        starts, ends = [], []
        for part in parts:
            for ring in [part.exterior, *part.interiors]:
                coords = np.asarray(ring.coords, dtype=float)
                starts.append(coords[:-1])
                ends.append(coords[1:])
        object.__setattr__(self, "geometry", geom)
        object.__setattr__(self, "_starts", np.vstack(starts))
        object.__setattr__(self, "_ends", np.vstack(ends))

    @classmethod
    def from_vertices(cls, vertices) -> "Polygon2D":
        """Simple polygon from counter-clockwise vertices"""
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise ShapeError("need at least three 2D vertices")
        if np.allclose(verts[0], verts[-1]):
            verts = verts[:-1]
        signed = 0.5 * np.sum(verts[:, 0] * np.roll(verts[:, 1], -1) - np.roll(verts[:, 0], -1) * verts[:, 1])
        if signed <= 0:
            raise ShapeError("vertices must be counter-clockwise with positive area")
        if not shapely.LinearRing(verts).is_simple:
            raise ShapeError("polygon boundary self-intersects")
        return cls(Polygon(verts))

    @classmethod
    def regular(cls, count: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> "Polygon2D":
        theta = phase + 2.0 * np.pi * np.arange(count) / count
        verts = np.asarray(center, dtype=float) + radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return cls.from_vertices(verts)

    @classmethod
    def random_star(cls, rng: np.random.Generator, count: int = 8, r_min: float = 0.5, r_max: float = 1.5) -> "Polygon2D":
        """Star-shaped polygon with jittered angles and random radii"""
        theta = 2.0 * np.pi * (np.arange(count) + rng.uniform(0.1, 0.9, count)) / count
        radius = rng.uniform(r_min, r_max, count)
        return cls.from_vertices(np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1))

    @property
    def dim(self) -> int:
        return 2

    @property
    def vertices(self) -> np.ndarray:
        """Exterior vertices of a single-component polygon"""
        if not isinstance(self.geometry, Polygon):
            raise ShapeError("polygon has several components")
        return np.asarray(self.geometry.exterior.coords, dtype=float)[:-1]

    def components(self) -> Tuple["Polygon2D", ...]:
        if isinstance(self.geometry, Polygon):
            return (self,)
        return tuple(Polygon2D(p) for p in self.geometry.geoms)

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """(starts, ends) of all oriented boundary edges"""
        return self._starts, self._ends

    def volume(self) -> float:
        return float(self.geometry.area)

    def barycenter(self) -> np.ndarray:
        return np.asarray(self.geometry.centroid.coords[0], dtype=float)

    def aniso_perimeter(self, f: SurfaceTension) -> float:
        if f.dim != 2:
            raise ShapeError("tension dimension does not match the polygon")
        edge = self._ends - self._starts
        outward = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
        return float(np.sum(f.value(outward)))

    def dilated(self, r: float) -> "Polygon2D":
        if r <= 0:
            raise ShapeError("dilation factor must be positive")
        return Polygon2D(shapely.transform(self.geometry, lambda c: c * r))

    def translated(self, z) -> "Polygon2D":
        z = np.asarray(z, dtype=float)
        return Polygon2D(shapely.transform(self.geometry, lambda c: c + z))

    def linear_image(self, matrix: np.ndarray) -> "Polygon2D":
        """{M x : x in E}"""
        matrix = np.asarray(matrix, dtype=float)
        return Polygon2D(shapely.transform(self.geometry, lambda c: c @ matrix.T))

    def diameter(self) -> float:
        pts = np.unique(self._starts, axis=0)
        if len(pts) > 3:
            pts = pts[ConvexHull(pts).vertices]
        return float(pdist(pts).max())

    def contains(self, points):
        points = np.atleast_2d(points)
        return shapely.contains_xy(self.geometry, points[:, 0], points[:, 1])

    def bounding_box(self):
        b = self.geometry.bounds
        return np.array(b[:2]), np.array(b[2:])

    def max_radius(self) -> float:
        return float(np.linalg.norm(self._starts, axis=1).max())

    def to_polygon(self, resolution: int = 256) -> "Polygon2D":
        return self

    def boundary_points(self, count: int) -> np.ndarray:
        edge = self._ends - self._starts
        length = np.linalg.norm(edge, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(length)])
        target = (np.arange(count) + 0.5) / count * cum[-1]
        idx = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, len(length) - 1)
        frac = (target - cum[idx]) / length[idx]
        return self._starts[idx] + frac[:, None] * edge[idx]

    def edge_samples(self, per_edge: int) -> np.ndarray:
        """`per_edge` points on every edge, starting at its first vertex"""
        t = np.arange(per_edge) / per_edge
        edge = self._ends - self._starts
        return (self._starts[:, None, :] + t[None, :, None] * edge[:, None, :]).reshape(-1, 2)

    def to_dict(self):
        parts = []
        for part in self.components():
            geom = part.geometry
            parts.append(
                {
                    "vertices": np.asarray(geom.exterior.coords)[:-1].tolist(),
                    "holes": [np.asarray(r.coords)[:-1].tolist() for r in geom.interiors],
                }
            )
        if len(parts) == 1 and not parts[0]["holes"]:
            return {"variant": self.variant, "vertices": parts[0]["vertices"]}
        return {"variant": self.variant, "components": parts}


def polygonal_part(geom) -> Optional[Polygon2D]:
    """Polygon2D made of the areal part of a shapely result, None when it has no area"""
    if isinstance(geom, (Polygon, MultiPolygon)):
        polys = [geom] if isinstance(geom, Polygon) else list(geom.geoms)
    elif isinstance(geom, GeometryCollection):
        polys = []
        for g in geom.geoms:
            if isinstance(g, Polygon):
                polys.append(g)
            elif isinstance(g, MultiPolygon):
                polys.extend(g.geoms)
    else:
        polys = []
    polys = [p for p in polys if p.area > AREA_EPS]
    if not polys:
        return None
    merged = unary_union(polys)
    if not merged.is_valid:
        merged = shapely.make_valid(merged)
        return polygonal_part(merged)
    return Polygon2D(merged)


@dataclass(frozen=True, eq=False)
class Box(Shape):
    """Axis-aligned box with the given side lengths"""

    sides: np.ndarray
    center: Optional[np.ndarray] = None
    variant = "box"

    def __post_init__(self):
        sides = np.array(self.sides, dtype=float).ravel()
        if sides.size < 1 or np.any(sides <= 0):
            raise ShapeError("box sides must be strictly positive")
        center = np.zeros_like(sides) if self.center is None else np.array(self.center, dtype=float).ravel()
        if center.shape != sides.shape:
            raise ShapeError("box center has the wrong dimension")
        object.__setattr__(self, "sides", sides)
        object.__setattr__(self, "center", center)

    @property
    def dim(self) -> int:
        return self.sides.size

    def volume(self) -> float:
        return float(np.prod(self.sides))

    def barycenter(self) -> np.ndarray:
        return self.center.copy()

    def facet_areas(self) -> np.ndarray:
        return np.prod(self.sides) / self.sides

    def aniso_perimeter(self, f: SurfaceTension) -> float:
        if f.dim != self.dim:
            raise ShapeError("tension dimension does not match the box")
        eye = np.eye(self.dim)
        weights = f.value(eye) + f.value(-eye)
        return float(np.sum(weights * self.facet_areas()))

    def dilated(self, r: float) -> "Box":
        if r <= 0:
            raise ShapeError("dilation factor must be positive")
        return Box(self.sides * r, self.center * r)

    def translated(self, z) -> "Box":
        return Box(self.sides, self.center + np.asarray(z, dtype=float))

    def diameter(self) -> float:
        return float(np.linalg.norm(self.sides))

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.all(np.abs(points - self.center) < 0.5 * self.sides, axis=1)

    def bounding_box(self):
        return self.center - 0.5 * self.sides, self.center + 0.5 * self.sides

    def corners(self) -> np.ndarray:
        """Counter-clockwise corners of a 2D box"""
        if self.dim != 2:
            raise ShapeError("corners are listed for 2D boxes only")
        a, b = 0.5 * self.sides
        return self.center + np.array([[-a, -b], [a, -b], [a, b], [-a, b]])

    def to_polygon(self, resolution: int = 256) -> Polygon2D:
        return Polygon2D.from_vertices(self.corners())

    def to_dict(self):
        doc = {"variant": self.variant, "sides": self.sides.tolist()}
        if np.any(self.center != 0):
            doc["center"] = self.center.tolist()
        return doc


@dataclass(frozen=True, eq=False)
class Ball(Shape):
    n: int
    radius: float
    center: Optional[np.ndarray] = None
    variant = "ball"

    def __post_init__(self):
        if self.radius <= 0:
            raise ShapeError("ball radius must be positive")
        center = np.zeros(self.n) if self.center is None else np.array(self.center, dtype=float).ravel()
        if center.size != self.n:
            raise ShapeError("ball center has the wrong dimension")
        object.__setattr__(self, "center", center)

    @property
    def dim(self) -> int:
        return self.n

    def volume(self) -> float:
        return unit_ball_volume(self.n) * self.radius**self.n

    def barycenter(self) -> np.ndarray:
        return self.center.copy()

    def aniso_perimeter(self, f: SurfaceTension) -> float:
        if isinstance(f, Euclidean):
            return self.n * unit_ball_volume(self.n) * self.radius ** (self.n - 1)
        if self.n != 2 or f.dim != 2:
            raise ShapeError("anisotropic perimeter of balls is computed in 2D only")
        theta = 2.0 * np.pi * np.arange(BALL_PERIMETER_NODES) / BALL_PERIMETER_NODES
        nu = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return float(self.radius * np.mean(f.value(nu)) * 2.0 * np.pi)

    def dilated(self, r: float) -> "Ball":
        if r <= 0:
            raise ShapeError("dilation factor must be positive")
        return Ball(self.n, self.radius * r, self.center * r)

    def translated(self, z) -> "Ball":
        return Ball(self.n, self.radius, self.center + np.asarray(z, dtype=float))

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.linalg.norm(points - self.center, axis=1) < self.radius

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def max_radius(self) -> float:
        return float(np.linalg.norm(self.center)) + self.radius

    def to_polygon(self, resolution: int = 256) -> Polygon2D:
        if self.n != 2:
            raise ShapeError("only 2D balls have a polygonal form")
        return Polygon2D.regular(resolution, self.radius, self.center)

    def boundary_points(self, count: int) -> np.ndarray:
        theta = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return self.center + self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)

    def as_star_domain(self, samples: int = 256) -> "StarDomain":
        """The disk as a star domain over the Euclidean Wulff shape"""
        if self.n != 2:
            raise ShapeError("only 2D balls convert to star domains")
        return StarDomain(build_wulff(Euclidean(2), samples), np.zeros(samples), self.radius, self.center)

    def to_dict(self):
        return {"variant": self.variant, "n": self.n, "radius": self.radius, "center": self.center.tolist()}


@dataclass(frozen=True, eq=False)
class StarDomain(Shape):
    """Set with boundary {center + scale * (x + u(x) nu_K(x)) : x in dK}

    The base must be a smooth Wulff shape, whose samples lie on a uniform grid
    of normal angles; geometry of the perturbed curve is computed spectrally.
    """

    base: WulffShape
    u: np.ndarray
    scale: float = 1.0
    center: Optional[np.ndarray] = None
    variant = "star"

    def __post_init__(self):
        if not self.base.is_smooth:
            raise ShapeError("star domains need a smooth Wulff base")
        u = np.array(self.u, dtype=float).ravel()
        if u.size != len(self.base.points):
            raise ShapeError(f"expected {len(self.base.points)} offsets, got {u.size}")
        if u.size and np.abs(u).max() >= 0.5 * self.base.ell:
            raise ShapeError(
                f"offsets too large for an embedded graph: |u|_inf = {np.abs(u).max():.4g} >= ell_f/2"
            )
        if self.scale <= 0:
            raise ShapeError("scale must be positive")
        center = np.zeros(2) if self.center is None else np.array(self.center, dtype=float).ravel()
        u.flags.writeable = False
        curve = center + self.scale * (self.base.points + u[:, None] * self.base.normals)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "_curve", curve)
        object.__setattr__(self, "_tangent", spectral_derivative(curve, axis=0))

    @classmethod
    def from_function(cls, base: WulffShape, func, **kwargs) -> "StarDomain":
        """Offsets u = func(theta) on the normal-angle grid of the base"""
        return cls(base, func(base.angles), **kwargs)

    @property
    def dim(self) -> int:
        return 2

    @property
    def step(self) -> float:
        return 2.0 * np.pi / len(self.u)

    def curve(self) -> Tuple[np.ndarray, np.ndarray]:
        """(boundary points, derivative in the normal angle of the base)"""
        return self._curve, self._tangent

    def fine_curve(self, factor: int) -> Tuple[np.ndarray, np.ndarray]:
        """Spectrally interpolated boundary on a grid `factor` times finer"""
        fine = spectral_upsample(self._curve, factor, axis=0)
        return fine, spectral_derivative(fine, axis=0)

    def normals(self) -> np.ndarray:
        """Outer unit normals of the perturbed curve at the samples"""
        d = self._tangent
        nu = np.stack([d[:, 1], -d[:, 0]], axis=1)
        return nu / np.linalg.norm(nu, axis=1, keepdims=True)

    def weights(self) -> np.ndarray:
        """Arclength quadrature weights of the perturbed curve"""
        return np.linalg.norm(self._tangent, axis=1) * self.step

    def volume(self) -> float:
        y, d = self._curve, self._tangent
        return 0.5 * float(np.sum(y[:, 0] * d[:, 1] - y[:, 1] * d[:, 0])) * self.step

    def barycenter(self) -> np.ndarray:
        y, d = self._curve, self._tangent
        moment = 0.5 * self.step * np.array([np.sum(y[:, 0] ** 2 * d[:, 1]), -np.sum(y[:, 1] ** 2 * d[:, 0])])
        return moment / self.volume()

    def aniso_perimeter(self, f: SurfaceTension) -> float:
        if f.dim != 2:
            raise ShapeError("tension dimension does not match the star domain")
        d = self._tangent
        return float(np.sum(f.value(np.stack([d[:, 1], -d[:, 0]], axis=1)))) * self.step

    def dilated(self, r: float) -> "StarDomain":
        if r <= 0:
            raise ShapeError("dilation factor must be positive")
        return replace(self, scale=self.scale * r, center=self.center * r)

    def translated(self, z) -> "StarDomain":
        return replace(self, center=self.center + np.asarray(z, dtype=float))

    def with_offsets(self, u) -> "StarDomain":
        return replace(self, u=u)

    def diameter(self) -> float:
        fine, _ = self.fine_curve(4)
        return float(pdist(fine[ConvexHull(fine).vertices]).max())

    def contains(self, points):
        return self.to_polygon(4).contains(points)

    def bounding_box(self):
        fine, _ = self.fine_curve(4)
        return fine.min(axis=0), fine.max(axis=0)

    def max_radius(self) -> float:
        fine, _ = self.fine_curve(4)
        return float(np.linalg.norm(fine, axis=1).max())

    def to_polygon(self, resolution: int = 4) -> Polygon2D:
        """Polygon through the curve refined `resolution` times"""
        fine, _ = self.fine_curve(max(1, resolution))
        return Polygon2D.from_vertices(fine)

    def boundary_points(self, count: int) -> np.ndarray:
        factor = max(1, int(np.ceil(count / len(self.u))))
        fine, _ = self.fine_curve(factor)
        return fine

    def to_dict(self):
        return {
            "variant": self.variant,
            "tension": self.base.tension.to_dict(),
            "samples": len(self.u),
            "u": self.u.tolist(),
            "scale": self.scale,
            "center": self.center.tolist(),
        }


@dataclass(frozen=True, eq=False)
class GridMask(Shape):
    """Union of occupied h x h cells; occupancy[i, j] is the cell at origin + h*(j, i)"""

    h: float
    occupancy: np.ndarray
    origin: Optional[np.ndarray] = None
    variant = "grid"

    def __post_init__(self):
        occ = np.array(self.occupancy, dtype=bool)
        if occ.ndim != 2 or not occ.any():
            raise ShapeError("grid mask must be a nonempty 2D occupancy array")
        if self.h <= 0:
            raise ShapeError("cell size must be positive")
        origin = np.zeros(2) if self.origin is None else np.array(self.origin, dtype=float).ravel()
        occ.flags.writeable = False
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def rasterize(cls, shape: Shape, h: float) -> "GridMask":
        """Cells whose centers lie in `shape`"""
        lo, hi = shape.bounding_box()
        lo = np.floor(lo / h) * h
        nx, ny = (np.ceil((hi - lo) / h).astype(int) + 1)
        jj, ii = np.meshgrid(np.arange(nx), np.arange(ny))
        centers = lo + h * (np.stack([jj.ravel(), ii.ravel()], axis=1) + 0.5)
        occ = shape.to_polygon().contains(centers).reshape(ny, nx)
        return cls(h, occ, lo)

    @property
    def dim(self) -> int:
        return 2

    def cell_centers(self) -> np.ndarray:
        ii, jj = np.nonzero(self.occupancy)
        return self.origin + self.h * (np.stack([jj, ii], axis=1) + 0.5)

    def volume(self) -> float:
        return self.h**2 * float(np.count_nonzero(self.occupancy))

    def barycenter(self) -> np.ndarray:
        return self.cell_centers().mean(axis=0)

    def aniso_perimeter(self, f: SurfaceTension) -> float:
        raise ShapeError("anisotropic perimeter is not supported for grid masks")

    def dilated(self, r: float) -> "GridMask":
        if r <= 0:
            raise ShapeError("dilation factor must be positive")
        return replace(self, h=self.h * r, origin=self.origin * r)

    def translated(self, z) -> "GridMask":
        return replace(self, origin=self.origin + np.asarray(z, dtype=float))

    def _corners(self) -> np.ndarray:
        c = self.cell_centers()
        offsets = 0.5 * self.h * np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]])
        return (c[:, None, :] + offsets[None]).reshape(-1, 2)

    def diameter(self) -> float:
        pts = np.unique(self._corners(), axis=0)
        if len(pts) > 3:
            pts = pts[ConvexHull(pts).vertices]
        return float(pdist(pts).max())

    def contains(self, points):
        points = np.atleast_2d(points)
        idx = np.floor((points - self.origin) / self.h).astype(int)
        ny, nx = self.occupancy.shape
        inside = (idx[:, 0] >= 0) & (idx[:, 0] < nx) & (idx[:, 1] >= 0) & (idx[:, 1] < ny)
        out = np.zeros(len(points), dtype=bool)
        out[inside] = self.occupancy[idx[inside, 1], idx[inside, 0]]
        return out

    def bounding_box(self):
        corners = self._corners()
        return corners.min(axis=0), corners.max(axis=0)

    def to_polygon(self, resolution: int = 256) -> Polygon2D:
        h = self.h
        cells = [shapely.box(x - h / 2, y - h / 2, x + h / 2, y + h / 2) for x, y in self.cell_centers()]
        return polygonal_part(unary_union(cells))

    def to_dict(self):
        return {
            "variant": self.variant,
            "h": self.h,
            "origin": self.origin.tolist(),
            "occupancy": self.occupancy.astype(int).tolist(),
        }


@dataclass(frozen=True)
class SlicingPlane:
    """Hyperplane {x . normal = offset}; the plus side is {x . normal > offset}"""

    normal: Tuple[float, ...]
    offset: float

    def __post_init__(self):
        nu = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(nu) - 1.0) > 1e-9:
            raise ShapeError("slicing plane normal must be a unit vector")
        object.__setattr__(self, "normal", tuple(nu.tolist()))


class SliceResult(NamedTuple):
    plus: Optional[Shape]
    minus: Optional[Shape]
    cut_measure: float


class StarNorms(NamedTuple):
    linf: float
    c1: float
    h1: float


def volume(E: Shape) -> float:
    return E.volume()


def aniso_perimeter(E: Shape, f: SurfaceTension) -> float:
    return E.aniso_perimeter(f)


def barycenter(E: Shape) -> np.ndarray:
    return E.barycenter()


def diameter(E: Shape) -> float:
    return E.diameter()


def rescale_to_volume(E: Shape, m: float) -> Shape:
    """rE with r = (m/|E|)^{1/n}"""
    if m <= 0:
        raise ShapeError("target volume must be positive")
    return E.dilated((m / E.volume()) ** (1.0 / E.dim))


def _slice_box(E: Box, plane: SlicingPlane) -> SliceResult:
    nu = np.asarray(plane.normal)
    axis = int(np.argmax(np.abs(nu)))
    if abs(abs(nu[axis]) - 1.0) > 1e-12:
        raise ShapeError("boxes in n > 2 are sliced along coordinate hyperplanes only")
    cut = plane.offset / nu[axis]
    lo, hi = E.bounding_box()

    def piece(a, b):
        if b - a <= 0:
            return None
        sides, center = E.sides.copy(), E.center.copy()
        sides[axis], center[axis] = b - a, 0.5 * (a + b)
        return Box(sides, center)

    c = min(max(cut, lo[axis]), hi[axis])
    lower, upper = piece(lo[axis], c), piece(c, hi[axis])
    measure = float(E.facet_areas()[axis]) if lo[axis] < cut < hi[axis] else 0.0
    return SliceResult(upper, lower, measure) if nu[axis] > 0 else SliceResult(lower, upper, measure)


def slice_shape(E: Shape, plane: SlicingPlane) -> SliceResult:
    """
    Cut E by a hyperplane into E+ = E n {x.nu > t} and E- = E n {x.nu < t}

    Args:
        E: Polygon2D or Box
        plane: Slicing plane

    Returns:
        SliceResult with empty sides as None and cut_measure = H^{n-1}(E n H)
    """
    if isinstance(E, Box) and E.dim > 2:
        return _slice_box(E, plane)
    if not isinstance(E, (Polygon2D, Box)):
        raise ShapeError(f"slicing is defined for polygons and boxes, not {E.variant}")
    poly = E.to_polygon()
    nu = np.asarray(plane.normal, dtype=float)
    if nu.size != 2:
        raise ShapeError("slicing plane dimension does not match the shape")
    tau = np.array([-nu[1], nu[0]])
    lo, hi = poly.bounding_box()
    reach = 4.0 * (np.linalg.norm(hi - lo) + np.abs(np.concatenate([lo, hi])).max() + abs(plane.offset) + 1.0)
    p0 = plane.offset * nu
    a, b = p0 - reach * tau, p0 + reach * tau
    plus_half = Polygon([a, b, b + reach * nu, a + reach * nu])
    minus_half = Polygon([a, a - reach * nu, b - reach * nu, b])
    geom = poly.geometry
    cut = geom.intersection(LineString([a, b])).length
    return SliceResult(
        polygonal_part(geom.intersection(plus_half)),
        polygonal_part(geom.intersection(minus_half)),
        float(cut),
    )


def _dense_boundary(E: Shape, per_side: int) -> np.ndarray:
    if isinstance(E, Ball):
        return E.boundary_points(4 * per_side)
    if isinstance(E, StarDomain):
        return E.boundary_points(4 * per_side)
    poly = E.to_polygon()
    return np.vstack([poly.edge_samples(per_side), poly.edges()[1]])


def hausdorff_boundary_distance(E: Shape, F: Shape, per_side: int = 1024) -> float:
    """Symmetric Hausdorff distance between dense samplings of dE and dF"""
    a, b = _dense_boundary(E, per_side), _dense_boundary(F, per_side)
    d_ab = cKDTree(b).query(a)[0].max()
    d_ba = cKDTree(a).query(b)[0].max()
    return float(max(d_ab, d_ba))


def symmetric_difference_measure(E: Shape, F: Shape) -> float:
    """|E symmetric-difference F| via exact polygon clipping"""
    return float(E.to_polygon().geometry.symmetric_difference(F.to_polygon().geometry).area)


def star_norms(u, base: WulffShape) -> StarNorms:
    """
    Norms of boundary offsets along the base Wulff shape

    Args:
        u: Offsets at the base samples
        base: Smooth Wulff shape carrying the arclength weights

    Returns:
        StarNorms(linf, c1, h1): sup norm, largest first difference quotient
        in arclength, and the H^1(dK) norm with centered differences
    """
    u = np.asarray(u, dtype=float)
    w = base.weights
    gap = 0.5 * (w + np.roll(w, -1))
    c1 = float(np.max(np.abs(np.roll(u, -1) - u) / gap))
    span = 0.5 * np.roll(w, 1) + w + 0.5 * np.roll(w, -1)
    du = (np.roll(u, -1) - np.roll(u, 1)) / span
    h1 = float(np.sqrt(np.sum(w * (u**2 + du**2))))
    return StarNorms(float(np.abs(u).max()), c1, h1)


class ShapeError(Exception):
    """Exception raised for invalid shapes and unsupported shape operations."""
    pass
