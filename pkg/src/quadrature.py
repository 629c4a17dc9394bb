"""
Quadrature rules
Gauss-Legendre panels, spectral helpers for periodic samples, and the signed
radial-fan integrator used for singular kernels over polygons
"""
import logging
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import roots_legendre

import config
from src.parallel import ordered_map

logger = logging.getLogger(__name__)

# Radial antiderivative: (R, e) -> integral over r in [0, R] of k(r e) r dr
RadialAntiderivative = Callable[[np.ndarray, np.ndarray], np.ndarray]


class QuadratureSpec(BaseModel):
    """Discretization controls shared by every energy evaluation"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    fan_order: int = Field(8, ge=2, le=64, description="Gauss nodes per angular panel")
    panel_width: float = Field(1.0, gt=0.0, description="max panel width in the asinh variable")
    outer_order: int = Field(16, ge=2, le=64, description="Gauss nodes per direction of outer rules")
    tol: float = Field(default_factory=lambda: config.DEFAULT_TOL, gt=0.0)
    mc_samples: int = Field(default_factory=lambda: config.DEFAULT_MC_SAMPLES, ge=1000)
    seed: int = Field(default_factory=lambda: config.DEFAULT_SEED, ge=0)
    boundary_samples: int = Field(256, ge=16)
    upsample: int = Field(4, ge=1, le=16, description="refinement of star boundaries")
    pair_budget: int = Field(200_000, ge=1000, description="point/edge pairs per fan batch")

    def refined(self) -> "QuadratureSpec":
        """Spec with doubled node counts, used for error estimates"""
        return self.model_copy(
            update={
                "fan_order": min(2 * self.fan_order, 64),
                "outer_order": min(2 * self.outer_order, 64),
                "panel_width": self.panel_width / 2.0,
            }
        )


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre rule on [0, 1]

    Args:
        order: Number of nodes

    Returns:
        Tuple of (nodes, weights), both read-only
    """
    if order < 1:
        raise QuadratureError(f"Gauss order must be positive, got {order}")
    x, w = roots_legendre(order)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def composite_gauss(breaks: Sequence[float], order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss rule on consecutive intervals [breaks[i], breaks[i+1]]"""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    widths = np.diff(breaks)
    nodes = breaks[:-1, None] + widths[:, None] * x[None, :]
    weights = widths[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_breaks(length: float, scale: float) -> np.ndarray:
    """Breakpoints on [0, length] refined geometrically toward 0 down to scale/2"""
    if length <= 0:
        raise QuadratureError("interval length must be positive")
    pts = [0.0]
    step = 0.5 * scale
    while step < length:
        pts.append(step)
        step *= 2.0
    pts.append(length)
    return np.asarray(pts)


def spectral_derivative(values: np.ndarray, order: int = 1, axis: int = 0) -> np.ndarray:
    """
    Derivative of equispaced samples of a 2*pi-periodic function

    Args:
        values: Samples at theta_j = 2*pi*j/m along `axis`
        order: Derivative order
        axis: Sample axis

    Returns:
        Samples of the derivative
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[axis]
    coef = np.fft.rfft(values, axis=axis)
    k = np.arange(m // 2 + 1, dtype=float)
    mult = (1j * k) ** order
    if m % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = -1
    return np.fft.irfft(coef * mult.reshape(shape), n=m, axis=axis)


def spectral_upsample(values: np.ndarray, factor: int, axis: int = 0) -> np.ndarray:
    """Trigonometric interpolation of periodic samples onto a grid `factor` times finer"""
    values = np.asarray(values, dtype=float)
    if factor == 1:
        return values.copy()
    m = values.shape[axis]
    big = m * factor
    coef = np.moveaxis(np.fft.rfft(values, axis=axis), axis, -1)
    if m % 2 == 0:
        coef[..., -1] *= 0.5
    padded = np.zeros(coef.shape[:-1] + (big // 2 + 1,), dtype=complex)
    padded[..., : coef.shape[-1]] = coef
    out = np.fft.irfft(padded, n=big, axis=-1) * factor
    return np.moveaxis(out, -1, axis)


def _panel_nodes(lo: np.ndarray, hi: np.ndarray, order: int, width: float):
    """Split each [lo_i, hi_i] into panels no wider than `width` and place Gauss nodes"""
    span = hi - lo
    n_pan = np.maximum(1, np.ceil(span / width).astype(np.int64))
    owner = np.repeat(np.arange(lo.size), n_pan)
    first = np.cumsum(n_pan) - n_pan
    local = np.arange(owner.size) - np.repeat(first, n_pan)
    h = span[owner] / n_pan[owner]
    left = lo[owner] + local * h
    x, w = gauss_legendre(order)
    nodes = left[:, None] + h[:, None] * x[None, :]
    weights = h[:, None] * w[None, :]
    return owner, nodes, weights


def _fan_batch(
    x: np.ndarray,
    starts: np.ndarray,
    tangents: np.ndarray,
    normals: np.ndarray,
    lengths: np.ndarray,
    radial: RadialAntiderivative,
    spec: QuadratureSpec,
    kinks: Optional[np.ndarray],
    cutoff: float,
) -> np.ndarray:
    rel = starts[None, :, :] - x[:, None, :]
    dist = np.einsum("bek,ek->be", rel, normals)
    t_a = np.einsum("bek,ek->be", rel, tangents)
    bi, ei = np.nonzero(np.abs(dist) > cutoff)
    if bi.size == 0:
        return np.zeros(len(x))

    d = dist[bi, ei]
    sign = np.sign(d)
    ad = np.abs(d)
    u_a = np.arcsinh(t_a[bi, ei] / ad)
    u_b = np.arcsinh((t_a[bi, ei] + lengths[ei]) / ad)
    toward = sign[:, None] * normals[ei]
    tau = tangents[ei]

    if kinks is not None and len(kinks):
        vn = toward @ kinks.T
        vt = tau @ kinks.T
        with np.errstate(divide="ignore", invalid="ignore"):
            u_k = np.arcsinh(vt / vn)
        u_k = np.where(vn > 1e-12, u_k, u_a[:, None])
        u_k = np.clip(u_k, u_a[:, None], u_b[:, None])
        breaks = np.sort(np.concatenate([u_a[:, None], u_k, u_b[:, None]], axis=1), axis=1)
        lo = breaks[:, :-1].ravel()
        hi = breaks[:, 1:].ravel()
        interval_pair = np.repeat(np.arange(bi.size), breaks.shape[1] - 1)
    else:
        lo, hi = u_a, u_b
        interval_pair = np.arange(bi.size)

    owner, u, wu = _panel_nodes(lo, hi, spec.fan_order, spec.panel_width)
    pair = interval_pair[owner]
    cu = np.cosh(u)
    direction = toward[pair][:, None, :] / cu[..., None] + tau[pair][:, None, :] * np.tanh(u)[..., None]
    values = radial(ad[pair][:, None] * cu, direction) / cu * wu
    per_panel = sign[pair] * values.sum(axis=1)
    per_pair = np.bincount(pair, weights=per_panel, minlength=bi.size)
    return np.bincount(bi, weights=per_pair, minlength=len(x))


def fan_integral(
    points: np.ndarray,
    starts: np.ndarray,
    ends: np.ndarray,
    radial: RadialAntiderivative,
    spec: QuadratureSpec,
    kinks: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Integral of k(y - x) over a polygonal region for each evaluation point x

    The region is decomposed into signed triangles (x, a, b) over its oriented
    boundary edges. Each triangle is integrated in polar coordinates around x:
    the radial part analytically through `radial`, the angular part with Gauss
    panels in the variable u = asinh(t/d), which keeps the integrand smooth
    however close x is to the edge. Points lying on an edge line skip that
    edge, so boundary points are handled exactly.

    Args:
        points: (P, 2) evaluation points
        starts: (E, 2) edge start points, region on the left of each edge
        ends: (E, 2) edge end points
        radial: Radial antiderivative of the kernel
        spec: Quadrature controls
        kinks: Optional (K, 2) unit directions where the kernel's angular
            factor is not smooth; panels are split there

    Returns:
        (P,) array of integrals
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    edge = ends - starts
    lengths = np.linalg.norm(edge, axis=1)
    keep = lengths > 0
    starts, edge, lengths = starts[keep], edge[keep], lengths[keep]
    if lengths.size == 0:
        raise QuadratureError("region has no boundary edges")
    tangents = edge / lengths[:, None]
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)

    extent = np.ptp(np.vstack([starts, ends[keep]]), axis=0).max()
    cutoff = 1e-14 * max(extent, 1e-300)
    batch = max(1, spec.pair_budget // lengths.size)

    chunks = [points[lo : lo + batch] for lo in range(0, len(points), batch)]
    parts = ordered_map(
        lambda chunk: _fan_batch(chunk, starts, tangents, normals, lengths, radial, spec, kinks, cutoff),
        chunks,
    )
    out = np.concatenate(parts) if parts else np.empty(0)
    logger.debug("fan integral: %d points, %d edges", len(points), lengths.size)
    return out


def triangle_fan_rule(
    apex: np.ndarray, starts: np.ndarray, ends: np.ndarray, order: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Signed collapsed-Gauss rule over the triangles (apex, a, b)

    Nodes are graded toward the boundary edge and toward its end points, where
    Riesz potentials lose smoothness. Summed over a closed oriented boundary
    the rule integrates over the enclosed region.

    Args:
        apex: Common apex of the triangles
        starts: (E, 2) edge starts
        ends: (E, 2) edge ends
        order: Gauss nodes per direction

    Returns:
        Tuple of (nodes (N, 2), signed weights (N,))
    """
    apex = np.asarray(apex, dtype=float)
    x, w = gauss_legendre(order)
    s = 1.0 - (1.0 - x) ** 3
    ds = 3.0 * (1.0 - x) ** 2 * w
    t = x * x * (3.0 - 2.0 * x)
    dt = 6.0 * x * (1.0 - x) * w

    a = np.asarray(starts, dtype=float) - apex
    edge = np.asarray(ends, dtype=float) - np.asarray(starts, dtype=float)
    jac = a[:, 0] * edge[:, 1] - a[:, 1] * edge[:, 0]

    ray = a[:, None, :] + t[None, :, None] * edge[:, None, :]
    nodes = apex + s[None, :, None, None] * ray[:, None, :, :]
    weights = (jac[:, None, None] * (s * ds)[None, :, None]) * dt[None, None, :]
    return nodes.reshape(-1, 2), weights.ravel()


class QuadratureError(Exception):
    """Exception raised for errors in quadrature construction."""
    pass
