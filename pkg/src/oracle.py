"""
Monte Carlo oracle
Brute-force estimates of potentials and interaction energies, independent of the quadrature code
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.anisotropy import SurfaceTension
from src.shapes import Shape, unit_ball_volume

logger = logging.getLogger(__name__)

BATCH = 1_000_000


@dataclass
class MCEstimate:
    value: float
    stderr: float
    samples: int

    def agrees_with(self, other: float, rtol: float) -> bool:
        """True when |value - other| is within rtol relative or four standard errors"""
        return abs(self.value - other) <= max(rtol * abs(other), 4.0 * self.stderr)

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr, "samples": self.samples}


def _directions(rng: np.random.Generator, pairs: int, n: int) -> np.ndarray:
    if n == 2:
        # stratified angles
        theta = 2.0 * np.pi * (np.arange(pairs) + rng.random(pairs)) / pairs
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    g = rng.standard_normal((pairs, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _polar_batch(rng, origins: np.ndarray, E: Shape, exponent: float, tension: Optional[SurfaceTension], r_max: float):
    """Per-pair averages of 1_E(x + r e) f_*(e)^{-p}, r drawn from density ~ r^{n-1-p}"""
    pairs, n = origins.shape
    e = _directions(rng, pairs, n)
    u = rng.random(pairs)
    weight = np.ones(pairs) if tension is None else tension.dual(e) ** (-exponent)
    total = np.zeros(pairs)
    for v in (u, 1.0 - u):
        r = r_max * v ** (1.0 / (n - exponent))
        total += E.contains(origins + r[:, None] * e)
    return 0.5 * total * weight


def _radial_constant(n: int, exponent: float, r_max: float) -> float:
    return n * unit_ball_volume(n) * r_max ** (n - exponent) / (n - exponent)


def _summarize(chunks, scale: float, samples: int) -> MCEstimate:
    values = np.concatenate(chunks)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return MCEstimate(scale * mean, scale * stderr, samples)


def mc_potential(
    E: Shape,
    x,
    exponent: float,
    samples: int,
    seed: int,
    tension: Optional[SurfaceTension] = None,
) -> MCEstimate:
    """
    Estimate the integral of f_*(y - x)^{-p} over y in E

    Polar importance sampling around x with antithetic radii and, in 2D,
    stratified angles. A fixed seed gives identical output.

    Args:
        E: Shape with a contains() test
        x: Evaluation point
        exponent: p < n
        samples: Number of radial samples (counted in antithetic pairs of two)
        seed: RNG seed
        tension: Anisotropy for f_*, None for the Euclidean norm

    Returns:
        MCEstimate
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    lo, hi = E.bounding_box()
    corners = np.stack(np.meshgrid(*zip(lo, hi), indexing="ij"), axis=-1).reshape(-1, n)
    r_max = float(np.linalg.norm(corners - x, axis=1).max())
    rng = np.random.default_rng(seed)
    pairs = max(2, samples // 2)
    chunks = []
    for lo_i in range(0, pairs, BATCH):
        count = min(BATCH, pairs - lo_i)
        chunks.append(_polar_batch(rng, np.broadcast_to(x, (count, n)), E, exponent, tension, r_max))
    logger.debug("mc potential: %d pairs, r_max %.4g", pairs, r_max)
    return _summarize(chunks, _radial_constant(n, exponent, r_max), 2 * pairs)


def _uniform_in(E: Shape, rng: np.random.Generator, count: int) -> np.ndarray:
    lo, hi = E.bounding_box()
    out = []
    have = 0
    while have < count:
        trial = lo + (hi - lo) * rng.random((2 * (count - have) + 16, lo.size))
        keep = trial[E.contains(trial)]
        out.append(keep)
        have += len(keep)
    return np.vstack(out)[:count]


def mc_interaction(
    E: Shape,
    exponent: float,
    samples: int,
    seed: int,
    tension: Optional[SurfaceTension] = None,
) -> MCEstimate:
    """
    Estimate the double integral of f_*(x - y)^{-p} over E x E

    x is uniform in E (rejection from the bounding box) and y follows the
    polar density around x, so the estimate is |E| times the mean potential.
    """
    n = E.dim
    r_max = E.diameter()
    rng = np.random.default_rng(seed)
    pairs = max(2, samples // 2)
    chunks = []
    for lo_i in range(0, pairs, BATCH):
        count = min(BATCH, pairs - lo_i)
        origins = _uniform_in(E, rng, count)
        chunks.append(_polar_batch(rng, origins, E, exponent, tension, r_max))
    scale = E.volume() * _radial_constant(n, exponent, r_max)
    return _summarize(chunks, scale, 2 * pairs)
