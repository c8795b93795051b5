"""Obstacle-center point processes.

Three layouts: plain uniform, inhibited (Strauss, pairs closer than the
inhibition distance are penalized by gamma per pair), and clustered
(Matern-style parent/child). All draw a fixed number of points inside a
rectangle and are fully determined by the rng handed in.
"""

from __future__ import annotations

import math

import numpy as np

from ._kernels import strauss_chain

DEFAULT_INHIBITION = 7.0
DEFAULT_GAMMA = 0.5
DEFAULT_SWEEPS = 10_000


def gen_uniform(n: int, rng: np.random.Generator, bounds) -> np.ndarray:
    (x0, x1), (y0, y1) = bounds
    pts = np.empty((n, 2))
    pts[:, 0] = rng.uniform(x0, x1, size=n)
    pts[:, 1] = rng.uniform(y0, y1, size=n)
    return pts


def gen_strauss(n: int, rng: np.random.Generator, bounds, *,
                inhibition: float = DEFAULT_INHIBITION,
                gamma: float = DEFAULT_GAMMA,
                sweeps: int = DEFAULT_SWEEPS) -> np.ndarray:
    """Fixed-n Strauss sample after `sweeps` burn-in passes of single-point
    Metropolis moves (one pass = n proposals)."""
    (x0, x1), (y0, y1) = bounds
    seed = int(rng.integers(0, 2**31 - 1))
    return strauss_chain(n, x0, x1, y0, y1, float(inhibition), float(gamma),
                         int(sweeps), seed)


def gen_matern(n: int, rng: np.random.Generator, bounds, *,
               n_parents: int | None = None,
               cluster_radius: float = 6.0) -> np.ndarray:
    """Clustered layout: children scattered in disks around uniform parents.

    Exactly n children; each picks a parent uniformly and an offset uniform
    in the disk, redrawing the offset until it lands inside the bounds."""
    (x0, x1), (y0, y1) = bounds
    if n_parents is None:
        n_parents = max(2, round(n / 10))
    px = rng.uniform(x0, x1, size=n_parents)
    py = rng.uniform(y0, y1, size=n_parents)
    pts = np.empty((n, 2))
    for i in range(n):
        k = int(rng.integers(0, n_parents))
        while True:
            r = cluster_radius * math.sqrt(rng.uniform())
            theta = rng.uniform(0.0, 2.0 * math.pi)
            x = px[k] + r * math.cos(theta)
            y = py[k] + r * math.sin(theta)
            if x0 <= x <= x1 and y0 <= y <= y1:
                pts[i, 0] = x
                pts[i, 1] = y
                break
    return pts


def close_pair_probability(a: float, b: float, r: float) -> float:
    """Probability that two independent uniform points in an a x b rectangle
    lie within distance r (r below both sides), via the rectangle's distance
    distribution."""
    return (math.pi * r * r / (a * b)
            - 4.0 * (a + b) * r**3 / (3.0 * a * a * b * b)
            + r**4 / (2.0 * a * a * b * b))


def n_close_pairs(points: np.ndarray, dist: float) -> int:
    """Number of unordered pairs closer than dist."""
    if len(points) < 2:
        return 0
    diff = points[:, None, :] - points[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    close = d2 < dist * dist
    return int((np.triu(close, k=1)).sum())


def nearest_neighbor_dists(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    return np.sqrt(d2.min(axis=1))
