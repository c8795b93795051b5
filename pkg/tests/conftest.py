"""Shared fixtures and reference implementations for the test suite.

The brute-force helpers here recompute edge aggregation with plain Python
loops so the vectorized production code has an independent witness.
"""

from __future__ import annotations

import json
import pathlib

import numpy as np
import pytest

from rcdp import Environment, Obstacle, Region
from rcdp.env import (
    AMBIGUOUS,
    RESOLVED_FALSE,
    RESOLVED_TRUE,
    segment_crosses_circle,
    segment_intersects_disk,
)

DATA = pathlib.Path(__file__).parent / "data"


def data_path(name: str) -> pathlib.Path:
    p = DATA / name
    assert p.exists(), f"missing test fixture {name}"
    return p


@pytest.fixture(scope="session")
def toy_env() -> Environment:
    return Environment.load(data_path("toy_reconstruction.json"))


@pytest.fixture(scope="session")
def gap_env() -> Environment:
    return Environment.load(data_path("sne_gap_instance.json"))


# ---------------------------------------------------------------------------
# small constructed environments


def free_env(width=4, height=4, source=(0, 0), target=None) -> Environment:
    if target is None:
        target = (width, height)
    return Environment(Region(width, height), source, target, [])


def wall_env(*, width=10, height=6, y=3.0, radius=1.2, spacing=2.0,
             gap_x=None, status=True, mark=0.5, fee=1.0,
             source=None, target=None) -> Environment:
    """A horizontal fence of disks across the region at height y.  With
    gap_x set, the disk nearest that x is omitted, leaving one corridor."""
    if source is None:
        source = (width // 2, height)
    if target is None:
        target = (width // 2, 0)
    xs = np.arange(0.0, width + 1e-9, spacing)
    obstacles = []
    oid = 0
    for x in xs:
        if gap_x is not None and abs(x - gap_x) < spacing / 2:
            continue
        obstacles.append(Obstacle(oid, (float(x), y), radius, status, mark, fee))
        oid += 1
    return Environment(Region(width, height), source, target, obstacles)


# ---------------------------------------------------------------------------
# brute-force reference aggregation


def brute_force_arrays(lattice, env, obstacle_risk, unit_weights=False):
    """Per-edge (cost, weight, blocked) computed the slow way: for every
    edge, loop over every obstacle and apply the halved ring/disk billing
    rules directly."""
    n_e = lattice.n_edges
    cost = np.array(lattice.edge_len, dtype=np.float64)
    weight = np.zeros(n_e)
    blocked = np.zeros(n_e, dtype=bool)
    for e in range(n_e):
        a = lattice.vertex_xy(lattice.edge_u[e])
        b = lattice.vertex_xy(lattice.edge_v[e])
        for i, ob in enumerate(env.obstacles):
            if ob.knowledge == RESOLVED_FALSE:
                continue
            in_disk = segment_intersects_disk(a, b, ob.center, ob.radius)
            on_ring = segment_crosses_circle(a, b, ob.center, ob.radius)
            if ob.knowledge == RESOLVED_TRUE:
                if in_disk:
                    blocked[e] = True
                continue
            assert ob.knowledge == AMBIGUOUS
            if on_ring:
                cost[e] += 0.5 * float(obstacle_risk[i])
                weight[e] += 0.5 * (1.0 if unit_weights else ob.disamb_cost)
    return cost, weight, blocked


def assert_graph_matches_brute_force(graph, lattice, env, obstacle_risk,
                                     unit_weights=False, tol=1e-9):
    cost, weight, blocked = brute_force_arrays(
        lattice, env, obstacle_risk, unit_weights=unit_weights)
    keep = ~blocked
    assert np.array_equal(graph.edge_active, keep)
    np.testing.assert_allclose(graph.edge_cost[keep], cost[keep],
                               rtol=0.0, atol=tol)
    np.testing.assert_allclose(graph.edge_weight[keep], weight[keep],
                               rtol=0.0, atol=tol)


def load_json(name: str) -> dict:
    with open(data_path(name)) as fh:
        return json.load(fh)
