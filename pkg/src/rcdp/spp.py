"""Shortest-path engine over an adjusted lattice graph.

Three valuations share one kernel:

* COST        - minimize summed edge cost (traversal length + risk)
* PENALIZED   - minimize cost + lambda * weight for a given multiplier
* WEIGHT_LEX  - minimize (weight, cost) lexicographically

A DistanceField is the raw output of one single-source run and is cheap to
query per vertex; PathSolution is a reconstructed s-t (or through-vertex)
path whose cost/weight/length have been re-summed edge by edge, so they are
exact and independent of any bookkeeping the kernel did along the way.

wcspp_oracle is a deliberately separate implementation (label correcting,
Pareto dominance, no numba) used to cross-check the main solver on small
instances. Keep it independent: it must not share valuation code with the
engine.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import dijkstra_csr
from .env import AdjustedGraph

COST = "cost"
PENALIZED = "penalized"
WEIGHT_LEX = "weight_lex"

_FULL_ALIVE_CACHE: dict[int, np.ndarray] = {}


def _all_alive(n: int) -> np.ndarray:
    arr = _FULL_ALIVE_CACHE.get(n)
    if arr is None:
        arr = np.ones(n, dtype=np.uint8)
        _FULL_ALIVE_CACHE[n] = arr
    return arr


@dataclass(frozen=True)
class DistanceField:
    """Single-source search result. key1/key2 are exact shortest values
    under the chosen valuation; the *_sum arrays track cost/weight/length
    along the predecessor tree and are advisory at key ties."""

    source: int
    mode: str
    lam: float
    key1: np.ndarray
    key2: np.ndarray
    pred: np.ndarray
    cost_sum: np.ndarray
    weight_sum: np.ndarray
    len_sum: np.ndarray

    def reached(self, v: int) -> bool:
        return np.isfinite(self.key1[v])

    def chain_to_source(self, v: int) -> list[int]:
        """Vertices from v back to the source, inclusive."""
        out = [v]
        p = int(self.pred[v])
        while p >= 0:
            out.append(p)
            p = int(self.pred[p])
        return out


@dataclass(frozen=True)
class PathSolution:
    vertices: tuple[int, ...]
    cost: float
    weight: float
    length: float
    exists: bool = True

    @staticmethod
    def none() -> "PathSolution":
        return PathSolution((), np.inf, np.inf, np.inf, exists=False)

    def __len__(self) -> int:
        return len(self.vertices)


def path_sums(graph: AdjustedGraph, vertices) -> tuple[float, float, float]:
    """Re-sum cost/weight/length along a vertex sequence, left to right.

    Raises KeyError if consecutive vertices are not adjacent.
    """
    cost = 0.0
    weight = 0.0
    length = 0.0
    for u, v in zip(vertices, vertices[1:]):
        e = graph.edge_between(u, v)
        cost += graph.edge_cost[e]
        weight += graph.edge_weight[e]
        length += graph.edge_len[e]
    return cost, weight, length


def make_solution(graph: AdjustedGraph, vertices) -> PathSolution:
    c, w, l = path_sums(graph, vertices)
    return PathSolution(tuple(int(v) for v in vertices), c, w, l)


def edge_keys(graph: AdjustedGraph, mode: str, lam: float = 0.0):
    if mode == COST:
        return graph.edge_cost, graph.zero_edge
    if mode == PENALIZED:
        return graph.edge_cost + lam * graph.edge_weight, graph.zero_edge
    if mode == WEIGHT_LEX:
        return graph.edge_weight, graph.edge_cost
    raise ValueError(f"unknown valuation mode: {mode!r}")


def sssp(graph: AdjustedGraph, source: int, mode: str = COST, *,
         lam: float = 0.0, alive: Optional[np.ndarray] = None,
         stop_at: int = -1) -> DistanceField:
    """Run the search kernel from one source over the currently active edges."""
    lat = graph.lattice
    if alive is None:
        alive = _all_alive(lat.n_vertices)
    k1, k2 = edge_keys(graph, mode, lam)
    d1, d2, pred, cs, ws, ls = dijkstra_csr(
        lat.adj_indptr, lat.adj_vertex, lat.adj_edge,
        k1, k2, graph.edge_cost, graph.edge_weight, graph.edge_len,
        graph.edge_active, alive, source, stop_at)
    return DistanceField(source, mode, lam, d1, d2, pred, cs, ws, ls)


def extract_path(graph: AdjustedGraph, fwd: DistanceField, target: int) -> PathSolution:
    if not fwd.reached(target):
        return PathSolution.none()
    chain = fwd.chain_to_source(target)
    chain.reverse()
    return make_solution(graph, chain)


def shortest_path(graph: AdjustedGraph, source: int, target: int, mode: str = COST,
                  *, lam: float = 0.0, alive: Optional[np.ndarray] = None) -> PathSolution:
    fwd = sssp(graph, source, mode, lam=lam, alive=alive, stop_at=target)
    return extract_path(graph, fwd, target)


def min_weight_path(graph: AdjustedGraph, source: int, target: int, *,
                    alive: Optional[np.ndarray] = None) -> PathSolution:
    """Lightest s-t path; among equally light paths, the cheapest."""
    return shortest_path(graph, source, target, WEIGHT_LEX, alive=alive)


def loop_erase(vertices: list[int]) -> list[int]:
    """Remove cycles from a walk, keeping the first visit of each vertex."""
    out: list[int] = []
    pos: dict[int, int] = {}
    for v in vertices:
        if v in pos:
            k = pos[v]
            for w in out[k + 1:]:
                del pos[w]
            del out[k + 1:]
        else:
            pos[v] = len(out)
            out.append(v)
    return out


def through_vertex_path(graph: AdjustedGraph, fwd: DistanceField,
                        bwd: DistanceField, v: int) -> PathSolution:
    """Concatenate the tree paths source->v and v->sink, erase any loop,
    and re-sum. The result is a simple path through v (or the erased
    version, which can bypass v only by being at least as good under the
    field valuation -- callers compare exact sums anyway)."""
    if not (fwd.reached(v) and bwd.reached(v)):
        return PathSolution.none()
    head = fwd.chain_to_source(v)
    head.reverse()                      # source .. v
    tail = bwd.chain_to_source(v)       # v .. sink
    walk = head + tail[1:]
    return make_solution(graph, loop_erase(walk))


# ---------------------------------------------------------------------------
# Independent cross-check solver
# ---------------------------------------------------------------------------

ORACLE_VERTEX_GUARD = 2000


def wcspp_oracle(graph: AdjustedGraph, source: int, target: int, budget: float,
                 *, tol: float = 1e-9) -> PathSolution:
    """Exact budget-constrained cheapest path by Pareto label setting.

    Pure Python on purpose; guards against use on large graphs. Labels are
    (cost, weight) pairs per vertex; a label is kept only if no stored label
    at that vertex is at least as good in both coordinates.
    """
    n = graph.lattice.n_vertices
    if n > ORACLE_VERTEX_GUARD:
        raise ValueError(
            f"oracle limited to {ORACLE_VERTEX_GUARD} vertices, got {n}")

    indptr = graph.lattice.adj_indptr
    adj_v = graph.lattice.adj_vertex
    adj_e = graph.lattice.adj_edge
    ecost = graph.edge_cost
    eweight = graph.edge_weight
    eactive = graph.edge_active
    limit = budget + tol

    # labels[v] = list of (cost, weight); parents[v] = list of (pu, label_idx_at_pu)
    labels: list[list[tuple[float, float]]] = [[] for _ in range(n)]
    parents: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    heap: list[tuple[float, float, int, int]] = []
    labels[source].append((0.0, 0.0))
    parents[source].append((-1, -1))
    heapq.heappush(heap, (0.0, 0.0, source, 0))

    while heap:
        cost, weight, u, idx = heapq.heappop(heap)
        if u == target:
            seq = []
            while u != -1:
                seq.append(u)
                u, idx = parents[u][idx]
            seq.reverse()
            return make_solution(graph, seq)
        for k in range(indptr[u], indptr[u + 1]):
            e = adj_e[k]
            if not eactive[e]:
                continue
            v = adj_v[k]
            nc = cost + ecost[e]
            nw = weight + eweight[e]
            if nw > limit:
                continue
            dominated = False
            for (oc, ow) in labels[v]:
                if oc <= nc and ow <= nw:
                    dominated = True
                    break
            if dominated:
                continue
            labels[v].append((nc, nw))
            parents[v].append((u, idx))
            heapq.heappush(heap, (nc, nw, v, len(labels[v]) - 1))
    return PathSolution.none()
