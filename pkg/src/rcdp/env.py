"""Environment model: rectangular region, disk obstacles, 8-adjacency lattice.

The world is a bounded rectangle discretized to the integer lattice. Obstacles
are closed disks with a ground-truth status (blocking or not), a sensor mark
(probability the obstacle is real) and a disambiguation cost. The navigation
graph carries, per edge, a surrogate traversal cost (length + risk) and a
disambiguation weight; both are aggregated from the obstacles whose disk
intersects the edge segment, halved because a disambiguation can be initiated
from either endpoint of the edge.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

SQRT2 = math.sqrt(2.0)

# knowledge states of an obstacle
AMBIGUOUS = 0
RESOLVED_TRUE = 1
RESOLVED_FALSE = 2

_KNOWLEDGE_NAMES = {AMBIGUOUS: "ambiguous",
                    RESOLVED_TRUE: "resolved_true",
                    RESOLVED_FALSE: "resolved_false"}


def segment_intersects_disk(a, b, center, radius):
    """Closed segment ab vs closed disk: True also for tangency."""
    return point_segment_distance(center, a, b) <= radius


def segment_crosses_circle(a, b, center, radius):
    """Closed segment ab vs the circle bounding the disk.

    True when the segment reaches the boundary ring: it comes within
    `radius` of the center while at least one endpoint sits at `radius`
    or beyond. A segment buried strictly inside the disk does not cross.
    Tangency counts on both comparisons.
    """
    if point_segment_distance(center, a, b) > radius:
        return False
    far = max(math.hypot(a[0] - center[0], a[1] - center[1]),
              math.hypot(b[0] - center[0], b[1] - center[1]))
    return far >= radius


def point_segment_distance(p, a, b):
    px, py = float(p[0]), float(p[1])
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    dx, dy = bx - ax, by - ay
    norm2 = dx * dx + dy * dy
    if norm2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / norm2
    t = min(1.0, max(0.0, t))
    return math.hypot(ax + t * dx - px, ay + t * dy - py)


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle [0, width] x [0, height] with integer corners."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("region must span at least one cell each way")

    @property
    def nx(self):
        return self.width + 1

    @property
    def ny(self):
        return self.height + 1

    @property
    def n_vertices(self):
        return self.nx * self.ny

    def contains(self, p):
        return 0.0 <= p[0] <= self.width and 0.0 <= p[1] <= self.height


@dataclass
class Obstacle:
    id: int
    center: tuple
    radius: float
    status: bool            # ground truth: True = actually blocking
    mark: float             # sensor mark, P(status is true) as read
    disamb_cost: float
    knowledge: int = AMBIGUOUS

    def validate(self):
        if self.radius <= 0:
            raise ValueError(f"obstacle {self.id}: radius must be positive")
        if not (0.0 <= self.mark <= 1.0):
            raise ValueError(f"obstacle {self.id}: mark outside [0, 1]")
        if self.disamb_cost <= 0:
            raise ValueError(f"obstacle {self.id}: disamb_cost must be positive")
        if self.knowledge not in _KNOWLEDGE_NAMES:
            raise ValueError(f"obstacle {self.id}: bad knowledge state")

    def covers(self, p):
        return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius


@dataclass
class Environment:
    region: Region
    source: tuple
    target: tuple
    obstacles: list
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.obstacles = sorted(self.obstacles, key=lambda o: o.id)
        ids = [o.id for o in self.obstacles]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate obstacle ids")
        for o in self.obstacles:
            o.validate()
        for name, p in (("source", self.source), ("target", self.target)):
            if not self.region.contains(p):
                raise ValueError(f"{name} outside region")
            if float(p[0]) != int(p[0]) or float(p[1]) != int(p[1]):
                raise ValueError(f"{name} must sit on a lattice vertex")
        covered = [o.id for o in self.obstacles
                   if o.covers(self.source) or o.covers(self.target)]
        if covered:
            self.warnings.append(
                "obstacle(s) %s cover the source or target vertex" %
                ",".join(map(str, covered)))

    # -- knowledge bookkeeping -------------------------------------------

    def obstacle_by_id(self, oid):
        for o in self.obstacles:
            if o.id == oid:
                return o
        raise KeyError(oid)

    def with_knowledge(self, oid, knowledge):
        """Copy of the environment with one obstacle's knowledge replaced."""
        obs = [replace(o, knowledge=knowledge) if o.id == oid else o
               for o in self.obstacles]
        return Environment(self.region, self.source, self.target, obs,
                           warnings=list(self.warnings))

    def with_statuses(self, statuses):
        """Copy with ground-truth statuses overridden (one bool per obstacle,
        in id order). Used when replaying a policy against a fixed realization."""
        if len(statuses) != len(self.obstacles):
            raise ValueError("need one status per obstacle")
        obs = [replace(o, status=bool(s))
               for o, s in zip(self.obstacles, statuses)]
        return Environment(self.region, self.source, self.target, obs,
                           warnings=list(self.warnings))

    def knowledge_vector(self):
        return np.array([o.knowledge for o in self.obstacles], dtype=np.int8)

    # -- serialization ----------------------------------------------------
    # json round-trips floats exactly (repr-based shortest form, >= 15
    # significant digits), which the persistence contract relies on.

    def to_json(self):
        return json.dumps({
            "region": {"width": self.region.width, "height": self.region.height},
            "source": [int(self.source[0]), int(self.source[1])],
            "target": [int(self.target[0]), int(self.target[1])],
            "obstacles": [
                {
                    "id": o.id,
                    "center": [float(o.center[0]), float(o.center[1])],
                    "radius": float(o.radius),
                    "status": bool(o.status),
                    "mark": float(o.mark),
                    "disamb_cost": float(o.disamb_cost),
                }
                for o in self.obstacles
            ],
        }, indent=2)

    @classmethod
    def from_json(cls, text):
        try:
            raw = json.loads(text)
            region = Region(int(raw["region"]["width"]), int(raw["region"]["height"]))
            obstacles = [
                Obstacle(
                    id=int(o["id"]),
                    center=(float(o["center"][0]), float(o["center"][1])),
                    radius=float(o["radius"]),
                    status=bool(o["status"]),
                    mark=float(o["mark"]),
                    disamb_cost=float(o["disamb_cost"]),
                )
                for o in raw["obstacles"]
            ]
            return cls(region, tuple(raw["source"]), tuple(raw["target"]), obstacles)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise EnvironmentFormatError(str(exc)) from exc

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


class EnvironmentFormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Lattice


class Lattice:
    """8-adjacency grid over a region. Vertices are numbered row-major,
    id = y * nx + x. Undirected edges are enumerated once, in vertex-id order
    with per-vertex offsets E, N, NE, SE; step lengths are 1 or sqrt(2)."""

    def __init__(self, region):
        self.region = region
        nx, ny = region.nx, region.ny
        self.nx, self.ny = nx, ny
        self.n_vertices = nx * ny

        xs = np.tile(np.arange(nx), ny)
        ys = np.repeat(np.arange(ny), nx)
        self.coords = np.stack([xs, ys], axis=1).astype(np.float64)

        edge_u, edge_v, edge_len = [], [], []
        for y in range(ny):
            for x in range(nx):
                u = y * nx + x
                if x + 1 < nx:
                    edge_u.append(u); edge_v.append(u + 1); edge_len.append(1.0)
                if y + 1 < ny:
                    edge_u.append(u); edge_v.append(u + nx); edge_len.append(1.0)
                if x + 1 < nx and y + 1 < ny:
                    edge_u.append(u); edge_v.append(u + nx + 1); edge_len.append(SQRT2)
                if x + 1 < nx and y > 0:
                    edge_u.append(u); edge_v.append(u - nx + 1); edge_len.append(SQRT2)
        self.edge_u = np.asarray(edge_u, dtype=np.int32)
        self.edge_v = np.asarray(edge_v, dtype=np.int32)
        self.edge_len = np.asarray(edge_len, dtype=np.float64)
        self.n_edges = len(self.edge_u)
        self.zero_edge = np.zeros(self.n_edges)  # shared all-zero key2

        # CSR adjacency over the directed doubling, used by the search kernels
        deg = np.bincount(self.edge_u, minlength=self.n_vertices) + \
            np.bincount(self.edge_v, minlength=self.n_vertices)
        self.adj_indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.cumsum(deg, out=self.adj_indptr[1:])
        self.adj_vertex = np.empty(2 * self.n_edges, dtype=np.int32)
        self.adj_edge = np.empty(2 * self.n_edges, dtype=np.int32)
        cursor = self.adj_indptr[:-1].copy()
        for arr_from, arr_to in ((self.edge_u, self.edge_v), (self.edge_v, self.edge_u)):
            for e in range(self.n_edges):
                u = arr_from[e]
                self.adj_vertex[cursor[u]] = arr_to[e]
                self.adj_edge[cursor[u]] = e
                cursor[u] += 1
        # neighbor lists sorted by target id so equal-key pops relax in id order
        for u in range(self.n_vertices):
            lo, hi = self.adj_indptr[u], self.adj_indptr[u + 1]
            order = np.argsort(self.adj_vertex[lo:hi], kind="stable")
            self.adj_vertex[lo:hi] = self.adj_vertex[lo:hi][order]
            self.adj_edge[lo:hi] = self.adj_edge[lo:hi][order]

    def vertex_id(self, p):
        x, y = int(p[0]), int(p[1])
        if not (0 <= x < self.nx and 0 <= y < self.ny):
            raise ValueError(f"({x},{y}) outside lattice")
        return y * self.nx + x

    def vertex_xy(self, v):
        return int(self.coords[v, 0]), int(self.coords[v, 1])


_lattice_cache = {}


def build_lattice(region):
    """Lattices are immutable and reused; building the 101x51 one costs ~0.2 s."""
    key = (region.width, region.height)
    if key not in _lattice_cache:
        _lattice_cache[key] = Lattice(region)
    return _lattice_cache[key]


def edge_obstacle_incidence(lattice, env):
    """COO incidence (edge index, obstacle position, ring flag) for disks
    touching edge segments, sorted by edge then obstacle. Tangency counts
    (closed disk vs closed segment). The ring flag marks pairs where the
    edge reaches the obstacle's boundary circle — the entry/exit edges of
    a crossing — as opposed to edges buried strictly inside the disk.
    Independent of knowledge, so computed once per environment and shared
    by every graph built on it."""
    pairs_e, pairs_o, pairs_ring = [], [], []
    coords = lattice.coords
    ux = coords[lattice.edge_u, 0]; uy = coords[lattice.edge_u, 1]
    vx = coords[lattice.edge_v, 0]; vy = coords[lattice.edge_v, 1]
    dx, dy = vx - ux, vy - uy
    seg_norm2 = dx * dx + dy * dy
    for idx, obs in enumerate(env.obstacles):
        cx, cy = obs.center
        r2 = obs.radius * obs.radius
        # cheap prefilter: an edge no endpoint of which is within
        # radius + sqrt(2) of the center cannot reach the disk
        reach = obs.radius + SQRT2
        du2 = (ux - cx) ** 2 + (uy - cy) ** 2
        dv2 = (vx - cx) ** 2 + (vy - cy) ** 2
        near = (du2 <= reach * reach) | (dv2 <= reach * reach)
        cand = np.nonzero(near)[0]
        if cand.size == 0:
            continue
        t = ((cx - ux[cand]) * dx[cand] + (cy - uy[cand]) * dy[cand]) / seg_norm2[cand]
        t = np.clip(t, 0.0, 1.0)
        ex = ux[cand] + t * dx[cand] - cx
        ey = uy[cand] + t * dy[cand] - cy
        touch = ex * ex + ey * ey <= r2
        hit = cand[touch]
        pairs_e.append(hit)
        pairs_o.append(np.full(hit.size, idx, dtype=np.int32))
        pairs_ring.append(np.maximum(du2[hit], dv2[hit]) >= r2)
    if pairs_e:
        inc_edge = np.concatenate(pairs_e).astype(np.int32)
        inc_obs = np.concatenate(pairs_o)
        inc_ring = np.concatenate(pairs_ring)
        order = np.lexsort((inc_obs, inc_edge))
        return inc_edge[order], inc_obs[order], inc_ring[order]
    return (np.empty(0, dtype=np.int32), np.empty(0, dtype=np.int32),
            np.empty(0, dtype=bool))


class AdjustedGraph:
    """Navigation graph with risk-adjusted edge costs and disambiguation
    weights, reflecting the current obstacle knowledge.

    Two incidence relations drive the aggregation. Risk and weight load
    onto the edges that reach an obstacle's boundary circle: a route
    passing through an obstacle meets that ring twice (entry and exit),
    so with the half-share per edge the route carries the obstacle's full
    risk and full disambiguation fee exactly once. Edges buried strictly
    inside an unresolved obstacle carry no extra term — they are only
    reachable by paying at the boundary. Blocking is solid: a
    resolved-true obstacle deactivates every edge its disk touches.

    cost_e   = length_e + 0.5 * sum of r_x over ambiguous obstacles whose
               ring e crosses
    weight_e = 0.5 * sum of disamb_cost (or 1 in unit-weight mode) likewise
    active_e = no resolved-true obstacle's disk touches e (blocked edges
               stay in the arrays with a flag rather than infinite cost)
    """

    def __init__(self, lattice, env, risk_model, unit_weights=False,
                 _shared=None, _overlay=None):
        self.lattice = lattice
        self.env = env
        self.risk_model = risk_model
        self.unit_weights = unit_weights
        if _shared is not None:
            self.incidence, self.obstacle_risk = _shared
        else:
            self.incidence = edge_obstacle_incidence(lattice, env)
            self.obstacle_risk = risk_model.obstacle_risk(env)
        if _overlay is None:
            _overlay = np.zeros(0, dtype=np.int64)
        self._blocked_overlay = _overlay  # positions treated as blocking for planning
        self._pos_by_id = {o.id: i for i, o in enumerate(env.obstacles)}
        self._aggregate()

    def _aggregate(self):
        env = self.env
        n_e = self.lattice.n_edges
        inc_edge, inc_obs, inc_ring = self.incidence
        knowledge = env.knowledge_vector()
        ambiguous = knowledge == AMBIGUOUS
        blocking = knowledge == RESOLVED_TRUE
        if self._blocked_overlay.size:
            blocking = blocking.copy()
            blocking[self._blocked_overlay] = True
            ambiguous = ambiguous.copy()
            ambiguous[self._blocked_overlay] = False

        disamb = np.array([o.disamb_cost for o in env.obstacles], dtype=np.float64)
        r_contrib = np.where(ambiguous, self.obstacle_risk, 0.0)
        w_per_obs = np.ones_like(disamb) if self.unit_weights else disamb
        w_contrib = np.where(ambiguous, w_per_obs, 0.0)

        if inc_edge.size:
            ring_edge = inc_edge[inc_ring]
            ring_obs = inc_obs[inc_ring]
            self.edge_risk = 0.5 * np.bincount(
                ring_edge, weights=r_contrib[ring_obs], minlength=n_e)
            self.edge_weight = 0.5 * np.bincount(
                ring_edge, weights=w_contrib[ring_obs], minlength=n_e)
            hit_blocking = np.bincount(
                inc_edge, weights=blocking[inc_obs].astype(np.float64),
                minlength=n_e)
            self.edge_active = hit_blocking == 0.0
        else:
            self.edge_risk = np.zeros(n_e)
            self.edge_weight = np.zeros(n_e)
            self.edge_active = np.ones(n_e, dtype=bool)
        self.edge_len = self.lattice.edge_len
        self.zero_edge = self.lattice.zero_edge
        self.edge_cost = self.edge_len + self.edge_risk

    # -- queries ----------------------------------------------------------

    def edges_of_obstacle(self, oid, ring_only=False):
        idx = self._position_of(oid)
        inc_edge, inc_obs, inc_ring = self.incidence
        mask = inc_obs == idx
        if ring_only:
            mask &= inc_ring
        return inc_edge[mask]

    def obstacles_on_edge(self, edge_index):
        inc_edge, inc_obs, _ = self.incidence
        positions = inc_obs[inc_edge == edge_index]
        return [self.env.obstacles[i] for i in positions]

    def ambiguous_on_edge(self, edge_index):
        """Ambiguous obstacles whose boundary ring this edge crosses (the
        ones a traversal of the edge would have to disambiguate)."""
        overlay = set(self._blocked_overlay.tolist())
        out = []
        for i in self._ring_positions_on_edge(edge_index):
            o = self.env.obstacles[i]
            if o.knowledge == AMBIGUOUS and i not in overlay:
                out.append(o)
        return out

    def _ring_positions_on_edge(self, edge_index):
        inc_edge, inc_obs, inc_ring = self.incidence
        return inc_obs[(inc_edge == edge_index) & inc_ring]

    def _position_of(self, oid):
        try:
            return self._pos_by_id[oid]
        except KeyError:
            raise KeyError(oid) from None

    def edge_between(self, u, v):
        lat = self.lattice
        for k in range(lat.adj_indptr[u], lat.adj_indptr[u + 1]):
            if lat.adj_vertex[k] == v:
                return int(lat.adj_edge[k])
        raise KeyError((u, v))

    # -- updates (return fresh instances; incidence and risks are shared) --

    def with_env(self, env):
        return AdjustedGraph(self.lattice, env, self.risk_model,
                             unit_weights=self.unit_weights,
                             _shared=(self.incidence, self.obstacle_risk),
                             _overlay=self._blocked_overlay)

    def with_blocked_overlay(self, obstacle_ids):
        """Planning-only view treating the given obstacles as blocking
        (used by policies to sidestep unaffordable obstacles); knowledge
        is not touched."""
        positions = sorted(self._position_of(oid) for oid in obstacle_ids)
        return AdjustedGraph(self.lattice, self.env, self.risk_model,
                             unit_weights=self.unit_weights,
                             _shared=(self.incidence, self.obstacle_risk),
                             _overlay=np.asarray(positions, dtype=np.int64))


def graph_initialize(lattice, env, risk_model, unit_weights=False):
    """Fresh adjusted graph for the environment's current knowledge."""
    return AdjustedGraph(lattice, env, risk_model, unit_weights=unit_weights)


def apply_disambiguation(graph, obstacle_id, is_true):
    """Resolve one obstacle and return the updated graph. A resolved-false
    obstacle stops contributing risk and weight anywhere; resolved-true
    additionally deactivates every edge its disk touches. Contributions of
    all other obstacles are recomputed from scratch, not decremented, so no
    float drift accumulates."""
    obs = graph.env.obstacle_by_id(obstacle_id)
    if obs.knowledge != AMBIGUOUS:
        raise ValueError(f"obstacle {obstacle_id} already resolved")
    env = graph.env.with_knowledge(
        obstacle_id, RESOLVED_TRUE if is_true else RESOLVED_FALSE)
    return graph.with_env(env)
