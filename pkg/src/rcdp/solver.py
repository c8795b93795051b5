"""Budget-constrained cheapest path on the adjusted lattice.

The solve alternates two mechanisms:

1. A pre-phase of alternating vertex cuts. For every vertex we bound the
   best path forced through it, once under the cost valuation and once under
   the lexicographic (weight, cost) valuation. Vertices whose lightest
   through-path already violates the budget, or whose cheapest through-path
   already exceeds the best feasible cost found so far, can never lie on the
   constrained optimum and are removed. Feasible through-paths discovered
   along the way tighten the incumbent. Repeats until a sweep removes
   nothing.

2. A secant search on the Lagrangian multiplier. A feasible / violating
   bracket pair yields the multiplier at which their penalized values agree;
   each multiplier costs one forward and one backward run, and the resulting
   per-vertex penalized bounds both eliminate vertices and raise a monotone
   lower bound on the constrained optimum.

Termination statuses:

* OptimalUnconstrained - the plain cheapest path already fits the budget.
* Infeasible           - even the lightest path violates the budget.
* OptimalDualCondition - a multiplier landed on a path exactly at the budget,
                         or the search reached a stationary bracket.
* OptimalGapClosed     - upper and lower bound met (1e-9 relative).
* BestFeasible         - iteration cap or a stalled bracket; the incumbent is
                         returned with an honest residual gap.

sne_solve is the ablation used for comparisons: same multiplier search but
no pre-phase, elimination also on ties, and no stationarity stop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .env import AdjustedGraph
from .spp import (COST, PENALIZED, WEIGHT_LEX, DistanceField, PathSolution,
                  extract_path, min_weight_path, shortest_path, sssp,
                  through_vertex_path)

TOL = 1e-9
GAP_REL_TOL = 1e-9

OPTIMAL_UNCONSTRAINED = "OptimalUnconstrained"
OPTIMAL_DUAL_CONDITION = "OptimalDualCondition"
OPTIMAL_GAP_CLOSED = "OptimalGapClosed"
BEST_FEASIBLE = "BestFeasible"
INFEASIBLE = "Infeasible"

TERMINAL_STATUSES = (OPTIMAL_UNCONSTRAINED, OPTIMAL_DUAL_CONDITION,
                     OPTIMAL_GAP_CLOSED, BEST_FEASIBLE, INFEASIBLE)


def next_multiplier(cost_feasible: float, weight_feasible: float,
                    cost_violating: float, weight_violating: float) -> float:
    """Secant multiplier for a bracket: the penalty slope at which the
    feasible and the violating path have equal penalized value. Lies between
    the slopes at which either path is individually optimal."""
    denom = weight_violating - weight_feasible
    if denom <= 0.0:
        raise ValueError("bracket sides must straddle the budget in weight")
    lam = (cost_feasible - cost_violating) / denom
    return lam if lam > 0.0 else 0.0


def cut_bounds(bound: np.ndarray, limit: float, alive: np.ndarray, *,
               eliminate_ties: bool = False, tol: float = TOL) -> np.ndarray:
    """Mask of vertices whose per-vertex lower bound disqualifies them.

    With eliminate_ties=False a vertex survives when its bound sits within
    tol of the limit; the tie-eliminating mode cuts those as well (used only
    by the ablation variant, and the reason it can lose the optimum)."""
    alive_b = alive.astype(bool)
    if eliminate_ties:
        return alive_b & (bound >= limit - tol)
    return alive_b & (bound > limit + tol)


@dataclass
class SolveReport:
    status: str
    path: PathSolution
    upper_cost: float
    lower_cost: float
    budget: float
    iterations: int           # multiplier evaluations
    sweeps: int               # elimination sweeps, both phases
    eliminated_pre: int
    eliminated_dual: int
    graph_size_initial: int
    graph_size_after: int
    lambda_history: list = field(default_factory=list)
    bound_history: list = field(default_factory=list)   # (upper, lower) per iteration
    hit_iteration_cap: bool = False
    alive_mask: np.ndarray | None = None   # surviving vertices (not serialized)

    @property
    def duality_gap(self) -> float:
        if not (np.isfinite(self.upper_cost) and np.isfinite(self.lower_cost)):
            return float("inf")
        if self.upper_cost <= self.lower_cost:
            return 0.0
        return (self.upper_cost - self.lower_cost) / max(abs(self.lower_cost), 1e-300)

    @property
    def optimal(self) -> bool:
        return self.status in (OPTIMAL_UNCONSTRAINED, OPTIMAL_DUAL_CONDITION,
                               OPTIMAL_GAP_CLOSED)

    def to_json(self) -> str:
        p = None
        if self.path.exists:
            p = {"vertices": list(self.path.vertices), "cost": self.path.cost,
                 "weight": self.path.weight, "length": self.path.length}
        return json.dumps({
            "status": self.status,
            "path": p,
            "upper_cost": self.upper_cost,
            "lower_cost": self.lower_cost,
            "duality_gap": self.duality_gap,
            "budget": self.budget,
            "iterations": self.iterations,
            "sweeps": self.sweeps,
            "eliminated_pre": self.eliminated_pre,
            "eliminated_dual": self.eliminated_dual,
            "graph_size_initial": self.graph_size_initial,
            "graph_size_after": self.graph_size_after,
            "lambda_history": self.lambda_history,
            "bound_history": self.bound_history,
            "hit_iteration_cap": self.hit_iteration_cap,
        }, indent=2)


class _Work:
    """Mutable state threaded through the two phases of one solve."""

    def __init__(self, graph: AdjustedGraph, source: int, target: int,
                 budget: float, tol: float):
        if budget < 0:
            raise ValueError("budget must be nonnegative")
        self.graph = graph
        self.source = source
        self.target = target
        self.budget = budget
        self.tol = tol
        n = graph.lattice.n_vertices
        self.n = n
        self.alive = np.ones(n, dtype=np.uint8)
        self.incumbent = PathSolution.none()
        self.upper = np.inf
        self.lower = -np.inf
        self.iterations = 0
        self.sweeps = 0
        self.eliminated_pre = 0
        self.eliminated_dual = 0
        self.lambda_history: list = []
        self.bound_history: list = []
        self.hit_cap = False

    def feasible(self, path: PathSolution) -> bool:
        return path.exists and path.weight <= self.budget + self.tol

    def consider(self, path: PathSolution) -> bool:
        """Adopt a path as incumbent if it is feasible and strictly cheaper."""
        if self.feasible(path) and path.cost < self.upper:
            self.incumbent = path
            self.upper = path.cost
            return True
        return False

    def report(self, status: str, path: PathSolution) -> SolveReport:
        return SolveReport(
            status=status, path=path,
            upper_cost=self.upper, lower_cost=self.lower, budget=self.budget,
            iterations=self.iterations, sweeps=self.sweeps,
            eliminated_pre=self.eliminated_pre,
            eliminated_dual=self.eliminated_dual,
            graph_size_initial=self.n,
            graph_size_after=int(self.alive.sum()),
            lambda_history=self.lambda_history,
            bound_history=self.bound_history,
            hit_iteration_cap=self.hit_cap,
            alive_mask=self.alive.astype(bool))


def _apply_cut(work: _Work, cut: np.ndarray, phase: str) -> int:
    n_cut = int(cut.sum())
    if n_cut:
        work.alive[cut] = 0
        if phase == "pre":
            work.eliminated_pre += n_cut
        else:
            work.eliminated_dual += n_cut
    return n_cut


def _update_from_through(work: _Work, fwd: DistanceField, bwd: DistanceField,
                         candidates: np.ndarray, cost_agg: np.ndarray) -> None:
    """Reconstruct through-vertex paths for candidate vertices in ascending
    id order and fold feasible improvements into the incumbent. cost_agg is
    the advisory through-cost used for pruning; adoption always re-checks
    exact sums."""
    for v in np.nonzero(candidates)[0]:
        if cost_agg[v] >= work.upper:
            continue
        work.consider(through_vertex_path(work.graph, fwd, bwd, int(v)))


def _pre_phase(work: _Work):
    """Alternating bound cuts. Returns a finished report on an early exit,
    else None with work.alive reduced and the incumbent tightened."""
    g, s, t = work.graph, work.source, work.target
    tol = work.tol

    p0 = shortest_path(g, s, t, COST, alive=work.alive)
    if not p0.exists:
        work.lower = np.inf
        return work.report(INFEASIBLE, PathSolution.none())
    work.lower = p0.cost
    if p0.weight <= work.budget + tol:
        work.upper = work.lower = p0.cost
        work.incumbent = p0
        return work.report(OPTIMAL_UNCONSTRAINED, p0)

    p_light = min_weight_path(g, s, t, alive=work.alive)
    if p_light.weight > work.budget + tol:
        work.upper = np.inf
        work.lower = np.inf
        return work.report(INFEASIBLE, PathSolution.none())
    work.consider(p_light)

    while True:
        f_c = sssp(g, s, COST, alive=work.alive)
        b_c = sssp(g, t, COST, alive=work.alive)
        f_w = sssp(g, s, WEIGHT_LEX, alive=work.alive)
        b_w = sssp(g, t, WEIGHT_LEX, alive=work.alive)
        work.sweeps += 1
        alive_b = work.alive.astype(bool)

        through_weight = f_w.key1 + b_w.key1
        through_cost = f_c.key1 + b_c.key1
        cut = cut_bounds(through_weight, work.budget, work.alive, tol=tol) | \
            cut_bounds(through_cost, work.upper, work.alive, tol=tol)

        survivors = alive_b & ~cut
        # incumbent candidates: lightest-through paths that fit the budget
        # (exact, from lex keys) and look cheaper (advisory tree cost) ...
        lex_cost = f_w.key2 + b_w.key2
        cand = survivors & (through_weight <= work.budget + tol) & \
            (lex_cost < work.upper)
        _update_from_through(work, f_w, b_w, cand, lex_cost)
        # ... and cheapest-through paths that look affordable (advisory weight)
        w_agg = f_c.weight_sum + b_c.weight_sum
        cand = survivors & (w_agg <= work.budget + tol) & \
            (through_cost < work.upper)
        _update_from_through(work, f_c, b_c, cand, through_cost)

        if _apply_cut(work, cut, "pre") == 0:
            return None


def _multiplier_phase(work: _Work, *, eliminate_ties: bool,
                      stationarity_stop: bool, iteration_cap: int):
    """Secant search on the penalty multiplier with per-iteration cuts."""
    g, s, t = work.graph, work.source, work.target
    tol = work.tol

    # brackets on the (possibly reduced) graph
    p_cheap = shortest_path(g, s, t, COST, alive=work.alive)
    if not p_cheap.exists:
        work.lower = work.upper = np.inf
        return work.report(INFEASIBLE, PathSolution.none())
    if p_cheap.weight <= work.budget + tol:
        work.lower = work.upper = p_cheap.cost
        work.incumbent = p_cheap
        return work.report(OPTIMAL_UNCONSTRAINED, p_cheap)
    work.lower = max(work.lower, p_cheap.cost)
    p_light = min_weight_path(g, s, t, alive=work.alive)
    if p_light.weight > work.budget + tol:
        work.lower = work.upper = np.inf
        return work.report(INFEASIBLE, PathSolution.none())
    work.consider(p_light)

    c_minus, w_minus = work.incumbent.cost, work.incumbent.weight
    c_plus, w_plus = p_cheap.cost, p_cheap.weight

    while work.iterations < iteration_cap:
        if work.upper - work.lower <= GAP_REL_TOL * max(abs(work.lower), 1.0):
            return work.report(OPTIMAL_GAP_CLOSED, work.incumbent)

        lam = next_multiplier(c_minus, w_minus, c_plus, w_plus)
        if not stationarity_stop and work.lambda_history and \
                lam == work.lambda_history[-1]:
            # bracket did not move: the secant is stalled
            return work.report(BEST_FEASIBLE, work.incumbent)
        work.iterations += 1
        work.lambda_history.append(lam)

        f = sssp(g, s, PENALIZED, lam=lam, alive=work.alive)
        b = sssp(g, t, PENALIZED, lam=lam, alive=work.alive)
        p_lam = extract_path(g, f, t)
        if not p_lam.exists:  # cannot happen while the incumbent is alive
            return work.report(BEST_FEASIBLE, work.incumbent)

        if stationarity_stop and abs(p_lam.weight - work.budget) <= tol:
            # the relaxed optimum uses the budget exactly: it is optimal
            work.incumbent = p_lam
            work.upper = work.lower = p_lam.cost
            return work.report(OPTIMAL_DUAL_CONDITION, p_lam)

        through_pen = f.key1 + b.key1
        phi = through_pen - lam * work.budget
        alive_b = work.alive.astype(bool)

        w_agg = f.weight_sum + b.weight_sum
        c_agg = f.cost_sum + b.cost_sum
        cand = alive_b & (w_agg <= work.budget + tol) & (c_agg < work.upper)
        _update_from_through(work, f, b, cand, c_agg)

        cut = cut_bounds(phi, work.upper, work.alive,
                         eliminate_ties=eliminate_ties, tol=tol)
        work.sweeps += 1
        survivors = alive_b & ~cut
        if survivors.any():
            work.lower = max(work.lower, float(phi[survivors].min()))
        else:
            # every remaining vertex is bounded out: incumbent is optimal
            work.lower = max(work.lower, float(phi[alive_b].min()))
            _apply_cut(work, cut, "dual")
            return work.report(OPTIMAL_GAP_CLOSED, work.incumbent)
        _apply_cut(work, cut, "dual")

        if work.upper - work.lower <= GAP_REL_TOL * max(abs(work.lower), 1.0):
            return work.report(OPTIMAL_GAP_CLOSED, work.incumbent)

        if stationarity_stop:
            bracket_value = c_minus + lam * w_minus
            if abs((p_lam.cost + lam * p_lam.weight) - bracket_value) <= tol:
                # new path ties both bracket sides: multiplier is stationary
                return work.report(OPTIMAL_DUAL_CONDITION, work.incumbent)

        work.bound_history.append((work.upper, work.lower))

        if p_lam.weight <= work.budget + tol:
            work.consider(p_lam)
            c_minus, w_minus = p_lam.cost, p_lam.weight
        else:
            c_plus, w_plus = p_lam.cost, p_lam.weight

    work.hit_cap = True
    return work.report(BEST_FEASIBLE, work.incumbent)


def cologr_solve(graph: AdjustedGraph, source: int, target: int, budget: float,
                 *, tol: float = TOL, iteration_cap: int | None = None) -> SolveReport:
    """Full solve: alternating bound cuts, then the multiplier search."""
    work = _Work(graph, source, target, budget, tol)
    if iteration_cap is None:
        iteration_cap = 10 * graph.lattice.n_edges
    early = _pre_phase(work)
    if early is not None:
        return early
    return _multiplier_phase(work, eliminate_ties=False,
                             stationarity_stop=True,
                             iteration_cap=iteration_cap)


def sne_solve(graph: AdjustedGraph, source: int, target: int, budget: float,
              *, tol: float = TOL, iteration_cap: int | None = None) -> SolveReport:
    """Ablation variant: multiplier search only, elimination also on ties,
    no stationarity stop. Kept for head-to-head comparisons; can return a
    suboptimal BestFeasible where the full solve is exact."""
    work = _Work(graph, source, target, budget, tol)
    if iteration_cap is None:
        iteration_cap = 10 * graph.lattice.n_edges
    return _multiplier_phase(work, eliminate_ties=True,
                             stationarity_stop=False,
                             iteration_cap=iteration_cap)


def solve(graph: AdjustedGraph, source: int, target: int, budget: float,
          algorithm: str = "cologr", **kw) -> SolveReport:
    if algorithm == "cologr":
        return cologr_solve(graph, source, target, budget, **kw)
    if algorithm == "sne":
        return sne_solve(graph, source, target, budget, **kw)
    raise ValueError(f"unknown algorithm: {algorithm!r}")
