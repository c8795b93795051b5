"""Online traversal policies over an uncertain obstacle field.

A walker starts at the source with a disambiguation budget. Whenever the
next edge of its plan touches ambiguous obstacles it must either pay to
resolve them (learning the truth, possibly finding the way blocked) or give
up on that route. Policies differ in how they plan:

* run_rcdp   - replans a budget-constrained cheapest path from the current
               vertex with the remaining budget at every step.
* run_greedy - replans a plain risk-adjusted shortest path, ignoring the
               budget while planning; the budget only gates whether a
               disambiguation is affordable at the moment it comes due.
* run_benchmark - clairvoyant yardstick: solves once with every truly
               blocking obstacle revealed, paying only for the non-blocking
               disks its route crosses.

Obstacles the walker cannot afford to resolve are banned: treated as
blocking in the planning overlay so no future plan runs through them.

Replanning is deterministic, so revisiting an identical decision state
(position, knowledge, remaining budget, bans) means the per-step successor
map has a cycle of cost ties; the walker then commits to its current plan
until the next disambiguation changes the state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product

from .env import (AMBIGUOUS, RESOLVED_TRUE, Environment, build_lattice,
                  apply_disambiguation, graph_initialize)
from .risk import BenchmarkRisk, make_risk_model
from .solver import cologr_solve
from .spp import COST, shortest_path

TOL = 1e-9
MAX_STEPS_FACTOR = 20
MAX_EXACT_AMBIGUOUS = 20


@dataclass
class TraversalOutcome:
    walked: list                 # vertex ids visited, in order
    realized_cost: float         # edge lengths walked + disambiguation fees
    disambiguations: list        # (obstacle_id, was_blocking) in order paid
    budget_start: float
    budget_remaining: float
    replans: int
    success: bool
    events: list = field(default_factory=list)

    @property
    def n_disambiguations(self) -> int:
        return len(self.disambiguations)

    @property
    def budget_used(self) -> float:
        return self.budget_start - self.budget_remaining


def _traverse(env: Environment, risk_model, budget: float, *, constrained: bool,
              simplified: bool = False, collect_events: bool = False) -> TraversalOutcome:
    lattice = build_lattice(env.region)
    s = lattice.vertex_id(env.source)
    t = lattice.vertex_id(env.target)
    graph = graph_initialize(lattice, env, risk_model, unit_weights=simplified)
    plan_graph = graph
    remaining = float(budget)
    banned: set = set()
    cur = s
    walked = [s]
    realized = 0.0
    disambs: list = []
    replans = 0
    events: list = []
    visited: set = set()
    locked_plan = None
    max_steps = MAX_STEPS_FACTOR * lattice.n_vertices
    success = True

    def note(kind, **kw):
        if collect_events:
            events.append({"event": kind, **kw})

    def compute_plan():
        nonlocal replans
        replans += 1
        if constrained:
            rep = cologr_solve(plan_graph, cur, t, remaining)
            return list(rep.path.vertices) if rep.path.exists else None
        p = shortest_path(plan_graph, cur, t, COST)
        return list(p.vertices) if p.exists else None

    def rebuild_plan_graph():
        nonlocal plan_graph, locked_plan
        plan_graph = graph.with_blocked_overlay(banned) if banned else graph
        locked_plan = None
        visited.clear()

    while cur != t:
        if len(walked) > max_steps:
            success = False
            note("aborted", at=cur)
            break
        if locked_plan is not None:
            plan = locked_plan
        else:
            state = (cur, remaining,
                     graph.env.knowledge_vector().tobytes(),
                     tuple(sorted(banned)))
            plan = compute_plan()
            if state in visited:
                locked_plan = plan  # tie cycle: stop re-deciding, walk it out
                note("lock", at=cur)
            else:
                visited.add(state)
        if plan is None or len(plan) < 2:
            success = False
            note("stranded", at=cur, remaining=remaining)
            break

        nxt = plan[1]
        e = graph.edge_between(cur, nxt)
        ambiguous = plan_graph.ambiguous_on_edge(e)
        if ambiguous:
            obs = min(ambiguous, key=lambda o: o.id)
            need = 1.0 if simplified else obs.disamb_cost
            if need > remaining + TOL:
                banned.add(obs.id)
                note("ban", obstacle=obs.id, remaining=remaining)
                rebuild_plan_graph()
                continue
            was_blocking = bool(obs.status)
            remaining -= need
            realized += obs.disamb_cost
            disambs.append((obs.id, was_blocking))
            graph = apply_disambiguation(graph, obs.id, was_blocking)
            note("disambiguate", obstacle=obs.id,
                 blocking=was_blocking, remaining=remaining)
            rebuild_plan_graph()
            continue

        # edge certified passable: walk it
        realized += float(graph.edge_len[e])
        cur = nxt
        walked.append(cur)
        note("move", to=cur)
        if locked_plan is not None:
            locked_plan = locked_plan[1:]

    success = success and cur == t
    return TraversalOutcome(walked, realized, disambs, float(budget),
                            remaining, replans, success, events)


def run_rcdp(env: Environment, risk_model, budget: float, *,
             simplified: bool = False, collect_events: bool = False) -> TraversalOutcome:
    """Budget-aware policy: every step replans a constrained cheapest path
    from the current vertex with whatever budget is left."""
    return _traverse(env, risk_model, budget, constrained=True,
                     simplified=simplified, collect_events=collect_events)


def run_greedy(env: Environment, risk_model, budget: float, *,
               simplified: bool = False, collect_events: bool = False) -> TraversalOutcome:
    """Myopic policy: plans as if disambiguation were free, paying (or
    banning) obstacles only when it walks into them."""
    return _traverse(env, risk_model, budget, constrained=False,
                     simplified=simplified, collect_events=collect_events)


def benchmark_environment(env: Environment) -> Environment:
    """Clairvoyant view: truly blocking obstacles revealed, the rest left
    ambiguous (they still charge their fee when crossed)."""
    obs = [replace(o, knowledge=RESOLVED_TRUE if o.status else AMBIGUOUS)
           for o in env.obstacles]
    return Environment(env.region, env.source, env.target, obs)


def run_benchmark(env: Environment, budget: float, *,
                  simplified: bool = False) -> TraversalOutcome:
    """Offline optimum for one realization; the denominator of the
    relative-efficiency metric."""
    lattice = build_lattice(env.region)
    s = lattice.vertex_id(env.source)
    t = lattice.vertex_id(env.target)
    bm_env = benchmark_environment(env)
    graph = graph_initialize(lattice, bm_env, BenchmarkRisk(),
                             unit_weights=simplified)
    rep = cologr_solve(graph, s, t, budget)
    if not rep.path.exists:
        return TraversalOutcome([s], float("inf"), [], float(budget),
                                float(budget), 1, False)
    path = rep.path
    crossed: dict = {}
    for u, v in zip(path.vertices, path.vertices[1:]):
        for o in graph.ambiguous_on_edge(graph.edge_between(u, v)):
            crossed[o.id] = o
    fees = sum(o.disamb_cost for o in crossed.values())
    realized = path.length + fees
    disambs = [(oid, False) for oid in sorted(crossed)]
    # budget accounting stays in surrogate units (the ones the solve was
    # feasible in); realized_cost still pays each crossed disk once in full
    return TraversalOutcome(list(path.vertices), realized, disambs,
                            float(budget), float(budget) - path.weight, 1, True)


# ---------------------------------------------------------------------------
# Exact expectation over obstacle-truth realizations
# ---------------------------------------------------------------------------


def expected_over_realizations(marks, value_fn) -> float:
    """Sum of value_fn(assignment) over all true/false assignments of the
    marked obstacles, each weighted by its product probability. Exact, so
    capped at 20 obstacles (2^20 evaluations)."""
    k = len(marks)
    if k > MAX_EXACT_AMBIGUOUS:
        raise ValueError(f"exact expectation limited to {MAX_EXACT_AMBIGUOUS} "
                         f"ambiguous obstacles, got {k}")
    total = 0.0
    for bits in product((True, False), repeat=k):
        prob = 1.0
        for p, b in zip(marks, bits):
            prob *= p if b else 1.0 - p
        if prob == 0.0:
            continue
        total += prob * value_fn(bits)
    return total


def evaluate_expected(env: Environment, policy) -> float:
    """Expected realized cost of a policy, exactly enumerating the truth
    assignments of the currently ambiguous obstacles (mark = blocking
    probability). The policy is replayed once per realization."""
    ambiguous = [o for o in env.obstacles if o.knowledge == AMBIGUOUS]
    base = {o.id: o.status for o in env.obstacles}

    def value(bits):
        assign = dict(base)
        for o, b in zip(ambiguous, bits):
            assign[o.id] = b
        statuses = [assign[o.id] for o in env.obstacles]
        out = policy(env.with_statuses(statuses))
        if not out.success:
            raise RuntimeError("policy failed to reach the target in a "
                               "realization; expectation undefined")
        return out.realized_cost

    return expected_over_realizations([o.mark for o in ambiguous], value)


# ---------------------------------------------------------------------------
# Named policy registry (the experiment grid refers to these)
# ---------------------------------------------------------------------------

GREEDY_RISKS = {"greedy-rd": "rd", "greedy-dt": "dt"}
RCDP_RISKS = {"rcdp-rd": "rd", "rcdp-dt": "dt", "rcdp-lu15": "lu:15",
              "rcdp-lu30": "lu:30", "rcdp-lu-delta": "lu-delta"}

POLICY_NAMES = tuple(GREEDY_RISKS) + tuple(RCDP_RISKS)


def make_policy(name: str, budget: float, *, simplified: bool = False):
    """Callable env -> TraversalOutcome for a named policy."""
    if name in GREEDY_RISKS:
        model = make_risk_model(GREEDY_RISKS[name])
        return lambda env: run_greedy(env, model, budget, simplified=simplified)
    if name in RCDP_RISKS:
        model = make_risk_model(RCDP_RISKS[name])
        return lambda env: run_rcdp(env, model, budget, simplified=simplified)
    if name == "benchmark":
        return lambda env: run_benchmark(env, budget, simplified=simplified)
    raise ValueError(f"unknown policy: {name!r}")
