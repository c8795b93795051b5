"""Acceptance gate: eleven go/no-go checks over the full stack.

Each test prints exactly one PASS/FAIL line. The slower fixtures (the
200-instance oracle sweep and the 15-row desk campaign) are shared across
criteria, so the whole module costs roughly the price of one campaign.
"""

import math
import time

import numpy as np
import pytest

from rcdp import (
    Environment,
    Obstacle,
    Region,
    build_lattice,
    campaign_rows,
    cologr_solve,
    evaluate_expected,
    expected_over_realizations,
    graph_initialize,
    make_risk_model,
    run_benchmark,
    run_campaign,
    sample_environment,
    sne_solve,
)
from rcdp.experiments import child_seed, sweep_sensor, make_policy_for_risk
from rcdp.policies import RCDP_RISKS
from rcdp.solver import INFEASIBLE, next_multiplier
from rcdp.spp import min_weight_path, shortest_path, wcspp_oracle


def verdict(num, ok, detail):
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# shared instance batches


@pytest.fixture(scope="module")
def oracle_batch():
    """200 seeded small instances solved by both the production solver and
    the exact label-setting search."""
    t0 = time.time()
    records = []
    risks = ("lu:15", "rd", "dt", "lu-delta")
    for i in range(200):
        rng = np.random.default_rng(child_seed(555, i))
        size = 12 + i % 4                      # 12..15
        n_obs = 4 + i % 5                      # 4..8
        mid = size // 2
        try:
            env = sample_environment(
                n_obs, rng, region=Region(size, size), source=(mid, size),
                target=(mid, 0), radius=1.8, point_process="uniform")
        except ValueError:
            rng = np.random.default_rng(child_seed(555, 100_000 + i))
            env = sample_environment(
                n_obs, rng, region=Region(size, size), source=(mid, size),
                target=(mid, 0), radius=1.8, point_process="uniform")
        lat = build_lattice(env.region)
        g = graph_initialize(lat, env, make_risk_model(risks[i % 4]))
        s, t = lat.vertex_id(env.source), lat.vertex_id(env.target)
        budget = float(rng.uniform(0.3, 6.0))
        rep = cologr_solve(g, s, t, budget)
        want = wcspp_oracle(g, s, t, budget)
        records.append((rep, want))
    return records, time.time() - t0


@pytest.fixture(scope="module")
def desk_batch():
    """100 seeded instances at half scale (51 x 26 vertices, n = 20),
    solved by the full two-phase algorithm and by the ablation."""
    region = Region(50, 25)
    src, tgt = (25, 25), (25, 1)
    lat = build_lattice(region)
    s, t = lat.vertex_id(src), lat.vertex_id(tgt)
    t0 = time.time()
    out = []
    for i in range(100):
        env = None
        for attempt in range(20):
            rng = np.random.default_rng(child_seed(888, 10_000 * attempt + i))
            try:
                env = sample_environment(
                    20, rng, region=region, source=src, target=tgt,
                    radius=5.0, point_process="uniform")
                break
            except ValueError:
                continue
        assert env is not None
        g = graph_initialize(lat, env, make_risk_model("lu:15"))
        out.append((cologr_solve(g, s, t, 6.0), sne_solve(g, s, t, 6.0)))
    return out, time.time() - t0


@pytest.fixture(scope="module")
def campaign20():
    """The 15-row grid at 20 replications with every traversal policy."""
    t0 = time.time()
    result = run_campaign(2024, n_reps=20)
    return result, time.time() - t0


# ---------------------------------------------------------------------------
# criteria


def test_criterion_01_oracle_equivalence(oracle_batch):
    records, elapsed = oracle_batch
    worst = 0.0
    n_feasible = 0
    for rep, want in records:
        if not want.exists:
            assert rep.status == INFEASIBLE
            continue
        n_feasible += 1
        assert rep.path.exists
        assert rep.path.weight <= rep.budget + 1e-9
        worst = max(worst, abs(rep.path.cost - want.cost))
    ok = worst <= 1e-9 and elapsed < 60.0
    verdict(1, ok, f"200 instances, {n_feasible} feasible, worst |cost diff| "
                   f"{worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_zero_duality_gap(desk_batch):
    solves, elapsed = desk_batch
    gaps = [full.duality_gap for full, _ in solves]
    closed = sum(1 for gapv in gaps if gapv <= 1e-9)
    ok = closed >= 99 and elapsed < 600.0
    verdict(2, ok, f"gap ≤ 1e-9 on {closed}/100 (worst {max(gaps):.2e}), "
                   f"{elapsed:.1f}s")


def test_criterion_03_two_phase_vs_ablation(desk_batch, gap_env):
    solves, _ = desk_batch
    full_sizes = [full.graph_size_after for full, _ in solves]
    abl_sizes = [abl.graph_size_after for _, abl in solves]
    cost_ok = all(abl.path.cost >= full.path.cost - 1e-9
                  for full, abl in solves)
    size_ok = np.mean(abl_sizes) >= np.mean(full_sizes)

    # constructed tie-elimination instance where the ablation ends strictly worse
    lat = build_lattice(gap_env.region)
    g = graph_initialize(lat, gap_env, make_risk_model("rd"))
    s, t = lat.vertex_id(gap_env.source), lat.vertex_id(gap_env.target)
    budget = 4.536716869736799
    full = cologr_solve(g, s, t, budget)
    abl = sne_solve(g, s, t, budget)
    strict = abl.path.cost > full.path.cost + 1e-6
    ok = cost_ok and size_ok and strict
    verdict(3, ok,
            f"mean kept vertices {np.mean(abl_sizes):.1f} (ablation) ≥ "
            f"{np.mean(full_sizes):.1f} (full), cost order on all 100, "
            f"constructed instance {abl.path.cost:.4f} > {full.path.cost:.4f}")


def test_criterion_04_preservation(oracle_batch):
    records, _ = oracle_batch
    violations = 0
    checked = 0
    for rep, want in records:
        if not want.exists or rep.alive_mask is None:
            continue
        checked += 1
        if not all(rep.alive_mask[v] for v in want.vertices):
            violations += 1
    ok = violations == 0 and checked > 0
    verdict(4, ok, f"optimal-route vertices survived elimination in "
                   f"{checked}/{checked} solves, {violations} violations")


def test_criterion_05_expected_cost_arithmetic():
    # single-split policy: one ambiguous obstacle, mark 0.3
    env1 = Environment(Region(6, 4), (3, 4), (3, 0),
                       [Obstacle(4, (3.0, 2.0), 1.0, True, 0.3, 1.0)])

    def budgeted(env_r):
        truth = env_r.obstacles[0].status

        class Out:
            success = True
            realized_cost = (23.5563 + 1.0) if truth else (19.8995 + 1.0)

        return Out()

    got1 = evaluate_expected(env1, budgeted)
    want1 = expected_over_realizations(
        [0.3], lambda truths: 24.5563 if truths[0] else 20.8995)

    # myopic policy: two ambiguous obstacles (marks 0.1 then 0.3), four legs
    env2 = Environment(Region(6, 4), (3, 4), (3, 0), [
        Obstacle(3, (2.0, 2.0), 0.8, False, 0.1, 1.0),
        Obstacle(4, (4.0, 2.0), 0.8, True, 0.3, 1.0),
    ])
    legs = {(False, False): 26.728, (True, False): 22.4853,
            (True, True): 26.1421, (False, True): 33.3136}

    def myopic(env_r):
        key = tuple(o.status for o in env_r.obstacles)

        class Out:
            success = True
            realized_cost = legs[key]

        return Out()

    got2 = evaluate_expected(env2, myopic)
    want2 = expected_over_realizations(
        [0.1, 0.3], lambda truths: legs[tuple(truths)])
    ok = (abs(got1 - 21.9966) <= 5e-4 and abs(got2 - 28.1916) <= 5e-4
          and abs(got1 - want1) <= 1e-12 and abs(got2 - want2) <= 1e-12)
    verdict(5, ok, f"budgeted split {got1:.4f} (target 21.9966), "
                   f"myopic four-leg {got2:.4f} (target 28.1916)")


def _binding_walls(rng):
    """Six staggered fences of overlapping disks with fine-grained fees.

    Every route crosses all six rows, so path weight accumulates in small
    increments and a mid-range budget leaves real work for the multiplier
    search (a single fence is fully resolved by the bound-elimination
    pre-pass alone).
    """
    obstacles = []
    k = 0
    for j in range(6):
        y = 4.0 + 4.0 * j
        x = 0.0 if j % 2 == 0 else 1.0
        while x <= 16.0:
            fee = float(rng.uniform(1.0, 2.5))
            mark = float(rng.uniform(0.2, 0.8))
            obstacles.append(Obstacle(k, (x, y), 1.3, False, mark, fee))
            k += 1
            x += 2.0
    return Environment(Region(16, 28), (8, 28), (8, 0), obstacles)


def test_criterion_06_multiplier_bracketing():
    # (a) the intersection update lands inside any consistent bracket
    rng = np.random.default_rng(123456)
    states = 0
    worst_violation = 0.0
    while states < 1000:
        k = int(rng.integers(3, 9))
        costs = rng.uniform(10.0, 100.0, k)
        weights = rng.uniform(0.0, 10.0, k)
        lam_lo = float(rng.uniform(0.0, 2.0))
        lam_hi = lam_lo + float(rng.uniform(0.1, 5.0))
        i_lo = int(np.argmin(costs + lam_lo * weights))
        i_hi = int(np.argmin(costs + lam_hi * weights))
        if weights[i_lo] <= weights[i_hi] + 1e-9:
            continue  # no feasible/violating split available
        lam_new = next_multiplier(costs[i_hi], weights[i_hi],
                                  costs[i_lo], weights[i_lo])
        worst_violation = max(worst_violation,
                              lam_lo - lam_new, lam_new - lam_hi)
        states += 1

    # (b) bound monotonicity on real multiplier-phase runs
    checked = 0
    multi = 0
    attempts = 0
    mono_ok = True
    rng2 = np.random.default_rng(654321)
    while checked < 50 and attempts < 400:
        attempts += 1
        env = _binding_walls(rng2)
        lat = build_lattice(env.region)
        g = graph_initialize(lat, env, make_risk_model("rd"))
        s, t = lat.vertex_id(env.source), lat.vertex_id(env.target)
        light = min_weight_path(g, s, t)
        cheap = shortest_path(g, s, t)
        if not light.exists or cheap.weight <= light.weight + 0.5:
            continue
        budget = light.weight + 0.45 * (cheap.weight - light.weight)
        rep = cologr_solve(g, s, t, budget)
        if not rep.bound_history:
            continue
        ups = [u for u, _ in rep.bound_history]
        lows = [l for _, l in rep.bound_history]
        ups.append(rep.upper_cost)
        lows.append(rep.lower_cost)
        if not all(b <= a + 1e-9 for a, b in zip(ups, ups[1:])):
            mono_ok = False
        if not all(b >= a - 1e-9 for a, b in zip(lows, lows[1:])):
            mono_ok = False
        if len(rep.bound_history) >= 2:
            multi += 1
        checked += 1
    ok = worst_violation <= 1e-9 and mono_ok and checked >= 50 and multi >= 10
    verdict(6, ok, f"1000 bracket states (worst excursion "
                   f"{worst_violation:.2e}), bounds monotone on {checked} "
                   f"multiplier-phase runs ({multi} with 2+ recorded "
                   f"iterations)")


def test_criterion_07_budget_safety(campaign20):
    result, _ = campaign20
    budgets = {r.id: (r.budget, r.simplified) for r in campaign_rows()}
    violations = 0
    rcdp_fail = 0
    for row in result.replications:
        scen, _rep, pol, _cost, used, n_dis, success = row[:7]
        budget, simplified = budgets[scen]
        if used > budget + 1e-9:
            violations += 1
        if simplified and n_dis > budget + 1e-9:
            violations += 1
        if pol in RCDP_RISKS and not success:
            rcdp_fail += 1
    ok = violations == 0 and rcdp_fail == 0
    verdict(7, ok, f"{len(result.replications)} outcomes over 15 rows x 20 "
                   f"reps: {violations} budget violations, {rcdp_fail} "
                   f"constrained-policy failures")


def test_criterion_08_dominance_at_scale(campaign20):
    result, elapsed = campaign20
    costs = {"rcdp-lu15": [], "greedy-rd": []}
    for row in result.replications:
        if row[0] == "g-n80-d8" and row[2] in costs:
            costs[row[2]].append(row[3])
    m_rcdp = float(np.mean(costs["rcdp-lu15"]))
    m_greedy = float(np.mean(costs["greedy-rd"]))
    margin = 1.0 - m_rcdp / m_greedy
    ok = len(costs["rcdp-lu15"]) == 20 and margin >= 0.15 and elapsed < 1200.0
    verdict(8, ok, f"n=80 heterogeneous fees: budgeted {m_rcdp:.2f} vs "
                   f"myopic {m_greedy:.2f} ({100 * margin:.1f}% better), "
                   f"campaign {elapsed:.0f}s")


def test_criterion_09_perfect_sensing():
    region = Region(50, 25)
    src, tgt = (25, 25), (25, 1)
    worst = 0.0
    for i in range(50):
        env = None
        for attempt in (0, 1):
            rng = np.random.default_rng(child_seed(777, 50_000 * attempt + i))
            try:
                env = sample_environment(
                    20, rng, region=region, source=src, target=tgt,
                    radius=4.0, point_process="uniform")
                break
            except ValueError:
                continue
        assert env is not None
        exact = [Obstacle(o.id, o.center, o.radius, o.status,
                          1.0 if o.status else 0.0, o.disamb_cost)
                 for o in env.obstacles]
        env_p = Environment(env.region, env.source, env.target, exact)
        out = make_policy_for_risk("lu-bayes:60", 8.0)(env_p)
        ben = run_benchmark(env_p, 8.0)
        assert out.success and ben.success
        worst = max(worst, abs(out.realized_cost - ben.realized_cost))

    rows = sweep_sensor((0, 1, 2, 3, 4), n_obstacles=40, budget=8.0,
                        alpha_max=60.0, n_reps=20, seed=20_240_202)
    means = [m for _, m, _ in rows]
    inversions = sum(1 for a, b in zip(means, means[1:]) if b > a + 1e-9)
    ok = worst <= 1e-9 and inversions <= 1
    verdict(9, ok, f"50 degenerate-mark instances, worst |policy − "
                   f"benchmark| {worst:.2e}; sweep means "
                   f"{['%.2f' % m for m in means]} with {inversions} "
                   f"inversions")


def test_criterion_10_geometry_and_spot_values():
    from rcdp.env import segment_crosses_circle, segment_intersects_disk
    from rcdp.risk import risk_lu, risk_lu_bayes, risk_rd

    checks = []
    # predicate, including grazing tangency
    checks.append(segment_intersects_disk((0, 0), (4, 0), (2, 0), 1.0))
    checks.append(segment_intersects_disk((0, 0), (2, 0), (1, 0.5), 0.5))
    checks.append(segment_crosses_circle((0, 0), (2, 0), (1, 0.5), 0.5))
    checks.append(not segment_intersects_disk((0, 0), (4, 0), (2, 3), 1.0))

    # halved per-edge contributions
    class TwoScores:
        name = "fixed"

        def obstacle_risk(self, env):
            return np.array([2.0, 4.0])

    env = Environment(Region(3, 2), (0, 0), (3, 2), [
        Obstacle(0, (1.5, 0.5), 0.6, True, 0.5, 1.0),
        Obstacle(1, (1.5, 0.5), 0.6, False, 0.5, 3.0)])
    lat = build_lattice(env.region)
    g = graph_initialize(lat, env, TwoScores())
    e = g.edge_between(lat.vertex_id((1, 0)), lat.vertex_id((2, 0)))
    checks.append(abs(g.edge_cost[e] - (1.0 + 3.0)) <= 1e-9)
    checks.append(abs(g.edge_weight[e] - 2.0) <= 1e-9)

    # risk spot values
    checks.append(abs(risk_lu(0.5, 30.0) - 30.0 * math.log(2.0)) <= 1e-9)
    checks.append(abs(risk_rd(1.0, 0.7) - 1.0 / 0.3) <= 1e-9)
    checks.append(abs(risk_lu_bayes(2.0, 0.5, 30.0)
                      - (2.0 + 30.0 * math.log(2.0))) <= 1e-9)

    # lattice counts
    lat_full = build_lattice(Region(100, 50))
    checks.append(lat_full.n_vertices == 5151)
    nx, ny = 101, 51
    checks.append(lat_full.n_edges ==
                  nx * (ny - 1) + ny * (nx - 1) + 2 * (nx - 1) * (ny - 1))
    ok = all(checks)
    verdict(10, ok, f"{len(checks)} exact geometry/aggregation checks")


def test_criterion_11_byte_identical_reruns(tmp_path):
    spec = dict(n_reps=3, rows=["s-n20-N1", "g-n20-d4"])
    dirs = []
    for name in ("one", "two"):
        res = run_campaign(31_337, **spec)
        d = tmp_path / name
        res.save(d)
        dirs.append(d)
    same_rep = (dirs[0] / "replications.csv").read_bytes() == \
               (dirs[1] / "replications.csv").read_bytes()
    same_sum = (dirs[0] / "summary.csv").read_bytes() == \
               (dirs[1] / "summary.csv").read_bytes()
    ok = same_rep and same_sum
    verdict(11, ok, "replications.csv and summary.csv byte-identical "
                    "across two runs of the same campaign spec")
