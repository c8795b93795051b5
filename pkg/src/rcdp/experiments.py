"""Seeded Monte Carlo experiment harness.

A campaign is a grid of scenario rows (field size x budget variant) times a
number of replications. Every replication builds one random environment and
replays every requested policy on it (paired design), together with the
clairvoyant benchmark for that realization. Results land in two CSV files:

* replications.csv - one row per (scenario, replication, policy)
* summary.csv      - aggregated metrics per (scenario, policy)

Reproducibility contract: a campaign is a pure function of its seed. Every
replication derives a child seed as splitmix64(campaign_seed XOR
splitmix64(stable_index)), where stable_index = scenario.seed_base * 10000 +
replication; the stable index depends only on the scenario's position in the
canonical grid, so running a subset of rows or policies reuses the exact
same environments. Floats are written with repr (shortest round-trip form),
and runtimes are written as 0 unless timing collection is switched on, so
repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from .env import Environment, Obstacle, Region
from .policies import POLICY_NAMES, make_policy, run_benchmark
from .risk import SensorModel, sample_marks
from .spatial import (DEFAULT_SWEEPS, gen_matern, gen_strauss, gen_uniform,
                      nearest_neighbor_dists)

MASK64 = (1 << 64) - 1

DEFAULT_REGION = Region(100, 50)
DEFAULT_SOURCE = (50, 50)
DEFAULT_TARGET = (50, 1)
DEFAULT_RADIUS = 5.0
DEFAULT_TRUE_FRACTION = 0.2

FIELD_SIZES = (20, 40, 80)
SIMPLIFIED_BUDGETS = (1.0, 2.0, 3.0)
GENERAL_BUDGETS = {20: (4.0, 6.0), 40: (6.0, 8.0), 80: (8.0, 10.0)}

REPLICATION_COLUMNS = ("scenario", "replication", "policy", "cost",
                       "weight_used", "n_disamb", "success", "benchmark_cost",
                       "runtime_ms")
SUMMARY_COLUMNS = ("scenario", "policy", "n_reps", "mean_cost", "sd_cost",
                   "rms_vs_benchmark", "p25", "p75", "mean_disamb",
                   "mean_weight_used", "relative_efficiency",
                   "satisfaction_rate")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def child_seed(campaign_seed: int, stable_index: int) -> int:
    return splitmix64((campaign_seed ^ splitmix64(stable_index)) & MASK64)


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    n_obstacles: int
    variant: str              # "simplified" (count budget) or "general"
    budget: float
    seed_base: int            # position in the canonical grid

    @property
    def simplified(self) -> bool:
        return self.variant == "simplified"


def campaign_rows() -> list[ScenarioSpec]:
    """The canonical 15-row grid: three field sizes, three count budgets in
    the simplified variant, two cost budgets in the general one."""
    rows = []
    base = 0
    for n in FIELD_SIZES:
        for nmax in SIMPLIFIED_BUDGETS:
            rows.append(ScenarioSpec(f"s-n{n}-N{int(nmax)}", n, "simplified",
                                     nmax, base))
            base += 1
        for dmax in GENERAL_BUDGETS[n]:
            rows.append(ScenarioSpec(f"g-n{n}-d{int(dmax)}", n, "general",
                                     dmax, base))
            base += 1
    return rows


def assign_costs(centers: np.ndarray, statuses: np.ndarray,
                 rule: str = "hetero") -> np.ndarray:
    """Disambiguation fee per obstacle. The heterogeneous rule starts from 3
    (4 for truly blocking obstacles), charges isolated obstacles one more
    (nearest neighbor beyond 14) and crowded ones one less (below 8),
    clamped to [2, 6]. The uniform5 rule charges a flat 5."""
    n = len(centers)
    if rule == "uniform5":
        return np.full(n, 5.0)
    if rule != "hetero":
        raise ValueError(f"unknown cost rule: {rule!r}")
    fees = np.where(statuses, 4.0, 3.0)
    if n > 1:
        nn = nearest_neighbor_dists(np.asarray(centers, dtype=float))
        fees = fees + (nn > 14.0) - (nn < 8.0)
    return np.clip(fees, 2.0, 6.0)


def sample_environment(n: int, rng: np.random.Generator, *,
                       region: Region = DEFAULT_REGION,
                       source=DEFAULT_SOURCE, target=DEFAULT_TARGET,
                       point_process: str = "strauss",
                       cost_rule: str = "hetero",
                       true_fraction: float = DEFAULT_TRUE_FRACTION,
                       radius: float = DEFAULT_RADIUS,
                       sensor: SensorModel = SensorModel(),
                       perfect_sensor: bool = False,
                       strauss_sweeps: int = DEFAULT_SWEEPS) -> Environment:
    """One random environment: centers from the requested point process in
    the inner margin box, a fixed fraction of truly blocking obstacles,
    sensor marks, and fees. Draw order is fixed (centers, statuses, marks)
    so equal seeds give equal environments."""
    mx = 0.1 * region.width
    my = 0.2 * region.height
    bounds = ((mx, region.width - mx), (my, region.height - my))
    if point_process == "strauss":
        centers = gen_strauss(n, rng, bounds, sweeps=strauss_sweeps)
    elif point_process == "uniform":
        centers = gen_uniform(n, rng, bounds)
    elif point_process == "matern":
        centers = gen_matern(n, rng, bounds)
    else:
        raise ValueError(f"unknown point process: {point_process!r}")

    statuses = np.zeros(n, dtype=bool)
    n_true = int(round(true_fraction * n))
    if n_true:
        statuses[rng.choice(n, size=n_true, replace=False)] = True
    marks = sample_marks(statuses, rng, sensor=sensor, perfect=perfect_sensor)
    fees = assign_costs(centers, statuses, cost_rule)

    obstacles = [
        Obstacle(i, (float(centers[i, 0]), float(centers[i, 1])), radius,
                 bool(statuses[i]), float(marks[i]), float(fees[i]))
        for i in range(n)
    ]
    env = Environment(region, source, target, obstacles)
    if env.warnings:
        raise ValueError("generated environment covers source or target: "
                         + "; ".join(env.warnings))
    return env


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))     # shortest round-trip decimal form
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


@dataclass
class CampaignResult:
    replications: list          # rows matching REPLICATION_COLUMNS
    summary: list               # rows matching SUMMARY_COLUMNS

    def save(self, out_dir: str) -> tuple[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        rep_path = os.path.join(out_dir, "replications.csv")
        sum_path = os.path.join(out_dir, "summary.csv")
        _write_csv(rep_path, REPLICATION_COLUMNS, self.replications)
        _write_csv(sum_path, SUMMARY_COLUMNS, self.summary)
        return rep_path, sum_path


def summarize(replications, policies) -> list:
    """Aggregate replication rows into per-(scenario, policy) metrics,
    keeping first-seen scenario order and the given policy order."""
    by_key: dict = {}
    scenario_order: list = []
    for row in replications:
        scen, _rep, pol = row[0], row[1], row[2]
        if scen not in scenario_order:
            scenario_order.append(scen)
        by_key.setdefault((scen, pol), []).append(row)
    out = []
    for scen in scenario_order:
        for pol in policies:
            rows = by_key.get((scen, pol))
            if not rows:
                continue
            costs = np.array([r[3] for r in rows])
            weights = np.array([r[4] for r in rows])
            n_dis = np.array([r[5] for r in rows])
            succ = np.array([r[6] for r in rows], dtype=bool)
            bench = np.array([r[7] for r in rows])
            n = len(rows)
            mean = float(costs.mean())
            sd = float(costs.std(ddof=1)) if n > 1 else 0.0
            rms = float(np.sqrt(((costs - bench) ** 2).mean()))
            p25 = float(np.percentile(costs, 25, method="linear"))
            p75 = float(np.percentile(costs, 75, method="linear"))
            rel_eff = float(bench.mean() / mean) if mean > 0 else 0.0
            sat = float(succ.mean())
            out.append((scen, pol, n, mean, sd, rms, p25, p75,
                        float(n_dis.mean()), float(weights.mean()),
                        rel_eff, sat))
    return out


def run_campaign(campaign_seed: int, n_reps: int = 100, *,
                 rows=None, policies=POLICY_NAMES,
                 point_process: str = "strauss", cost_rule: str = "hetero",
                 region: Region = DEFAULT_REGION,
                 source=DEFAULT_SOURCE, target=DEFAULT_TARGET,
                 radius: float = DEFAULT_RADIUS,
                 strauss_sweeps: int = DEFAULT_SWEEPS,
                 timings: bool = False,
                 progress=None) -> CampaignResult:
    """Run the grid. `rows` may be a subset of campaign_rows() (or row ids);
    child seeds do not depend on which subset runs."""
    all_rows = campaign_rows()
    if rows is None:
        rows = all_rows
    else:
        by_id = {r.id: r for r in all_rows}
        rows = [by_id[r] if isinstance(r, str) else r for r in rows]

    replications = []
    for spec in rows:
        for rep in range(n_reps):
            seed = child_seed(campaign_seed, spec.seed_base * 10_000 + rep)
            rng = np.random.default_rng(seed)
            env = sample_environment(
                spec.n_obstacles, rng, region=region, source=source,
                target=target, point_process=point_process,
                cost_rule=cost_rule, radius=radius,
                strauss_sweeps=strauss_sweeps)
            bench = run_benchmark(env, spec.budget, simplified=spec.simplified)
            for name in policies:
                policy = make_policy(name, spec.budget,
                                     simplified=spec.simplified)
                t0 = time.perf_counter()
                out = policy(env)
                ms = int(round(1000.0 * (time.perf_counter() - t0)))
                replications.append((
                    spec.id, rep, name, out.realized_cost, out.budget_used,
                    out.n_disambiguations, out.success, bench.realized_cost,
                    ms if timings else 0))
            if progress is not None:
                progress(spec, rep)
    return CampaignResult(replications, summarize(replications, policies))


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------


def sweep_alpha(alphas, true_fractions=(DEFAULT_TRUE_FRACTION,), *,
                n_obstacles: int = 40, budget: float = 8.0,
                n_reps: int = 10, seed: int = 20_240_101,
                region: Region = DEFAULT_REGION, source=DEFAULT_SOURCE,
                target=DEFAULT_TARGET, radius: float = DEFAULT_RADIUS,
                point_process: str = "strauss",
                strauss_sweeps: int = DEFAULT_SWEEPS) -> list:
    """Mean realized cost of the budget-aware policy over a grid of
    log-penalty scales alpha and truly-blocking fractions. Environments are
    shared across alphas within each fraction (paired), so cost differences
    along the alpha axis come from the policy alone."""
    rows = []
    for tf in true_fractions:
        envs = []
        for rep in range(n_reps):
            rng = np.random.default_rng(
                child_seed(seed, 100_000 + 1000 * round(100 * tf) + rep))
            envs.append(sample_environment(
                n_obstacles, rng, region=region, source=source,
                target=target, radius=radius, point_process=point_process,
                true_fraction=tf, strauss_sweeps=strauss_sweeps))
        for alpha in alphas:
            policy = make_policy_for_risk(f"lu:{alpha}", budget)
            arr = np.array([policy(env).realized_cost for env in envs])
            rows.append((float(alpha), float(tf), float(arr.mean()),
                         float(arr.std(ddof=1)) if n_reps > 1 else 0.0))
    return rows


def sweep_sensor(precisions, *, n_obstacles: int = 40, budget: float = 8.0,
                 alpha_max: float = 60.0, n_reps: int = 10,
                 seed: int = 20_240_202, region: Region = DEFAULT_REGION,
                 source=DEFAULT_SOURCE, target=DEFAULT_TARGET,
                 radius: float = DEFAULT_RADIUS,
                 point_process: str = "strauss",
                 strauss_sweeps: int = DEFAULT_SWEEPS) -> list:
    """Mean realized cost of the posterior-weighted policy as sensor
    precision varies. Higher precision sharpens the mark distributions;
    environments share geometry/truth across precisions (paired), only the
    marks are redrawn per precision level."""
    geometry = []
    for rep in range(n_reps):
        rng = np.random.default_rng(child_seed(seed, 200_000 + rep))
        env = sample_environment(
            n_obstacles, rng, region=region, source=source, target=target,
            radius=radius, point_process=point_process,
            strauss_sweeps=strauss_sweeps)
        geometry.append(env)
    rows = []
    for prec in precisions:
        sensor = SensorModel.from_precision(prec)
        costs = []
        bench = []
        for rep, env in enumerate(geometry):
            rng = np.random.default_rng(
                child_seed(seed, 300_000 + 1000 * rep + round(100 * prec)))
            statuses = np.array([o.status for o in env.obstacles])
            marks = sample_marks(statuses, rng, sensor=sensor)
            remarked = [
                Obstacle(o.id, o.center, o.radius, o.status,
                         float(marks[i]), o.disamb_cost)
                for i, o in enumerate(env.obstacles)
            ]
            env_p = Environment(env.region, env.source, env.target, remarked)
            policy = make_policy_for_risk(
                f"lu-bayes:{alpha_max}", budget, sensor=sensor)
            costs.append(policy(env_p).realized_cost)
            bench.append(run_benchmark(env_p, budget).realized_cost)
        arr = np.array(costs)
        rows.append((float(prec), float(arr.mean()),
                     float(np.array(bench).mean())))
    return rows


def make_policy_for_risk(risk_spec: str, budget: float, *,
                         simplified: bool = False, sensor=None):
    """Budget-aware policy over an arbitrary risk grammar string (the named
    registry covers only the standard grid policies)."""
    from .policies import run_rcdp
    from .risk import make_risk_model
    kw = {} if sensor is None else {"sensor": sensor}
    model = make_risk_model(risk_spec, **kw)
    return lambda env: run_rcdp(env, model, budget, simplified=simplified)
