"""Command-line front end.

Subcommands cover the whole workflow: generate environments (gen-env),
solve one instance (solve), replay a traversal (traverse), run the Monte
Carlo grid (simulate), parameter sweeps (sweep-alpha, sweep-sensor), the
reduction-strategy comparison table (compare-reduction), and plot/report
emission (report).

Exit codes: 0 success, 2 infeasible or failed traversal, 3 usage/config/
parse error, 4 internal invariant failure.

Any subcommand accepts ``--config FILE`` where FILE holds ``key = value``
lines (``#`` comments allowed) named after the long flags. Config values
are injected before the command line, so explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .env import Environment, EnvironmentFormatError, Region, build_lattice, graph_initialize
from .experiments import (DEFAULT_RADIUS, DEFAULT_REGION, DEFAULT_SOURCE,
                          DEFAULT_TARGET, DEFAULT_TRUE_FRACTION,
                          _write_csv, campaign_rows,
                          child_seed, make_policy_for_risk, run_campaign,
                          sample_environment, sweep_alpha,
                          sweep_sensor)
from .policies import POLICY_NAMES, make_policy
from .report import ReportError, write_report
from .risk import SensorModel, make_risk_model
from .solver import INFEASIBLE, cologr_solve, sne_solve
from .spp import wcspp_oracle

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3
EXIT_INTERNAL = 4

ALL_POLICIES = POLICY_NAMES + ("benchmark",)


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped onto the config/parse exit code."""

    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Config files: `key = value`, keys named after long flags
# ---------------------------------------------------------------------------


def read_config(path):
    """Parse a config file into ordered (key, value) pairs."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    pairs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{path}:{lineno}: expected `key = value`, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            pairs.append((key.replace("_", "-"), value))
    return pairs


def config_as_argv(pairs):
    """Turn config pairs into flag tokens (booleans become bare flags)."""
    argv = []
    for key, value in pairs:
        if value.lower() in ("true", "yes", "on"):
            argv.append(f"--{key}")
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            argv.extend([f"--{key}", value])
    return argv


def _splice_config(argv):
    """Pull --config out of argv and inject its flags right after the
    subcommand, keeping explicit flags later (so they take precedence)."""
    out = []
    config_path = None
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ConfigError("--config needs a file argument")
            config_path = argv[i + 1]
            i += 2
        elif tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
            i += 1
        else:
            out.append(tok)
            i += 1
    if config_path is None:
        return out
    if not out:
        raise ConfigError("--config requires a subcommand")
    return [out[0]] + config_as_argv(read_config(config_path)) + out[1:]


# ---------------------------------------------------------------------------
# Shared argument helpers
# ---------------------------------------------------------------------------


def _point(text):
    try:
        x, y = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected integer point `x,y`, got {text!r}") from None
    return (x, y)


def _floats(text):
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}") from None


def _names(text):
    return [p.strip() for p in text.split(",") if p.strip()]


def _add_budget_flags(sub):
    sub.add_argument("--delta-max", type=float, default=None,
                     help="disambiguation budget in fee units")
    sub.add_argument("--n-max", type=int, default=None,
                     help="disambiguation budget as a count (unit weights)")


def _budget(args, parser):
    if (args.delta_max is None) == (args.n_max is None):
        parser.error("exactly one of --delta-max / --n-max is required")
    if args.n_max is not None:
        return float(args.n_max), True
    return float(args.delta_max), False


def _load_env(path):
    try:
        return Environment.load(path)
    except FileNotFoundError:
        raise ConfigError(f"environment file not found: {path}") from None
    except EnvironmentFormatError as exc:
        raise ConfigError(f"bad environment file {path}: {exc}") from None


def _graph_for(env, risk_spec, unit_weights):
    lattice = build_lattice(env.region)
    graph = graph_initialize(lattice, env, make_risk_model(risk_spec),
                             unit_weights=unit_weights)
    return lattice, graph


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def cmd_gen_env(args, parser):
    region = Region(args.width, args.height)
    sensor = (SensorModel.from_precision(args.precision)
              if args.precision is not None else SensorModel())
    rng = np.random.default_rng(child_seed(args.seed, 0))
    try:
        env = sample_environment(
            args.n, rng, region=region, source=args.source,
            target=args.target, point_process=args.process,
            cost_rule=args.cost_rule, true_fraction=args.true_fraction,
            radius=args.radius, sensor=sensor)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    env.save(args.out)
    n_true = sum(o.status for o in env.obstacles)
    print(f"wrote {args.out}: {len(env.obstacles)} obstacles "
          f"({n_true} blocking), region {region.width}x{region.height}")
    return EXIT_OK


def cmd_solve(args, parser):
    budget, unit_weights = _budget(args, parser)
    env = _load_env(args.env)
    lattice, graph = _graph_for(env, args.risk, unit_weights)
    s = lattice.vertex_id(env.source)
    t = lattice.vertex_id(env.target)
    rep = cologr_solve(graph, s, t, budget)
    print(f"status: {rep.status}")
    if rep.path.exists:
        print(f"cost: {rep.path.cost:.6f}")
        print(f"weight: {rep.path.weight:.6f} (budget {budget:g})")
        print(f"length: {rep.path.length:.6f}")
    print(f"gap: {rep.duality_gap:.3e}")
    print(f"eliminated: {rep.eliminated_pre} pre + {rep.eliminated_dual} "
          f"in-loop of {rep.graph_size_initial} vertices")
    print(f"iterations: {rep.iterations}")
    if args.oracle:
        osol = wcspp_oracle(graph, s, t, budget)
        if osol.exists != rep.path.exists:
            print("oracle: DISAGREE (existence)")
            return EXIT_INTERNAL
        if osol.exists:
            diff = abs(osol.cost - rep.path.cost)
            verdict = "agree" if diff <= 1e-9 else "DISAGREE"
            print(f"oracle: {verdict} (cost {osol.cost:.6f}, "
                  f"|diff| {diff:.3e})")
            if verdict == "DISAGREE":
                return EXIT_INTERNAL
        else:
            print("oracle: agree (infeasible)")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(rep.to_json() + "\n")
        print(f"wrote {args.out}")
    return EXIT_INFEASIBLE if rep.status == INFEASIBLE else EXIT_OK


def cmd_traverse(args, parser):
    budget, unit_weights = _budget(args, parser)
    env = _load_env(args.env)
    if args.policy in ALL_POLICIES:
        policy = make_policy(args.policy, budget, simplified=unit_weights)
    else:
        try:
            policy = make_policy_for_risk(args.policy, budget,
                                          simplified=unit_weights)
        except ValueError as exc:
            parser.error(f"unknown policy {args.policy!r}: {exc}")
    out = policy(env)
    print(f"policy: {args.policy}")
    print(f"success: {'yes' if out.success else 'no'}")
    print(f"realized cost: {out.realized_cost:.6f}")
    print(f"budget used: {out.budget_used:.6f} of {budget:g}")
    print(f"disambiguations: {out.n_disambiguations} "
          f"{[oid for oid, _ in out.disambiguations]}")
    print(f"replans: {out.replans}")
    print(f"steps walked: {len(out.walked) - 1}")
    return EXIT_OK if out.success else EXIT_INFEASIBLE


def cmd_simulate(args, parser):
    known = {r.id for r in campaign_rows()}
    rows = None
    if args.rows != "all":
        rows = _names(args.rows)
        bad = [r for r in rows if r not in known]
        if bad:
            parser.error(f"unknown scenario rows: {', '.join(bad)} "
                         f"(known: {', '.join(sorted(known))})")
    policies = tuple(_names(args.policies))
    bad = [p for p in policies if p not in ALL_POLICIES]
    if bad:
        parser.error(f"unknown policies: {', '.join(bad)}")
    result = run_campaign(args.seed, args.replications, rows=rows,
                          policies=policies, timings=args.timings)
    rep_path, sum_path = result.save(args.out)
    print(f"wrote {rep_path} ({len(result.replications)} rows)")
    print(f"wrote {sum_path} ({len(result.summary)} rows)")
    return EXIT_OK


def cmd_sweep_alpha(args, parser):
    rows = sweep_alpha(args.alphas, args.true_fractions,
                       n_obstacles=args.n, budget=args.delta_max,
                       n_reps=args.replications, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "alpha_sweep.csv")
    _write_csv(path, ("alpha", "true_fraction", "mean_cost", "sd_cost"), rows)
    print(f"wrote {path} ({len(rows)} rows)")
    for alpha, tf, mean, sd in rows:
        print(f"  alpha={alpha:g} true_fraction={tf:g} "
              f"mean={mean:.4f} sd={sd:.4f}")
    return EXIT_OK


def cmd_sweep_sensor(args, parser):
    rows = sweep_sensor(args.precisions, n_obstacles=args.n,
                        budget=args.delta_max, alpha_max=args.alpha_max,
                        n_reps=args.replications, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sensor_sweep.csv")
    _write_csv(path, ("precision", "mean_cost", "benchmark_mean"), rows)
    print(f"wrote {path} ({len(rows)} rows)")
    for prec, mean, bench in rows:
        print(f"  precision={prec:g} mean={mean:.4f} benchmark={bench:.4f}")
    return EXIT_OK


def cmd_compare_reduction(args, parser):
    if args.replications <= 0:
        parser.error("--replications must be positive")
    region = Region(args.width, args.height)
    source = (region.width // 2, region.height)
    target = (region.width // 2, 1)
    header = ("replication", "initial_vertices",
              "cologr_vertices", "cologr_cost", "cologr_gap", "cologr_status",
              "sne_vertices", "sne_cost", "sne_gap", "sne_status")
    rows = []
    for rep in range(args.replications):
        rng = np.random.default_rng(child_seed(args.seed, 400_000 + rep))
        env = sample_environment(
            args.n, rng, region=region, source=source, target=target,
            radius=args.radius, point_process="uniform")
        lattice, graph = _graph_for(env, args.risk, False)
        s = lattice.vertex_id(env.source)
        t = lattice.vertex_id(env.target)
        full = cologr_solve(graph, s, t, args.delta_max)
        abl = sne_solve(graph, s, t, args.delta_max)
        rows.append((rep, full.graph_size_initial,
                     full.graph_size_after, full.upper_cost,
                     full.duality_gap, full.status,
                     abl.graph_size_after, abl.upper_cost,
                     abl.duality_gap, abl.status))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "reduction.csv")
    _write_csv(path, header, rows)
    print(f"wrote {path} ({len(rows)} rows)")
    kept_full = np.mean([r[2] for r in rows])
    kept_abl = np.mean([r[6] for r in rows])
    print(f"mean surviving vertices: full-solve {kept_full:.1f}, "
          f"ablation {kept_abl:.1f}")
    return EXIT_OK


def cmd_report(args, parser):
    try:
        paths = write_report(args.results, args.out)
    except ReportError as exc:
        raise ConfigError(str(exc)) from None
    for name in ("mean_costs", "error_bars", "cost_boxes", "summary_md"):
        print(f"wrote {paths[name]}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="rcdp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND",
                                parser_class=_Parser)
    sub.required = True

    def common(p):
        p.add_argument("--config", help="key = value file of defaults "
                       "(explicit flags override)")

    p = sub.add_parser("gen-env", help="sample a random environment")
    common(p)
    p.add_argument("--n", type=int, default=40, help="number of obstacles")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="environment JSON path")
    p.add_argument("--process", default="strauss",
                   choices=("strauss", "uniform", "matern"))
    p.add_argument("--cost-rule", default="hetero",
                   choices=("hetero", "uniform5"))
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--true-fraction", type=float,
                   default=DEFAULT_TRUE_FRACTION)
    p.add_argument("--width", type=int, default=DEFAULT_REGION.width)
    p.add_argument("--height", type=int, default=DEFAULT_REGION.height)
    p.add_argument("--source", type=_point, default=DEFAULT_SOURCE)
    p.add_argument("--target", type=_point, default=DEFAULT_TARGET)
    p.add_argument("--precision", type=float, default=None,
                   help="sensor precision level (default: baseline sensor)")
    p.set_defaults(func=cmd_gen_env)

    p = sub.add_parser("solve", help="solve one instance to a plan")
    common(p)
    p.add_argument("--env", required=True, help="environment JSON path")
    _add_budget_flags(p)
    p.add_argument("--risk", default="lu:15",
                   help="risk model: rd | dt | lu:A | lu-delta | lu-bayes:A")
    p.add_argument("--oracle", action="store_true", default=None,
                   help="cross-check against the exact constrained search")
    p.add_argument("--out", help="also dump the full report as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("traverse", help="walk one realization online")
    common(p)
    p.add_argument("--env", required=True)
    _add_budget_flags(p)
    p.add_argument("--policy", default="rcdp-lu15",
                   help=f"one of {', '.join(ALL_POLICIES)} or a risk spec "
                        "(treated as a budget-aware policy)")
    p.set_defaults(func=cmd_traverse)

    p = sub.add_parser("simulate", help="run the replication grid")
    common(p)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--rows", default="all",
                   help="comma-separated scenario ids (default: all)")
    p.add_argument("--policies", default=",".join(ALL_POLICIES))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--timings", action="store_true", default=None,
                   help="record per-run wall time in replications.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-alpha", help="log-penalty scale sweep")
    common(p)
    p.add_argument("--alphas", type=_floats, default=[5, 15, 30, 45, 60])
    p.add_argument("--true-fractions", type=_floats,
                   default=[DEFAULT_TRUE_FRACTION])
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--delta-max", type=float, default=8.0)
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--seed", type=int, default=20_240_101)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep_alpha)

    p = sub.add_parser("sweep-sensor", help="sensor precision sweep")
    common(p)
    p.add_argument("--precisions", type=_floats, default=[0, 1, 2, 3, 4])
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--delta-max", type=float, default=8.0)
    p.add_argument("--alpha-max", type=float, default=60.0)
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--seed", type=int, default=20_240_202)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep_sensor)

    p = sub.add_parser("compare-reduction",
                       help="two-phase elimination vs the simple ablation")
    common(p)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--width", type=int, default=50)
    p.add_argument("--height", type=int, default=25)
    p.add_argument("--radius", type=float, default=3.0)
    p.add_argument("--delta-max", type=float, default=8.0)
    p.add_argument("--risk", default="lu:15")
    p.add_argument("--replications", type=int, default=20)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_compare_reduction)

    p = sub.add_parser("report", help="SVG plots + markdown summary")
    common(p)
    p.add_argument("--results", required=True,
                   help="directory holding replications.csv / summary.csv")
    p.add_argument("--out", default=None,
                   help="output directory (default: the results directory)")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        argv = _splice_config(argv)
        args = parser.parse_args(argv)
        return args.func(args, parser)
    except SystemExit as exc:   # argparse help/usage paths
        code = exc.code
        return code if isinstance(code, int) else EXIT_CONFIG
    except ConfigError as exc:
        print(f"rcdp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssertionError as exc:
        print(f"rcdp: internal invariant failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (OSError, ValueError) as exc:
        print(f"rcdp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
