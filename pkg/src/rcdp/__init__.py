"""Budget-constrained navigation among uncertain disk obstacles.

The package plans and walks routes on an 8-connected lattice where disk
obstacles may or may not be blocking; paying a disambiguation fee reveals
the truth. Planning runs on a risk-adjusted surrogate graph and respects a
global disambiguation budget via a Lagrangian weight-constrained solver
with two-phase vertex elimination.

Layers, bottom up: `env` (geometry, incidence, surrogate graph), `risk`
(obstacle penalty models and the sensor), `spp` (shortest-path kernels and
the exact constrained oracle), `solver` (the budgeted solve), `policies`
(online traversal with replanning), `spatial`/`experiments` (instance
generators and the Monte Carlo harness), `report` (plots), `cli`.
"""

from .env import (AMBIGUOUS, RESOLVED_FALSE, RESOLVED_TRUE, AdjustedGraph,
                  Environment, EnvironmentFormatError, Lattice, Obstacle,
                  Region, apply_disambiguation, build_lattice,
                  graph_initialize)
from .experiments import (CampaignResult, ScenarioSpec, assign_costs,
                          campaign_rows, run_campaign, sample_environment,
                          sweep_alpha, sweep_sensor)
from .policies import (POLICY_NAMES, TraversalOutcome, evaluate_expected,
                       expected_over_realizations, make_policy,
                       run_benchmark, run_greedy, run_rcdp)
from .report import ReportError, write_report
from .risk import SensorModel, make_risk_model
from .solver import SolveReport, cologr_solve, sne_solve, solve
from .spatial import gen_matern, gen_strauss, gen_uniform
from .spp import PathSolution, shortest_path, wcspp_oracle

__version__ = "0.1.0"

__all__ = [
    "AMBIGUOUS", "RESOLVED_FALSE", "RESOLVED_TRUE", "AdjustedGraph",
    "CampaignResult", "Environment", "EnvironmentFormatError", "Lattice",
    "Obstacle", "PathSolution", "POLICY_NAMES", "Region", "ReportError",
    "ScenarioSpec", "SensorModel", "SolveReport", "TraversalOutcome",
    "apply_disambiguation", "assign_costs", "build_lattice",
    "campaign_rows", "cologr_solve", "evaluate_expected",
    "expected_over_realizations", "gen_matern", "gen_strauss",
    "gen_uniform", "graph_initialize", "make_policy", "make_risk_model",
    "run_benchmark", "run_campaign", "run_greedy", "run_rcdp",
    "sample_environment", "shortest_path", "sne_solve", "solve",
    "sweep_alpha", "sweep_sensor", "wcspp_oracle", "write_report",
    "__version__",
]
