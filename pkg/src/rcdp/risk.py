"""Risk scores for ambiguous obstacles, and the sensor/mark machinery.

Every model maps an obstacle to a nonnegative score r_x that gets added
(halved, per intersecting edge) to the traversal cost of edges touching the
obstacle's disk. Scores blow up as the mark approaches 1; instead of letting
inf/nan into the graph we cap at RISK_CAP, which is large enough to dominate
any path cost on the lattice sizes used here while keeping arithmetic finite.

Provided models:

  rd        disamb_cost / (1 - mark)
  dt        disamb_cost + (dist_to_target / (1 - mark)) ** (-ln(1 - mark))
            (note: for dist < 1 the power term is < 1 and this is not
            monotone in the mark; implemented as defined, not "fixed")
  lu        -alpha * ln(1 - mark), alpha fixed or per-obstacle disamb_cost
  lu-bayes  disamb_cost - alpha_x * ln(1 - mark) with alpha_x scaled by a
            posterior-adjusted mark (see posterior_adjust)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RISK_CAP = 1e9
MARK_EPS = 1e-9  # clamp for density evaluation at the mark extremes


# ---------------------------------------------------------------------------
# scalar forms (the contract surface; the vectorized models below must agree)


def risk_rd(disamb_cost, mark):
    if mark >= 1.0:
        return RISK_CAP
    return min(disamb_cost / (1.0 - mark), RISK_CAP)


def risk_dt(disamb_cost, mark, dist_to_target):
    if mark >= 1.0:
        return RISK_CAP
    one_m = 1.0 - mark
    try:
        term = (dist_to_target / one_m) ** (-math.log(one_m))
    except OverflowError:
        return RISK_CAP
    return min(disamb_cost + term, RISK_CAP)


def risk_lu(mark, alpha):
    if mark >= 1.0:
        return RISK_CAP
    return min(-alpha * math.log(1.0 - mark), RISK_CAP)


def risk_lu_bayes(disamb_cost, mark, alpha_x):
    if mark >= 1.0:
        return RISK_CAP
    return min(disamb_cost - alpha_x * math.log(1.0 - mark), RISK_CAP)


def _beta_log_pdf(x, a, b):
    x = np.asarray(x, dtype=np.float64)
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    return log_norm + (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x)


def posterior_adjust(marks, sensor, prior_true):
    """Posterior probability that each obstacle is real, treating the mark as
    a draw from the sensor's true/false Beta densities with prior prior_true.
    Marks are clamped to [MARK_EPS, 1 - MARK_EPS] before density evaluation
    so degenerate 0/1 marks stay finite."""
    m = np.clip(np.asarray(marks, dtype=np.float64), MARK_EPS, 1.0 - MARK_EPS)
    log_t = _beta_log_pdf(m, sensor.a_true, sensor.b_true) + math.log(prior_true)
    log_f = _beta_log_pdf(m, sensor.a_false, sensor.b_false) + math.log1p(-prior_true)
    # stable two-way softmax
    hi = np.maximum(log_t, log_f)
    pt = np.exp(log_t - hi)
    pf = np.exp(log_f - hi)
    return pt / (pt + pf)


# ---------------------------------------------------------------------------
# sensor


@dataclass(frozen=True)
class SensorModel:
    """Beta mark distributions for true and false obstacles."""

    a_true: float = 6.0
    b_true: float = 2.0
    a_false: float = 2.0
    b_false: float = 6.0

    @classmethod
    def from_precision(cls, precision):
        """Precision lam >= 0 maps to Beta(2 + 2 lam, 2) / Beta(2, 2 + 2 lam);
        lam = 2 gives the default pair, lam = 0 an uninformative sensor."""
        if precision < 0:
            raise ValueError("precision must be nonnegative")
        return cls(2.0 + 2.0 * precision, 2.0, 2.0, 2.0 + 2.0 * precision)

    def sample_marks(self, statuses, rng, perfect=False):
        """One mark per obstacle given ground-truth statuses. perfect=True
        short-circuits the sensor and returns the exact 0/1 indicator, which
        is the degenerate regime the offline benchmark comparison uses."""
        statuses = np.asarray(statuses, dtype=bool)
        if perfect:
            return statuses.astype(np.float64)
        marks = np.empty(statuses.shape, dtype=np.float64)
        # draw in id order, one at a time, so the stream is stable under
        # changes to the true/false split
        for i, s in enumerate(statuses):
            if s:
                marks[i] = rng.beta(self.a_true, self.b_true)
            else:
                marks[i] = rng.beta(self.a_false, self.b_false)
        return marks


def sample_marks(statuses, rng, sensor=None, perfect=False):
    return (sensor or SensorModel()).sample_marks(statuses, rng, perfect=perfect)


# ---------------------------------------------------------------------------
# vectorized models (consumed by graph construction)


class RiskModel:
    name = "base"

    def obstacle_risk(self, env):
        raise NotImplementedError

    def _vectors(self, env):
        marks = np.array([o.mark for o in env.obstacles], dtype=np.float64)
        costs = np.array([o.disamb_cost for o in env.obstacles], dtype=np.float64)
        return marks, costs

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class RdRisk(RiskModel):
    name = "rd"

    def obstacle_risk(self, env):
        marks, costs = self._vectors(env)
        one_m = 1.0 - marks
        with np.errstate(divide="ignore", over="ignore"):
            r = np.where(one_m > 0.0, costs / np.where(one_m > 0, one_m, 1.0),
                         np.inf)
        return np.minimum(r, RISK_CAP)


class DtRisk(RiskModel):
    name = "dt"

    def obstacle_risk(self, env):
        marks, costs = self._vectors(env)
        tx, ty = float(env.target[0]), float(env.target[1])
        centers = np.array([o.center for o in env.obstacles], dtype=np.float64)
        if centers.size == 0:
            return np.zeros(0)
        dist = np.hypot(centers[:, 0] - tx, centers[:, 1] - ty)
        one_m = 1.0 - marks
        ok = one_m > 0.0
        safe = np.where(ok, one_m, 1.0)
        with np.errstate(over="ignore", divide="ignore"):
            term = (dist / safe) ** (-np.log(safe))
        r = np.where(ok, costs + term, np.inf)
        return np.minimum(r, RISK_CAP)


class LuRisk(RiskModel):
    def __init__(self, alpha):
        self.alpha = float(alpha)
        self.name = f"lu:{alpha:g}"

    def obstacle_risk(self, env):
        marks, _ = self._vectors(env)
        with np.errstate(divide="ignore"):
            r = -self.alpha * np.log1p(-marks)
        return np.minimum(r, RISK_CAP)


class LuDeltaRisk(RiskModel):
    """lu with per-obstacle scale equal to its own disambiguation cost."""

    name = "lu-delta"

    def obstacle_risk(self, env):
        marks, costs = self._vectors(env)
        with np.errstate(divide="ignore"):
            r = -costs * np.log1p(-marks)
        return np.minimum(r, RISK_CAP)


class LuBayesRisk(RiskModel):
    def __init__(self, alpha_max, sensor=None, prior_true=0.2):
        self.alpha_max = float(alpha_max)
        self.sensor = sensor or SensorModel()
        self.prior_true = float(prior_true)
        self.name = f"lu-bayes:{alpha_max:g}"

    def obstacle_risk(self, env):
        marks, costs = self._vectors(env)
        if marks.size == 0:
            return np.zeros(0)
        adjusted = posterior_adjust(marks, self.sensor, self.prior_true)
        alpha_x = adjusted * self.alpha_max
        with np.errstate(divide="ignore", invalid="ignore"):
            r = costs - alpha_x * np.log1p(-marks)
        r = np.where(marks >= 1.0, np.inf, r)
        return np.minimum(r, RISK_CAP)


class BenchmarkRisk(RiskModel):
    """Full-information surrogate: the only 'risk' left on an obstacle the
    planner knows to be traversable is the disambiguation spend itself."""

    name = "benchmark"

    def obstacle_risk(self, env):
        _, costs = self._vectors(env)
        return costs


def make_risk_model(spec, sensor=None, prior_true=0.2):
    """Parse the CLI risk grammar: rd | dt | lu:<alpha> | lu-delta |
    lu-bayes:<alpha_max>."""
    spec = spec.strip().lower()
    if spec == "rd":
        return RdRisk()
    if spec == "dt":
        return DtRisk()
    if spec == "lu-delta":
        return LuDeltaRisk()
    if spec.startswith("lu-bayes:"):
        return LuBayesRisk(float(spec.split(":", 1)[1]), sensor=sensor,
                           prior_true=prior_true)
    if spec.startswith("lu:"):
        return LuRisk(float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown risk spec {spec!r}")
