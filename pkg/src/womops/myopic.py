"""Closed-form shipment policy for a fixed, observed premium demand rate.

An e-tailer that treats the current premium rate as exogenous maximizes
the average profit rate over (t1, t2, t3) subject to t3 <= tau.  The
objective is neither convex nor concave, but dominance arguments leave
only four undominated stationary-point cases:

    I    t1 = t2 = 0, t3 = tau        (tau binding, nothing else)
    II   t1 = t2 = 0, t3 < tau        (tau slack; EOQ-like cycle)
    III  t1 > 0, t2 = 0, t3 = tau     (fast service stretches the cycle)
    IV   t1 > 0, t2 > 0, t3 = tau     (additionally shed regular demand)

Each case has a closed-form candidate; the solver evaluates the feasible
ones and keeps the profit maximizer.  ``grid_search_policy`` is the
brute-force oracle used to validate the closed forms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .domain import EPS_NUM, MarketParams, ShipmentPolicy, profit_rate
from .errors import InvalidGrid, InvalidParams, NoFeasibleCandidate


class PolicyCase(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


#: Deterministic tie-break order when candidates reach equal profit.
_CASE_ORDER = (PolicyCase.I, PolicyCase.II, PolicyCase.III, PolicyCase.IV)


@dataclass(frozen=True)
class PolicySolution:
    """Optimal policy for the demand rate the solve was conditioned on."""

    policy: ShipmentPolicy
    case: PolicyCase
    profit: float
    lambda_p: float
    kkt_residual: float = 0.0


def candidate(case: PolicyCase, params: MarketParams,
              lambda_p: float) -> ShipmentPolicy | None:
    """Closed-form candidate for one case, or None when infeasible.

    Infeasibility (a phase length coming out nonpositive, or a negative
    radicand in case IV) is a value, not an error; it just means the case's
    region does not contain these demand rates.
    """
    if lambda_p < 0:
        raise InvalidParams("lambda_p must be >= 0")
    r, K, h, tau, lam_r = params.r, params.K, params.h, params.tau, params.lambda_r

    if case is PolicyCase.I:
        return ShipmentPolicy(0.0, 0.0, tau)

    if case is PolicyCase.II:
        if lambda_p == 0:
            raise InvalidParams("case II undefined at lambda_p = 0")
        t3 = math.sqrt(2.0 * K / (h * lambda_p))
        return ShipmentPolicy(0.0, 0.0, t3) if t3 < tau else None

    if case is PolicyCase.III:
        t1 = math.sqrt((h * lam_r * tau * tau + 2.0 * K)
                       / (h * (lambda_p + lam_r))) - tau
        return ShipmentPolicy(t1, 0.0, tau) if t1 > 0 else None

    if lambda_p == 0:
        raise InvalidParams("case IV undefined at lambda_p = 0")
    radicand = 2.0 * h * K - 2.0 * h * lam_r * r * tau - lam_r * r * r
    if radicand <= 0:
        return None
    t2 = math.sqrt(radicand / (h * h * lambda_p)) - r / h - tau
    return ShipmentPolicy(r / h, t2, tau) if t2 > 0 else None


def _stationarity_residual(case: PolicyCase, params: MarketParams,
                           policy: ShipmentPolicy, lambda_p: float) -> float:
    """Max |gradient| of the cost over the case's free phase lengths.

    The equivalent minimization objective is
    f = h*lambda_p*T/2 + h*lambda_r*t1^2/(2T) + K/T + r*lambda_r*t2/T.
    Variables at their bounds are covered by multipliers and contribute
    nothing here; case I therefore has no free variable.
    """
    r, K, h, lam_r = params.r, params.K, params.h, params.lambda_r
    t1, t2, T = policy.t1, policy.t2, policy.cycle_length
    common = h * lambda_p / 2.0 - h * lam_r * t1 * t1 / (2.0 * T * T) - K / (T * T)
    df_dt3 = common - r * lam_r * t2 / (T * T)
    df_dt1 = df_dt3 + h * lam_r * t1 / T
    df_dt2 = common + r * lam_r * (t1 + policy.t3) / (T * T)
    if case is PolicyCase.I:
        return 0.0
    if case is PolicyCase.II:
        return abs(df_dt3)
    if case is PolicyCase.III:
        return abs(df_dt1)
    return max(abs(df_dt1), abs(df_dt2))


def solve_policy(params: MarketParams, lambda_p: float) -> PolicySolution:
    """Profit-maximizing policy given the observed premium rate.

    Evaluates all feasible closed-form candidates and returns the best;
    exact ties go to the lowest case id.  At lambda_p = 0 only cases I and
    III exist (the others divide by lambda_p).  Structurally the result
    always satisfies: t1 = 0 implies t2 = 0, and t3 < tau implies t1 = 0;
    moreover t3 < tau exactly when lambda_p > 2K/(h tau^2).
    """
    if lambda_p < 0:
        raise InvalidParams("lambda_p must be >= 0")
    if lambda_p == 0 and params.lambda_r == 0:
        raise InvalidParams("at least one demand rate must be positive")

    best: PolicySolution | None = None
    for case in _CASE_ORDER:
        if lambda_p == 0 and case in (PolicyCase.II, PolicyCase.IV):
            continue
        policy = candidate(case, params, lambda_p)
        if policy is None:
            continue
        profit = profit_rate(params, policy, lambda_p)
        if best is None or profit > best.profit + EPS_NUM:
            best = PolicySolution(
                policy, case, profit, lambda_p,
                _stationarity_residual(case, params, policy, lambda_p))
    if best is None:
        raise NoFeasibleCandidate("no feasible candidate; tau must be positive")
    return best


@dataclass(frozen=True)
class GridSpec:
    """Brute-force grid: uniform ``step`` over [0, t_max] per phase.

    ``t_max = None`` derives the bound max(tau, 2*sqrt(2K/(h*lambda_p)))
    that provably encloses every candidate optimum.
    """

    step: float
    t_max: float | None = None

    def resolve_t_max(self, params: MarketParams, lambda_p: float) -> float:
        # At lambda_p = 0 only the t3 = tau cases exist and the fast phase
        # is bounded by sqrt(2K/(h*lambda_r)); otherwise lost-sales cycles
        # can stretch to sqrt(2K/(h*lambda_p)).
        rate = lambda_p if lambda_p > 0 else params.lambda_r
        required = max(params.tau,
                       2.0 * math.sqrt(2.0 * params.K
                                       / (params.h * max(rate, EPS_NUM))))
        if self.t_max is None:
            return required
        if self.t_max < required - EPS_NUM:
            raise InvalidGrid(f"t_max={self.t_max} below required {required:.6g}")
        return self.t_max


def _classify(policy: ShipmentPolicy, tau: float, slack: float) -> PolicyCase:
    has_t1 = policy.t1 > slack
    has_t2 = policy.t2 > slack
    if has_t1 and has_t2:
        return PolicyCase.IV
    if has_t1:
        return PolicyCase.III
    return PolicyCase.I if policy.t3 >= tau - slack else PolicyCase.II


def grid_search_policy(params: MarketParams, lambda_p: float,
                       grid: GridSpec) -> PolicySolution:
    """Exhaustive grid argmax of the profit rate; the validation oracle.

    The search enumerates (t1, T) pairs and, for each, the largest grid
    t3 compatible with t3 <= tau and 0 <= t2 <= t_max.  Because the profit
    is nondecreasing in t3 at fixed (t1, T) (its only t3 term is
    +r*lambda_r*t3/T), that point dominates every other (t2, t3) split of
    the same cycle, so the reduced argmax equals the full 3-d grid argmax.
    The result is within O(step) of the true optimum.
    """
    if grid.step <= 0:
        raise InvalidGrid("step must be > 0")
    if lambda_p < 0:
        raise InvalidParams("lambda_p must be >= 0")
    step = grid.step
    t_max = grid.resolve_t_max(params, lambda_p)
    r, K, h, lam_r = params.r, params.K, params.h, params.lambda_r

    n_phase = int(math.floor(t_max / step + 1e-9))
    t3_cap = min(params.tau, t_max)
    n_t3 = int(math.floor(t3_cap / step + 1e-9))
    if n_phase < 1 or n_t3 < 1:
        raise InvalidGrid("grid too coarse for the bounds")

    t1_axis = np.arange(0, n_phase + 1) * step
    # T ranges over all attainable sums; exclude T = 0.
    T_axis = np.arange(1, 2 * n_phase + n_t3 + 1) * step

    best_val = -math.inf
    best = (0.0, 0.0, 0.0)
    chunk = max(1, int(1e6 // max(T_axis.size, 1)))
    for lo in range(0, t1_axis.size, chunk):
        t1 = t1_axis[lo:lo + chunk][:, None]
        T = T_axis[None, :]
        # Largest feasible t3 on the grid for each (t1, T); no-operation
        # cycles (t3 = 0) are outside the policy domain and stay excluded.
        t3 = np.minimum(n_t3 * step, T - t1)
        t2 = T - t1 - t3
        feasible = (t3 > 0) & (t2 <= t_max * (1 + 1e-12))
        with np.errstate(invalid="ignore"):
            profit = (r * lambda_p
                      + r * lam_r * (t1 + t3) / T
                      - h * lambda_p * T / 2.0
                      - h * lam_r * t1 * t1 / (2.0 * T)
                      - K / T)
        profit = np.where(feasible, profit, -np.inf)
        flat = int(np.argmax(profit))
        val = float(profit.flat[flat])
        if val > best_val:
            i, j = np.unravel_index(flat, profit.shape)
            best_val = val
            best = (float(t1[i, 0]), float(t2[i, j]), float(t3[i, j]))

    if not math.isfinite(best_val):
        raise InvalidGrid("no feasible grid point")
    policy = ShipmentPolicy(best[0], max(best[1], 0.0), best[2])
    case = _classify(policy, params.tau, step / 2.0)
    return PolicySolution(policy, case, best_val, lambda_p)
