"""Demand/operations feedback loop and its long-run classification.

Without knowledge of the feedback, the e-tailer re-solves the shipment
policy for whatever premium rate was last observed; regular customers
rate the resulting service, and premium demand responds:

    policy_k = argmax profit | lambda_k      (closed-form solve)
    lambda_{k+1} = R(signal(policy_k))

Under the maximum-delivery-time signal the long-run behavior is fully
characterized analytically (see :func:`predict_long_run`): the premium
rate either reaches the whole potential market, converges to an interior
limit, or settles into a two-point cycle, depending on the potential
market size and the sensitivity exponent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .domain import (CustomerResponse, FeeModel, MarketParams, ShipmentPolicy,
                     SignalKind, SignalSpec, potential_market,
                     profit_rate_with_fees, respond, signal)
from .errors import InvalidParams, UnsupportedSignal
from .myopic import solve_policy


class LongRunKind(enum.Enum):
    CONVERGED_TO_POTENTIAL = "converged-to-potential"
    CONVERGED_INTERIOR = "converged-interior"
    CYCLE2 = "cycle-2"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class LongRunClass:
    """Long-run classification: a limit value, or a (high, low) cycle pair."""

    kind: LongRunKind
    values: tuple[float, ...]
    tol: float

    @property
    def limit(self) -> float:
        if self.kind not in (LongRunKind.CONVERGED_TO_POTENTIAL,
                             LongRunKind.CONVERGED_INTERIOR):
            raise ValueError("limit only defined for converged classifications")
        return self.values[0]

    @property
    def cycle(self) -> tuple[float, float]:
        if self.kind is not LongRunKind.CYCLE2:
            raise ValueError("cycle only defined for two-point cycles")
        return (self.values[0], self.values[1])


@dataclass(frozen=True)
class TracePoint:
    k: int
    lambda_p: float
    policy: ShipmentPolicy
    profit: float


@dataclass(frozen=True)
class DynamicsTrace:
    """Iteration-indexed history; index 0 holds the seed before any response.

    ``profit`` at each point is the realized, fee-inclusive profit rate of
    that iteration's policy at that iteration's demand.  ``prediction``
    carries the analytic long-run characterization when one applies (MDT
    signal), independent of what the finite trace shows.
    """

    points: tuple[TracePoint, ...]
    classification: LongRunClass
    prediction: LongRunClass | None = None

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(p.lambda_p for p in self.points)


def step(params: MarketParams, fee_model: FeeModel, resp: CustomerResponse,
         spec: SignalSpec, fee: float,
         lambda_p: float) -> tuple[ShipmentPolicy, float]:
    """One feedback round: solve for lambda_p, emit the signal, respond."""
    c1 = potential_market(fee_model, fee)
    if lambda_p < -1e-12 or lambda_p > c1 * (1 + 1e-12) + 1e-12:
        raise InvalidParams(f"lambda_p={lambda_p} outside [0, c1(F)={c1}]")
    policy = solve_policy(params, min(max(lambda_p, 0.0), max(c1, 0.0))).policy
    theta = signal(spec, policy, params.tau)
    return policy, respond(resp, fee_model, fee, theta)


def _classify_sequence(lambdas: list[float], c1: float,
                       tol: float) -> LongRunClass:
    """Earliest stopping pattern in a lambda sequence.

    Convergence: |lambda_{k+1} - lambda_k| < tol.  Two-point cycle:
    lambda_{k+2} returns to lambda_k within tol, the excursion
    |lambda_{k+1} - lambda_k| is well separated from tol, and the cycle
    persists (lambda_{k+3} returns to lambda_{k+1} as well).  The
    separation and persistence guards keep damped oscillations -- whose
    two-apart differences shrink below tol while consecutive differences
    are still above it -- out of the cycle branch.  Convergence is
    checked first at each index.
    """
    n = len(lambdas)
    for k in range(n - 1):
        if abs(lambdas[k + 1] - lambdas[k]) < tol:
            limit = lambdas[k + 1]
            if abs(limit - c1) <= 10.0 * tol:
                return LongRunClass(LongRunKind.CONVERGED_TO_POTENTIAL,
                                    (c1,), tol)
            return LongRunClass(LongRunKind.CONVERGED_INTERIOR, (limit,), tol)
        if (k + 3 < n
                and abs(lambdas[k + 2] - lambdas[k]) < tol
                and abs(lambdas[k + 3] - lambdas[k + 1]) < tol
                and abs(lambdas[k + 1] - lambdas[k]) >= 10.0 * tol):
            pair = (lambdas[k + 2], lambdas[k + 3])
            return LongRunClass(LongRunKind.CYCLE2,
                                (max(pair), min(pair)), tol)
    return LongRunClass(LongRunKind.UNDETERMINED, (), tol)


def simulate(params: MarketParams, fee_model: FeeModel, resp: CustomerResponse,
             spec: SignalSpec, fee: float, seed_lambda_p: float | None = None,
             max_iters: int = 200, tol: float = 1e-4,
             min_iters: int = 0) -> DynamicsTrace:
    """Iterate the feedback loop and classify its long-run behavior.

    Stops early once the sequence has converged (successive change below
    ``tol``) or revisits itself two steps apart (two-point cycle), but
    never before ``min_iters`` responses have been generated -- table
    reproduction uses that to emit fixed-length traces.  The seed defaults
    to the potential market c1(F).
    """
    if max_iters < 0:
        raise InvalidParams("max_iters must be >= 0")
    if tol < 0:
        raise InvalidParams("tol must be >= 0")
    c1 = potential_market(fee_model, fee)
    lam = c1 if seed_lambda_p is None else float(seed_lambda_p)

    lambdas: list[float] = []
    points: list[TracePoint] = []

    lambdas.append(lam)
    policy, nxt = step(params, fee_model, resp, spec, fee, lam)
    points.append(TracePoint(0, lam, policy,
                             profit_rate_with_fees(params, fee_model, policy,
                                                   fee, lam)))
    classification = LongRunClass(LongRunKind.UNDETERMINED, (), tol)
    for k in range(1, max_iters + 1):
        lam = nxt
        lambdas.append(lam)
        policy, nxt = step(params, fee_model, resp, spec, fee, lam)
        points.append(TracePoint(k, lam, policy,
                                 profit_rate_with_fees(params, fee_model,
                                                       policy, fee, lam)))
        classification = _classify_sequence(lambdas, c1, tol)
        if classification.kind is not LongRunKind.UNDETERMINED and k >= min_iters:
            break

    prediction = None
    if spec.kind is SignalKind.MDT:
        prediction = predict_long_run(params, fee_model, resp, spec, fee)
    return DynamicsTrace(tuple(points), classification, prediction)


def predict_long_run(params: MarketParams, fee_model: FeeModel,
                     resp: CustomerResponse, spec: SignalSpec,
                     fee: float) -> LongRunClass:
    """Analytic long-run premium rate under the MDT signal.

    With bound = 2K/(h tau^2) and w = bound / c1(F):

    * c1(F) <= bound: every policy realizes the declared delivery time, the
      signal stays at 1, and demand reaches the full potential c1(F).
    * c1(F) > bound, c2 >= 2: the reaction overshoots; demand alternates
      between c1(F) and c1(F) * w**(c2/2).
    * c1(F) > bound, c2 < 2: the map contracts in log space (slope -c2/2)
      and demand converges linearly to c1(F) * w**(c2/(c2+2)).

    c2 = 0 degenerates to the full potential in one step.
    """
    if spec.kind is not SignalKind.MDT:
        raise UnsupportedSignal("analytic prediction covers the MDT signal only")
    c1 = potential_market(fee_model, fee)
    bound = params.demand_threshold
    if c1 <= bound or resp.c2 == 0:
        return LongRunClass(LongRunKind.CONVERGED_TO_POTENTIAL, (c1,), 0.0)
    w = bound / c1
    if resp.c2 >= 2:
        low = c1 * w ** (resp.c2 / 2.0)
        return LongRunClass(LongRunKind.CYCLE2, (c1, low), 0.0)
    limit = c1 * w ** (resp.c2 / (resp.c2 + 2.0))
    return LongRunClass(LongRunKind.CONVERGED_INTERIOR, (limit,), 0.0)


def trace_rows(trace: DynamicsTrace) -> list[tuple[int, float, float, float, float, float]]:
    """Trace as (iter, lambda_p, t1, t2, t3, profit) rows for CSV export."""
    return [(p.k, p.lambda_p, p.policy.t1, p.policy.t2, p.policy.t3, p.profit)
            for p in trace.points]
