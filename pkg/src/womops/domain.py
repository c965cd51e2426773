"""Shared types, profit evaluators and the customer response function.

The operational setting is a repeating shipment cycle of length
``T = t1 + t2 + t3`` with three phases of regular-customer service:

* Phase 1 (length ``t1``): fast service from the local depot,
* Phase 2 (length ``t2``): demand strategically lost,
* Phase 3 (length ``t3``): usual fulfilment within the declared
  maximum delivery time ``tau``.

Premium orders ship immediately in every phase.  Regular customers rate
the service they actually received against what was declared; the scalar
signal ``theta`` in [0, 1] summarizes that gap and drives premium demand
through the response function ``R(theta) = c1(F) * theta**c2``, where
``c1(F) = N(F) * delta`` is the potential premium market at membership
fee ``F``.

Everything in this module is a pure function of immutable values; all
quantities are double precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DomainError, InvalidParams, InvalidPolicy

#: Absolute tolerance for floating-point comparisons throughout the package.
EPS_NUM = 1e-9


class FeeFamily(enum.Enum):
    """Functional family of the membership count N(F)."""

    LINEAR = "linear"          # N(F) = a - b*F
    LOGARITHMIC = "logarithmic"  # N(F) = a * ln(b - F)


class SignalKind(enum.Enum):
    MDT = "MDT"            # maximum-delivery-time signal, t3 / tau
    NPS = "NPS"            # non-premium-service frequency, (t2 + t3) / T
    WEIGHTED = "weighted"  # convex combination of named signals


@dataclass(frozen=True)
class MarketParams:
    """Exogenous economics and operations constants.

    r: revenue per unit sold; K: fixed cost per shipment; h: holding cost
    per unit per time at the depot; tau: declared maximum delivery time;
    lambda_r: regular demand rate; M: membership duration; f_min/f_max:
    membership-fee bounds.
    """

    r: float
    K: float
    h: float
    tau: float
    lambda_r: float
    M: float
    f_min: float
    f_max: float

    def __post_init__(self) -> None:
        if not (self.r > 0):
            raise InvalidParams("r must be > 0")
        if not (self.K > 0):
            raise InvalidParams("K must be > 0")
        if not (self.h > 0):
            raise InvalidParams("h must be > 0")
        if not (self.tau > 0):
            raise InvalidParams("tau must be > 0")
        if not (self.lambda_r >= 0):
            raise InvalidParams("lambda_r must be >= 0")
        if not (self.M > 0):
            raise InvalidParams("M must be > 0")
        if not (0 <= self.f_min <= self.f_max):
            raise InvalidParams("fee bounds must satisfy 0 <= f_min <= f_max")

    @property
    def demand_threshold(self) -> float:
        """2K / (h tau^2): premium rates above it make the tau constraint slack."""
        return 2.0 * self.K / (self.h * self.tau * self.tau)


@dataclass(frozen=True)
class FeeModel:
    """Membership count family N(F) together with the per-member order rate.

    ``delta`` is the order rate of one premium member, so the potential
    premium market at fee F is ``c1(F) = N(F) * delta``.
    """

    family: FeeFamily
    a: float
    b: float
    delta: float

    def __post_init__(self) -> None:
        if not (self.delta > 0):
            raise InvalidParams("delta must be > 0")

    def in_domain(self, fee: float) -> bool:
        """True when N(fee) is defined and nonnegative.

        The logarithmic family needs b - F >= 1 (so N >= 0; equality means
        the premium service is priced out entirely).
        """
        if self.family is FeeFamily.LINEAR:
            return self.a - self.b * fee >= -EPS_NUM
        return self.b - fee >= 1.0 - EPS_NUM

    def members(self, fee: float) -> float:
        """N(F), the number of premium members at fee F."""
        if not self.in_domain(fee):
            raise DomainError(f"fee {fee} outside the {self.family.value} domain")
        if self.family is FeeFamily.LINEAR:
            return max(self.a - self.b * fee, 0.0)
        return self.a * math.log(max(self.b - fee, 1.0))


@dataclass(frozen=True)
class ShipmentPolicy:
    """Phase lengths of one shipment cycle; ``T = t1 + t2 + t3 > 0``."""

    t1: float
    t2: float
    t3: float

    def __post_init__(self) -> None:
        if self.t1 < 0 or self.t2 < 0 or self.t3 < 0:
            raise InvalidPolicy("phase lengths must be nonnegative")
        if not (self.t1 + self.t2 + self.t3 > 0):
            raise InvalidPolicy("cycle length must be positive")

    @property
    def cycle_length(self) -> float:
        return self.t1 + self.t2 + self.t3

    def max_inventory(self, lambda_p: float, lambda_r: float) -> float:
        """Peak depot stock: premium demand for a full cycle plus Phase-1 regulars."""
        return lambda_p * self.cycle_length + lambda_r * self.t1


@dataclass(frozen=True)
class SignalSpec:
    """Which service signal premium customers react to.

    ``weights`` is only consulted for the WEIGHTED kind: pairs of
    (component kind, weight) with nonnegative weights summing to one.
    """

    kind: SignalKind
    weights: tuple[tuple[SignalKind, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind is SignalKind.WEIGHTED:
            if not self.weights:
                raise InvalidParams("weighted signal needs at least one component")
            if any(k is SignalKind.WEIGHTED for k, _ in self.weights):
                raise InvalidParams("weighted components must be elementary signals")
            if any(w < 0 for _, w in self.weights):
                raise InvalidParams("signal weights must be nonnegative")
            if abs(sum(w for _, w in self.weights) - 1.0) > EPS_NUM:
                raise InvalidParams("signal weights must sum to 1")
        elif self.weights:
            raise InvalidParams("weights are only meaningful for the weighted kind")


MDT = SignalSpec(SignalKind.MDT)
NPS = SignalSpec(SignalKind.NPS)


@dataclass(frozen=True)
class CustomerResponse:
    """Premium customers' sensitivity to the observed signal.

    ``c2 = 0`` means completely insensitive customers (the response is the
    full potential market for any signal); ``c2 = 1`` is linear sensitivity.
    """

    c2: float

    def __post_init__(self) -> None:
        if not (self.c2 >= 0):
            raise InvalidParams("c2 must be >= 0")


def potential_market(fee_model: FeeModel, fee: float) -> float:
    """c1(F) = N(F) * delta, the premium demand rate capturable at fee F."""
    return fee_model.members(fee) * fee_model.delta


def signal(spec: SignalSpec, policy: ShipmentPolicy, tau: float) -> float:
    """Service signal emitted by one cycle of ``policy``; a scalar in [0, 1].

    MDT compares the realized worst regular delivery time against the
    declared one (t3 / tau); NPS is the fraction of the cycle in which
    regular customers do not receive fast service ((t2 + t3) / T).  The
    result lands in [0, 1] because of the preconditions (t3 <= tau for
    MDT, enforced here up to float slack), not by numeric clamping.
    """
    cycle = policy.cycle_length
    if cycle <= 0:
        raise InvalidPolicy("signal undefined for a zero-length cycle")
    if spec.kind is SignalKind.MDT:
        if policy.t3 > tau * (1.0 + 1e-12):
            raise InvalidPolicy(f"t3={policy.t3} exceeds declared tau={tau}")
        return min(policy.t3 / tau, 1.0)
    if spec.kind is SignalKind.NPS:
        return (policy.t2 + policy.t3) / cycle
    return sum(w * signal(SignalSpec(k), policy, tau) for k, w in spec.weights)


def respond(resp: CustomerResponse, fee_model: FeeModel, fee: float,
            theta: float) -> float:
    """Premium demand realized from signal ``theta``: c1(F) * theta**c2.

    0**0 is defined as 1 so that c2 = 0 always returns the full potential
    market.
    """
    if theta < -EPS_NUM or theta > 1.0 + EPS_NUM:
        raise DomainError(f"signal value {theta} outside [0, 1]")
    theta = min(max(theta, 0.0), 1.0)
    return potential_market(fee_model, fee) * theta ** resp.c2


def profit_rate(params: MarketParams, policy: ShipmentPolicy,
                lambda_p: float) -> float:
    """Average profit per unit time of a cycle at a fixed premium rate.

    Revenue from premium demand and from regulars served in Phases 1 and 3,
    less depot holding for premium stock (lambda_p*T/2 on average), holding
    for the Phase-1 regular stock (lambda_r*t1^2/(2T)), and the shipment
    cost K amortized over the cycle.  Membership-fee revenue is NOT
    included here; see :func:`profit_rate_with_fees`.
    """
    if lambda_p < 0:
        raise InvalidParams("lambda_p must be >= 0")
    T = policy.cycle_length
    if T <= 0:
        raise InvalidPolicy("profit undefined for a zero-length cycle")
    return (
        params.r * lambda_p
        + params.r * params.lambda_r * (policy.t1 + policy.t3) / T
        - params.h * lambda_p * T / 2.0
        - params.h * params.lambda_r * policy.t1 ** 2 / (2.0 * T)
        - params.K / T
    )


def profit_rate_with_fees(params: MarketParams, fee_model: FeeModel,
                          policy: ShipmentPolicy, fee: float,
                          lambda_p: float) -> float:
    """Average profit rate including membership-fee revenue.

    Equals :func:`profit_rate` plus ``F * lambda_p / (delta * M)``: each
    member pays F once per membership period M and orders at rate delta,
    so lambda_p/delta members renew continuously.
    """
    if not fee_model.in_domain(fee):
        raise DomainError(f"fee {fee} outside the {fee_model.family.value} domain")
    return (
        profit_rate(params, policy, lambda_p)
        + fee * lambda_p / (fee_model.delta * params.M)
    )
