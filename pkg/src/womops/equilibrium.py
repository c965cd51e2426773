"""Joint fee and shipment-policy optimization under stationary feedback.

Here the e-tailer knows how service signals drive premium demand and
picks (t1, t3, T, F) so that the demand the policy *creates* is the
demand it was built for: the stationarity constraint lambda_p =
R(signal) is substituted into the objective, reducing the problem to a
box-constrained search over (t1, t2, t3, F) with t2 = T - t1 - t3 >= 0.

The landscape is neither convex nor concave, so the solver runs a dense
deterministic coarse grid (augmented with the t2 = 0 plane, where most
optima live), keeps the best well-separated seeds and polishes each with
Nelder-Mead.  For the linear-fee, unit-sensitivity, delivery-time-signal
regime with t3 < tau the optimum also has closed forms
(:func:`closed_form_t3`), used as independent cross-checks of the
numeric path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .domain import (FeeFamily, FeeModel, MarketParams, ShipmentPolicy,
                     SignalKind, SignalSpec, CustomerResponse,
                     potential_market, profit_rate_with_fees, respond, signal)
from .dynamics import LongRunKind, predict_long_run, simulate
from .errors import (InfeasibleProblem, InvalidParams, RegimeViolation,
                     UnsupportedSignal)
from .myopic import solve_policy

_SNAP = 5e-6          # polish results this close to a bound are snapped onto it
_PROFIT_TIE = 1e-6    # profits closer than this are ties (smaller F, then T wins)


@dataclass(frozen=True)
class SearchSpec:
    """Deterministic search settings: grid density, seed count, polish tolerance."""

    n_time: int = 40
    n_fee: int = 30
    top_n: int = 8
    polish_tol: float = 1e-8
    max_polish_evals: int = 4000

    def __post_init__(self) -> None:
        if self.n_time < 2 or self.n_fee < 1 or self.top_n < 1:
            raise InvalidParams("grid resolutions must be positive")
        if self.polish_tol <= 0:
            raise InvalidParams("polish_tol must be > 0")


@dataclass(frozen=True)
class EquilibriumProblem:
    params: MarketParams
    fee_model: FeeModel
    resp: CustomerResponse
    signal_spec: SignalSpec

    def __post_init__(self) -> None:
        # The fee family must be defined (N >= 0) over the whole fee box;
        # N is nonincreasing in F for both families, so the endpoints decide.
        for fee in (self.params.f_min, self.params.f_max):
            if not self.fee_model.in_domain(fee):
                raise InvalidParams(
                    f"fee bound {fee} outside the {self.fee_model.family.value} domain")


class Branch(enum.Enum):
    NUMERIC_INTERIOR = "numeric-interior"
    NUMERIC_BOUNDARY = "numeric-boundary"
    CLOSED_FORM_INTERIOR_FEE = "closed-form-interior-fee"
    CLOSED_FORM_BOUNDARY_FEE = "closed-form-boundary-fee"


@dataclass(frozen=True)
class EquilibriumSolution:
    """Optimal cycle, fee, and the stationary demand they induce."""

    policy: ShipmentPolicy
    fee: float
    lambda_p: float
    profit: float
    branch: Branch

    @property
    def cycle_length(self) -> float:
        return self.policy.cycle_length


def search_cap(problem: EquilibriumProblem) -> float:
    """Upper bound on any phase length that provably encloses the optima.

    The last term is the cycle-length bound T <= 2r/h + 2F/(h delta M)
    implied by stationarity whenever premium demand is present.
    """
    p = problem.params
    cap = max(3.0 * p.tau,
              2.0 * p.r / p.h
              + 2.0 * p.f_max / (p.h * problem.fee_model.delta * p.M))
    if p.lambda_r > 0:
        cap = max(cap, 3.0 * math.sqrt(2.0 * p.K / (p.h * p.lambda_r)))
    return cap


def _theta_kernel(spec: SignalSpec, t2, t3, T, tau):
    """Signal value(s) for phase arrays; works on scalars and ndarrays."""
    if spec.kind is SignalKind.MDT:
        return np.minimum(t3 / tau, 1.0)
    if spec.kind is SignalKind.NPS:
        return (t2 + t3) / T
    out = 0.0
    for kind, w in spec.weights:
        out = out + w * _theta_kernel(SignalSpec(kind), t2, t3, T, tau)
    return out


def _members_kernel(fee_model: FeeModel, F):
    if fee_model.family is FeeFamily.LINEAR:
        return np.maximum(fee_model.a - fee_model.b * F, 0.0)
    return fee_model.a * np.log(np.maximum(fee_model.b - F, 1.0))


def _profit_kernel(problem: EquilibriumProblem, t1, t2, t3, F):
    """Vectorized fee-inclusive profit with lambda_p = R(theta) substituted."""
    p = problem.params
    fm = problem.fee_model
    T = t1 + t2 + t3
    theta = _theta_kernel(problem.signal_spec, t2, t3, T, p.tau)
    lam = _members_kernel(fm, F) * fm.delta * np.power(theta, problem.resp.c2)
    return (lam * (p.r + F / (fm.delta * p.M) - p.h * T / 2.0)
            + p.r * p.lambda_r * (t1 + t3) / T
            - p.h * p.lambda_r * t1 * t1 / (2.0 * T)
            - p.K / T)


def _theta_scalar(spec: SignalSpec, t2: float, t3: float, T: float,
                  tau: float) -> float:
    if spec.kind is SignalKind.MDT:
        return min(t3 / tau, 1.0)
    if spec.kind is SignalKind.NPS:
        return (t2 + t3) / T
    return sum(w * _theta_scalar(SignalSpec(k), t2, t3, T, tau)
               for k, w in spec.weights)


def _neg_profit(problem: EquilibriumProblem, t1: float, t2: float, t3: float,
                fee: float) -> float:
    """Scalar objective for the polish phase (minimized)."""
    if t1 < 0 or t2 < 0 or t3 < 0:
        return math.inf
    T = t1 + t2 + t3
    if T <= 0:
        return math.inf
    p = problem.params
    fm = problem.fee_model
    theta = _theta_scalar(problem.signal_spec, t2, t3, T, p.tau)
    if fm.family is FeeFamily.LINEAR:
        members = max(fm.a - fm.b * fee, 0.0)
    else:
        members = fm.a * math.log(max(fm.b - fee, 1.0))
    lam = members * fm.delta * theta ** problem.resp.c2
    profit = (lam * (p.r + fee / (fm.delta * p.M) - p.h * T / 2.0)
              + p.r * p.lambda_r * (t1 + t3) / T
              - p.h * p.lambda_r * t1 * t1 / (2.0 * T)
              - p.K / T)
    return -profit


def _candidate_grid(problem: EquilibriumProblem, search: SearchSpec):
    """Coarse candidate points (t1, t2, t3, F) with their profits, flattened."""
    p = problem.params
    cap = search_cap(problem)
    t1g = np.linspace(0.0, cap, search.n_time)
    t3g = np.linspace(0.0, p.tau, search.n_time)[1:]
    Tg = np.linspace(0.0, cap, search.n_time)[1:]
    if p.f_max > p.f_min:
        Fg = np.linspace(p.f_min, p.f_max, search.n_fee)
    else:
        Fg = np.array([p.f_min])

    # Dense box over (t1, t3, T) with the cycle capped at t_cap, plus the
    # t2 = 0 plane T = t1 + t3 where the structural results put most optima.
    A, B, C = np.meshgrid(t1g, t3g, Tg, indexing="ij")
    mask = C - A - B >= -1e-12
    plane_t1 = np.repeat(t1g, t3g.size)
    plane_t3 = np.tile(t3g, t1g.size)
    plane_keep = plane_t1 + plane_t3 <= cap + 1e-12
    t1b = np.concatenate([A[mask], plane_t1[plane_keep]])
    t3b = np.concatenate([B[mask], plane_t3[plane_keep]])
    Tb = np.concatenate([C[mask], (plane_t1 + plane_t3)[plane_keep]])
    t2b = np.maximum(Tb - t1b - t3b, 0.0)

    t1f = np.repeat(t1b[None, :], Fg.size, axis=0).ravel()
    t2f = np.repeat(t2b[None, :], Fg.size, axis=0).ravel()
    t3f = np.repeat(t3b[None, :], Fg.size, axis=0).ravel()
    Ff = np.repeat(Fg[:, None], t1b.size, axis=1).ravel()
    prof = _profit_kernel(problem, t1f, t2f, t3f, Ff)
    return t1f, t2f, t3f, Ff, prof


def _select_seeds(t1f, t2f, t3f, Ff, prof, search: SearchSpec,
                  cap: float, tau: float, fee_span: float):
    """Best candidates, skipping near-duplicates of already accepted seeds.

    Separation below one grid cell in every coordinate counts as a
    duplicate; this keeps the polish seeds spread over distinct basins.
    Fully deterministic: candidates are visited in (profit, F, T, t1)
    order.
    """
    Tf = t1f + t2f + t3f
    order = np.lexsort((t1f, Tf, Ff, -prof))
    dt = cap / (search.n_time - 1)
    d3 = tau / (search.n_time - 1)
    df = fee_span / max(search.n_fee - 1, 1)
    seeds: list[tuple[float, float, float, float]] = []
    for idx in order:
        if not math.isfinite(prof[idx]):
            break
        cand = (float(t1f[idx]), float(t2f[idx]), float(t3f[idx]), float(Ff[idx]))
        dup = any(abs(cand[0] - s[0]) < dt and abs(cand[1] - s[1]) < dt
                  and abs(cand[2] - s[2]) < d3
                  and abs(cand[3] - s[3]) < df + 1e-12
                  for s in seeds)
        if not dup:
            seeds.append(cand)
        if len(seeds) >= search.top_n:
            break
    return seeds


def _better(a: tuple[float, ...], b: tuple[float, ...] | None) -> bool:
    """Deterministic comparator: profit, then smaller F, then T, then t1."""
    if b is None:
        return True
    if a[0] > b[0] + _PROFIT_TIE:
        return True
    if a[0] < b[0] - _PROFIT_TIE:
        return False
    return (a[1], a[2], a[3]) < (b[1], b[2], b[3])


def _snap(value: float, *bounds: float) -> float:
    for bound in bounds:
        if abs(value - bound) < _SNAP:
            return bound
    return value


def solve_equilibrium(problem: EquilibriumProblem,
                      search: SearchSpec = SearchSpec()) -> EquilibriumSolution:
    """Best stationary (policy, fee) pair; deterministic for a fixed search.

    Grid seeds are polished with Nelder-Mead on (t1, t2, t3, F) inside the
    box; the best polished point wins, with ties (within 1e-6 in profit)
    resolved toward the smaller fee, then the shorter cycle.  Degenerate
    optima with lambda_p = 0 (premium service priced out at F = f_max) are
    legitimate outputs.
    """
    p = problem.params
    cap = search_cap(problem)
    t1f, t2f, t3f, Ff, prof = _candidate_grid(problem, search)
    if not bool(np.any(np.isfinite(prof))):
        raise InfeasibleProblem("no feasible cycle in the search box")
    seeds = _select_seeds(t1f, t2f, t3f, Ff, prof, search, cap, p.tau,
                          max(p.f_max - p.f_min, 1.0))

    pinned_fee = p.f_max <= p.f_min
    best_key: tuple[float, float, float, float] | None = None
    best_x: tuple[float, float, float, float] | None = None

    def objective(t1: float, t2: float, t3: float, fee: float) -> float:
        # Cycles beyond the search cap are outside the box; in the priced-
        # out regime the profit otherwise climbs forever toward the
        # unattained stretched-cycle supremum.
        if t1 + t2 + t3 > cap:
            return math.inf
        return _neg_profit(problem, t1, t2, t3, fee)

    def consider(x: tuple[float, float, float, float]) -> None:
        nonlocal best_key, best_x
        t1, t2, t3, fee = x
        if t3 <= 0 or t1 + t2 + t3 <= 0:
            return
        pi = -objective(t1, t2, t3, fee)
        if not math.isfinite(pi):
            return
        key = (pi, fee, t1 + t2 + t3, t1)
        if _better(key, best_key):
            best_key, best_x = key, x

    options = dict(xatol=1e-9, fatol=search.polish_tol,
                   maxfev=search.max_polish_evals,
                   maxiter=search.max_polish_evals)
    for seed in seeds:
        if pinned_fee:
            res = minimize(
                lambda y: objective(y[0], y[1], y[2], p.f_min),
                list(seed[:3]), method="Nelder-Mead",
                bounds=[(0.0, cap), (0.0, cap), (0.0, p.tau)],
                options=options)
            raw = (float(res.x[0]), float(res.x[1]), float(res.x[2]), p.f_min)
        else:
            res = minimize(
                lambda y: objective(y[0], y[1], y[2], y[3]),
                list(seed), method="Nelder-Mead",
                bounds=[(0.0, cap), (0.0, cap), (0.0, p.tau),
                        (p.f_min, p.f_max)],
                options=options)
            raw = tuple(float(v) for v in res.x)
        consider(raw)
        snapped = (_snap(raw[0], 0.0), _snap(raw[1], 0.0),
                   _snap(raw[2], p.tau), _snap(raw[3], p.f_min, p.f_max))
        if snapped != raw:
            consider(snapped)

    if best_x is None:
        raise InfeasibleProblem("polish produced no feasible point")

    t1, t2, t3, fee = best_x
    policy = ShipmentPolicy(t1, t2, t3)
    theta = signal(problem.signal_spec, policy, p.tau)
    lam = respond(problem.resp, problem.fee_model, fee, theta)
    profit = profit_rate_with_fees(p, problem.fee_model, policy, fee, lam)
    fee_span = max(p.f_max - p.f_min, 1.0)
    on_bound = min(fee - p.f_min, p.f_max - fee) <= 1e-6 * fee_span
    branch = Branch.NUMERIC_BOUNDARY if on_bound else Branch.NUMERIC_INTERIOR
    return EquilibriumSolution(policy, fee, lam, profit, branch)


def equilibrium_residual(problem: EquilibriumProblem,
                         solution: EquilibriumSolution) -> float:
    """|lambda_p - R(signal(policy))|: stationarity of the demand constraint."""
    theta = signal(problem.signal_spec, solution.policy, problem.params.tau)
    return abs(solution.lambda_p
               - respond(problem.resp, problem.fee_model, solution.fee, theta))


class FeeRegime(enum.Enum):
    """Which fee-bound case the closed forms assume."""

    INTERIOR = "interior"
    BOUNDARY = "boundary"


def closed_form_t3(problem: EquilibriumProblem, regime: FeeRegime,
                   fee: float | None = None) -> float:
    """Closed-form Phase-3 length for the t3 < tau regime.

    Applies to the delivery-time signal with unit sensitivity (c2 = 1),
    where structure forces t1 = 0 and T = t3.  Eliminating lambda_p turns
    stationarity in t3 into the cubic

        h t3^3 - (r + F/(delta M)) t3^2 - K tau / c1(F) = 0

    (BOUNDARY regime: F pinned at a fee bound; exactly one positive root).
    With the fee interior and a linear fee family, fee stationarity
    additionally gives F*(t3) = (a - b delta M r)/(2b) + delta M h t3/4,
    and substituting it yields the quartic

        3 u^4 - 8 G u^3 + 4 G^2 u^2 + C = 0,
        u = b delta M h t3,  G = a + b delta M r,
        C = 16 b^3 delta^2 M^3 h^2 K tau,

    whose admissible root (0 < t3 < tau, f_min < F* < f_max) with the
    larger profit is returned.  RegimeViolation signals that a t3 = tau or
    fee-boundary regime applies instead.
    """
    p = problem.params
    fm = problem.fee_model
    if problem.signal_spec.kind is not SignalKind.MDT:
        raise UnsupportedSignal("closed forms cover the MDT signal only")
    if problem.resp.c2 != 1:
        raise UnsupportedSignal("closed forms require unit sensitivity (c2 = 1)")

    if regime is FeeRegime.BOUNDARY:
        if fee is None:
            raise InvalidParams("boundary regime needs the pinned fee value")
        c1 = potential_market(fm, fee)
        if c1 <= 0:
            raise RegimeViolation("no premium market at this fee; t3 = tau applies")
        roots = np.roots([p.h, -(p.r + fee / (fm.delta * p.M)), 0.0,
                          -p.K * p.tau / c1])
        real = [float(z.real) for z in roots
                if abs(z.imag) < 1e-9 * max(1.0, abs(z)) and z.real > 0]
        if not real:
            raise RegimeViolation("stationarity cubic has no positive root")
        t3 = max(real)
        if t3 >= p.tau:
            raise RegimeViolation("root exceeds tau; the t3 = tau regime applies")
        return t3

    if fm.family is not FeeFamily.LINEAR:
        raise UnsupportedSignal("interior-fee closed form requires the linear family")
    a, b, delta, M, h = fm.a, fm.b, fm.delta, p.M, p.h
    G = a + b * delta * M * p.r
    C = 16.0 * b ** 3 * delta ** 2 * M ** 3 * h ** 2 * p.K * p.tau
    roots = np.roots([3.0, -8.0 * G, 4.0 * G * G, 0.0, C])
    scale = b * delta * M * h

    def is_local_max(t3: float, fee: float) -> bool:
        # Hessian of the substituted objective at the stationary point;
        # both axes are always concave, so the determinant decides between
        # a maximum and a saddle.
        d_t3t3 = -(a - b * fee) * delta * h / p.tau - 2.0 * p.K / t3 ** 3
        d_ff = -2.0 * b * t3 / (p.tau * M)
        d_t3f = (delta / p.tau) * (-b * (p.r + fee / (delta * M) - h * t3)
                                   + (a - b * fee) / (delta * M))
        return d_t3t3 * d_ff - d_t3f * d_t3f > 0

    candidates = []
    for z in roots:
        if abs(z.imag) > 1e-7 * max(1.0, abs(z)):
            continue
        t3 = float(z.real) / scale
        if not (0.0 < t3 < p.tau):
            continue
        fee_star = interior_fee_for_t3(problem, t3)
        if not (p.f_min < fee_star < p.f_max):
            continue
        if not is_local_max(t3, fee_star):
            continue
        candidates.append((-_neg_profit(problem, 0.0, 0.0, t3, fee_star), t3))
    if not candidates:
        raise RegimeViolation(
            "no admissible interior-fee maximum; a boundary regime applies")
    return max(candidates)[1]


def interior_fee_for_t3(problem: EquilibriumProblem, t3: float) -> float:
    """Fee stationarity partner of the interior-fee closed form."""
    fm = problem.fee_model
    if fm.family is not FeeFamily.LINEAR:
        raise UnsupportedSignal("interior-fee closed form requires the linear family")
    p = problem.params
    return ((fm.a - fm.b * fm.delta * p.M * p.r) / (2.0 * fm.b)
            + fm.delta * p.M * p.h * t3 / 4.0)


@dataclass(frozen=True)
class StructureReport:
    """Structural checks on an equilibrium solution.

    (a) a cycle without fast service has no lost-sales phase either,
    (b) if the realized delivery time beats the declared one, there is no
        fast service, and
    (c) the fast-service phase never exceeds r/h.

    Under the MDT signal all three are required; under NPS the perception
    driver can legitimately break (a)/(b), so only (c) is required and the
    rest are reported as findings.
    """

    no_phase2_without_phase1: bool
    no_phase1_when_t3_short: bool
    phase1_within_margin_bound: bool
    required: tuple[str, ...]
    findings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        checks = {
            "no_phase2_without_phase1": self.no_phase2_without_phase1,
            "no_phase1_when_t3_short": self.no_phase1_when_t3_short,
            "phase1_within_margin_bound": self.phase1_within_margin_bound,
        }
        return all(checks[name] for name in self.required)


def check_structure(problem: EquilibriumProblem,
                    solution: EquilibriumSolution,
                    tol: float = 1e-6) -> StructureReport:
    p = problem.params
    pol = solution.policy
    a = not (pol.t1 <= tol and pol.t2 > tol)
    b = not (pol.t3 < p.tau - tol and pol.t1 > tol)
    c = pol.t1 <= p.r / p.h + tol
    if problem.signal_spec.kind is SignalKind.MDT:
        required = ("no_phase2_without_phase1", "no_phase1_when_t3_short",
                    "phase1_within_margin_bound")
    else:
        required = ("phase1_within_margin_bound",)
    findings = tuple(name for name, val in (
        ("no_phase2_without_phase1", a),
        ("no_phase1_when_t3_short", b),
        ("phase1_within_margin_bound", c),
    ) if not val)
    return StructureReport(a, b, c, required, findings)


class RecoveryClass(enum.Enum):
    OPT_EQ = "Opt-Eq"
    NON_OPT_EQ = "Non-opt-Eq"
    CYCLES = "Cycles"


@dataclass(frozen=True)
class RecoveryReport:
    """Outcome of handing only the optimal fee to a feedback-blind e-tailer.

    ``shortfall_vs_initial`` compares the long-run profit against the
    first-period profit at the stationary-equilibrium demand the process
    was seeded with (the profit the e-tailer sees before the feedback
    erodes it).
    """

    kind: RecoveryClass
    long_run_lambda: float | None
    long_run_profit: float | None
    initial_profit: float
    shortfall_vs_initial: float | None
    lambda_bar_predicted: float | None
    lambda_eq: float
    potential_bound_binding: bool | None
    demand_bound_ok: bool | None

    @property
    def label(self) -> str:
        return self.kind.value


def recoverability(problem: EquilibriumProblem, solution: EquilibriumSolution,
                   sim_tol: float = 1e-4, match_tol: float = 1e-3,
                   max_iters: int = 500) -> RecoveryReport:
    """Classify whether the fee alone recovers the stationary optimum.

    Runs the feedback loop at the optimal fee from a seed equal to the
    potential market and labels the outcome Opt-Eq (long-run demand and
    profit match the stationary optimum within ``match_tol`` relative),
    Non-opt-Eq (converged elsewhere) or Cycles.  For the MDT signal with
    c2 = 1 it also evaluates the analytic long-run demand bound
    lambda_bar <= lambda_eq, with equality exactly when the potential
    market fits under 2K/(h tau^2).
    """
    p = problem.params
    trace = simulate(p, problem.fee_model, problem.resp, problem.signal_spec,
                     solution.fee, max_iters=max_iters, tol=sim_tol)
    cls = trace.classification

    lam_long: float | None = None
    profit_long: float | None = None
    if cls.kind is LongRunKind.CYCLE2:
        kind = RecoveryClass.CYCLES
    else:
        lam_long = cls.values[0] if cls.values else trace.points[-1].lambda_p
        pol = solve_policy(p, lam_long).policy
        profit_long = profit_rate_with_fees(p, problem.fee_model, pol,
                                            solution.fee, lam_long)
        lam_ok = (abs(lam_long - solution.lambda_p)
                  <= match_tol * max(1.0, solution.lambda_p))
        pi_ok = (abs(profit_long - solution.profit)
                 <= match_tol * max(1.0, abs(solution.profit)))
        kind = RecoveryClass.OPT_EQ if (lam_ok and pi_ok) else RecoveryClass.NON_OPT_EQ

    initial_profit = trace.points[0].profit
    shortfall = None
    if profit_long is not None and initial_profit > 0:
        shortfall = 1.0 - profit_long / initial_profit

    lam_bar = None
    binding = None
    bound_ok = None
    if problem.signal_spec.kind is SignalKind.MDT and problem.resp.c2 == 1:
        pred = predict_long_run(p, problem.fee_model, problem.resp,
                                problem.signal_spec, solution.fee)
        lam_bar = pred.values[0]
        c1 = potential_market(problem.fee_model, solution.fee)
        binding = c1 <= p.demand_threshold
        slack = 1e-6 * max(1.0, solution.lambda_p)
        if binding:
            bound_ok = abs(lam_bar - solution.lambda_p) <= slack
        else:
            bound_ok = lam_bar <= solution.lambda_p + slack
    return RecoveryReport(kind, lam_long, profit_long, initial_profit,
                          shortfall, lam_bar, solution.lambda_p, binding,
                          bound_ok)
