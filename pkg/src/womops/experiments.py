"""Benchmark harness: table regeneration, traces, and persistence.

Reproduces the reference benchmarks T3-T8 (see :mod:`womops.reference`)
from an :class:`ExperimentConfig`, runs the fee-only recoverability
experiment for each solved row, compares stationary optima against the
long-run average of the feedback dynamics, and persists results as CSV
plus a JSON manifest.  Outputs are byte-reproducible: same config, same
bytes.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from . import __version__ as _version
from .domain import (CustomerResponse, FeeFamily, FeeModel, MarketParams,
                     SignalKind, SignalSpec, profit_rate_with_fees)
from .dynamics import DynamicsTrace, LongRunKind, simulate, trace_rows
from .equilibrium import (EquilibriumProblem, EquilibriumSolution, SearchSpec,
                          recoverability, solve_equilibrium)
from .errors import ConfigMismatch
from .myopic import solve_policy
from .reference import TABLE_ROWS

#: Membership-duration labels; "lifetime" approximates an unbounded horizon.
MEMBERSHIP_DURATIONS = {"monthly": 30.0, "lifetime": 1e6}

CSV_HEADER = ("tau", "c2", "K", "r", "M", "signal", "fee_family",
              "t1", "t2", "t3", "F", "lambda_p", "profit", "no_wom_decision")


class TableId(enum.Enum):
    T3 = "T3"
    T4 = "T4"
    T5 = "T5"
    T6 = "T6"


class TraceId(enum.Enum):
    T7 = "T7"
    T8 = "T8"


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep grids and run settings for the benchmark harness."""

    r_values: tuple[float, ...] = (8.0, 16.0, 48.0)
    K_values: tuple[float, ...] = (1000.0, 2000.0, 3000.0, 4000.0)
    tau_values: tuple[float, ...] = (1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0)
    c2_values: tuple[float, ...] = (0.1, 0.2, 0.5, 1.0, 2.0, 3.0)
    delta_values: tuple[float, ...] = (0.56, 5.0)
    h: float = 4.0
    lambda_r: float = 50.0
    linear_coeffs: tuple[float, float] = (100.0, 1.0)
    log_coeffs: tuple[float, float] = (20.0, 101.0)
    memberships: tuple[str, ...] = ("monthly", "lifetime")
    f_min: float = 10.0
    f_max: float = 100.0
    signal_kind: SignalKind = SignalKind.MDT
    out_dir: str = "womops-out"
    seed: int = 0
    search: SearchSpec = field(default_factory=SearchSpec)

    def __post_init__(self) -> None:
        for name in ("r_values", "K_values", "tau_values", "c2_values",
                     "delta_values", "memberships"):
            if not getattr(self, name):
                raise ConfigMismatch(f"{name} must be non-empty")


@dataclass(frozen=True)
class ResultRow:
    """One solved benchmark row, mirroring the reference table layout."""

    tau: float
    c2: float
    K: float
    r: float
    M: float
    signal: str
    fee_family: str
    t1: float
    t2: float
    t3: float
    F: float
    lambda_p: float
    profit: float
    no_wom_decision: str
    branch: str  # manifest only; not part of the CSV schema

    def csv_values(self) -> tuple[str, ...]:
        return (_num(self.tau), _num(self.c2), _num(self.K), _num(self.r),
                _num(self.M), self.signal, self.fee_family,
                f"{self.t1:.2f}", f"{self.t2:.2f}", f"{self.t3:.2f}",
                f"{self.F:.2f}", f"{self.lambda_p:.2f}", f"{self.profit:.2f}",
                self.no_wom_decision)


def _num(x: float) -> str:
    return f"{x:g}"


@dataclass(frozen=True)
class TableSetup:
    """Fixed context plus the (tau, c2, K, r) row keys of one benchmark table."""

    signal: SignalKind
    fee_family: FeeFamily
    delta: float
    membership: str
    rows: tuple[tuple[float, float, float, float], ...]


def _table_setup(table: TableId) -> TableSetup:
    rows = tuple(sorted(TABLE_ROWS[table.value]))
    if table in (TableId.T3, TableId.T4):
        sig = SignalKind.MDT
    else:
        sig = SignalKind.NPS
    family = FeeFamily.LINEAR if table in (TableId.T3, TableId.T5) else FeeFamily.LOGARITHMIC
    return TableSetup(sig, family, 5.0, "monthly", rows)


def worker_count() -> int:
    """Bounded worker pool size; WOMOPS_THREADS overrides the default."""
    env = os.environ.get("WOMOPS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(4, os.cpu_count() or 1))


def build_problem(config: ExperimentConfig, setup: TableSetup, tau: float,
                  c2: float, K: float, r: float) -> EquilibriumProblem:
    a, b = (config.linear_coeffs if setup.fee_family is FeeFamily.LINEAR
            else config.log_coeffs)
    params = MarketParams(r=r, K=K, h=config.h, tau=tau,
                          lambda_r=config.lambda_r,
                          M=MEMBERSHIP_DURATIONS[setup.membership],
                          f_min=config.f_min, f_max=config.f_max)
    fee_model = FeeModel(setup.fee_family, a, b, setup.delta)
    return EquilibriumProblem(params, fee_model, CustomerResponse(c2),
                              SignalSpec(setup.signal))


def _check_coverage(config: ExperimentConfig, setup: TableSetup) -> None:
    for tau, c2, K, r in setup.rows:
        if tau not in config.tau_values:
            raise ConfigMismatch(f"tau={tau} not in configured tau_values")
        if c2 not in config.c2_values:
            raise ConfigMismatch(f"c2={c2} not in configured c2_values")
        if K not in config.K_values:
            raise ConfigMismatch(f"K={K} not in configured K_values")
        if r not in config.r_values:
            raise ConfigMismatch(f"r={r} not in configured r_values")
    if setup.delta not in config.delta_values:
        raise ConfigMismatch(f"delta={setup.delta} not in configured delta_values")
    if setup.membership not in config.memberships:
        raise ConfigMismatch(f"membership={setup.membership} not configured")


def run_table(config: ExperimentConfig, table: TableId) -> list[ResultRow]:
    """Solve every row of one benchmark table and label its recoverability."""
    setup = _table_setup(table)
    _check_coverage(config, setup)

    def solve_row(key: tuple[float, float, float, float]) -> ResultRow:
        tau, c2, K, r = key
        problem = build_problem(config, setup, tau, c2, K, r)
        sol = solve_equilibrium(problem, config.search)
        rec = recoverability(problem, sol)
        return ResultRow(
            tau=tau, c2=c2, K=K, r=r, M=problem.params.M,
            signal=setup.signal.value, fee_family=setup.fee_family.value,
            t1=sol.policy.t1, t2=sol.policy.t2, t3=sol.policy.t3,
            F=sol.fee, lambda_p=sol.lambda_p, profit=sol.profit,
            no_wom_decision=rec.label, branch=sol.branch.value)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(solve_row, setup.rows))


#: Trace setups: (tau, c2, fee) under the T3 market with the MDT signal.
_TRACE_SETUPS = {TraceId.T7: (2.0, 1.0, 10.0), TraceId.T8: (2.0, 3.0, 10.0)}


def run_trace(config: ExperimentConfig, trace: TraceId,
              iters: int = 10) -> DynamicsTrace:
    """Reproduce one reference feedback trace (11 iterations by default).

    ``min_iters`` pins the trace length so the emitted series covers every
    reference iteration even when a cycle is detected after two steps.
    """
    tau, c2, fee = _TRACE_SETUPS[trace]
    a, b = config.linear_coeffs
    params = MarketParams(r=8.0, K=2000.0, h=config.h, tau=tau,
                          lambda_r=config.lambda_r, M=30.0,
                          f_min=config.f_min, f_max=config.f_max)
    fee_model = FeeModel(FeeFamily.LINEAR, a, b, 5.0)
    return simulate(params, fee_model, CustomerResponse(c2),
                    SignalSpec(SignalKind.MDT), fee,
                    max_iters=iters, tol=1e-2, min_iters=iters)


@dataclass(frozen=True)
class CyclePhase:
    lambda_p: float
    t1: float
    t2: float
    t3: float
    cycle_length: float
    profit: float


@dataclass(frozen=True)
class ComparisonReport:
    """Stationary optimum vs the long-run average of the feedback dynamics.

    ``long_run_average_profit`` is the time-weighted mean over one detected
    cycle (weights = each phase's own cycle length), or the limit profit
    when the dynamics converge instead (``cycle_detected`` False).
    """

    stationary_profit: float
    long_run_average_profit: float
    margin: float
    cycle_detected: bool
    phases: tuple[CyclePhase, ...]

    @property
    def cyclic_wins(self) -> bool:
        return self.margin > 0


def cyclic_vs_stationary(problem: EquilibriumProblem,
                         search: SearchSpec = SearchSpec(),
                         solution: EquilibriumSolution | None = None) -> ComparisonReport:
    """Compare the stationary optimum with running the feedback loop at its fee."""
    sol = solution if solution is not None else solve_equilibrium(problem, search)
    p = problem.params
    trace = simulate(p, problem.fee_model, problem.resp, problem.signal_spec,
                     sol.fee, max_iters=1000, tol=1e-6)
    cls = trace.classification

    def phase(lam: float) -> CyclePhase:
        pol = solve_policy(p, lam).policy
        profit = profit_rate_with_fees(p, problem.fee_model, pol, sol.fee, lam)
        return CyclePhase(lam, pol.t1, pol.t2, pol.t3, pol.cycle_length, profit)

    if cls.kind is LongRunKind.CYCLE2:
        phases = tuple(phase(lam) for lam in cls.cycle)
        total_time = sum(ph.cycle_length for ph in phases)
        avg = sum(ph.profit * ph.cycle_length for ph in phases) / total_time
        detected = True
    else:
        lam = cls.values[0] if cls.values else trace.points[-1].lambda_p
        phases = (phase(lam),)
        avg = phases[0].profit
        detected = False
    return ComparisonReport(sol.profit, avg, avg - sol.profit, detected, phases)


def _config_manifest(config: ExperimentConfig) -> dict:
    data = asdict(config)
    data["signal_kind"] = config.signal_kind.value
    data["search"] = asdict(config.search)
    # Where results land does not affect them; keeping the location out of
    # the manifest keeps reruns byte-identical wherever they are written.
    data.pop("out_dir", None)
    return data


def persist(rows: list[ResultRow], out_dir: str, name: str,
            config: ExperimentConfig) -> tuple[str, str]:
    """Write ``{name}.csv`` and ``{name}_manifest.json``; returns both paths.

    Output is byte-deterministic: fixed field order, LF newlines, sorted
    manifest keys, and no timing or host information.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    manifest_path = os.path.join(out_dir, f"{name}_manifest.json")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_values())
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())

    manifest = {
        "schema": 1,
        "tool": {"name": "womops", "version": _version},
        "table": name,
        "config": _config_manifest(config),
        "rows": [{"tau": r.tau, "c2": r.c2, "K": r.K, "r": r.r,
                  "branch": r.branch} for r in rows],
    }
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return csv_path, manifest_path


def persist_trace(trace: DynamicsTrace, out_dir: str, name: str,
                  config: ExperimentConfig) -> tuple[str, str]:
    """Trace analogue of :func:`persist`: iter-indexed CSV plus manifest."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    manifest_path = os.path.join(out_dir, f"{name}_manifest.json")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("iter", "lambda_p", "t1", "t2", "t3", "profit"))
    for k, lam, t1, t2, t3, profit in trace_rows(trace):
        writer.writerow((str(k), f"{lam:.2f}", f"{t1:.2f}", f"{t2:.2f}",
                         f"{t3:.2f}", f"{profit:.2f}"))
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())

    manifest = {
        "schema": 1,
        "tool": {"name": "womops", "version": _version},
        "table": name,
        "config": _config_manifest(config),
        "classification": {
            "kind": trace.classification.kind.value,
            "values": list(trace.classification.values),
        },
    }
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return csv_path, manifest_path


def load_rows(csv_path: str) -> list[dict[str, str]]:
    """Reload a persisted CSV as dict rows (inverse of :func:`persist`)."""
    with open(csv_path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
