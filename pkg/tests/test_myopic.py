from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from womops import (GridSpec, InvalidGrid, InvalidParams, MarketParams,
                    PolicyCase, candidate, grid_search_policy, profit_rate,
                    solve_policy)


def params(r=8.0, K=2000.0, h=4.0, tau=2.0, lambda_r=50.0):
    return MarketParams(r=r, K=K, h=h, tau=tau, lambda_r=lambda_r, M=30,
                        f_min=10, f_max=100)


class TestCandidates:
    def test_case_i_is_declared_delivery_only(self):
        pol = candidate(PolicyCase.I, params(tau=3.3), 42.0)
        assert (pol.t1, pol.t2, pol.t3) == (0.0, 0.0, 3.3)

    def test_case_ii_cycle_length(self):
        pol = candidate(PolicyCase.II, params(), 450.0)
        assert pol.t3 == pytest.approx(math.sqrt(4000.0 / 1800.0), rel=1e-12)
        assert pol.t3 == pytest.approx(1.49, abs=0.005)

    def test_case_iii_fast_phase(self):
        pol = candidate(PolicyCase.III, params(tau=1.0), 450.0)
        assert pol.t1 == pytest.approx(math.sqrt(2.1) - 1.0, rel=1e-12)
        assert pol.t1 == pytest.approx(0.45, abs=0.005)
        assert pol.t2 == 0.0 and pol.t3 == 1.0

    def test_case_iv_closed_form(self):
        # 2hK - 2h*lam_r*r*tau - lam_r*r^2 = 32000 - 3200 - 3200 = 25600;
        # T = sqrt(25600 / (16 * 100)) = 4, t1 = r/h = 2, t2 = 4 - 2 - 1 = 1.
        pol = candidate(PolicyCase.IV, params(K=4000.0, tau=1.0), 100.0)
        assert (pol.t1, pol.t3) == (2.0, 1.0)
        assert pol.t2 == pytest.approx(1.0, rel=1e-12)

    def test_infeasible_is_a_value(self):
        assert candidate(PolicyCase.II, params(), 100.0) is None  # root > tau
        assert candidate(PolicyCase.III, params(), 450.0) is None  # t1 <= 0
        assert candidate(PolicyCase.IV, params(tau=5.0), 450.0) is None  # radicand < 0

    def test_zero_demand_divides_by_zero_cases(self):
        with pytest.raises(InvalidParams):
            candidate(PolicyCase.II, params(), 0.0)
        with pytest.raises(InvalidParams):
            candidate(PolicyCase.IV, params(), 0.0)


class TestSolve:
    def test_high_demand_drops_below_declared_time(self):
        sol = solve_policy(params(), 450.0)
        assert sol.case is PolicyCase.II
        assert sol.policy.t3 == pytest.approx(1.4907, abs=5e-5)

    def test_low_demand_binds_declared_time(self):
        sol = solve_policy(params(), 186.34)
        assert sol.case is PolicyCase.III
        assert sol.policy.t1 == pytest.approx(0.25, abs=0.005)
        assert sol.policy.t3 == 2.0

    def test_region_boundary_keeps_declared_time(self):
        p = params()
        sol = solve_policy(p, p.demand_threshold)
        assert sol.policy.t3 == p.tau

    def test_zero_demand_lengthens_cycle_through_fast_phase(self):
        # With lambda_p = 0 the fast phase amortizes K: t1 > 0 whenever
        # t1* < 2K/(h lam_r tau).
        sol = solve_policy(params(tau=5.0), 0.0)
        assert sol.case is PolicyCase.III
        assert sol.policy.t1 == pytest.approx(math.sqrt(45.0) - 5.0, rel=1e-10)

    def test_both_rates_zero_rejected(self):
        with pytest.raises(InvalidParams):
            solve_policy(params(lambda_r=0.0), 0.0)

    @settings(max_examples=80, deadline=None)
    @given(st.floats(8, 48), st.floats(2000, 4000), st.floats(1, 7),
           st.floats(0, 500))
    def test_structure_region_and_kkt(self, r, K, tau, lam):
        p = params(r=r, K=K, tau=tau)
        sol = solve_policy(p, lam)
        pol = sol.policy
        # Structural dominance: no Phase 2 without Phase 1; no Phase 1 when
        # the realized delivery time beats the declared one.
        if pol.t1 == 0:
            assert pol.t2 == 0
        if pol.t3 < tau:
            assert pol.t1 == 0
        # Region consistency with the demand threshold.
        assert (pol.t3 < tau) == (lam > p.demand_threshold)
        assert sol.kkt_residual <= 1e-6
        assert pol.t3 <= tau + 1e-12


class TestOracle:
    def test_reference_point_profit_within_grid_tolerance(self):
        p = params()
        exact = solve_policy(p, 450.0)
        grid = grid_search_policy(p, 450.0, GridSpec(step=0.005))
        assert abs(exact.profit - grid.profit) <= 1e-2
        assert grid.profit <= exact.profit + 1e-9

    def test_zero_demand_agrees_with_closed_form(self):
        p = params(tau=5.0)
        exact = solve_policy(p, 0.0)
        grid = grid_search_policy(p, 0.0, GridSpec(step=0.01, t_max=10.0))
        assert abs(exact.profit - grid.profit) <= 5e-2
        assert grid.policy.t1 == pytest.approx(exact.policy.t1, abs=0.02)

    def test_case_iv_agrees_with_grid(self):
        p = params(K=4000.0, tau=1.0)
        exact = solve_policy(p, 100.0)
        assert exact.case is PolicyCase.IV
        grid = grid_search_policy(p, 100.0, GridSpec(step=0.01))
        assert abs(exact.profit - grid.profit) <= 2e-2
        assert grid.policy.t1 == pytest.approx(2.0, abs=0.02)
        assert grid.policy.t2 == pytest.approx(1.0, abs=0.03)

    def test_grid_never_beats_closed_form(self):
        for lam in (30.0, 120.0, 450.0):
            p = params(K=3000.0, tau=1.5)
            exact = solve_policy(p, lam)
            grid = grid_search_policy(p, lam, GridSpec(step=0.02))
            assert grid.profit <= exact.profit + 1e-9

    def test_bad_grids_rejected(self):
        with pytest.raises(InvalidGrid):
            grid_search_policy(params(), 450.0, GridSpec(step=0.0))
        with pytest.raises(InvalidGrid):
            grid_search_policy(params(), 450.0, GridSpec(step=0.01, t_max=0.5))

    def test_profit_matches_shared_evaluator(self):
        p = params()
        grid = grid_search_policy(p, 200.0, GridSpec(step=0.05))
        assert grid.profit == pytest.approx(
            profit_rate(p, grid.policy, 200.0), rel=1e-12)
