import math

import numpy as np
import pytest

from robustcvar import (
    Portfolio,
    SmoothingParam,
    TailSpec,
    empirical_cvar,
    multiplier_limits,
    smooth_objective,
    solve_nmc,
    solve_smooth,
    synthetic_returns,
)
from robustcvar.errors import DegenerateMultiplierError


def enumerate_simplex_lp(returns, rho, tail, steps=2001):
    """Oracle for n=2 long-only instances: scan the 1-simplex directly."""
    best = None
    for w in np.linspace(0.0, 1.0, steps):
        pi = np.array([w, 1.0 - w])
        if returns.mean(axis=0) @ pi < rho - 1e-12:
            continue
        val = empirical_cvar(-(returns @ pi), tail)
        if best is None or val < best:
            best = val
    return best


class TestSolveNmc:
    def test_deterministic_two_asset(self):
        returns = np.tile([0.01, 0.00], (8, 1))
        tail = TailSpec(0.2)
        rep = solve_nmc(returns, 0.01, tail, long_only=True)
        assert rep.status == "optimal"
        assert rep.portfolio.weights == pytest.approx([1.0, 0.0], abs=1e-7)
        assert rep.objective == pytest.approx(-0.01, abs=1e-8)
        assert rep.objective == pytest.approx(
            enumerate_simplex_lp(returns, 0.01, tail), abs=1e-6
        )

    def test_single_asset_budget_forces_solution(self):
        rng = np.random.default_rng(4)
        returns = rng.normal(0.001, 0.02, size=(60, 1))
        tail = TailSpec(0.1)
        rep = solve_nmc(returns, -1.0, tail)
        assert rep.portfolio.weights == pytest.approx([1.0])
        assert rep.objective == pytest.approx(empirical_cvar(-returns[:, 0], tail), abs=1e-9)

    def test_unreachable_target_infeasible(self):
        rng = np.random.default_rng(5)
        returns = rng.normal(0.0005, 0.01, size=(50, 3))
        rep = solve_nmc(returns, 10.0, TailSpec(0.05), long_only=True)
        assert rep.status == "infeasible"

    def test_deterministic_returns_unbounded_without_box(self):
        # riskless spread: leveraging the better asset drives CVaR to -inf
        returns = np.tile([0.01, 0.00], (10, 1))
        rep = solve_nmc(returns, -1.0, TailSpec(0.2), long_only=False)
        assert rep.status == "unbounded"

    def test_objective_equals_cvar_of_solution(self, small_returns, tail05):
        rho = float(small_returns.returns.mean(axis=0).mean())
        rep = solve_nmc(small_returns, rho, tail05)
        losses = -(small_returns.returns @ rep.portfolio.weights)
        assert rep.objective == pytest.approx(empirical_cvar(losses, tail05), abs=1e-8)

    def test_objective_monotone_in_target(self, small_returns, tail05):
        mu = small_returns.returns.mean(axis=0)
        rhos = np.linspace(mu.min(), mu.max(), 5)
        vals = [solve_nmc(small_returns, r, tail05).objective for r in rhos]
        assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))

    def test_matches_simplex_enumeration(self, tail20):
        rng = np.random.default_rng(6)
        returns = rng.normal(0.001, 0.02, size=(40, 2))
        rho = float(returns.mean(axis=0).mean())
        rep = solve_nmc(returns, rho, tail20)
        assert rep.objective == pytest.approx(
            enumerate_simplex_lp(returns, rho, tail20), abs=2e-5
        )


class TestSolveSmooth:
    def test_deterministic_two_asset_pins_weights(self):
        returns = np.tile([0.01, 0.00], (10, 1))
        tail = TailSpec(0.2)
        state = solve_smooth(returns, 0.005, tail, SmoothingParam(1e-4))
        assert state.status == "optimal"
        assert state.pi_star == pytest.approx([0.5, 0.5], abs=1e-8)
        # a* -> -0.005 with an O(t) offset
        assert state.a_star == pytest.approx(-0.005, abs=5e-4)

    def test_objective_close_to_equality_lp(self, small_returns, tail05):
        rho = float(small_returns.returns.mean(axis=0).mean())
        t = 1e-4
        state = solve_smooth(small_returns, rho, tail05, SmoothingParam(t))
        lp = solve_nmc(small_returns, rho, tail05, long_only=False, mean_equality=True)
        gap = state.objective - lp.objective
        assert 0.0 <= gap <= t * math.log(2) / tail05.tail_mass + 1e-10

    def test_gap_shrinks_with_t(self, small_returns, tail05):
        rho = float(small_returns.returns.mean(axis=0).mean())
        lp = solve_nmc(small_returns, rho, tail05, long_only=False, mean_equality=True)
        gaps = []
        for t in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5):
            state = solve_smooth(small_returns, rho, tail05, SmoothingParam(t))
            gap = state.objective - lp.objective
            assert -1e-10 <= gap <= t * math.log(2) / tail05.tail_mass + 1e-10
            gaps.append(gap)
        assert all(a >= b - 1e-12 for a, b in zip(gaps, gaps[1:]))

    def test_stationarity_residual_small(self, small_returns, tail05):
        rho = float(small_returns.returns.mean(axis=0).mean())
        state = solve_smooth(small_returns, rho, tail05, SmoothingParam(1e-4))
        assert state.stationarity_residual <= 1e-6

    def test_finite_difference_gradient_matches(self, small_returns, tail05):
        rho = float(small_returns.returns.mean(axis=0).mean())
        t = SmoothingParam(1e-3)
        state = solve_smooth(small_returns, rho, tail05, t)
        pi, a = state.pi_star, state.a_star
        h = 1e-7
        grad_fd = np.empty(pi.size + 1)
        for j in range(pi.size):
            up, dn = pi.copy(), pi.copy()
            up[j] += h
            dn[j] -= h
            grad_fd[j] = (
                smooth_objective(up, a, t, small_returns.returns, tail05)
                - smooth_objective(dn, a, t, small_returns.returns, tail05)
            ) / (2 * h)
        grad_fd[-1] = (
            smooth_objective(pi, a + h, t, small_returns.returns, tail05)
            - smooth_objective(pi, a - h, t, small_returns.returns, tail05)
        ) / (2 * h)
        # analytic gradient: stationarity gives grad_pi = l1*mu + l2*1, grad_a = 0
        mu = small_returns.returns.mean(axis=0)
        analytic = np.append(state.lambda1 * mu + state.lambda2, 0.0)
        scale = max(1.0, np.abs(analytic).max())
        assert np.abs(grad_fd - analytic).max() / scale <= 1e-5

    def test_infeasible_target_raises(self, small_returns, tail05):
        with pytest.raises(ValueError):
            solve_smooth(small_returns, 10.0, tail05, SmoothingParam(1e-3))

    def test_lambda2_closed_form(self, small_returns, tail05):
        rho = float(small_returns.returns.mean(axis=0).mean())
        state = solve_smooth(small_returns, rho, tail05, SmoothingParam(1e-4))
        # lambda2 = pi'E[g] - lambda1*rho was already cross-checked in-solver;
        # verify through the residual bound
        assert state.stationarity_residual <= 1e-8


class TestMultiplierLimits:
    def test_no_tail_mass_gives_zero_limits(self, tail20):
        # all losses strictly below the threshold: indicator never fires
        returns = np.tile([0.01, 0.00], (10, 1))
        state = solve_smooth(returns, 0.005, tail20, SmoothingParam(1e-4))
        fake = type(state)(
            pi_star=state.pi_star,
            a_star=0.05,  # pushed far above every loss
            lambda1=0.0,
            lambda2=0.0,
            t=state.t,
            objective=state.objective,
            stationarity_residual=state.stationarity_residual,
            status=state.status,
            iterations=state.iterations,
        )
        lam1, lam2 = multiplier_limits(fake, returns, 0.005, tail20)
        assert lam1 == 0.0
        assert lam2 == 0.0

    def test_single_asset_identity(self):
        rng = np.random.default_rng(9)
        returns = rng.normal(0.001, 0.02, size=(40, 1))
        tail = TailSpec(0.1)
        r2 = np.column_stack([returns, returns * 0 + 0.002])
        mu = r2.mean(axis=0)
        rho = float(mu.mean())  # strictly between the two asset means
        state = solve_smooth(r2, rho, tail, SmoothingParam(1e-5))
        lam1, lam2 = multiplier_limits(state, r2, rho, tail)
        in_tail = r2 @ state.pi_star + state.a_star <= 0
        ghat = -(r2 * in_tail[:, None]).mean(axis=0) / tail.tail_mass
        assert lam2 == pytest.approx(float(state.pi_star @ ghat) - lam1 * rho, abs=1e-12)

    def test_agrees_with_finite_t_when_portfolio_pinned(self):
        # n=2 with equality constraints pins pi; no sample ties the threshold,
        # so the indicator formulas match the solver duals to high accuracy
        rng = np.random.default_rng(14)
        returns = rng.normal([0.001, 0.0004], [0.02, 0.012], size=(40, 2))
        tail = TailSpec(0.1)
        state = solve_smooth(returns, 0.0007, tail, SmoothingParam(1e-5))
        lam1, lam2 = multiplier_limits(state, returns, 0.0007, tail)
        assert lam1 == pytest.approx(state.lambda1, abs=1e-9)
        assert lam2 == pytest.approx(state.lambda2, abs=1e-9)

    def test_generic_instance_tie_atom_envelope(self, small_returns, tail05):
        # with pi free, one sample ties the threshold with fractional weight;
        # lambda1 then differs from the solver dual by O(max|R|/(alpha*N*den))
        rho = float(small_returns.returns.mean(axis=0).mean())
        state = solve_smooth(small_returns, rho, tail05, SmoothingParam(1e-5))
        lam1, lam2 = multiplier_limits(state, small_returns, rho, tail05)
        returns = small_returns.returns
        mu = returns.mean(axis=0)
        den = np.abs(mu - rho)
        envelope = (
            np.abs(returns).max()
            / (tail05.tail_mass * returns.shape[0] * den[den > 1e-8].min())
        )
        assert abs(lam1 - state.lambda1) <= envelope
        assert abs(lam2 - state.lambda2) <= 1e-3

    def test_degenerate_when_all_means_equal_target(self, tail20):
        returns = np.tile([0.01, 0.01], (12, 1)) + 0.0
        state = solve_smooth(
            np.tile([0.01, 0.02], (12, 1)), 0.015, tail20, SmoothingParam(1e-4)
        )
        with pytest.raises(DegenerateMultiplierError):
            multiplier_limits(state, returns, 0.01, tail20)


def test_portfolio_budget_validation():
    with pytest.raises(ValueError):
        Portfolio(np.array([0.5, 0.6]), 0.0)
    Portfolio(np.array([0.5, 0.5]), 0.0)
