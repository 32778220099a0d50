"""Wasserstein-robust mean-CVaR programs.

The order-1 program penalizes the objective and the mean constraint by
``delta * ||pi||_2`` (an SOCP). The order-2 program carries a shared
transport multiplier ``gamma``: per-sample epigraph variables bound
``||pi||^2 / (4 gamma alpha^2)`` terms through rotated second-order cones,
and the worst-case mean constraint uses ``sqrt(delta) * ||pi||_2``. In the
order-2 program ``delta`` budgets the squared transport cost, so the
corresponding metric radius is ``sqrt(delta)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .cvar import TailSpec, empirical_cvar
from .errors import SolverFailure
from .market_data import as_return_array
from .nonrobust import (
    STATUS_INFEASIBLE,
    STATUS_MAX_ITER,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    Portfolio,
    SolveReport,
    _renormalized,
    solve_nmc,
)

_CLARABEL_OPTS = {
    "tol_gap_abs": 1e-11,
    "tol_gap_rel": 1e-11,
    "tol_feas": 1e-11,
    "max_iter": 500,
}


@dataclass(frozen=True)
class RobustConfig:
    delta: float
    kappa: int
    tail: TailSpec
    rho: float
    long_only: bool = True

    def __post_init__(self):
        if self.delta < 0.0:
            raise ValueError(f"ambiguity radius must be nonnegative, got {self.delta}")
        if self.kappa not in (1, 2):
            raise ValueError(f"transport order must be 1 or 2, got {self.kappa}")


def worst_case_mean(pi, r, delta: float, kappa: int) -> float:
    """Smallest mean return over the ambiguity ball, in closed form."""
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    if kappa not in (1, 2):
        raise ValueError("kappa must be 1 or 2")
    pi = np.asarray(pi, dtype=float)
    returns = as_return_array(r)
    nominal = float(returns.mean(axis=0) @ pi)
    penalty = delta if kappa == 1 else np.sqrt(delta)
    return nominal - penalty * float(np.linalg.norm(pi))


def _solve(problem: cp.Problem) -> str:
    """Solve with the interior-point conic backend, retrying on sloppy exits."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        try:
            problem.solve(solver=cp.CLARABEL, **_CLARABEL_OPTS)
            need_retry = problem.status not in (cp.OPTIMAL, cp.INFEASIBLE, cp.UNBOUNDED)
        except cp.error.SolverError:
            need_retry = True
        if need_retry:
            try:
                problem.solve(solver=cp.SCS, eps=1e-9, max_iters=100_000)
            except cp.error.SolverError:
                return STATUS_MAX_ITER
    status = problem.status
    if status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return STATUS_OPTIMAL if status == cp.OPTIMAL else STATUS_MAX_ITER
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return STATUS_INFEASIBLE
    if status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        return STATUS_UNBOUNDED
    return STATUS_MAX_ITER


def solve_rmc1(r, cfg: RobustConfig) -> SolveReport:
    """Order-1 robust mean-CVaR: norm-penalized SOCP."""
    if cfg.kappa != 1:
        raise ValueError("solve_rmc1 requires an order-1 config")
    returns = as_return_array(r)
    n_obs, n_assets = returns.shape
    mu = returns.mean(axis=0)
    alpha = cfg.tail.tail_mass

    pi = cp.Variable(n_assets)
    a = cp.Variable()
    u = cp.Variable(n_obs, nonneg=True)
    norm_epi = cp.Variable(nonneg=True)

    constraints = [
        u >= -(returns @ pi) - a,
        cp.SOC(norm_epi, pi),
        mu @ pi - cfg.delta * norm_epi >= cfg.rho,
        cp.sum(pi) == 1,
    ]
    if cfg.long_only:
        constraints += [pi >= 0, pi <= 1]
    objective = a + (cp.sum(u) / n_obs + cfg.delta * norm_epi) / alpha
    problem = cp.Problem(cp.Minimize(objective), constraints)
    status = _solve(problem)
    label = "RMC-1"
    if status in (STATUS_INFEASIBLE, STATUS_UNBOUNDED) or pi.value is None:
        return SolveReport(None, np.nan, status, np.nan, {}, label)

    weights = _renormalized(np.asarray(pi.value, dtype=float))
    a_star = float(a.value)
    plus_mean = float(np.maximum(-(returns @ weights) - a_star, 0.0).mean())
    norm_pi = float(np.linalg.norm(weights))
    reconstructed = a_star + (plus_mean + cfg.delta * norm_pi) / alpha
    mean_violation = max(0.0, cfg.rho - (float(mu @ weights) - cfg.delta * norm_pi))
    kkt_residual = max(abs(reconstructed - float(problem.value)), mean_violation)
    duals = {
        "mean": float(constraints[2].dual_value),
        "budget": float(constraints[3].dual_value),
    }
    return SolveReport(
        Portfolio(weights, a_star), reconstructed, status, kkt_residual, duals, label
    )


def _rmc2_program(returns, cfg: RobustConfig, rescale: bool):
    """Build the order-2 program; rescale=True substitutes gamma = h/sqrt(delta).

    The substitution balances the cone when delta is tiny (gamma grows like
    1/sqrt(delta) in the plain form, which starves interior-point scaling).
    """
    n_obs, n_assets = returns.shape
    mu = returns.mean(axis=0)
    alpha = cfg.tail.tail_mass
    root_delta = np.sqrt(cfg.delta)

    pi = cp.Variable(n_assets)
    a = cp.Variable()
    g = cp.Variable(nonneg=True)  # gamma, or h = gamma * sqrt(delta)
    s = cp.Variable(n_obs)
    if rescale:
        quad = cp.quad_over_lin(pi * cfg.delta**0.25, 4.0 * alpha**2 * g)
        objective = g * root_delta + cp.sum(s) / n_obs
    else:
        quad = cp.quad_over_lin(pi, 4.0 * alpha**2 * g)
        objective = g * cfg.delta + cp.sum(s) / n_obs
    constraints = [
        quad - (returns @ pi) / alpha + a * (1.0 - 1.0 / alpha) <= s,
        a <= s,
        mu @ pi - root_delta * cp.norm(pi, 2) >= cfg.rho,
        cp.sum(pi) == 1,
    ]
    if cfg.long_only:
        constraints += [pi >= 0, pi <= 1]
    problem = cp.Problem(cp.Minimize(objective), constraints)
    return problem, pi, a, g, s, constraints


def solve_rmc2(r, cfg: RobustConfig) -> SolveReport:
    """Order-2 robust mean-CVaR: rotated-cone program with shared gamma.

    A zero radius makes the gamma*delta + ||pi||^2/(4 gamma alpha^2)
    structure degenerate, so that case reduces analytically to the
    non-robust program. For positive radii the plain parameterization is
    tried first and a sqrt(delta)-rescaled twin second, keeping the first
    clean optimum.
    """
    if cfg.kappa != 2:
        raise ValueError("solve_rmc2 requires an order-2 config")
    if cfg.delta == 0.0:
        base = solve_nmc(r, cfg.rho, cfg.tail, long_only=cfg.long_only)
        return SolveReport(
            base.portfolio, base.objective, base.status, base.kkt_residual,
            dict(base.duals), "RMC-2",
        )

    returns = as_return_array(r)
    mu = returns.mean(axis=0)
    alpha = cfg.tail.tail_mass
    label = "RMC-2"

    chosen = None
    for rescale in (False, True):
        problem, pi, a, g, s, constraints = _rmc2_program(returns, cfg, rescale)
        status = _solve(problem)
        if status == STATUS_OPTIMAL:
            chosen = (problem, pi, a, g, s, constraints, rescale, status)
            break
        if chosen is None or (pi.value is not None and chosen[1].value is None):
            chosen = (problem, pi, a, g, s, constraints, rescale, status)
    problem, pi, a, g, s, constraints, rescale, status = chosen
    if status in (STATUS_INFEASIBLE, STATUS_UNBOUNDED) or pi.value is None:
        return SolveReport(None, np.nan, status, np.nan, {}, label)

    weights = _renormalized(np.asarray(pi.value, dtype=float))
    a_star = float(a.value)
    gamma_star = float(g.value) / np.sqrt(cfg.delta) if rescale else float(g.value)
    norm_sq = float(weights @ weights)
    branch = (
        norm_sq / (4.0 * alpha**2 * gamma_star)
        - (returns @ weights) / alpha
        + a_star * (1.0 - 1.0 / alpha)
    )
    reconstructed = gamma_star * cfg.delta + float(np.maximum(branch, a_star).mean())
    mean_violation = max(
        0.0,
        cfg.rho - (float(mu @ weights) - np.sqrt(cfg.delta) * np.sqrt(norm_sq)),
    )
    slack_residual = float(np.abs(np.maximum(branch, a_star) - s.value).max())
    kkt_residual = max(
        abs(reconstructed - float(problem.value)), mean_violation, slack_residual
    )
    duals = {
        "mean": float(constraints[2].dual_value),
        "budget": float(constraints[3].dual_value),
        "gamma": gamma_star,
    }
    return SolveReport(
        Portfolio(weights, a_star), reconstructed, status, kkt_residual, duals, label
    )


def worst_case_cvar_value(report: SolveReport, cfg: RobustConfig, r) -> float:
    """Worst-case CVaR attained by an optimal robust solve.

    For the order-1 program the value is rebuilt from the primal variables
    and must agree with the stored objective to 1e-8.
    """
    if report.status != STATUS_OPTIMAL or report.portfolio is None:
        raise SolverFailure(f"report has status {report.status}; no optimum to evaluate")
    if cfg.delta == 0.0:
        returns = as_return_array(r)
        return empirical_cvar(-(returns @ report.portfolio.weights), cfg.tail)
    if cfg.kappa == 1:
        returns = as_return_array(r)
        weights = report.portfolio.weights
        a_star = report.portfolio.threshold
        plus_mean = float(np.maximum(-(returns @ weights) - a_star, 0.0).mean())
        rebuilt = a_star + (plus_mean + cfg.delta * float(np.linalg.norm(weights))) / cfg.tail.tail_mass
        if abs(rebuilt - report.objective) > 1e-8:
            raise SolverFailure(
                f"primal reconstruction {rebuilt!r} disagrees with objective "
                f"{report.objective!r}"
            )
        return rebuilt
    return report.objective
