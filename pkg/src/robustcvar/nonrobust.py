"""Sample-based mean-CVaR solvers.

Two entry points:

* :func:`solve_nmc` -- the classical hinge-variable LP (inequality mean
  constraint, optional long-only box).
* :func:`solve_smooth` -- the softplus-regularized problem with *equality*
  mean and budget constraints, solved by damped Newton on the reduced
  problem; its multipliers feed the ambiguity-radius calibration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.special
from scipy.optimize import linprog

from .cvar import SmoothingParam, TailSpec, empirical_cvar, empirical_var
from .errors import DegenerateMultiplierError, SolverFailure
from .market_data import as_return_array

BUDGET_TOL = 1e-8

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_MAX_ITER = "max_iter"


@dataclass(frozen=True)
class Portfolio:
    """Weight vector plus the CVaR threshold that attains the objective."""

    weights: np.ndarray
    threshold: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if abs(w.sum() - 1.0) > BUDGET_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")


@dataclass(frozen=True)
class SolveReport:
    portfolio: Portfolio | None
    objective: float
    status: str
    kkt_residual: float
    duals: dict[str, float] = field(default_factory=dict)
    label: str = ""

    def require_optimal(self):
        if self.status != STATUS_OPTIMAL:
            raise SolverFailure(f"{self.label or 'solve'} ended with status {self.status}")
        return self

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "status": self.status,
            "objective": self.objective,
            "kkt_residual": self.kkt_residual,
            "weights": None
            if self.portfolio is None
            else [float(w) for w in self.portfolio.weights],
            "threshold": None if self.portfolio is None else self.portfolio.threshold,
            "duals": {k: float(v) for k, v in sorted(self.duals.items())},
        }


@dataclass(frozen=True)
class SmoothKktState:
    """Solution and multipliers of the smoothed equality-constrained problem."""

    pi_star: np.ndarray
    a_star: float
    lambda1: float
    lambda2: float
    t: SmoothingParam
    objective: float
    stationarity_residual: float
    status: str
    iterations: int


def _renormalized(weights: np.ndarray) -> np.ndarray:
    # solver budget residuals are ~1e-9; rescale so Portfolio's 1e-8 check holds
    total = weights.sum()
    if abs(total - 1.0) > 1e-4 or total == 0.0:
        raise SolverFailure(f"solver returned weights summing to {total!r}")
    return weights / total


def solve_nmc(
    r,
    rho: float,
    tail: TailSpec,
    long_only: bool = True,
    mean_equality: bool = False,
) -> SolveReport:
    """Minimize a + mean([-pi'R_i - a]^+) / tail_mass over the feasible set.

    Hinge variables u_i give the standard LP; solved with HiGHS. The mean
    constraint is mu'pi >= rho (== rho when mean_equality is set) and the
    budget is pi'1 = 1.
    """
    returns = as_return_array(r)
    n_obs, n_assets = returns.shape
    mu = returns.mean(axis=0)
    alpha = tail.tail_mass

    # variable order: pi (n), a, u (N)
    c = np.concatenate([np.zeros(n_assets), [1.0], np.full(n_obs, 1.0 / (alpha * n_obs))])
    a_hinge = np.hstack([-returns, -np.ones((n_obs, 1)), -np.eye(n_obs)])
    b_hinge = np.zeros(n_obs)
    a_eq = [np.concatenate([np.ones(n_assets), [0.0], np.zeros(n_obs)])]
    b_eq = [1.0]
    if mean_equality:
        a_eq.append(np.concatenate([mu, [0.0], np.zeros(n_obs)]))
        b_eq.append(rho)
        a_ub, b_ub = a_hinge, b_hinge
    else:
        mean_row = np.concatenate([-mu, [0.0], np.zeros(n_obs)])
        a_ub = np.vstack([a_hinge, mean_row])
        b_ub = np.concatenate([b_hinge, [-rho]])

    pi_bound = (0.0, 1.0) if long_only else (None, None)
    bounds = [pi_bound] * n_assets + [(None, None)] + [(0.0, None)] * n_obs
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=np.asarray(a_eq),
        b_eq=np.asarray(b_eq),
        bounds=bounds,
        method="highs",
    )

    label = "NMC"
    if res.status == 2:
        return SolveReport(None, np.nan, STATUS_INFEASIBLE, np.nan, {}, label)
    if res.status == 3:
        return SolveReport(None, np.nan, STATUS_UNBOUNDED, np.nan, {}, label)
    if res.status != 0:
        return SolveReport(None, np.nan, STATUS_MAX_ITER, np.nan, {}, label)

    pi = _renormalized(res.x[:n_assets])
    a_star = float(res.x[n_assets])
    duals = {
        "budget": float(res.eqlin.marginals[0]),
        "mean": float(res.eqlin.marginals[1]) if mean_equality else float(res.ineqlin.marginals[-1]),
    }
    # Rockafellar-Uryasev consistency: objective == empirical CVaR at pi
    losses = -(returns @ pi)
    cvar = empirical_cvar(losses, tail)
    mean_violation = (
        abs(mu @ pi - rho) if mean_equality else max(0.0, rho - float(mu @ pi))
    )
    kkt_residual = max(abs(res.fun - cvar), mean_violation)
    return SolveReport(Portfolio(pi, a_star), float(res.fun), STATUS_OPTIMAL, kkt_residual, duals, label)


def _feasible_basis(mu: np.ndarray, rho: float):
    """Particular solution and null-space basis of {mu'pi = rho, 1'pi = 1}."""
    n = mu.shape[0]
    if not mu.min() < rho < mu.max():
        raise ValueError(
            f"target mean {rho} must lie strictly between the asset means "
            f"[{mu.min():.6g}, {mu.max():.6g}]"
        )
    a_mat = np.vstack([mu, np.ones(n)])
    b = np.array([rho, 1.0])
    pi_p, *_ = np.linalg.lstsq(a_mat, b, rcond=None)
    if not np.allclose(a_mat @ pi_p, b, atol=1e-10):
        raise ValueError(f"equality constraints unsatisfiable for target {rho}")
    basis = scipy.linalg.null_space(a_mat)
    return pi_p, basis


def _smooth_kkt_pieces(returns, pi, a, t, alpha):
    """Gradient pieces of the smoothed objective at (pi, a)."""
    x = -(returns @ pi) - a
    z = x / t
    s = scipy.special.expit(z)
    grad_pi = -(returns.T @ s) / (returns.shape[0] * alpha)
    grad_a = 1.0 - s.mean() / alpha
    w = s * (1.0 - s) / (t * alpha * returns.shape[0])
    return s, grad_pi, grad_a, w


def solve_smooth(
    r,
    rho: float,
    tail: TailSpec,
    t: SmoothingParam,
    max_iter: int = 200,
    tol: float = 1e-8,
) -> SmoothKktState:
    """Damped-Newton solve of the smoothed problem with equality constraints.

    The two linear constraints are eliminated through a null-space
    parameterization, so each Newton step works on an unconstrained convex
    function of (y, a). The temperature is lowered geometrically from 0.1 to
    the target, warm-starting each stage, which keeps Newton in its basin
    even for t ~ 1e-5. When the Hessian is ill-conditioned the step falls
    back to a Levenberg-damped (gradient-like) direction.
    """
    returns = as_return_array(r)
    n_obs, n_assets = returns.shape
    mu = returns.mean(axis=0)
    alpha = tail.tail_mass
    t_target = t.t

    pi_p, basis = _feasible_basis(mu, rho)
    k = basis.shape[1]

    def objective(y, a, tv):
        pi = pi_p + basis @ y
        x = -(returns @ pi) - a
        z = x / tv
        sp = np.maximum(x, 0.0) + tv * np.log1p(np.exp(-np.abs(z)))
        return a + sp.mean() / alpha

    y = np.zeros(k)
    a = empirical_var(-(returns @ pi_p), tail)

    stages = []
    tv = max(t_target, 0.1)
    while tv > t_target * (1 + 1e-12):
        stages.append(tv)
        tv /= np.sqrt(10.0)
    stages.append(t_target)

    iterations = 0
    budget = max_iter
    for tv in stages:
        stage_tol = tol if tv == t_target else 1e2 * tol
        while budget > 0:
            pi = pi_p + basis @ y
            s, grad_pi, grad_a, w = _smooth_kkt_pieces(returns, pi, a, tv, alpha)
            grad_y = basis.T @ grad_pi
            grad = np.concatenate([grad_y, [grad_a]])
            gnorm = np.abs(grad).max()
            if gnorm <= stage_tol:
                break

            rw = returns * w[:, None]
            h_pp = returns.T @ rw
            h_pa = rw.sum(axis=0)
            h_aa = w.sum()
            hess = np.empty((k + 1, k + 1))
            hess[:k, :k] = basis.T @ h_pp @ basis
            hess[:k, k] = basis.T @ h_pa
            hess[k, :k] = hess[:k, k]
            hess[k, k] = h_aa

            step = None
            damping = 0.0
            for _ in range(12):
                try:
                    cf = scipy.linalg.cho_factor(
                        hess + damping * np.eye(k + 1), lower=True
                    )
                    step = scipy.linalg.cho_solve(cf, -grad)
                    break
                except np.linalg.LinAlgError:
                    damping = max(10.0 * damping, 1e-10 * max(1.0, np.abs(hess).max()))
            if step is None:
                step = -grad  # pure gradient fallback

            # backtracking line search (Armijo)
            f0 = objective(y, a, tv)
            slope = float(grad @ step)
            if slope >= 0.0:
                step = -grad
                slope = -float(grad @ grad)
            scale = 1.0
            for _ in range(60):
                y_new = y + scale * step[:k]
                a_new = a + scale * step[k]
                if objective(y_new, a_new, tv) <= f0 + 1e-4 * scale * slope:
                    break
                scale *= 0.5
            y = y + scale * step[:k]
            a = a + scale * step[k]
            iterations += 1
            budget -= 1

    status = STATUS_OPTIMAL
    pi = pi_p + basis @ y
    _, grad_pi, grad_a, _ = _smooth_kkt_pieces(returns, pi, a, t_target, alpha)
    # multipliers from stationarity: grad_pi = lambda1 * mu + lambda2 * 1
    m = np.column_stack([mu, np.ones(n_assets)])
    lams, *_ = np.linalg.lstsq(m, grad_pi, rcond=None)
    lambda1, lambda2 = float(lams[0]), float(lams[1])
    residual = max(
        float(np.abs(grad_pi - m @ lams).max()),
        abs(grad_a),
        abs(float(mu @ pi) - rho),
        abs(float(pi.sum()) - 1.0),
    )
    # closed-form cross-check: lambda2 = pi'E[g] - lambda1*rho
    lambda2_closed = float(pi @ grad_pi) - lambda1 * rho
    residual = max(residual, abs(lambda2 - lambda2_closed))
    if status == STATUS_OPTIMAL and residual > 1e-6:
        status = STATUS_MAX_ITER
    return SmoothKktState(
        pi_star=pi,
        a_star=float(a),
        lambda1=lambda1,
        lambda2=lambda2,
        t=SmoothingParam(t_target),
        objective=float(objective(y, a, t_target)),
        stationarity_residual=residual,
        status=status,
        iterations=iterations,
    )


def multiplier_limits(state: SmoothKktState, r, rho: float, tail: TailSpec) -> tuple[float, float]:
    """Zero-temperature limits of the smooth problem's multipliers.

    Uses the indicator form of the limit gradient: each coordinate j with
    mean return away from rho gives one estimate of the first multiplier;
    the overdetermined system is resolved by least squares. Samples sitting
    exactly at the threshold count toward the tail side.
    """
    returns = as_return_array(r)
    alpha = tail.tail_mass
    mu = returns.mean(axis=0)
    a_sample = returns @ state.pi_star + state.a_star
    in_tail = a_sample <= 0.0
    ghat = -(returns * in_tail[:, None]).mean(axis=0) / alpha
    pivot = float(state.pi_star @ ghat)
    numerator = ghat - pivot
    denominator = mu - rho
    usable = np.abs(denominator) > 1e-8
    if not np.any(usable):
        raise DegenerateMultiplierError(
            "every asset mean coincides with the target; multiplier limit undefined"
        )
    den = denominator[usable]
    num = numerator[usable]
    lam1 = float(num @ den / (den @ den))
    lam2 = pivot - lam1 * rho
    return lam1, lam2
