"""Comparison strategies: box-uncertainty and moment-ambiguity mean-CVaR.

The box model perturbs the scenario probabilities inside elementwise bounds
around a nominal vector; both the CVaR objective and the mean constraint
are replaced by their box-worst cases via LP duality. The moment model
protects against mean vectors in a Mahalanobis ellipsoid and second-moment
matrices within a spectral-norm ball, which yields an SOCP. Ambiguity
sizes for the moment model come from a nonparametric bootstrap.
"""

from __future__ import annotations

from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .cvar import TailSpec, empirical_quantile
from .market_data import as_return_array
from .nonrobust import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    Portfolio,
    SolveReport,
    _renormalized,
)
from .robust import _solve


@dataclass(frozen=True)
class BoxSpec:
    """Scenario-probability box: p = p0 + eta with eta_lower <= eta <= eta_upper."""

    p0: np.ndarray
    eta_lower: np.ndarray
    eta_upper: np.ndarray

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=float)
        lo = np.asarray(self.eta_lower, dtype=float)
        hi = np.asarray(self.eta_upper, dtype=float)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "eta_lower", lo)
        object.__setattr__(self, "eta_upper", hi)
        if not (p0.shape == lo.shape == hi.shape):
            raise ValueError("p0 and the eta bounds must share one shape")
        if np.any(p0 < 0.0) or abs(p0.sum() - 1.0) > 1e-10:
            raise ValueError("p0 must be a probability vector")
        if np.any(lo > 0.0) or np.any(hi < 0.0):
            raise ValueError("eta bounds must straddle zero")
        if np.any(p0 + lo < -1e-12) or np.any(p0 + hi > 1.0 + 1e-12):
            raise ValueError("box leaves [0, 1] for admissible perturbations")

    @classmethod
    def symmetric(cls, n_obs: int, width: float = 0.3) -> "BoxSpec":
        """Uniform nominal with symmetric bounds +/- width/N."""
        p0 = np.full(n_obs, 1.0 / n_obs)
        half = min(width / n_obs, 1.0 / n_obs)
        return cls(p0, -half * np.ones(n_obs), half * np.ones(n_obs))


@dataclass(frozen=True)
class MomentAmbiguity:
    """Mean ellipsoid of size gamma1 and second-moment ball of size gamma2."""

    gamma1: float
    gamma2: float
    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    pinv_used: bool = False

    def __post_init__(self):
        if self.gamma1 < 0.0 or self.gamma2 < 0.0:
            raise ValueError("gamma1 and gamma2 must be nonnegative")
        sig = np.asarray(self.sigma_hat, dtype=float)
        object.__setattr__(self, "mu_hat", np.asarray(self.mu_hat, dtype=float))
        object.__setattr__(self, "sigma_hat", 0.5 * (sig + sig.T))
        if np.linalg.eigvalsh(self.sigma_hat).min() < -1e-8:
            raise ValueError("sigma_hat must be positive semidefinite")

    def to_json_dict(self) -> dict:
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "mu_hat": [float(v) for v in self.mu_hat],
            "sigma_hat": [[float(v) for v in row] for row in self.sigma_hat],
            "pinv_used": self.pinv_used,
        }


def solve_bmc(r, box: BoxSpec, rho: float, tail: TailSpec) -> SolveReport:
    """Box-worst-case mean-CVaR LP.

    Variables follow the dualized inner problems: (z, xi, omega) certify the
    worst-case CVaR expectation, (d, tau, nu) certify the worst-case mean.
    """
    returns = as_return_array(r)
    n_obs, n_assets = returns.shape
    if box.p0.shape[0] != n_obs:
        raise ValueError(f"box is over {box.p0.shape[0]} scenarios, data has {n_obs}")
    alpha = tail.tail_mass

    pi = cp.Variable(n_assets)
    u = cp.Variable(n_obs, nonneg=True)
    a = cp.Variable()
    zeta = cp.Variable()
    z = cp.Variable()
    xi = cp.Variable(n_obs, nonneg=True)
    omega = cp.Variable(n_obs, nonpos=True)
    d = cp.Variable()
    tau = cp.Variable(n_obs, nonpos=True)
    nu = cp.Variable(n_obs, nonneg=True)

    port = returns @ pi
    constraints = [
        a + (box.p0 @ u) / alpha + (box.eta_upper @ xi + box.eta_lower @ omega) / alpha
        <= zeta,
        z * np.ones(n_obs) + xi + omega == u,
        u >= -port - a,
        cp.sum(pi) == 1,
        pi >= 0,
        pi <= 1,
        d * np.ones(n_obs) + tau + nu == port,
        box.p0 @ port + box.eta_upper @ tau + box.eta_lower @ nu >= rho,
    ]
    problem = cp.Problem(cp.Minimize(zeta), constraints)
    status = _solve(problem)
    label = "BMC"
    if status in (STATUS_INFEASIBLE, STATUS_UNBOUNDED) or pi.value is None:
        return SolveReport(None, np.nan, status, np.nan, {}, label)

    weights = _renormalized(np.asarray(pi.value, dtype=float))
    a_star = float(a.value)
    # rebuild the box-worst CVaR directly: greedy inner maximization over p
    hinge = np.maximum(-(returns @ weights) - a_star, 0.0)
    worst_obj = a_star + box_worst_expectation(box, hinge) / alpha
    worst_mean = -box_worst_expectation(box, -(returns @ weights))
    kkt_residual = max(
        abs(worst_obj - float(problem.value)), max(0.0, rho - worst_mean)
    )
    duals = {"mean": float(constraints[-1].dual_value), "budget": float(constraints[3].dual_value)}
    return SolveReport(
        Portfolio(weights, a_star), float(problem.value), status, kkt_residual, duals, label
    )


def box_worst_expectation(box: BoxSpec, values: np.ndarray) -> float:
    """max_p p'values over the box, by greedy mass shifting.

    Sorting scenarios by value, the maximizer pushes eta to its upper bound
    on the largest values and to its lower bound on the smallest, subject to
    the perturbations netting to zero.
    """
    values = np.asarray(values, dtype=float)
    order = np.argsort(values)[::-1]
    eta = np.zeros_like(values)
    up_cap = box.eta_upper[order].copy()
    dn_cap = -box.eta_lower[order].copy()
    i, j = 0, values.size - 1
    while i < j:
        # moving mass from scenario j (small value) to i (large value) gains
        # values[i] - values[j] per unit; stop once that is no longer positive
        if values[order[i]] <= values[order[j]]:
            break
        moved = min(up_cap[i], dn_cap[j])
        if moved > 0.0:
            eta[order[i]] += moved
            eta[order[j]] -= moved
            up_cap[i] -= moved
            dn_cap[j] -= moved
        if up_cap[i] <= 0.0:
            i += 1
        if dn_cap[j] <= 0.0:
            j -= 1
    return float((box.p0 + eta) @ values)


def solve_kmc(
    r,
    amb: MomentAmbiguity,
    rho: float,
    tail: TailSpec,
    long_only: bool = True,
    alpha_is_confidence: bool = True,
) -> SolveReport:
    """Moment-ambiguity mean-CVaR SOCP.

    The risk scaling is sqrt(level / (1 - level)); by default the level is
    the confidence 1 - tail_mass (e.g. 0.95 -> 4.36), which penalizes risk,
    rather than the tail mass itself (0.05 -> 0.23), which would not.
    """
    returns = as_return_array(r)
    n_assets = returns.shape[1]
    if amb.mu_hat.shape[0] != n_assets:
        raise ValueError("moment ambiguity dimension does not match the data")
    level = tail.reporting_level if alpha_is_confidence else tail.tail_mass
    alpha_hat = np.sqrt(level / (1.0 - level))

    eigvals, eigvecs = np.linalg.eigh(amb.sigma_hat)
    root_sigma = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None)) @ eigvecs.T
    root_sigma_g2 = (
        eigvecs * np.sqrt(np.clip(eigvals + amb.gamma2, 0.0, None)) @ eigvecs.T
    )

    pi = cp.Variable(n_assets)
    j = cp.Variable()
    k = cp.Variable()
    constraints = [
        np.sqrt(amb.gamma1) * cp.norm(root_sigma @ pi, 2) <= amb.mu_hat @ pi - rho,
        cp.norm(root_sigma_g2 @ pi, 2) <= j,
        cp.norm(root_sigma @ pi, 2) <= k,
        cp.sum(pi) == 1,
    ]
    if long_only:
        constraints += [pi >= 0, pi <= 1]
    objective = -amb.mu_hat @ pi + np.sqrt(amb.gamma1) * k + alpha_hat * j
    problem = cp.Problem(cp.Minimize(objective), constraints)
    status = _solve(problem)
    label = "KMC"
    if status in (STATUS_INFEASIBLE, STATUS_UNBOUNDED) or pi.value is None:
        return SolveReport(None, np.nan, status, np.nan, {}, label)

    weights = _renormalized(np.asarray(pi.value, dtype=float))
    sig_norm = float(np.linalg.norm(root_sigma @ weights))
    sig_g2_norm = float(np.linalg.norm(root_sigma_g2 @ weights))
    rebuilt = (
        -float(amb.mu_hat @ weights)
        + np.sqrt(amb.gamma1) * sig_norm
        + alpha_hat * sig_g2_norm
    )
    mean_violation = max(
        0.0, rho + np.sqrt(amb.gamma1) * sig_norm - float(amb.mu_hat @ weights)
    )
    kkt_residual = max(abs(rebuilt - float(problem.value)), mean_violation)
    duals = {"mean": float(constraints[0].dual_value), "budget": float(constraints[3].dual_value)}
    # no hinge threshold in this model; report the worst-case VaR-free objective
    return SolveReport(
        Portfolio(weights, 0.0), float(problem.value), status, kkt_residual, duals, label
    )


def bootstrap_gammas(r, b_resamples: int = 500, level: float = 0.95, seed: int = 0) -> MomentAmbiguity:
    """Percentile-bootstrap ambiguity sizes for the moment model.

    Resamples rows with replacement; gamma1 is the level-quantile of the
    Mahalanobis distance of resampled means, gamma2 the level-quantile of
    the spectral distance of resampled second-moment matrices.
    """
    returns = as_return_array(r)
    n_obs = returns.shape[0]
    mu_hat = returns.mean(axis=0)
    sigma_hat = returns.T @ returns / n_obs

    pinv_used = False
    try:
        sigma_inv = np.linalg.inv(sigma_hat)
        if np.linalg.cond(sigma_hat) > 1e12:
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        sigma_inv = np.linalg.pinv(sigma_hat)
        pinv_used = True

    rng = np.random.default_rng(seed)
    mahal = np.empty(b_resamples)
    spectral = np.empty(b_resamples)
    for b in range(b_resamples):
        idx = rng.integers(0, n_obs, size=n_obs)
        sample = returns[idx]
        mu_b = sample.mean(axis=0)
        sigma_b = sample.T @ sample / n_obs
        diff = mu_b - mu_hat
        mahal[b] = diff @ sigma_inv @ diff
        spectral[b] = np.abs(np.linalg.eigvalsh(sigma_b - sigma_hat)).max()
    gamma1 = empirical_quantile(mahal, level)
    gamma2 = empirical_quantile(spectral, level)
    return MomentAmbiguity(gamma1, gamma2, mu_hat, sigma_hat, pinv_used)
