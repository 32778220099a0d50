"""Data-driven ambiguity-radius selection.

Pipeline: solve the smoothed problem, take the zero-temperature multiplier
limits, build the covariance of the bounding Gaussian, Monte-Carlo the
stochastic upper bound of the profile statistic, and read off its
high-confidence quantile eta. The radius is eta / N^(kappa/2); for order 2
that value budgets the squared transport cost, matching the order-2 dual.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cvar import SmoothingParam, TailSpec, empirical_quantile
from .errors import CovarianceError, DegenerateConstantError
from .market_data import as_return_array
from .nonrobust import SmoothKktState, multiplier_limits, solve_smooth

PSD_CLIP_TOL = 1e-8


@dataclass(frozen=True)
class RadiusConfig:
    kappa: int
    confidence: float = 0.95
    mc_samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.kappa not in (1, 2):
            raise ValueError(f"kappa must be 1 or 2, got {self.kappa}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.mc_samples < 100:
            raise ValueError(f"need at least 100 Monte-Carlo samples, got {self.mc_samples}")


@dataclass(frozen=True)
class RadiusResult:
    delta_star: float
    eta_quantile: float
    lambda_hats: tuple[float, float]
    covariance: np.ndarray
    c_constant: float | None  # order-2 only; sign recorded, magnitude used
    kappa: int
    confidence: float
    n_obs: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "delta_star": self.delta_star,
            "eta_quantile": self.eta_quantile,
            "lambda1_hat": self.lambda_hats[0],
            "lambda2_hat": self.lambda_hats[1],
            "c_constant": self.c_constant,
            "kappa": self.kappa,
            "confidence": self.confidence,
            "n_obs": self.n_obs,
            "seed": self.seed,
            "covariance": [[float(v) for v in row] for row in self.covariance],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def ztilde_covariance(r, lambda1_hat: float, lambda2_hat: float, tail: TailSpec) -> np.ndarray:
    """Second moment of (1/alpha + |l1|)*|R| + |l2|*1, symmetrized."""
    returns = as_return_array(r)
    v = (1.0 / tail.tail_mass + abs(lambda1_hat)) * np.abs(returns) + abs(lambda2_hat)
    cov = v.T @ v / returns.shape[0]
    return 0.5 * (cov + cov.T)


def sample_rwp_bound(cfg: RadiusConfig, cov: np.ndarray, c_constant: float = 0.0) -> np.ndarray:
    """Monte-Carlo draws of the asymptotic profile bound, deterministic in the seed.

    Order 1 returns ||Z||_2 samples; order 2 returns Z'Z / |c| samples. The
    Gaussian is factored by eigendecomposition with small negative
    eigenvalues clipped at zero.
    """
    cov = np.asarray(cov, dtype=float)
    eigvals, eigvecs = np.linalg.eigh(0.5 * (cov + cov.T))
    scale = max(1.0, float(eigvals.max(initial=0.0)))
    if eigvals.min(initial=0.0) < -PSD_CLIP_TOL * scale:
        raise CovarianceError(
            f"covariance has eigenvalue {eigvals.min():.3e}, below the clip tolerance"
        )
    factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    rng = np.random.default_rng(cfg.seed)
    z = rng.standard_normal((cfg.mc_samples, cov.shape[0])) @ factor.T
    if cfg.kappa == 1:
        return np.linalg.norm(z, axis=1)
    if abs(c_constant) < 1e-10:
        raise DegenerateConstantError(
            "order-2 curvature constant is numerically zero; bound undefined"
        )
    return (z**2).sum(axis=1) / abs(c_constant)


def _curvature_constant(returns, state: SmoothKktState, lam1: float, tail: TailSpec) -> float:
    """Mean of the limiting Jacobian scalar scaling the order-2 bound.

    Samples at the threshold count toward the tail side (the conservative
    branch carries the 1/alpha term).
    """
    a_sample = returns @ state.pi_star + state.a_star
    in_tail = a_sample <= 0.0
    alpha = tail.tail_mass
    values = np.where(in_tail, -(1.0 + alpha * lam1) / alpha, -lam1)
    return float(values.mean())


def select_radius(
    r,
    rho: float,
    tail: TailSpec,
    cfg: RadiusConfig,
    t: SmoothingParam = SmoothingParam(1e-4),
) -> RadiusResult:
    """Full radius-selection pipeline on an in-sample return matrix."""
    returns = as_return_array(r)
    n_obs = returns.shape[0]
    state = solve_smooth(returns, rho, tail, t)
    lam1, lam2 = multiplier_limits(state, returns, rho, tail)
    cov = ztilde_covariance(returns, lam1, lam2, tail)
    c_const = None
    if cfg.kappa == 2:
        c_const = _curvature_constant(returns, state, lam1, tail)
        if abs(c_const) < 1e-10:
            raise DegenerateConstantError(
                "order-2 curvature constant is numerically zero; cannot scale the bound"
            )
    samples = sample_rwp_bound(cfg, cov, c_const if c_const is not None else 0.0)
    eta = empirical_quantile(samples, cfg.confidence)
    delta_star = eta / n_obs ** (cfg.kappa / 2.0)
    return RadiusResult(
        delta_star=float(delta_star),
        eta_quantile=float(eta),
        lambda_hats=(lam1, lam2),
        covariance=cov,
        c_constant=c_const,
        kappa=cfg.kappa,
        confidence=cfg.confidence,
        n_obs=n_obs,
        seed=cfg.seed,
    )
