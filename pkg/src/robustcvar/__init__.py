"""Wasserstein-robust mean-CVaR portfolio construction and evaluation."""

from .backtest import BacktestResult, StrategySchedule, drift, run_backtest
from .baselines import (
    BoxSpec,
    MomentAmbiguity,
    bootstrap_gammas,
    solve_bmc,
    solve_kmc,
)
from .cvar import (
    SmoothingParam,
    TailSpec,
    empirical_cvar,
    empirical_var,
    loss,
    smooth_objective,
    smooth_plus,
)
from .market_data import (
    PriceSeries,
    ReturnsMatrix,
    compute_returns,
    load_prices,
    split,
)
from .metrics import MetricBundle, compute_metrics, cumulative_wealth
from .nonrobust import (
    Portfolio,
    SmoothKktState,
    SolveReport,
    multiplier_limits,
    solve_nmc,
    solve_smooth,
)
from .oracle import TinyInstance, brute_force_worst_mean, brute_force_worst_plus
from .radius import RadiusConfig, RadiusResult, sample_rwp_bound, select_radius, ztilde_covariance
from .robust import RobustConfig, solve_rmc1, solve_rmc2, worst_case_cvar_value, worst_case_mean
from .synthetic import synthetic_prices, synthetic_returns

__all__ = [
    "BacktestResult",
    "BoxSpec",
    "MetricBundle",
    "MomentAmbiguity",
    "Portfolio",
    "PriceSeries",
    "RadiusConfig",
    "RadiusResult",
    "ReturnsMatrix",
    "RobustConfig",
    "SmoothKktState",
    "SmoothingParam",
    "SolveReport",
    "StrategySchedule",
    "TailSpec",
    "TinyInstance",
    "bootstrap_gammas",
    "brute_force_worst_mean",
    "brute_force_worst_plus",
    "compute_metrics",
    "compute_returns",
    "cumulative_wealth",
    "drift",
    "empirical_cvar",
    "empirical_var",
    "load_prices",
    "loss",
    "multiplier_limits",
    "run_backtest",
    "sample_rwp_bound",
    "select_radius",
    "smooth_objective",
    "smooth_plus",
    "solve_bmc",
    "solve_kmc",
    "solve_nmc",
    "solve_rmc1",
    "solve_rmc2",
    "solve_smooth",
    "split",
    "synthetic_prices",
    "synthetic_returns",
    "worst_case_cvar_value",
    "worst_case_mean",
    "ztilde_covariance",
]

__version__ = "0.1.0"
