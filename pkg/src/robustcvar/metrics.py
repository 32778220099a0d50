"""Performance statistics for daily strategy returns.

Sharpe is annualized with sqrt(252) and a zero risk-free rate, and the
standard deviation uses the population (1/N) divisor; both conventions are
pinned by the regression tests against published statistics. CVaR is taken
over daily losses (negated returns) at the configured tail mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cvar import TailSpec, empirical_cvar

TRADING_DAYS = 252
ROLLING_WINDOW = 252


@dataclass(frozen=True)
class MetricBundle:
    mean_daily: float
    std_daily: float
    cvar_tail: float
    sharpe_annualized: float
    mean_over_cvar: float
    max_drawdown: float
    rolling_sharpe: np.ndarray  # one value per trailing 252-day window
    tail_mass: float

    def to_row(self) -> dict:
        level = 1.0 - self.tail_mass
        return {
            "Mean (Daily)": self.mean_daily,
            "Std Dev (Daily)": self.std_daily,
            f"CVaR_{level:g}": self.cvar_tail,
            "Sharpe (Annualized)": self.sharpe_annualized,
            "Mean/CVaR": self.mean_over_cvar,
            "Max Drawdown": self.max_drawdown,
        }


def annualized_sharpe(mean_daily: float, std_daily: float) -> float:
    if std_daily == 0.0:
        return math.nan
    return math.sqrt(TRADING_DAYS) * mean_daily / std_daily


def cumulative_wealth(daily_returns, initial: float = 1.0) -> np.ndarray:
    """Compounded wealth path w_t = w_{t-1} * (1 + r_t), starting at initial.

    A return of -100% or worse marks bankruptcy: the path is truncated at
    the first zero.
    """
    rets = np.asarray(daily_returns, dtype=float)
    growth = 1.0 + rets
    if np.any(growth <= 0.0):
        stop = int(np.argmax(growth <= 0.0))
        path = initial * np.concatenate([[1.0], np.cumprod(growth[:stop])])
        return np.append(path, 0.0)
    return initial * np.concatenate([[1.0], np.cumprod(growth)])


def max_drawdown(wealth: np.ndarray) -> float:
    wealth = np.asarray(wealth, dtype=float)
    peaks = np.maximum.accumulate(wealth)
    return float(np.max(1.0 - wealth / peaks))


def rolling_sharpe(daily_returns, window: int = ROLLING_WINDOW) -> np.ndarray:
    """Annualized Sharpe over each trailing window; empty if too short."""
    rets = np.asarray(daily_returns, dtype=float)
    if rets.size < window:
        return np.empty(0)
    out = np.empty(rets.size - window + 1)
    for i in range(out.size):
        chunk = rets[i : i + window]
        out[i] = annualized_sharpe(float(chunk.mean()), float(chunk.std()))
    return out


def compute_metrics(daily_returns, tail: TailSpec) -> MetricBundle:
    rets = np.asarray(daily_returns, dtype=float)
    if rets.size < 2:
        raise ValueError(f"need at least 2 observations, got {rets.size}")
    mean_daily = float(rets.mean())
    std_daily = float(rets.std())
    cvar_tail = empirical_cvar(-rets, tail)
    sharpe = annualized_sharpe(mean_daily, std_daily)
    mean_over_cvar = mean_daily / cvar_tail if cvar_tail != 0.0 else math.nan
    wealth = cumulative_wealth(rets)
    return MetricBundle(
        mean_daily=mean_daily,
        std_daily=std_daily,
        cvar_tail=cvar_tail,
        sharpe_annualized=sharpe,
        mean_over_cvar=mean_over_cvar,
        max_drawdown=max_drawdown(wealth),
        rolling_sharpe=rolling_sharpe(rets),
        tail_mass=tail.tail_mass,
    )
