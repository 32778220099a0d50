"""Deterministic synthetic market data for demos and end-to-end tests."""

from __future__ import annotations

import datetime as dt

import numpy as np

from .market_data import PriceSeries, ReturnsMatrix


def synthetic_returns(
    n_obs: int,
    n_assets: int,
    seed: int,
    daily_vol: float = 0.012,
    daily_mean: float = 5e-4,
) -> ReturnsMatrix:
    """Correlated Gaussian daily returns with heterogeneous means and vols."""
    rng = np.random.default_rng(seed)
    means = daily_mean * rng.uniform(0.2, 1.8, size=n_assets)
    vols = daily_vol * rng.uniform(0.6, 1.6, size=n_assets)
    # one common factor plus idiosyncratic noise
    betas = rng.uniform(0.3, 1.0, size=n_assets)
    common = rng.standard_normal(n_obs)
    idio = rng.standard_normal((n_obs, n_assets))
    z = 0.6 * np.outer(common, betas) + 0.8 * idio
    rets = means + vols * z
    rets = np.maximum(rets, -0.95)
    start = dt.date(2000, 1, 3)
    dates = tuple(start + dt.timedelta(days=i) for i in range(n_obs))
    tickers = tuple(f"A{i:02d}" for i in range(n_assets))
    return ReturnsMatrix(dates=dates, tickers=tickers, returns=rets)


def synthetic_prices(n_days: int, n_assets: int, seed: int, start_price: float = 100.0) -> PriceSeries:
    """Price paths compounded from synthetic_returns, starting at start_price."""
    rets = synthetic_returns(n_days - 1, n_assets, seed)
    levels = start_price * np.cumprod(
        np.vstack([np.ones(n_assets), 1.0 + rets.returns]), axis=0
    )
    start = dt.date(2000, 1, 2)
    dates = tuple(start + dt.timedelta(days=i) for i in range(n_days))
    return PriceSeries(dates=dates, tickers=rets.tickers, prices=levels)
