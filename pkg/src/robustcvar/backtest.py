"""Threshold-rebalancing backtest with linear transaction costs.

Holdings evolve multiplicatively between rebalances. Each day the realized
weights (dollar holdings normalized by wealth) are compared with the
standing target; when any asset's relative drift strictly exceeds the
threshold, holdings snap to the target in force that day. The trade cost
is ``tc_rate * sum_i |pre-trade dollars_i - post-trade dollars_i|``,
either deducted from wealth (default) or only reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StrategySchedule:
    """Target weights published at given day indices, held until replaced."""

    targets: tuple[tuple[int, np.ndarray], ...]
    lookback: int = 504

    def __post_init__(self):
        cleaned = []
        last_day = None
        for day, weights in self.targets:
            w = np.asarray(weights, dtype=float)
            if abs(w.sum() - 1.0) > 1e-8:
                raise ValueError(f"target at day {day} sums to {w.sum()!r}, not 1")
            if last_day is not None and day <= last_day:
                raise ValueError("target days must be strictly increasing")
            last_day = day
            cleaned.append((int(day), w))
        if not cleaned or cleaned[0][0] != 0:
            raise ValueError("schedule must publish a target at day 0")
        object.__setattr__(self, "targets", tuple(cleaned))

    @classmethod
    def static(cls, weights, lookback: int = 504) -> "StrategySchedule":
        return cls(targets=((0, np.asarray(weights, dtype=float)),), lookback=lookback)

    def target_at(self, day: int) -> np.ndarray:
        current = self.targets[0][1]
        for start, weights in self.targets:
            if start > day:
                break
            current = weights
        return current


@dataclass(frozen=True)
class RebalanceEvent:
    day: int
    cost: float
    turnover: float  # sum of absolute dollar trades


@dataclass(frozen=True)
class BacktestResult:
    wealth: np.ndarray  # length N+1, wealth[0] is post-initial-trade
    daily_returns: np.ndarray  # length N
    weights_path: np.ndarray  # (N+1, n) realized weights
    rebalance_days: tuple[int, ...]
    events: tuple[RebalanceEvent, ...]
    total_tc: float
    charged_tc: bool


def drift(current_holdings: np.ndarray, target: np.ndarray) -> float:
    """Largest relative deviation of normalized holdings from the target.

    Assets with zero holdings and zero target contribute nothing; a zero
    holding with a nonzero target forces a rebalance (infinite drift).
    """
    holdings = np.asarray(current_holdings, dtype=float)
    target = np.asarray(target, dtype=float)
    total = holdings.sum()
    if total <= 0.0:
        raise ValueError(f"portfolio value must be positive, got {total!r}")
    weights = holdings / total
    out = 0.0
    for w, p in zip(weights, target):
        if w == 0.0:
            if p != 0.0:
                return np.inf
            continue
        out = max(out, abs(w - p) / abs(w))
    return out


def run_backtest(
    targets: StrategySchedule,
    r_out,
    threshold: float = 0.05,
    tc_rate: float = 0.002,
    charge_tc: bool = True,
) -> BacktestResult:
    """Simulate the drift-triggered strategy over out-of-sample returns."""
    from .market_data import as_return_array

    returns = as_return_array(r_out)
    n_obs, n_assets = returns.shape
    if targets.targets[0][1].shape[0] != n_assets:
        raise ValueError(
            f"targets have {targets.targets[0][1].shape[0]} assets, returns have {n_assets}"
        )
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")

    events: list[RebalanceEvent] = []
    wealth = np.empty(n_obs + 1)
    weights_path = np.empty((n_obs + 1, n_assets))
    rebalance_days: list[int] = []

    target = targets.target_at(0)
    initial_turnover = float(np.abs(target).sum())
    initial_cost = tc_rate * initial_turnover if charge_tc else 0.0
    wealth_now = 1.0 - initial_cost
    holdings = wealth_now * target
    wealth[0] = wealth_now
    weights_path[0] = target
    total_tc = tc_rate * initial_turnover
    events.append(RebalanceEvent(day=0, cost=tc_rate * initial_turnover, turnover=initial_turnover))

    for day in range(1, n_obs + 1):
        holdings = holdings * (1.0 + returns[day - 1])
        wealth_now = holdings.sum()
        if wealth_now <= 0.0:
            raise ValueError(f"wealth hit {wealth_now!r} on day {day}; cannot continue")
        target = targets.target_at(day)
        if drift(holdings, target) > threshold:
            desired = wealth_now * target
            turnover = float(np.abs(holdings - desired).sum())
            cost = tc_rate * turnover
            total_tc += cost
            if charge_tc:
                wealth_now -= cost
            holdings = wealth_now * target
            rebalance_days.append(day)
            events.append(RebalanceEvent(day=day, cost=cost, turnover=turnover))
        wealth[day] = wealth_now
        weights_path[day] = holdings / wealth_now if wealth_now > 0 else target

    daily_returns = wealth[1:] / wealth[:-1] - 1.0
    return BacktestResult(
        wealth=wealth,
        daily_returns=daily_returns,
        weights_path=weights_path,
        rebalance_days=tuple(rebalance_days),
        events=tuple(events),
        total_tc=total_tc,
        charged_tc=charge_tc,
    )
