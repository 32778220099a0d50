import numpy as np
import pytest

from robustcvar import StrategySchedule, drift, run_backtest


def schedule(weights):
    return StrategySchedule.static(np.asarray(weights, dtype=float))


class TestDrift:
    def test_exact_target_is_zero(self):
        assert drift(np.array([0.3, 0.7]), np.array([0.3, 0.7])) == 0.0

    def test_boundary_is_not_a_trigger(self):
        # 5% relative deviation on both legs: equals the threshold, strict >
        d = drift(np.array([0.5, 0.5]), np.array([0.475, 0.525]))
        assert d == pytest.approx(0.05)

    def test_hand_example(self):
        d = drift(np.array([0.6, 0.4]), np.array([0.5, 0.5]))
        assert d == pytest.approx(0.25)  # max(1/6, 1/4)

    def test_zero_holding_with_target_forces_rebalance(self):
        assert drift(np.array([1.0, 0.0]), np.array([0.9, 0.1])) == np.inf

    def test_zero_holding_zero_target_ignored(self):
        assert drift(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 0.0

    def test_nonpositive_value_rejected(self):
        with pytest.raises(ValueError):
            drift(np.array([0.0, 0.0]), np.array([0.5, 0.5]))

    def test_scale_invariance(self, rng):
        for _ in range(20):
            h = rng.uniform(0.1, 2.0, size=3)
            t = rng.dirichlet(np.ones(3))
            assert drift(h, t) == pytest.approx(drift(10.0 * h, t))


class TestRunBacktest:
    def test_identical_returns_never_rebalance(self):
        returns = np.full((100, 3), 0.001)  # every asset earns the same
        res = run_backtest(schedule([0.2, 0.3, 0.5]), returns, charge_tc=True)
        assert res.rebalance_days == ()
        assert res.total_tc == pytest.approx(0.002)  # initial purchase only

    def test_hand_tc_example(self):
        # one period: holdings grow to (0.6, 0.5); target (0.5, 0.5) snaps
        # them to (0.55, 0.55): trade cost 0.002 * (0.05 + 0.05) = 0.0002
        returns = np.array([[0.2, 0.0]])
        res = run_backtest(
            schedule([0.5, 0.5]), returns, threshold=0.01, tc_rate=0.002, charge_tc=False
        )
        assert res.rebalance_days == (1,)
        event = res.events[-1]
        assert event.cost == pytest.approx(0.0002)
        assert res.total_tc == pytest.approx(0.002 + 0.0002)

    def test_infinite_threshold_is_buy_and_hold(self, rng):
        returns = rng.normal(0.0005, 0.01, size=(60, 3))
        target = np.array([0.5, 0.3, 0.2])
        res = run_backtest(schedule(target), returns, threshold=np.inf, charge_tc=False)
        expected = float(target @ np.prod(1.0 + returns, axis=0))
        assert res.wealth[-1] == pytest.approx(expected, rel=1e-12)
        assert res.rebalance_days == ()

    def test_tc_wealth_dominated_pointwise(self, rng):
        returns = rng.normal(0.0004, 0.012, size=(200, 3))
        target = np.array([0.4, 0.35, 0.25])
        with_tc = run_backtest(schedule(target), returns, charge_tc=True)
        without = run_backtest(schedule(target), returns, charge_tc=False)
        assert np.all(with_tc.wealth <= without.wealth + 1e-15)

    def test_stopping_times_match_across_tc_modes(self, rng):
        returns = rng.normal(0.0004, 0.015, size=(250, 3))
        target = np.array([0.4, 0.35, 0.25])
        charged = run_backtest(schedule(target), returns, charge_tc=True)
        reported = run_backtest(schedule(target), returns, charge_tc=False)
        assert charged.rebalance_days == reported.rebalance_days
        assert all(a < b for a, b in zip(charged.rebalance_days, charged.rebalance_days[1:]))

    def test_rebalance_count_monotone_in_threshold(self, rng):
        returns = rng.normal(0.0004, 0.015, size=(250, 3))
        target = np.array([0.4, 0.35, 0.25])
        counts = [
            len(run_backtest(schedule(target), returns, threshold=th).rebalance_days)
            for th in (0.01, 0.05, 0.2)
        ]
        assert counts[0] >= counts[1] >= counts[2]

    def test_initial_wealth_charged(self):
        returns = np.zeros((5, 2))
        res = run_backtest(schedule([0.5, 0.5]), returns, charge_tc=True)
        assert res.wealth[0] == pytest.approx(1.0 - 0.002)
        res_free = run_backtest(schedule([0.5, 0.5]), returns, charge_tc=False)
        assert res_free.wealth[0] == 1.0

    def test_weights_path_tracks_targets(self):
        returns = np.zeros((4, 2))
        res = run_backtest(schedule([0.7, 0.3]), returns)
        assert np.allclose(res.weights_path, [0.7, 0.3])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            run_backtest(schedule([0.5, 0.5]), np.zeros((4, 3)))

    def test_daily_returns_consistent_with_wealth(self, rng):
        returns = rng.normal(0.0, 0.01, size=(50, 2))
        res = run_backtest(schedule([0.6, 0.4]), returns)
        rebuilt = res.wealth[0] * np.cumprod(1.0 + res.daily_returns)
        assert np.allclose(rebuilt, res.wealth[1:], rtol=1e-12)

    def test_scheduled_target_switch_applies_on_trigger(self):
        # target switches at day 2; growth of asset 1 trips the drift test
        returns = np.array([[0.0, 0.0], [0.3, 0.0], [0.0, 0.0]])
        sched = StrategySchedule(
            targets=((0, np.array([0.5, 0.5])), (2, np.array([0.2, 0.8])))
        )
        res = run_backtest(sched, returns, threshold=0.05, charge_tc=False)
        assert 2 in res.rebalance_days
        assert np.allclose(res.weights_path[-1], [0.2, 0.8])


class TestStrategySchedule:
    def test_requires_day_zero(self):
        with pytest.raises(ValueError):
            StrategySchedule(targets=((1, np.array([1.0])),))

    def test_rejects_unnormalized_target(self):
        with pytest.raises(ValueError):
            StrategySchedule(targets=((0, np.array([0.5, 0.6])),))

    def test_forward_fill(self):
        sched = StrategySchedule(
            targets=((0, np.array([1.0, 0.0])), (5, np.array([0.0, 1.0])))
        )
        assert np.allclose(sched.target_at(4), [1.0, 0.0])
        assert np.allclose(sched.target_at(5), [0.0, 1.0])
        assert np.allclose(sched.target_at(99), [0.0, 1.0])
