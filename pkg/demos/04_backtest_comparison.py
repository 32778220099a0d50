"""Five strategies through the drift-triggered backtest, with trade costs.

Builds a synthetic market, estimates each model on the first two trading
years, then lets the holdings run over the remaining sample: rebalancing
only when an asset's realized weight drifts more than 5% from target, with
0.2% linear costs on every trade. Ends with the usual performance table.
"""

from robustcvar import (
    BoxSpec,
    MomentAmbiguity,
    RobustConfig,
    StrategySchedule,
    TailSpec,
    bootstrap_gammas,
    compute_metrics,
    run_backtest,
    solve_bmc,
    solve_kmc,
    solve_nmc,
    solve_rmc1,
    solve_rmc2,
    split,
    synthetic_returns,
)

tail = TailSpec(0.05)
market = synthetic_returns(1100, 5, seed=11)
r_in, r_out = split(market, 504)
rho = -0.01
delta = 2e-4  # modest fixed ball; demos 02 shows the data-driven choice

solvers = {
    "NMC": lambda: solve_nmc(r_in, rho, tail),
    "BMC": lambda: solve_bmc(r_in, BoxSpec.symmetric(r_in.n_obs, 0.3), rho, tail),
    "KMC": lambda: solve_kmc(r_in, bootstrap_gammas(r_in, seed=1), rho, tail),
    "RMC1": lambda: solve_rmc1(r_in, RobustConfig(delta=delta, kappa=1, tail=tail, rho=rho)),
    "RMC2": lambda: solve_rmc2(r_in, RobustConfig(delta=delta, kappa=2, tail=tail, rho=rho)),
}

print(f"{'strategy':>8} | {'in-sample obj':>13} | {'final wealth':>12} | "
      f"{'rebalances':>10} | {'total TC':>9} | {'Sharpe':>7} | {'Mean/CVaR':>9}")
print("-" * 90)
for name, solve in solvers.items():
    rep = solve()
    if rep.status != "optimal":
        print(f"{name:>8} | solve failed: {rep.status}")
        continue
    schedule = StrategySchedule.static(rep.portfolio.weights)
    result = run_backtest(schedule, r_out, threshold=0.05, tc_rate=0.002, charge_tc=True)
    bundle = compute_metrics(result.daily_returns, tail)
    print(
        f"{name:>8} | {rep.objective:13.6f} | {result.wealth[-1]:12.4f} | "
        f"{len(result.rebalance_days):10d} | {result.total_tc:9.5f} | "
        f"{bundle.sharpe_annualized:7.3f} | {bundle.mean_over_cvar:9.5f}"
    )

print(
    "\nThe same comparison, with re-estimation schedules, figure-data CSV"
    "\nexports and reproducibility hashes, is available from the CLI:"
    "\n  robustcvar compare --data prices.csv --rho -0.01 --delta 2e-4"
)
