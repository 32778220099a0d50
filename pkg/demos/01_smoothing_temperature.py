"""How the softplus temperature trades smoothness against fidelity.

The hinge [x]^+ in the mean-CVaR objective is replaced by t*ln(1+exp(x/t))
so that the problem has derivatives everywhere (the multipliers of the
smooth problem feed the ambiguity-radius calibration). The surrogate sits
within t*ln2 of the hinge, so the optimal values of the smooth and
piecewise-linear problems can never drift apart by more than
t*ln2/tail_mass. This script sweeps the temperature and shows the gap
collapsing; below t ~ 1e-4 the two problems are numerically the same.
"""

import math

import numpy as np

from robustcvar import SmoothingParam, TailSpec, solve_nmc, solve_smooth, synthetic_returns

tail = TailSpec(0.05)
returns = synthetic_returns(504, 5, seed=42)
rho = float(returns.returns.mean(axis=0).mean())

lp = solve_nmc(returns, rho, tail, long_only=False, mean_equality=True)
print(f"piecewise-linear optimum (equality target {rho:.2e}): {lp.objective:.8f}\n")

print(f"{'t':>8} | {'smooth optimum':>14} | {'gap':>10} | {'bound t*ln2/alpha':>18}")
print("-" * 62)
for t in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5):
    state = solve_smooth(returns, rho, tail, SmoothingParam(t))
    gap = state.objective - lp.objective
    bound = t * math.log(2) / tail.tail_mass
    print(f"{t:8.0e} | {state.objective:14.8f} | {gap:10.3e} | {bound:18.3e}")

print(
    "\nThe gap is always inside the sandwich bound and far below it in"
    "\npractice: only samples within a few t of the loss threshold feel"
    "\nthe smoothing. The multipliers stabilize on the same schedule:"
)
print(f"\n{'t':>8} | {'lambda1':>10} | {'lambda2':>10}")
print("-" * 36)
for t in (1e-2, 1e-3, 1e-4, 1e-5):
    state = solve_smooth(returns, rho, tail, SmoothingParam(t))
    print(f"{t:8.0e} | {state.lambda1:10.5f} | {state.lambda2:10.6f}")
