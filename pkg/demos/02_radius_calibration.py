"""Data-driven ambiguity radius and how it shrinks with the sample size.

The radius is the smallest ball that contains the optimality certificate of
the true model with the investor's confidence. Its Monte-Carlo construction:
solve the smoothed problem, take the zero-temperature multipliers, build the
bounding Gaussian, and read the confidence quantile eta off simulated draws
of the profile bound. The radius is then eta / N^(kappa/2): more data, less
ambiguity, at the parametric rate for order 1 and twice that for order 2.
"""

import numpy as np

from robustcvar import RadiusConfig, TailSpec, select_radius

rng = np.random.default_rng(23)
means = np.array([-0.002, 0.001, 0.004])
full = means + 0.012 * rng.standard_normal((4000, 3))
tail = TailSpec(0.05)
rho = 0.0025

for kappa in (1, 2):
    print(f"\norder kappa={kappa} (radius units: metric distance"
          f"{' squared' if kappa == 2 else ''})")
    print(f"{'N':>6} | {'eta(0.95)':>10} | {'delta*':>12} | {'lambda1_hat':>11}")
    print("-" * 50)
    deltas, sizes = [], (250, 500, 1000, 2000, 4000)
    for n in sizes:
        res = select_radius(full[:n], rho, tail, RadiusConfig(kappa=kappa, seed=7))
        deltas.append(res.delta_star)
        print(f"{n:6d} | {res.eta_quantile:10.4f} | {res.delta_star:12.6g} | {res.lambda_hats[0]:11.3f}")
    slope = np.polyfit(np.log(sizes), np.log(deltas), 1)[0]
    print(f"log-log slope of delta* vs N: {slope:+.3f}   (theory: {-kappa/2:+.1f})")

print(
    "\nThe quantile eta stabilizes once the multipliers converge, so the"
    "\nradius inherits the N^(-kappa/2) decay of the profile statistic."
)
