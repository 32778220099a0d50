"""Loss, empirical VaR/CVaR, and the softplus surrogate for the hinge term.

Conventions used everywhere in this package:

* ``tail_mass`` is the probability mass in the loss tail (e.g. 0.05); reports
  label the same quantity as CVaR at confidence ``1 - tail_mass``.
* CVaR is computed in closed form from the sorted losses; the minimization
  form ``min_a a + mean([L - a]^+) / tail_mass`` is kept in the test suite as
  an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TailSpec:
    """Tail mass of the loss distribution used by VaR/CVaR."""

    tail_mass: float

    def __post_init__(self):
        if not 0.0 < self.tail_mass < 1.0:
            raise ValueError(f"tail_mass must be in (0, 1), got {self.tail_mass}")

    @property
    def reporting_level(self) -> float:
        return 1.0 - self.tail_mass


@dataclass(frozen=True)
class SmoothingParam:
    """Temperature of the softplus surrogate replacing max(x, 0)."""

    t: float

    def __post_init__(self):
        if not self.t > 0.0:
            raise ValueError(f"smoothing parameter must be positive, got {self.t}")


def loss(pi: np.ndarray, r: np.ndarray) -> float:
    """Portfolio loss -pi'r for a single return vector."""
    pi = np.asarray(pi, dtype=float)
    r = np.asarray(r, dtype=float)
    if pi.shape != r.shape:
        raise ValueError(f"dimension mismatch: weights {pi.shape} vs returns {r.shape}")
    return float(-pi @ r)


def empirical_quantile(samples: np.ndarray, level: float) -> float:
    """Left-continuous inverse of the empirical CDF: min{x : F(x) >= level}."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empirical quantile of an empty sample")
    return float(np.quantile(samples, level, method="inverted_cdf"))


def empirical_var(losses: np.ndarray, tail: TailSpec) -> float:
    """Empirical value-at-risk of the losses at the reporting level."""
    return empirical_quantile(losses, tail.reporting_level)


def empirical_cvar(losses: np.ndarray, tail: TailSpec) -> float:
    """Empirical CVaR: average of the worst ``tail_mass`` fraction of losses.

    Evaluates the minimization form at its known minimizer a* = VaR, which is
    exact for the empirical measure: VaR + mean([L - VaR]^+) / tail_mass.
    """
    losses = np.asarray(losses, dtype=float)
    if losses.size == 0:
        raise ValueError("empirical CVaR of an empty sample")
    var = empirical_var(losses, tail)
    excess = np.maximum(losses - var, 0.0)
    return var + float(excess.mean()) / tail.tail_mass


def smooth_plus(t: SmoothingParam | float, x) :
    """Softplus t*ln(exp(x/t) + 1), evaluated in overflow-safe form.

    Always sits in [max(x, 0), max(x, 0) + t*ln 2]. Accepts scalars or arrays.
    """
    tv = t.t if isinstance(t, SmoothingParam) else float(t)
    if tv <= 0.0:
        raise ValueError("smoothing parameter must be positive")
    x = np.asarray(x, dtype=float)
    z = x / tv
    # max(x, 0) + t*log1p(exp(-|x|/t)) is stable on both branches
    out = np.maximum(x, 0.0) + tv * np.log1p(np.exp(-np.abs(z)))
    return out if out.ndim else float(out)


def smooth_objective(pi, a, t: SmoothingParam, returns: np.ndarray, tail: TailSpec) -> float:
    """Smoothed mean-CVaR objective a + mean(softplus(-pi'R_i - a)) / tail_mass."""
    pi = np.asarray(pi, dtype=float)
    returns = np.asarray(returns, dtype=float)
    if returns.ndim != 2 or returns.shape[1] != pi.shape[0]:
        raise ValueError(
            f"dimension mismatch: returns {returns.shape} vs weights {pi.shape}"
        )
    x = -(returns @ pi) - a
    return float(a + np.mean(smooth_plus(t, x)) / tail.tail_mass)
