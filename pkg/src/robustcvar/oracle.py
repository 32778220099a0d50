"""Brute-force worst-case expectations over tiny Wasserstein balls.

Validates the dual reformulations on instances small enough to search
exhaustively. Both integrands are monotone along the ray ``-pi / ||pi||_2``
and the transport cost is isotropic, so every optimal perturbation moves
mass along that ray; what remains is how the transport budget is divided.

For the hinge integrand the worst measure may *split* an atom, keeping part
of its mass in place and sending the rest a long way (cheap under order 1,
tangency-optimal under order 2). An extreme-point argument shows at most
one atom needs a strict split, so the search runs over: a budget allocation
across atoms (simplex), a designated split atom, and its moved fraction.
Each candidate is scored on a dense grid with repeated local refinement.
The worst-mean integrand is linear, splitting never pays, and the search
reduces to the budget simplex alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ATOMS = 3
MAX_DIM = 2

_COARSE_STEPS = 33
_REFINE_ROUNDS = 5
_REFINE_KEEP = 3
_SHRINK = 0.12
_EPS_FLOOR = 1e-7


@dataclass(frozen=True)
class TinyInstance:
    atoms: np.ndarray  # (N, n) return vectors, uniform weights
    delta: float
    kappa: int

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        object.__setattr__(self, "atoms", atoms)
        if atoms.shape[0] > MAX_ATOMS or atoms.shape[1] > MAX_DIM:
            raise ValueError(
                f"instance {atoms.shape} too large for brute force "
                f"(max {MAX_ATOMS} atoms of dimension {MAX_DIM})"
            )
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        if self.kappa not in (1, 2):
            raise ValueError("kappa must be 1 or 2")


def _axis_grid(center: float, width: float, lo: float, hi: float, steps: int) -> np.ndarray:
    return np.linspace(max(lo, center - width), min(hi, center + width), steps)


def _plan_points(centers, width: float, dims: int) -> np.ndarray:
    """Cartesian grid of dims coordinates in [0, 1] around each center."""
    points = []
    for center in centers:
        axes = [
            _axis_grid(center[d] if center is not None else 0.5,
                       width if center is not None else 0.5,
                       0.0, 1.0, _COARSE_STEPS)
            for d in range(dims)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        points.append(np.column_stack([m.ravel() for m in mesh]))
    return np.unique(np.vstack(points), axis=0)


def _free_to_fractions(free: np.ndarray):
    """Map free simplex coordinates to full allocations; mask invalid rows."""
    rest = 1.0 - free.sum(axis=1)
    keep = rest >= -1e-12
    if not np.any(keep):
        return None, keep
    return np.column_stack([free[keep], np.clip(rest[keep], 0.0, 1.0)]), keep


def brute_force_worst_plus(inst: TinyInstance, pi, a: float) -> float:
    """sup of E_P[-pi'R - a]^+ over the transport ball around the atoms."""
    pi = np.asarray(pi, dtype=float)
    norm = float(np.linalg.norm(pi))
    x = -(inst.atoms @ pi) - a
    base = float(np.maximum(x, 0.0).mean())
    if inst.delta == 0.0 or norm == 0.0:
        return base
    n_atoms = inst.atoms.shape[0]
    mean_budget = inst.delta**inst.kappa  # budget on mean transport cost

    def evaluate(split_atom: int, coords: np.ndarray) -> np.ndarray:
        """coords columns: n_atoms-1 free fractions, then the moved fraction."""
        eps = np.clip(coords[:, -1], _EPS_FLOOR, 1.0)
        if n_atoms == 1:
            fractions = np.ones((coords.shape[0], 1))
            keep = np.ones(coords.shape[0], dtype=bool)
        else:
            fractions, keep = _free_to_fractions(coords[:, : n_atoms - 1])
            if fractions is None:
                return np.full(coords.shape[0], -np.inf)
            eps = eps[keep]
        cost = fractions * mean_budget  # per-atom share of the mean cost
        values = np.zeros(fractions.shape[0])
        for i in range(n_atoms):
            ci = cost[:, i]
            if i == split_atom:
                dist = (n_atoms * ci / eps) ** (1.0 / inst.kappa)
                moved = np.maximum(x[i] + norm * dist, 0.0)
                values += (1.0 - eps) * max(x[i], 0.0) + eps * moved
            else:
                dist = (n_atoms * ci) ** (1.0 / inst.kappa)
                values += np.maximum(x[i] + norm * dist, 0.0)
        out = np.full(coords.shape[0], -np.inf)
        out[keep] = values / n_atoms
        return out

    dims = n_atoms  # free fractions plus the split fraction
    best = base
    for split_atom in range(n_atoms):
        centers: list = [None]
        width = 1.0
        for _ in range(_REFINE_ROUNDS):
            points = _plan_points(centers, width, dims)
            vals = evaluate(split_atom, points)
            order = np.argsort(vals)[::-1][:_REFINE_KEEP]
            best = max(best, float(vals[order[0]]))
            centers = [points[i] for i in order]
            width *= _SHRINK
    return best


def brute_force_worst_mean(inst: TinyInstance, pi) -> float:
    """inf of E_P[pi'R] over the transport ball around the atoms."""
    pi = np.asarray(pi, dtype=float)
    norm = float(np.linalg.norm(pi))
    nominal = float((inst.atoms @ pi).mean())
    if inst.delta == 0.0 or norm == 0.0:
        return nominal
    n_atoms = inst.atoms.shape[0]
    mean_budget = inst.delta**inst.kappa

    if n_atoms == 1:
        return nominal - norm * inst.delta

    def evaluate(coords: np.ndarray) -> np.ndarray:
        fractions, keep = _free_to_fractions(coords)
        if fractions is None:
            return np.full(coords.shape[0], np.inf)
        cost = fractions * mean_budget
        dist = (n_atoms * cost) ** (1.0 / inst.kappa)
        out = np.full(coords.shape[0], np.inf)
        out[keep] = nominal - norm * dist.mean(axis=1)
        return out

    dims = n_atoms - 1
    best = nominal
    centers: list = [None]
    width = 1.0
    for _ in range(_REFINE_ROUNDS):
        points = _plan_points(centers, width, dims)
        vals = evaluate(points)
        order = np.argsort(vals)[:_REFINE_KEEP]
        best = min(best, float(vals[order[0]]))
        centers = [points[i] for i in order]
        width *= _SHRINK
    return best
