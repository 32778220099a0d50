import numpy as np
import pytest

from robustcvar import (
    TinyInstance,
    brute_force_worst_mean,
    brute_force_worst_plus,
    worst_case_mean,
)


def test_instance_size_limits():
    with pytest.raises(ValueError):
        TinyInstance(atoms=np.zeros((4, 2)), delta=0.1, kappa=1)
    with pytest.raises(ValueError):
        TinyInstance(atoms=np.zeros((2, 3)), delta=0.1, kappa=1)
    with pytest.raises(ValueError):
        TinyInstance(atoms=np.zeros((2, 2)), delta=0.1, kappa=3)


def test_zero_radius_is_empirical_plus_mean():
    atoms = np.array([[0.05, -0.02], [-0.01, 0.03]])
    pi = np.array([0.6, 0.4])
    a = 0.0
    inst = TinyInstance(atoms=atoms, delta=0.0, kappa=1)
    expected = np.maximum(-(atoms @ pi) - a, 0.0).mean()
    assert brute_force_worst_plus(inst, pi, a) == expected


def test_single_atom_active_closed_form():
    # one active atom moved the full budget along -pi/|pi|
    atoms = np.array([[0.01, 0.02]])
    pi = np.array([0.3, 0.7])
    a = -0.05  # -pi'R - a = -0.017 + 0.05 > 0
    delta = 0.02
    inst = TinyInstance(atoms=atoms, delta=delta, kappa=1)
    x = float(-(atoms[0] @ pi) - a)
    assert x >= 0
    expected = x + delta * np.linalg.norm(pi)
    assert brute_force_worst_plus(inst, pi, a) == pytest.approx(expected, abs=1e-6)


def test_active_region_matches_norm_penalty_form(rng):
    # all atoms active: sup equals mean-plus + delta*|pi| exactly
    for _ in range(20):
        n_atoms = int(rng.integers(1, 4))
        atoms = rng.normal(0.0, 0.05, size=(n_atoms, 2))
        pi = rng.uniform(0.2, 0.8, size=2)
        pi = pi / pi.sum()
        losses = -(atoms @ pi)
        a = float(losses.min()) - 0.01  # every atom strictly active
        delta = float(rng.uniform(0.005, 0.1))
        inst = TinyInstance(atoms=atoms, delta=delta, kappa=1)
        expected = np.maximum(losses - a, 0.0).mean() + delta * np.linalg.norm(pi)
        got = brute_force_worst_plus(inst, pi, a)
        assert got == pytest.approx(expected, abs=1e-4)


def test_kappa2_split_atom_tangency():
    # deep inactive atom: worst measure moves a fraction eps = 4*delta^2*|x|...
    # checked against the hand-derived tangency value c*|pi|^2/(4|x|) per unit
    pi = np.array([0.5, 0.5])
    norm = float(np.linalg.norm(pi))
    atoms = np.array([[0.10, 0.10]])  # x = -0.1 - a
    a = -0.04  # x = -0.06
    delta = 0.03  # mean squared budget delta^2 = 9e-4
    x = float(-(atoms[0] @ pi) - a)
    assert x < 0
    inst = TinyInstance(atoms=atoms, delta=delta, kappa=2)
    got = brute_force_worst_plus(inst, pi, a)
    expected_split = delta**2 * norm**2 / (4.0 * abs(x))
    whole = max(x + norm * delta, 0.0)
    assert got == pytest.approx(max(expected_split, whole), rel=1e-3)
    assert got > whole  # splitting strictly beats the whole-atom move here


def test_worst_mean_matches_closed_form(rng):
    for kappa in (1, 2):
        for _ in range(10):
            n_atoms = int(rng.integers(1, 4))
            atoms = rng.normal(0.0, 0.05, size=(n_atoms, 2))
            pi = rng.normal(size=2)
            delta = float(rng.uniform(0.001, 0.1))
            inst = TinyInstance(atoms=atoms, delta=delta, kappa=kappa)
            got = brute_force_worst_mean(inst, pi)
            cfg_delta = delta if kappa == 1 else delta**2
            expected = worst_case_mean(pi, atoms, cfg_delta, kappa)
            assert got == pytest.approx(expected, abs=1e-6)


def test_worst_mean_zero_portfolio():
    inst = TinyInstance(atoms=np.array([[0.02, 0.01]]), delta=0.1, kappa=1)
    assert brute_force_worst_mean(inst, np.zeros(2)) == 0.0


def test_oracle_monotone_in_delta(rng):
    atoms = rng.normal(0.0, 0.04, size=(3, 2))
    pi = np.array([0.4, 0.6])
    a = 0.01
    for kappa in (1, 2):
        vals = [
            brute_force_worst_plus(TinyInstance(atoms=atoms, delta=d, kappa=kappa), pi, a)
            for d in (0.0, 0.01, 0.05, 0.1)
        ]
        assert all(v1 <= v2 + 1e-9 for v1, v2 in zip(vals, vals[1:]))


def test_oracle_never_exceeds_norm_penalty_dual(rng):
    # weak duality for kappa=1: sup <= mean-plus + delta*|pi|
    for _ in range(15):
        atoms = rng.normal(0.0, 0.05, size=(int(rng.integers(1, 4)), 2))
        pi = rng.uniform(0.1, 0.9, size=2)
        a = float(rng.normal(0.0, 0.05))
        delta = float(rng.uniform(0.005, 0.1))
        inst = TinyInstance(atoms=atoms, delta=delta, kappa=1)
        dual = np.maximum(-(atoms @ pi) - a, 0.0).mean() + delta * np.linalg.norm(pi)
        assert brute_force_worst_plus(inst, pi, a) <= dual + 1e-6
