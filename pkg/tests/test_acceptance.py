"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the report lines.
"""
import time

import numpy as np
import pytest

from csgreen.basis import BasisSpec, PotentialSpec, overlap_matrix, power_matrix
from csgreen.mcf import green_matrix, hamiltonian_blocks
from csgreen.reference import CORNELL, COULOMB_QUADRATIC
from csgreen.spectral import find_eigenvalues, rayleigh_quotient, residue_at, sweep_b
from oracles import (
    closed_form_matrix,
    closed_form_r,
    closed_form_r2,
    dense_green_corner,
    quadrature_power,
    random_confining,
)


def report(number, title, value, bound, elapsed=None, budget=None):
    ok = value < bound and (budget is None or elapsed < budget)
    timing = "" if elapsed is None else f"; {elapsed:.1f} s" + (f" (budget {budget:g} s)" if budget else "")
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title}: {value:.3e} < {bound:g}{timing}")
    return ok


def table_column(basis, pot, window, ref, N):
    t0 = time.perf_counter()
    spec = find_eigenvalues(basis, pot, window, N, count_limit=len(ref), K_max=2**16)
    elapsed = time.perf_counter() - t0
    got = {lv.index: lv.E for lv in spec.levels}
    err = max(abs(got.get(n, np.inf) - E) / abs(E) for n, E in enumerate(ref))
    return err, elapsed, spec


def test_criterion_1_cornell_table():
    basis, pot = BasisSpec(3, 0, 1.0), PotentialSpec({-1: -1.0, 1: 1.0})
    err, elapsed, spec = table_column(basis, pot, (0.0, 16.5), CORNELL, N=3)
    assert hamiltonian_blocks(basis, pot).m == 2 and spec.K <= 2**16
    assert report(1, "Cornell, 20 levels, max rel err", err, 1e-8, elapsed, 60)


def test_criterion_2_coulomb_quadratic_table():
    basis, pot = BasisSpec(2, 0, 1.0), PotentialSpec({-1: -1.0, 2: 0.5})
    err, elapsed, spec = table_column(basis, pot, (-3.0, 39.0), COULOMB_QUADRATIC, N=3)
    assert basis.L == -0.5 and spec.K <= 2**16
    assert report(2, "Coulomb + r^2/2 (D=2), 20 levels, max rel err", err, 1e-8, elapsed, 60)


def test_criterion_3_oscillator_exact_n0():
    worst = 0.0
    for D in (3, 2):
        basis, pot = BasisSpec(D, 0, 1.0), PotentialSpec({2: 0.5})
        spec = find_eigenvalues(basis, pot, (0.0, 12.0 + basis.L), N=0)
        exact = 2 * np.arange(len(spec)) + basis.L + 1.5
        assert len(spec) >= 6
        worst = max(worst, np.max(np.abs(spec.energies - exact)))
    assert report(3, "oscillator D=3,2 with N=0, max abs err", worst, 1e-11)


def test_criterion_4_b_independence():
    b_values = np.linspace(0.5, 3.0, 26)
    worst = 0.0
    for D in (3, 2):
        basis, pot = BasisSpec(D, 0, 1.0), PotentialSpec({2: 0.5})
        records = sweep_b(basis, pot, b_values, 3, (0.0, 12.0))
        levels = {}
        for _, i, E in records:
            levels.setdefault(i, []).append(E)
        assert len(levels) == 6 and all(len(v) == 26 for v in levels.values())
        worst = max(worst, max(np.ptp(v) for v in levels.values()))
    assert report(4, "oscillator spread over 26 values of b", worst, 1e-9)


def test_criterion_5_matrix_elements():
    M, b = 50, 1.3
    closed = quad = 0.0
    # (D, l) giving L = -1/2, 0, 1, 5/2
    for (D, l), L in zip(((2, 0), (3, 0), (3, 1), (2, 3)), (-0.5, 0.0, 1.0, 2.5)):
        basis = BasisSpec(D, l, b)
        assert basis.L == L
        for i, fn in ((1, closed_form_r), (2, closed_form_r2)):
            A = power_matrix(basis, M, i).to_dense()
            C = closed_form_matrix(fn, L, b, M)
            Q = quadrature_power(basis, M, i)
            scale = np.max(np.abs(C))
            closed = max(closed, np.max(np.abs(A - C)) / scale)
            quad = max(quad, np.max(np.abs(A - Q)) / scale)
    ok1 = report(5, "r and r^2 vs closed forms, max rel err", closed, 1e-12)
    ok2 = report(5, "r and r^2 vs Gauss-Laguerre quadrature, max rel err", quad, 1e-10)
    assert ok1 and ok2


def test_criterion_6_green_vs_dense():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        D = int(rng.integers(2, 5))
        basis = BasisSpec(D, int(rng.integers(0, 3)), float(rng.uniform(0.5, 2.0)))
        pot = random_confining(rng)
        N = int(rng.integers(0, 4))
        z = rng.uniform(-2.0, 10.0) + 1j
        blocks = hamiltonian_blocks(basis, pot)
        size = (N + 1) * blocks.m
        g = green_matrix(blocks, z, N)
        want = dense_green_corner(basis, pot, z, size + 300, size)
        worst = max(worst, np.max(np.abs(g.values - want)) / np.max(np.abs(want)))
    elapsed = time.perf_counter() - t0
    assert report(6, "20 random potentials, G vs dense inverse, max rel err", worst, 1e-8, elapsed, 120)


def _states(basis, pot, window, N=30):
    blocks = hamiltonian_blocks(basis, pot)
    spec = find_eigenvalues(basis, pot, window, N, count_limit=3, blocks=blocks)
    return [residue_at(basis, pot, lv.E, N=N, spectrum=spec, blocks=blocks) for lv in spec.levels]


@pytest.mark.parametrize(
    "name, basis, pot, window",
    [
        ("oscillator", BasisSpec(3, 0, 1.0), PotentialSpec({2: 0.5}), (0.0, 8.0)),
        ("Cornell", BasisSpec(3, 0, 1.0), PotentialSpec({-1: -1.0, 1: 1.0}), (0.0, 5.0)),
        ("Coulomb + r^2/2", BasisSpec(2, 0, 1.0), PotentialSpec({-1: -1.0, 2: 0.5}), (-3.0, 5.0)),
    ],
)
def test_criterion_7_residues(name, basis, pot, window):
    states = _states(basis, pot, window)
    assert len(states) == 3
    size = states[0].coefficients.size
    S = overlap_matrix(basis, size).to_dense()
    rank = max(s.rank_defect for s in states)
    norm = max(s.norm_defect for s in states)
    ortho = max(abs(a.coefficients @ S @ b.coefficients)
                for k, a in enumerate(states) for b in states[k + 1:])
    rayleigh = max(abs(rayleigh_quotient(basis, pot, s.coefficients) - s.E) / abs(s.E)
                   for s in states)
    results = [
        report(7, f"{name} rank defect", rank, 1e-8),
        report(7, f"{name} norm defect", norm, 1e-9),
        report(7, f"{name} S-orthogonality", ortho, 1e-8),
        report(7, f"{name} Rayleigh consistency", rayleigh, 1e-8),
    ]
    assert all(results)


def test_criterion_8_hydrogen():
    basis, pot = BasisSpec(3, 0, 1.0), PotentialSpec({-1: -1.0})
    spec = find_eigenvalues(basis, pot, (-0.6, -0.05), N=3)
    exact = -1 / (2 * (np.arange(3) + 1.0) ** 2)
    assert len(spec) == 3
    err = np.max(np.abs(spec.energies - exact) / np.abs(exact))
    assert report(8, "hydrogen lowest 3 levels, max rel err", err, 1e-9)
