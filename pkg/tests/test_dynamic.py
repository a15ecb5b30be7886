import math

import numpy as np
import pytest

from evokit.dynamic import (DynamicProblem, assemble_general_evolutor, effective_hamiltonian,
                            interaction_evolutor, interaction_picture, periodicity_defect,
                            solve_dynamic, zero_average_defect)
from evokit.errors import ModeMismatch, PeriodMismatch
from evokit.operators import SX, SY, SZ, I2, expm_hermitian, unitarity_defect
from evokit.oracle import propagate_exact
from evokit.quadrature import Constant, Cosine, DrivenOperator, QuadratureConfig, Sine, TimeGrid
from evokit.static import assemble_static_evolutor, solve_static_matrices
from evokit.unperturbed import StaticH0

TWO_PI = 2 * math.pi


def circular(t_max=TWO_PI, period=TWO_PI):
    drive = DrivenOperator(((SX, Cosine(1.0, 1.0)), (SY, Sine(1.0, 1.0))))
    return DynamicProblem(StaticH0(np.zeros((2, 2))), (drive,), t_max=t_max, period=period)


def generic(t_max=2 * TWO_PI):
    drive = DrivenOperator(((SX, Cosine(1.0, 1.0)), (SZ, Sine(0.4, 1.0))))
    return DynamicProblem(StaticH0(0.5 * SZ), (drive,), t_max=t_max, period=TWO_PI)


def static_qubit(t_max):
    return DynamicProblem(StaticH0(0.5 * SZ), (SX,), t_max=t_max)


def oracle(prob, lam, t):
    return propagate_exact(prob.hamiltonian, lam, t, tol=1e-11).U


# -- interaction picture -------------------------------------------------------

def test_interaction_picture_examples():
    g = TimeGrid(3.0, 30)
    [Ht] = interaction_picture(circular(), g)
    assert np.allclose(Ht.values, circular().H_n(1, g.times))
    [Ht] = interaction_picture(static_qubit(3.0), g)
    t = g.times[:, None, None]
    assert np.allclose(Ht.values, np.cos(t) * SX - np.sin(t) * SY)
    assert np.allclose(Ht.values[0], SX)


# -- modes ---------------------------------------------------------------------

def test_floquet_circular_drive():
    sol = solve_dynamic(circular(), "floquet", order=2)
    t = sol.grid.times[:, None, None]
    assert np.linalg.norm(sol.C_const(1)) <= 1e-10
    assert np.allclose(sol.Zinit[0], -SY, atol=1e-10)
    assert np.allclose(sol.Zfun[0], np.sin(t) * SX - np.cos(t) * SY, atol=1e-9)
    assert np.allclose(sol.C_const(2), -SZ, atol=1e-9)
    assert max(zero_average_defect(sol)) <= 1e-8


def test_floquet_periodicity_over_two_periods():
    sol = solve_dynamic(circular(t_max=2 * TWO_PI), "floquet", order=3)
    assert max(periodicity_defect(sol)) <= 1e-9


def test_magnus_circular_drive():
    sol = solve_dynamic(circular(), "magnus", order=2)
    t = sol.grid.times[:, None, None]
    assert np.allclose(sol.C[0], np.cos(t) * SX + np.sin(t) * SY)
    assert np.max(np.abs(sol.C[1] + (1 - np.cos(t)) * SZ)) <= 1e-8
    assert all(np.max(np.abs(z)) == 0 for z in sol.Zfun)
    with pytest.raises(ModeMismatch):
        sol.C_const(1)
    with pytest.raises(ModeMismatch):
        effective_hamiltonian(sol, 0.1)


def test_average_mode_matches_static_minimal():
    sol = solve_dynamic(static_qubit(800.0), "average", order=2)
    st = solve_static_matrices(0.5 * SZ, [SX], order=2)
    for n in (1, 2):
        assert np.linalg.norm(sol.C_const(n) - st.C[n - 1]) <= 1e-6
        assert np.linalg.norm(sol.Zinit[n - 1] - st.Z[n - 1]) <= 1e-6
    i = sol.grid.index(100.0)
    U0 = expm_hermitian(0.5 * SZ, 100.0)
    assert np.allclose(sol.Zfun[0][i], U0.conj().T @ st.Z[0] @ U0, atol=1e-6)


def test_custom_mode_reproduces_floquet():
    prob = generic()
    fl = solve_dynamic(prob, "floquet", order=2)
    custom = ([fl.C_const(1), fl.C_const(2)], [fl.Zinit[0], fl.Zinit[1]])
    cu = solve_dynamic(prob, "custom", order=2, custom=custom)
    for a, b in zip(cu.Zfun, fl.Zfun):
        assert np.max(np.abs(a - b)) <= 1e-8
    with pytest.raises(ValueError):
        solve_dynamic(prob, "custom", order=2, custom=([0 * SX], [0 * SX]))


def test_mode_equivalence():
    prob = generic()
    N, t = 2, 3.0
    sols = {m: solve_dynamic(prob, m, order=N) for m in ("magnus", "floquet")}
    d = [np.linalg.norm(assemble_general_evolutor(sols["magnus"], l, t)
                        - assemble_general_evolutor(sols["floquet"], l, t)) for l in (0.1, 0.05)]
    assert abs(np.log2(d[0] / d[1]) - (N + 1)) <= 0.5


# -- errors --------------------------------------------------------------------

def test_period_mismatch():
    with pytest.raises(PeriodMismatch):
        solve_dynamic(circular(), "floquet", order=1, tau=1.5 * TWO_PI)
    wrong = circular(period=math.pi)
    with pytest.raises(PeriodMismatch):
        solve_dynamic(wrong, "floquet", order=1)
    with pytest.raises(PeriodMismatch):
        solve_dynamic(static_qubit(5.0), "floquet", order=1)


def test_unknown_mode():
    with pytest.raises(ModeMismatch):
        solve_dynamic(circular(), "dyson", order=1)


# -- evolutor and effective Hamiltonian ----------------------------------------

def test_general_evolutor_limits():
    prob = generic()
    sol = solve_dynamic(prob, "floquet", order=2)
    assert np.allclose(assemble_general_evolutor(sol, 0.0, 2.0), expm_hermitian(0.5 * SZ, 2.0))
    assert np.allclose(assemble_general_evolutor(sol, 0.1, 0.0), I2)
    assert np.allclose(interaction_evolutor(sol, 0.0, 2.0), I2)


def test_general_evolutor_against_oracle():
    prob = generic()
    sol = solve_dynamic(prob, "floquet", order=2)
    for t in np.linspace(0.5, 2 * TWO_PI, 4):
        err = {l: np.linalg.norm(oracle(prob, l, t) - assemble_general_evolutor(sol, l, t))
               for l in (0.1, 0.05)}
        assert err[0.1] <= 5e-3
        assert 8 * 0.7 <= err[0.1] / err[0.05] <= 8 * 1.3
        assert unitarity_defect(assemble_general_evolutor(sol, 0.1, t)) <= 1e-12


def test_effective_hamiltonian_stroboscopic():
    prob = generic(t_max=TWO_PI)
    sol = solve_dynamic(prob, "floquet", order=2)
    assert np.allclose(effective_hamiltonian(sol, 0.0), 0)
    errs = []
    for lam in (0.1, 0.05):
        h = effective_hamiltonian(sol, lam)
        U0 = expm_hermitian(0.5 * SZ, TWO_PI)
        T = U0.conj().T @ oracle(prob, lam, TWO_PI)
        errs.append(np.linalg.norm(T - expm_hermitian(h, TWO_PI)))
    assert 8 * 0.7 <= errs[0] / errs[1] <= 8 * 1.3


def test_average_evolutor_equals_static_evolutor():
    sol = solve_dynamic(static_qubit(800.0), "average", order=2)
    st = solve_static_matrices(0.5 * SZ, [SX], order=2)
    for lam in (0.1, 0.3):
        for t in (0.7, 25.0):
            diff = assemble_general_evolutor(sol, lam, t) - assemble_static_evolutor(st, lam, t)
            assert np.linalg.norm(diff) <= 1e-6
    h = effective_hamiltonian(sol, 0.1)
    W = expm_hermitian(st.Z_total(0.1))
    assert np.allclose(h, W @ st.C_total(0.1) @ W.conj().T, atol=1e-7)


def test_refinement_reports_estimate():
    sol = solve_dynamic(generic(), "magnus", order=2, config=QuadratureConfig(panels=64, dt_max=0.5))
    assert sol.diagnostics["quad_error_estimate"] <= 1e-9
