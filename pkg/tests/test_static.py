import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evokit.errors import DegenerateGapError, OrderOverflow
from evokit.operators import SX, SY, SZ, I2, commutator, expm_hermitian, random_hermitian, unitarity_defect
from evokit.spectral import contour_projector, diag_part
from evokit.static import (StaticProblem, assemble_static_evolutor, effective_eigenvalues,
                           exact_static_evolutor, perturbed_projector, solve_static,
                           solve_static_matrices)


def test_qubit_first_and_second_order(qubit):
    sol = solve_static_matrices(*qubit[:1], [qubit[1]], order=2)
    assert np.allclose(sol.C[0], 0)
    assert np.allclose(sol.Z[0], SY)
    assert np.allclose(sol.C[1], SZ)
    assert max(sol.residuals["commutant"]) <= 1e-11
    assert max(sol.residuals["equation"]) <= 1e-12


def test_commuting_perturbation():
    H0 = np.diag([0.0, 1.0, 3.0])
    H1 = np.diag([0.5, -0.2, 0.1])
    sol = solve_static_matrices(H0, [H1], order=2)
    assert np.allclose(sol.C[0], H1)
    assert np.allclose(sol.Z[0], 0)
    assert np.allclose(sol.C[1], 0)


def test_evolutor_limits(qubit):
    sol = solve_static_matrices(qubit[0], [qubit[1]], order=3)
    assert np.allclose(assemble_static_evolutor(sol, 0.0, 1.3), expm_hermitian(qubit[0], 1.3))
    assert np.allclose(assemble_static_evolutor(sol, 0.2, 0.0), I2)


def test_qubit_evolutor_error(qubit):
    sol = solve_static_matrices(qubit[0], [qubit[1]], order=2)
    err = {lam: np.linalg.norm(exact_static_evolutor(sol.problem, lam, 1.0)
                               - assemble_static_evolutor(sol, lam, 1.0)) for lam in (0.1, 0.05)}
    assert err[0.1] <= 2e-3
    assert 8 * 0.7 <= err[0.1] / err[0.05] <= 8 * 1.3


def test_array_times(qubit):
    sol = solve_static_matrices(qubit[0], [qubit[1]], order=2)
    t = np.linspace(0, 2, 5)
    U = assemble_static_evolutor(sol, 0.1, t)
    assert U.shape == (5, 2, 2)
    assert np.allclose(U[3], assemble_static_evolutor(sol, 0.1, t[3]))


def test_effective_eigenvalues(qubit):
    sol = solve_static_matrices(qubit[0], [qubit[1]], order=2)
    assert np.allclose(np.concatenate(effective_eigenvalues(sol, 0.0)), [-0.5, 0.5])
    ev = np.concatenate(effective_eigenvalues(sol, 0.1))
    assert np.allclose(ev, [-0.51, 0.51])
    assert abs(ev[1] - np.sqrt(0.26)) == pytest.approx(9.805e-5, rel=1e-3)


def test_single_group_effective_eigenvalues(rng):
    H1, H2 = random_hermitian(rng, 3), random_hermitian(rng, 3)
    sol = solve_static_matrices(np.zeros((3, 3)), [H1, H2], order=3)
    lam = 0.3
    ev = effective_eigenvalues(sol, lam)[0]
    assert np.allclose(ev, np.linalg.eigvalsh(lam * H1 + lam ** 2 * H2))


def test_degenerate_block_nondiagonal(rng):
    H0 = np.diag([0.0, 0.0, 2.0])
    H1 = random_hermitian(rng, 3)
    sol = solve_static_matrices(H0, [H1], order=2)
    assert np.allclose(sol.C[0], diag_part(H1, sol.problem.S0))
    assert abs(sol.C[0][0, 1]) > 0
    assert max(sol.residuals["commutant"]) <= 1e-11


def test_custom_gauge_block_kept(qubit):
    g = [0.3 * SZ, -0.1 * SZ]
    sol = solve_static(StaticProblem(qubit[0], (qubit[1],), 2), gauge=g)
    for n in range(2):
        assert np.allclose(diag_part(sol.Z[n], sol.problem.S0), g[n])
    assert sol.gauge == "custom"
    with pytest.raises(ValueError):
        solve_static(StaticProblem(qubit[0], (qubit[1],), 1), gauge=[SX])


def test_order_overflow(qubit):
    with pytest.raises(OrderOverflow):
        StaticProblem(qubit[0], (qubit[1],), order=7)


def test_near_degenerate_rejected():
    with pytest.raises(DegenerateGapError):
        solve_static_matrices(np.diag([0.0, 2e-9, 1.0]), [np.ones((3, 3))], order=1)


def _random_static(seed, dim=4):
    rng = np.random.default_rng(seed)
    H0 = np.diag(np.arange(dim) * 1.0 + rng.uniform(0, 0.3, dim))
    return H0, random_hermitian(rng, dim, 0.5), random_hermitian(rng, dim, 0.5)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_random_order_scaling(N):
    H0, H1, H2 = _random_static(N)
    sol = solve_static_matrices(H0, [H1, H2], order=N)
    t = 1.7
    lams = (0.04, 0.02)
    errs = [np.linalg.norm(exact_static_evolutor(sol.problem, l, t) - assemble_static_evolutor(sol, l, t))
            for l in lams]
    ratio = errs[0] / errs[1]
    assert 2 ** (N + 1) * 0.7 <= ratio <= 2 ** (N + 1) * 1.3, ratio


@pytest.mark.parametrize("N", [1, 2, 3])
def test_intertwining_and_contour(N):
    H0, H1, H2 = _random_static(10 + N)
    sol = solve_static_matrices(H0, [H1, H2], order=N)
    inv, cont = [], []
    for lam in (0.04, 0.02):
        H = sol.problem.hamiltonian(lam)
        P = perturbed_projector(sol, lam, 1)
        inv.append(np.linalg.norm(H @ P - P @ H @ P))
        cont.append(np.linalg.norm(P - contour_projector(H, 1, sol.problem.S0, nodes=256)))
    for a, b in (inv, cont):
        assert abs(np.log2(a / b) - (N + 1)) <= 0.5


def test_gauge_freedom():
    H0, H1, H2 = _random_static(3)
    N = 2
    S = solve_static_matrices(H0, [H1, H2], order=N).problem.S0
    g1 = [diag_part(np.diag([0.2, -0.1, 0.4, 0.0]), S)] * N
    g2 = [diag_part(np.diag([-0.3, 0.5, 0.1, 0.2]), S)] * N
    a = solve_static(StaticProblem(H0, (H1, H2), N), gauge=g1)
    b = solve_static(StaticProblem(H0, (H1, H2), N), gauge=g2)
    d = [np.linalg.norm(assemble_static_evolutor(a, l, 1.0) - assemble_static_evolutor(b, l, 1.0))
         for l in (0.04, 0.02)]
    assert abs(np.log2(d[0] / d[1]) - (N + 1)) <= 0.5


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 4), st.floats(-0.5, 0.5), st.floats(0, 10))
def test_truncations_unitary(seed, N, lam, t):
    H0, H1, H2 = _random_static(seed)
    sol = solve_static_matrices(H0, [H1, H2], order=N)
    assert unitarity_defect(assemble_static_evolutor(sol, lam, t)) <= 1e-12
    for C in sol.C:
        assert np.linalg.norm(commutator(C, H0)) <= 1e-11
