import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evokit.errors import ContourFailure, DegenerateGapError, SingleGroupError
from evokit.operators import SX, SY, SZ, I2, commutator, dagger, random_hermitian
from evokit.spectral import (SpectralDecomposition, contour_projector, diag_part,
                             energy_green_part, offdiag_part, spectral_decompose)


def test_decompose_diagonal():
    S = spectral_decompose(np.diag([0.0, 1.0]))
    assert np.allclose(S.energies, [0, 1])
    assert np.allclose(S.projector(0), np.diag([1, 0]))
    assert np.allclose(S.projector(1), np.diag([0, 1]))


def test_decompose_fully_degenerate():
    S = spectral_decompose(np.eye(3))
    assert S.n_groups == 1
    assert np.allclose(S.projector(0), np.eye(3))
    assert S.gap_min == np.inf


def test_decompose_qubit():
    S = spectral_decompose(0.5 * SZ)
    assert np.allclose(S.energies, [-0.5, 0.5])
    assert np.allclose(S.projector(0), (I2 - SZ) / 2)
    assert np.allclose(S.projector(1), (I2 + SZ) / 2)


def test_ambiguous_cluster_rejected():
    with pytest.raises(DegenerateGapError):
        spectral_decompose(np.diag([0.0, 5e-9, 1.0]))


def test_grouping_merges_within_tolerance():
    S = spectral_decompose(np.diag([0.0, 1e-12, 1.0]))
    assert S.multiplicities == [2, 1]


def test_diag_part_examples():
    S = spectral_decompose(np.diag([0.0, 1.0, 3.0]))
    X = np.arange(9.0).reshape(3, 3)
    assert np.allclose(diag_part(X, S), np.diag(np.diag(X)))
    assert np.allclose(diag_part(X, spectral_decompose(np.eye(3))), X)
    S2 = spectral_decompose(np.diag([0.0, 0.0, 1.0]))
    expect = np.zeros((3, 3))
    expect[:2, :2] = 1
    expect[2, 2] = 1
    assert np.allclose(diag_part(np.ones((3, 3)), S2), expect)


def test_offdiag_part_examples(rng):
    S = spectral_decompose(0.5 * SZ)
    X = random_hermitian(rng, 2)
    assert np.allclose(offdiag_part(X, S) + diag_part(X, S), X)
    assert np.allclose(offdiag_part(SZ, S), 0)
    assert np.allclose(offdiag_part(SX, S), SX)
    assert np.allclose(diag_part(offdiag_part(X, S), S), 0)


def test_energy_green_qubit():
    S = spectral_decompose(0.5 * SZ)
    assert np.allclose(energy_green_part(SX, S), SY)
    assert np.allclose(energy_green_part(SZ, S), 0)


def test_energy_green_single_group():
    with pytest.raises(SingleGroupError):
        energy_green_part(SX, spectral_decompose(I2))


def test_energy_green_stacked_energies():
    S = spectral_decompose(0.5 * SZ)
    E = np.array([[-0.5, 0.5], [-1.0, 1.0]])
    Y = energy_green_part(np.stack([SX, SX]), S, energies=E)
    assert np.allclose(Y[0], SY)
    assert np.allclose(Y[1], SY / 2)


def test_from_projectors_sorts_groups():
    P = [np.diag([0, 1]).astype(complex), np.diag([1, 0]).astype(complex)]
    S = SpectralDecomposition.from_projectors([2.0, -1.0], P)
    assert np.allclose(S.energies, [-1.0, 2.0])
    assert np.allclose(S.projector(0), np.diag([1, 0]))


def test_contour_unperturbed_limit():
    S = spectral_decompose(0.5 * SZ)
    for m in range(2):
        assert np.allclose(contour_projector(0.5 * SZ, m, S), S.projector(m), atol=1e-10)


def test_contour_qubit_closed_form():
    lam = 0.1
    H = 0.5 * SZ + lam * SX
    n = np.array([2 * lam, 0.0, 1.0]) / np.sqrt(1 + 4 * lam ** 2)
    expect = 0.5 * (I2 + n[0] * SX + n[1] * SY + n[2] * SZ)
    P = contour_projector(H, 1, spectral_decompose(0.5 * SZ), nodes=256)
    assert np.linalg.norm(P - expect) <= 1e-8
    assert abs(np.trace(P) - 1) < 1e-10


def test_contour_node_on_eigenvalue():
    S = spectral_decompose(0.5 * SZ)
    with pytest.raises(ContourFailure):
        contour_projector(0.5 * SZ, 1, S, radius=1.0, nodes=4)


def test_contour_too_few_nodes():
    S = spectral_decompose(0.5 * SZ)
    with pytest.raises(ContourFailure):
        contour_projector(0.5 * SZ + 0.2 * SX, 1, S, nodes=3)


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def _random_problem(seed, dim):
    rng = np.random.default_rng(seed)
    H0 = np.diag(np.sort(rng.uniform(-3, 3, dim)) + np.arange(dim))
    return spectral_decompose(H0), H0, random_hermitian(rng, dim)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=6))
def test_projector_resolution(seed, dim):
    rng = np.random.default_rng(seed)
    S = spectral_decompose(random_hermitian(rng, dim))
    P = S.projectors
    assert np.linalg.norm(sum(P) - np.eye(dim)) <= 1e-12
    for j, Pj in enumerate(P):
        assert np.linalg.norm(Pj - dagger(Pj)) <= 1e-12
        for k, Pk in enumerate(P):
            assert np.linalg.norm(Pj @ Pk - (Pj if j == k else 0)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=6))
def test_block_superoperators(seed, dim):
    S, H0, X = _random_problem(seed, dim)
    D = diag_part(X, S)
    assert np.linalg.norm(diag_part(D, S) - D) <= 1e-13 * max(1, np.linalg.norm(D))
    assert np.linalg.norm(commutator(D, H0)) <= 1e-12 * max(1, np.linalg.norm(H0))
    Y = energy_green_part(X, S)
    assert np.linalg.norm(commutator(Y, H0) - 1j * offdiag_part(X, S)) <= 1e-10
    assert np.linalg.norm(diag_part(Y, S)) <= 1e-12
    assert np.linalg.norm(Y - dagger(Y)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.2))
def test_contour_matches_closed_form_for_small_lambda(lam):
    H = 0.5 * SZ + lam * SX
    n = np.array([2 * lam, 0.0, 1.0]) / np.sqrt(1 + 4 * lam ** 2)
    expect = 0.5 * (I2 + n[0] * SX + n[2] * SZ)
    P = contour_projector(H, 1, spectral_decompose(0.5 * SZ), nodes=256)
    assert np.linalg.norm(P - expect) <= 1e-8
