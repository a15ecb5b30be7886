import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evokit.errors import DimensionMismatch, HermiticityError, UnitarityError
from evokit.operators import (I2, SX, SY, SZ, ad_power_apply, check_unitary, commutator,
                              conjugate, dagger, expm_hermitian, hermitian, mat_exp,
                              random_hermitian, random_unitary, spin_operators,
                              unitarity_defect)


def test_pauli_commutator():
    assert np.allclose(commutator(SX, SY), 2j * SZ)


def test_self_commutator_vanishes(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.allclose(commutator(A, A), 0)


def test_commutator_with_raising():
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    assert np.allclose(commutator(SZ, sp), [[0, 2], [0, 0]])


def test_commutator_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        commutator(SX, np.eye(3))


def test_ad_power_examples(rng):
    Y = random_hermitian(rng, 3)
    assert np.allclose(ad_power_apply(random_hermitian(rng, 3), Y, 0), Y)
    assert np.allclose(ad_power_apply(SZ, SX, 2), 4 * SX)
    D = np.diag([1.0, 2.0, 3.0]).astype(complex)
    assert np.allclose(ad_power_apply(D, np.diag([4.0, 5.0, 6.0]), 3), 0)


def test_mat_exp_examples():
    assert np.allclose(mat_exp(np.zeros((2, 2))), I2)
    assert np.allclose(mat_exp(-1j * np.pi * SX / 2), -1j * SX, atol=1e-14)
    assert np.allclose(mat_exp(np.diag([0.3, -1.2])), np.diag(np.exp([0.3, -1.2])))


def test_expm_hermitian_matches_mat_exp(rng):
    H = random_hermitian(rng, 4)
    assert np.allclose(expm_hermitian(H, 0.7), mat_exp(-0.7j * H), atol=1e-13)
    stack = expm_hermitian(H, np.array([0.0, 0.5, 1.0]))
    assert stack.shape == (3, 4, 4)
    assert np.allclose(stack[0], np.eye(4))


def test_conjugate_examples():
    theta = 0.83
    U = expm_hermitian(SZ / 2, theta)
    assert np.allclose(conjugate(U, SX), np.cos(theta) * SX + np.sin(theta) * SY)
    assert np.allclose(conjugate(I2, SY), SY)
    assert np.allclose(conjugate(U, I2), I2)


def test_hermitian_rejects_and_symmetrizes():
    M = np.array([[0, 1], [-1, 0]], dtype=complex)
    with pytest.raises(HermiticityError) as info:
        hermitian(M)
    assert np.array_equal(info.value.matrix, M)
    nearly = SX + 1e-15 * np.array([[0, 1], [0, 0]])
    out = hermitian(nearly)
    assert np.array_equal(out, dagger(out))


def test_unitarity_check(rng):
    U = random_unitary(rng, 4)
    assert unitarity_defect(U) < 1e-13
    check_unitary(U)
    with pytest.raises(UnitarityError):
        check_unitary(1.01 * U)


def test_spin_operators_algebra():
    for dim in (2, 3, 4):
        Jx, Jy, Jz = spin_operators(dim)
        assert np.allclose(commutator(Jx, Jy), 1j * Jz)
        s = (dim - 1) / 2
        assert np.allclose(Jx @ Jx + Jy @ Jy + Jz @ Jz, s * (s + 1) * np.eye(dim))


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
dims = st.integers(min_value=2, max_value=6)


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_i_commutator_of_hermitians_is_hermitian(seed, dim):
    rng = np.random.default_rng(seed)
    A, B = random_hermitian(rng, dim), random_hermitian(rng, dim)
    K = 1j * commutator(A, B)
    assert np.linalg.norm(K - dagger(K)) <= 1e-12 * max(1.0, np.linalg.norm(K))


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_exp_inverse(seed, dim):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    A *= 5 / np.linalg.norm(A, 2)
    assert np.linalg.norm(mat_exp(A) @ mat_exp(-A) - np.eye(dim)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_conjugation_preserves_spectrum(seed, dim):
    rng = np.random.default_rng(seed)
    X, U = random_hermitian(rng, dim), random_unitary(rng, dim)
    Y = conjugate(U, X)
    assert np.allclose(np.linalg.eigvalsh(X), np.linalg.eigvalsh(0.5 * (Y + dagger(Y))), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.integers(min_value=0, max_value=4))
def test_ad_covariance(seed, dim, k):
    rng = np.random.default_rng(seed)
    X, Y, U = random_hermitian(rng, dim), random_hermitian(rng, dim), random_unitary(rng, dim)
    lhs = ad_power_apply(conjugate(U, X), conjugate(U, Y), k)
    rhs = conjugate(U, ad_power_apply(X, Y, k))
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(1.0, np.linalg.norm(rhs))
