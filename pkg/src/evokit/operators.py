"""Dense complex operator algebra.

All routines accept single matrices ``(d, d)`` or stacks ``(..., d, d)``
(e.g. samples of an operator on a time grid) and broadcast over the
leading axes.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, HermiticityError, UnitarityError

HERM_TOL = 1e-12
UNIT_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(X) -> np.ndarray:
    """Return ``X`` as a complex array whose last two axes are square."""
    A = np.asarray(X, dtype=complex)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise DimensionMismatch(f"expected square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _check_pair(X, Y):
    X, Y = as_matrix(X), as_matrix(Y)
    if X.shape[-1] != Y.shape[-1]:
        raise DimensionMismatch(f"dims differ: {X.shape[-1]} vs {Y.shape[-1]}")
    return X, Y


def dagger(X: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(X, -1, -2))


def fro_norm(X) -> float | np.ndarray:
    return np.linalg.norm(np.asarray(X), axis=(-2, -1))


def hermitian(M, tol: float = HERM_TOL, atol: float = 0.0) -> np.ndarray:
    """Validate and symmetrize a Hermitian operator.

    Raises :class:`HermiticityError` when ``|M - M^dag|_F > tol |M|_F + atol``;
    otherwise returns ``(M + M^dag) / 2``.
    """
    M = as_matrix(M)
    defect = fro_norm(M - dagger(M))
    scale = fro_norm(M)
    if np.any(defect > tol * np.maximum(scale, np.finfo(float).tiny) + atol):
        raise HermiticityError(
            f"operator is not Hermitian (|M - M^dag|_F = {np.max(defect):.3e})", matrix=M)
    return 0.5 * (M + dagger(M))


def symmetrize(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return 0.5 * (M + dagger(M))


def unitarity_defect(U) -> float:
    U = as_matrix(U)
    eye = np.eye(U.shape[-1])
    return float(np.max(fro_norm(dagger(U) @ U - eye)))


def check_unitary(U, tol: float = UNIT_TOL) -> np.ndarray:
    defect = unitarity_defect(U)
    if defect > tol:
        raise UnitarityError(f"|U^dag U - I|_F = {defect:.3e} exceeds {tol:.1e}")
    return np.asarray(U)


def commutator(X, Y) -> np.ndarray:
    X, Y = _check_pair(X, Y)
    return X @ Y - Y @ X


def ad_power_apply(X, Y, k: int) -> np.ndarray:
    """ad_X^k Y, with ad_X^0 Y = Y."""
    if k < 0:
        raise ValueError("k must be non-negative")
    X, Y = _check_pair(X, Y)
    out = Y
    for _ in range(k):
        out = X @ out - out @ X
    return out


def mat_exp(A) -> np.ndarray:
    """General dense matrix exponential (Pade scaling-and-squaring)."""
    A = as_matrix(A)
    return scipy.linalg.expm(A)


def expm_hermitian(H, t: float = 1.0) -> np.ndarray:
    """exp(-i H t) for Hermitian ``H`` via eigendecomposition.

    The result is unitary to machine precision regardless of ``|H t|``,
    which the truncated evolutors rely on.
    """
    w, V = np.linalg.eigh(symmetrize(H))
    phases = np.exp(-1j * np.multiply.outer(t, w)) if np.ndim(t) else np.exp(-1j * t * w)
    return (V * phases[..., None, :]) @ dagger(V)


def conjugate(U, X) -> np.ndarray:
    """Ad_U X = U X U^dag for unitary ``U``."""
    U, X = _check_pair(U, X)
    return U @ X @ dagger(U)


def spin_operators(dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-j matrices (Sx, Sy, Sz) with j = (dim - 1) / 2, Sz descending."""
    j = (dim - 1) / 2
    m = j - np.arange(dim)
    sp = np.zeros((dim, dim), dtype=complex)
    for a in range(1, dim):
        sp[a - 1, a] = np.sqrt(j * (j + 1) - m[a] * (m[a] + 1))
    sx = (sp + sp.conj().T) / 2
    sy = (sp - sp.conj().T) / (2j)
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = (A + A.conj().T) / 2
    return scale * H / max(np.linalg.norm(H, 2), 1e-300)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return expm_hermitian(random_hermitian(rng, dim, scale=np.pi))
