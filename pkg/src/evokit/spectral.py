"""Spectral decomposition with degeneracy grouping and the block superoperators.

Given a Hermitian ``H0`` with grouped eigenvalues ``E_m`` and orthogonal
projectors ``P_m``:

* ``diag_part(X)``        = sum_m P_m X P_m
* ``offdiag_part(X)``     = X - diag_part(X)
* ``energy_green_part(X)`` = i sum_{j != l} P_j X P_l / (E_l - E_j)

The last one is the unique block-off-diagonal ``Y`` with ``[Y, H0] = i offdiag_part(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContourFailure, DegenerateGapError, DimensionMismatch, SingleGroupError
from .operators import as_matrix, dagger, fro_norm, hermitian

GAP_FLOOR = 1e-8


@dataclass(frozen=True)
class SpectralDecomposition:
    """Grouped spectrum of a Hermitian operator.

    ``basis`` is a unitary whose columns are eigenvectors; ``labels[a]`` is
    the group index of column ``a``. Groups are sorted by ascending energy.
    """

    energies: np.ndarray
    basis: np.ndarray
    labels: np.ndarray
    gap_min: float
    scale: float = 1.0

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def n_groups(self) -> int:
        return len(self.energies)

    @property
    def multiplicities(self) -> list[int]:
        return [int(np.sum(self.labels == m)) for m in range(self.n_groups)]

    def group_basis(self, m: int) -> np.ndarray:
        return self.basis[:, self.labels == m]

    def projector(self, m: int) -> np.ndarray:
        V = self.group_basis(m)
        return V @ dagger(V)

    @property
    def projectors(self) -> list[np.ndarray]:
        return [self.projector(m) for m in range(self.n_groups)]

    def operator(self, energies=None) -> np.ndarray:
        """sum_m E_m P_m (optionally with replacement energies, stack-aware)."""
        E = self.energies if energies is None else np.asarray(energies, dtype=float)
        diag = E[..., self.labels]
        return (self.basis * diag[..., None, :]) @ dagger(self.basis)

    @classmethod
    def from_projectors(cls, energies, projectors, tol: float = 1e-10) -> "SpectralDecomposition":
        """Build from explicit orthogonal projectors (fixed eigenprojector families)."""
        energies = np.asarray(energies, dtype=float)
        projectors = [hermitian(P, tol=tol) for P in projectors]
        if len(energies) != len(projectors):
            raise DimensionMismatch("one energy per projector required")
        d = projectors[0].shape[0]
        if not np.allclose(sum(projectors), np.eye(d), atol=tol * d):
            raise ValueError("projectors do not resolve the identity")
        cols, labels = [], []
        for m, P in enumerate(projectors):
            if not np.allclose(P @ P, P, atol=tol * d):
                raise ValueError(f"projector {m} is not idempotent")
            w, V = np.linalg.eigh(P)
            keep = w > 0.5
            cols.append(V[:, keep])
            labels.extend([m] * int(np.sum(keep)))
        basis = np.concatenate(cols, axis=1)
        order = np.argsort(energies, kind="stable")
        relabel = np.empty_like(order)
        relabel[order] = np.arange(len(order))
        labels = relabel[np.asarray(labels)]
        return cls(energies[order], basis, labels, _gap(energies[order]),
                   scale=max(1.0, float(np.max(np.abs(energies)))))


def _gap(E: np.ndarray) -> float:
    return float(np.min(np.diff(np.sort(E)))) if len(E) > 1 else np.inf


def spectral_decompose(H, group_tol: float = 1e-9) -> SpectralDecomposition:
    """Eigen-decompose ``H`` and merge eigenvalues closer than ``group_tol * max(1, |H|)``."""
    if group_tol <= 0:
        raise ValueError("group_tol must be positive")
    H = hermitian(H)
    w, V = np.linalg.eigh(H)
    scale = max(1.0, float(fro_norm(H)))
    thresh = group_tol * scale
    labels = np.zeros(len(w), dtype=int)
    for a in range(1, len(w)):
        labels[a] = labels[a - 1] + (w[a] - w[a - 1] > thresh)
    energies = np.array([w[labels == m].mean() for m in range(labels[-1] + 1)])
    gap = _gap(energies)
    if gap < 10 * thresh:
        raise DegenerateGapError(
            f"ambiguous clustering: smallest gap {gap:.3e} below {10 * thresh:.3e}")
    return SpectralDecomposition(energies, V, labels, gap, scale=scale)


def _to_basis(X, S: SpectralDecomposition) -> np.ndarray:
    X = as_matrix(X)
    if X.shape[-1] != S.dim:
        raise DimensionMismatch(f"operator dim {X.shape[-1]} vs decomposition dim {S.dim}")
    return dagger(S.basis) @ X @ S.basis


def _from_basis(Xb, S: SpectralDecomposition) -> np.ndarray:
    return S.basis @ Xb @ dagger(S.basis)


def _same_group(S: SpectralDecomposition) -> np.ndarray:
    return S.labels[:, None] == S.labels[None, :]


def diag_part(X, S: SpectralDecomposition) -> np.ndarray:
    """sum_m P_m X P_m."""
    return _from_basis(_to_basis(X, S) * _same_group(S), S)


def offdiag_part(X, S: SpectralDecomposition) -> np.ndarray:
    """X - diag_part(X)."""
    X = as_matrix(X)
    return X - diag_part(X, S)


def energy_green_part(X, S: SpectralDecomposition, energies=None) -> np.ndarray:
    """i sum_{j != l} (E_l - E_j)^{-1} P_j X P_l.

    ``energies`` overrides the group energies; it may carry leading axes
    matching a stack ``X`` (time-dependent eigenvalues with fixed projectors).
    """
    if S.n_groups < 2:
        raise SingleGroupError("energy denominators undefined for a single eigenvalue group")
    E = S.energies if energies is None else np.asarray(energies, dtype=float)
    Ec = E[..., S.labels]
    denom = Ec[..., None, :] - Ec[..., :, None]  # E_l - E_j for entry (j-row, l-col)
    same = _same_group(S)
    off = np.abs(np.where(same, np.inf, denom))
    floor = GAP_FLOOR * S.scale
    if np.min(off) < floor:
        raise DegenerateGapError(f"energy gap {np.min(off):.3e} below floor {floor:.3e}")
    factor = np.where(same, 0.0, 1j / np.where(same, 1.0, denom))
    return _from_basis(_to_basis(X, S) * factor, S)


def contour_projector(H_lambda, m: int, S0: SpectralDecomposition, radius: float | None = None,
                      nodes: int = 128, proj_tol: float = 1e-8) -> np.ndarray:
    """(1/2 pi i) contour integral of the resolvent around unperturbed level ``m``.

    Trapezoid rule on the circle ``E_m + r e^{i theta}``; spectrally accurate
    when the circle keeps clear of every eigenvalue of ``H_lambda``.
    """
    H = as_matrix(H_lambda)
    if radius is None:
        radius = S0.gap_min / 2 if np.isfinite(S0.gap_min) else 2 * max(1.0, float(fro_norm(H)))
    theta = 2 * np.pi * np.arange(nodes) / nodes
    z = S0.energies[m] + radius * np.exp(1j * theta)
    ev = np.linalg.eigvals(H)
    if np.min(np.abs(z[:, None] - ev[None, :])) < 1e-8:
        raise ContourFailure("a quadrature node lies on an eigenvalue")
    eye = np.eye(H.shape[0])
    resolvents = np.linalg.solve(z[:, None, None] * eye - H, np.broadcast_to(eye, (nodes,) + eye.shape))
    weights = radius * np.exp(1j * theta) / nodes
    P = np.tensordot(weights, resolvents, axes=1)
    defect = float(fro_norm(P @ P - P))
    if defect > proj_tol:
        raise ContourFailure(f"|P^2 - P| = {defect:.3e} exceeds {proj_tol:.1e}")
    return P
