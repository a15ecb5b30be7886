"""Time-independent perturbation: generators C_n (commuting with H0) and Z_n.

Order by order, with G_n = big_G(H_0..H_n; Z_1..Z_{n-1}):

    C_n = diag_part(G_n)
    Z_n = gauge_n + energy_green_part(G_n)

and the truncated evolutor is exp(-iZ) exp(-i(H0 + C) t) exp(iZ).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .operators import commutator, dagger, expm_hermitian, fro_norm, hermitian
from .series import big_G, check_order, evaluate_series
from .spectral import (SpectralDecomposition, diag_part, energy_green_part, offdiag_part,
                       spectral_decompose)


@dataclass(frozen=True)
class StaticProblem:
    H0: np.ndarray
    perturbation: tuple  # H_1..H_K; orders beyond K are zero
    order: int = 2
    S0: SpectralDecomposition | None = None
    group_tol: float = 1e-9

    def __post_init__(self):
        H0 = hermitian(self.H0)
        pert = tuple(hermitian(H) for H in self.perturbation)
        for k, H in enumerate(pert, start=1):
            if H.shape != H0.shape:
                raise DimensionMismatch(f"H_{k} has shape {H.shape}, H0 has {H0.shape}")
        check_order(self.order)
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "perturbation", pert)
        if self.S0 is None:
            object.__setattr__(self, "S0", spectral_decompose(H0, self.group_tol))

    @property
    def dim(self) -> int:
        return self.H0.shape[0]

    def H(self, n: int) -> np.ndarray:
        """H_n (H_0 for n = 0, zero beyond the supplied orders)."""
        if n == 0:
            return self.H0
        return self.perturbation[n - 1] if n <= len(self.perturbation) else np.zeros_like(self.H0)

    def hamiltonian(self, lam: float) -> np.ndarray:
        return self.H0 + evaluate_series(self.perturbation, lam) if self.perturbation else self.H0


@dataclass(frozen=True)
class StaticSolution:
    problem: StaticProblem
    C: tuple
    Z: tuple
    gauge: str = "minimal"
    residuals: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.C)

    def C_total(self, lam: float, order: int | None = None) -> np.ndarray:
        return evaluate_series(self.C[: order or self.order], lam)

    def Z_total(self, lam: float, order: int | None = None) -> np.ndarray:
        return evaluate_series(self.Z[: order or self.order], lam)


def _gauge_blocks(gauge, S: SpectralDecomposition, order: int, dim: int) -> list[np.ndarray]:
    if gauge is None or gauge == "minimal":
        return [np.zeros((dim, dim), dtype=complex)] * order
    blocks = [hermitian(g) for g in gauge]
    if len(blocks) < order:
        blocks += [np.zeros((dim, dim), dtype=complex)] * (order - len(blocks))
    for n, g in enumerate(blocks[:order], start=1):
        if fro_norm(offdiag_part(g, S)) > 1e-10 * max(1.0, fro_norm(g)):
            raise ValueError(f"custom gauge block for order {n} does not commute with H0")
    return [diag_part(g, S) for g in blocks[:order]]


def solve_static(problem: StaticProblem, gauge="minimal") -> StaticSolution:
    """Solve the static recursion through ``problem.order``.

    ``gauge`` is ``"minimal"`` (block-diagonal part of every Z_n zero) or a
    sequence of block-diagonal Hermitian matrices prescribing that part.
    """
    S = problem.S0
    N = problem.order
    blocks = _gauge_blocks(gauge, S, N, problem.dim)
    H = [problem.H(n) for n in range(N + 1)]
    C, Z = [], []
    comm_res, eq_res = [], []
    for n in range(1, N + 1):
        G = big_G(H[: n + 1], Z)
        Cn = hermitian(diag_part(G, S), tol=1e-9, atol=1e-12)
        if S.n_groups > 1:
            Zn = blocks[n - 1] + energy_green_part(G, S)
        else:
            Zn = blocks[n - 1]
        Zn = hermitian(Zn, tol=1e-9, atol=1e-12)
        C.append(Cn)
        Z.append(Zn)
        comm_res.append(float(fro_norm(commutator(Cn, problem.H0))))
        eq_res.append(float(fro_norm(Cn - 1j * commutator(Zn, problem.H0) - G)))
    label = "minimal" if gauge is None or gauge == "minimal" else "custom"
    return StaticSolution(problem, tuple(C), tuple(Z), label,
                          {"commutant": comm_res, "equation": eq_res})


def assemble_static_evolutor(sol: StaticSolution, lam: float, t, order: int | None = None) -> np.ndarray:
    """exp(-iZ) exp(-i(H0 + C) t) exp(iZ) with the truncated series; ``t`` may be an array."""
    Z = sol.Z_total(lam, order)
    K = sol.problem.H0 + sol.C_total(lam, order)
    W = expm_hermitian(Z)  # exp(-iZ)
    return W @ expm_hermitian(K, t) @ dagger(W)


def perturbed_projector(sol: StaticSolution, lam: float, m: int, order: int | None = None) -> np.ndarray:
    """exp(-iZ) P_m exp(iZ): the truncated image of the unperturbed projector."""
    W = expm_hermitian(sol.Z_total(lam, order))
    return W @ sol.problem.S0.projector(m) @ dagger(W)


def effective_eigenvalues(sol: StaticSolution, lam: float, order: int | None = None) -> list[np.ndarray]:
    """Per group m: eigenvalues of E_m + P_m C(lam) P_m on the range of P_m."""
    S = sol.problem.S0
    C = sol.C_total(lam, order) if sol.order else np.zeros((S.dim, S.dim))
    out = []
    for m in range(S.n_groups):
        V = S.group_basis(m)
        block = dagger(V) @ C @ V
        out.append(S.energies[m] + np.linalg.eigvalsh(0.5 * (block + dagger(block))))
    return out


def exact_static_evolutor(problem: StaticProblem, lam: float, t) -> np.ndarray:
    return expm_hermitian(problem.hamiltonian(lam), t)


def solve_static_matrices(H0, perturbation: Sequence, order: int = 2, gauge="minimal") -> StaticSolution:
    """Convenience wrapper: build the problem and solve it."""
    return solve_static(StaticProblem(H0, tuple(perturbation), order), gauge)
