"""Perturbative adiabatic approximation with fixed eigenprojectors.

The unperturbed Hamiltonian is ``H0(t) = sum_m E_m(t) P_m``. At each grid
time the static recursion is applied instantaneously, with the derivative
corrections

    c_n(t) = diag(G_n) - diag(R_n^+(dZ_1..dZ_{n-1}; Z_1..Z_{n-1})) - d/dt diag(Z_n)
    Z_n(t) = diag(Z_n)_gauge + energy_green_part(G_n) at time t

while the off-diagonal derivative terms are dropped; their size is
reported as the per-order residual.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, GridTooCoarse
from .operators import dagger, expm_hermitian, hermitian
from .quadrature import (DrivenOperator, QuadratureConfig, TimeGrid, TimeOperatorFunction,
                         cumulative_array)
from .series import R_fun, big_G, c_from_frakc_arrays, check_order, evaluate_series
from .spectral import diag_part, energy_green_part, offdiag_part
from .unperturbed import CommutingFamily

DERIV_RTOL = 1e-6
DERIV_ATOL = 1e-10


def derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order finite-difference derivative along axis 0 (one-sided at the ends)."""
    f = np.asarray(values)
    if f.shape[0] < 5:
        raise GridTooCoarse("need at least 5 samples to differentiate")
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / 12
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / 12
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / 12
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / 12
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / 12
    return d / dt


def checked_derivative(values: np.ndarray, dt: float, rtol: float = DERIV_RTOL,
                       atol: float = DERIV_ATOL) -> tuple[np.ndarray, float]:
    """Derivative plus the disagreement with the estimate from every other sample.

    Raises :class:`GridTooCoarse` if the two estimates differ by more than
    ``rtol * max|f'| + atol`` anywhere on the shared points.
    """
    fine = derivative(values, dt)
    coarse = derivative(values[::2], 2 * dt)
    n = coarse.shape[0]
    diff = float(np.max(np.linalg.norm(fine[::2][:n] - coarse, axis=(-2, -1))))
    scale = float(np.max(np.linalg.norm(fine, axis=(-2, -1))))
    if diff > rtol * scale + atol:
        raise GridTooCoarse(f"derivative estimates disagree by {diff:.3e} (scale {scale:.3e})")
    return fine, diff


@dataclass(frozen=True, eq=False)
class AdiabaticProblem:
    family: CommutingFamily
    perturbation: tuple  # DrivenOperator per order
    t_max: float
    order: int = 2
    time_scale: float | None = None

    def __post_init__(self):
        check_order(self.order)
        pert = tuple(p if isinstance(p, DrivenOperator) else DrivenOperator.static(p)
                     for p in self.perturbation)
        for k, p in enumerate(pert, start=1):
            if p.dim != self.family.dim:
                raise DimensionMismatch(f"H_{k} dim {p.dim} vs H0 dim {self.family.dim}")
            for M, _ in p.terms:
                hermitian(M)
        object.__setattr__(self, "perturbation", pert)

    @property
    def dim(self) -> int:
        return self.family.dim

    @property
    def S0(self):
        return self.family.S0

    def H_n(self, n: int, t) -> np.ndarray:
        t = np.asarray(t, float)
        if n == 0:
            return self.family.hamiltonian(t)
        if n <= len(self.perturbation):
            return self.perturbation[n - 1](t)
        return np.zeros(t.shape + (self.dim, self.dim), dtype=complex)

    def hamiltonian(self, lam: float, t) -> np.ndarray:
        out = self.H_n(0, t)
        for n in range(1, len(self.perturbation) + 1):
            out = out + lam ** n * self.H_n(n, t)
        return out


@dataclass(frozen=True, eq=False)
class AdiabaticSolution:
    problem: AdiabaticProblem
    grid: TimeGrid
    frakC: tuple
    Z: tuple
    Zdot: tuple
    C: tuple
    intC: tuple
    residuals: tuple
    residual_curves: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.C)

    def _sample(self, arrays, t):
        i = self.grid.index(float(t))
        if i is not None:
            return [a[i] for a in arrays]
        return [TimeOperatorFunction(self.grid, a)(t) for a in arrays]

    def Z_total(self, lam: float, t, order: int | None = None) -> np.ndarray:
        return evaluate_series(self._sample(self.Z[: order or self.order], t), lam)

    def intC_total(self, lam: float, t, order: int | None = None) -> np.ndarray:
        return evaluate_series(self._sample(self.intC[: order or self.order], t), lam)


def _gauge_arrays(gauge, times, S, order, dim):
    if gauge is None or gauge == "minimal":
        return [None] * order
    out = []
    for n in range(order):
        if n < len(gauge) and gauge[n] is not None:
            g = np.asarray(gauge[n](times), dtype=complex)
            if float(np.max(np.linalg.norm(offdiag_part(g, S), axis=(-2, -1)))) > 1e-10:
                raise ValueError(f"gauge block for order {n + 1} does not commute with H0")
            out.append(diag_part(g, S))
        else:
            out.append(None)
    return out


def _solve_on_grid(problem: AdiabaticProblem, grid: TimeGrid, gauge) -> AdiabaticSolution:
    S = problem.S0
    t = grid.times
    N = problem.order
    E = problem.family.energy_grid(t)
    H = [S.operator(E)] + [problem.H_n(n, t) for n in range(1, N + 1)]
    blocks = _gauge_arrays(gauge, t, S, N, problem.dim)
    frakC, Z, Zdot, residuals, curves, deriv_diff = [], [], [], [], [], []
    for n in range(1, N + 1):
        G = big_G(H[: n + 1], Z)
        off_rhs = None
        c = diag_part(G, S)
        if n >= 2:
            R = R_fun(+1, Zdot, Z)
            c = c - diag_part(R, S)
            off_rhs = offdiag_part(R, S)
        Zn = energy_green_part(G, S, energies=E) if S.n_groups > 1 else np.zeros_like(G)
        if blocks[n - 1] is not None:
            bd, _ = checked_derivative(blocks[n - 1], grid.dt)
            c = c - bd
            Zn = Zn + blocks[n - 1]
        dZ, dd = checked_derivative(Zn, grid.dt)
        off = -offdiag_part(dZ, S) if off_rhs is None else off_rhs - offdiag_part(dZ, S)
        curve = np.linalg.norm(off, ord=2, axis=(-2, -1))
        curves.append(curve)
        residuals.append(float(np.max(curve)))
        frakC.append(0.5 * (c + dagger(c)))
        Z.append(0.5 * (Zn + dagger(Zn)))
        Zdot.append(dZ)
        deriv_diff.append(dd)
    C = c_from_frakc_arrays(frakC, lambda f: cumulative_array(f, grid.dt))
    intC = [cumulative_array(c, grid.dt) for c in C]
    commutant = [float(max(np.max(np.linalg.norm(offdiag_part(x, S), axis=(-2, -1))) for x in (fc, cc)))
                 for fc, cc in zip(frakC, C)]
    return AdiabaticSolution(problem, grid, tuple(frakC), tuple(Z), tuple(Zdot), tuple(C),
                             tuple(intC), tuple(residuals), tuple(curves),
                             {"derivative_disagreement": deriv_diff, "commutant": commutant,
                              "panels": grid.panels})


def solve_adiabatic(problem: AdiabaticProblem, gauge="minimal",
                    config: QuadratureConfig | None = None) -> AdiabaticSolution:
    """Solve through ``problem.order``; the grid is doubled while derivatives are unreliable.

    ``gauge`` is ``"minimal"`` or a sequence of callables ``t -> diag(Z_n)(t)``.
    """
    config = config or QuadratureConfig()
    grid = TimeGrid.covering(problem.t_max, config)
    last = None
    for _ in range(config.max_refinements + 1):
        try:
            return _solve_on_grid(problem, grid, gauge)
        except GridTooCoarse as exc:
            last = exc
            grid = grid.refined()
    raise GridTooCoarse(f"{last} after {config.max_refinements} refinements")


def adiabatic_residual(sol: AdiabaticSolution) -> list[float]:
    """Per-order size (spectral norm, max over the grid) of the neglected off-diagonal terms."""
    return list(sol.residuals)


def assemble_adiabatic_evolutor(sol: AdiabaticSolution, lam: float, t, order: int | None = None) -> np.ndarray:
    """exp(-iZ(lam;t)) U0(t) exp(-i int_0^t C(lam)) exp(iZ(lam;0))."""
    U0 = sol.problem.family.propagator(float(t))
    Zt = sol.Z_total(lam, t, order)
    Z0 = sol.Z_total(lam, 0.0, order)
    IC = sol.intC_total(lam, t, order)
    return expm_hermitian(Zt) @ U0 @ expm_hermitian(IC) @ dagger(expm_hermitian(Z0))


def moving_projector(sol: AdiabaticSolution, lam: float, m: int, t, order: int | None = None) -> np.ndarray:
    W = expm_hermitian(sol.Z_total(lam, t, order))
    return W @ sol.problem.S0.projector(m) @ dagger(W)


def intertwining_defect(sol: AdiabaticSolution, lam: float, t, order: int | None = None) -> float:
    """max_m |U P_m(lam;0) - P_m(lam;t) U|_F for the assembled evolutor."""
    U = assemble_adiabatic_evolutor(sol, lam, t, order)
    return max(float(np.linalg.norm(U @ moving_projector(sol, lam, m, 0.0, order)
                                    - moving_projector(sol, lam, m, t, order) @ U))
               for m in range(sol.problem.S0.n_groups))
