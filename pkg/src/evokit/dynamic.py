"""General time-dependent case in the interaction picture.

With H~_n(t) = U0(t)^dag H_n(t) U0(t) and, for n >= 2,

    J_n(t) = B_n(H~_1..H~_{n-1}; c_1..c_{n-1}; Z_1(t)..Z_{n-1}(t)) + H~_n(t),   J_1 = H~_1,

each order is fixed by a choice of c_n(t) and of the constant Z_n:

    Z_n(t) = Z_n + int_0^t (J_n - c_n).

Modes:

* ``magnus``  -- c_n = J_n, Z_n = 0, so Z vanishes identically;
* ``floquet`` -- c_n = <J_n>_tau, Z_n = -<int_0^. (J_n - c_n)>_tau
  (Z_n(tau) = Z_n and Z_n(.) has zero average over [0, tau]);
* ``average`` -- the same with tau -> infinity (window ladder);
* ``custom``  -- caller supplies c_n(t) and Z_n.

C_n(t) is recovered from c_n(t); for the constant modes C_n = c_n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, ModeMismatch, PeriodMismatch, QuadratureFailure
from .operators import dagger, expm_hermitian, fro_norm, hermitian
from .quadrature import (DrivenOperator, QuadratureConfig, TimeGrid, TimeOperatorFunction,
                         cumulative_array, infinite_average, window_average)
from .series import B_mixed, c_from_frakc_arrays, check_order, evaluate_series
from .unperturbed import CommutingFamily, StaticH0

MODES = ("magnus", "floquet", "average", "custom")
PERIOD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DynamicProblem:
    """H(lam; t) = H0(t) + sum_n lam^n H_n(t) with a closed-form unperturbed propagator."""

    unperturbed: StaticH0 | CommutingFamily
    perturbation: tuple
    t_max: float
    period: float | None = None

    def __post_init__(self):
        if not isinstance(self.unperturbed, (StaticH0, CommutingFamily)):
            raise TypeError("unperturbed part must be StaticH0 or CommutingFamily "
                            "(fold a non-commuting H0(t) into the perturbation)")
        pert = tuple(p if isinstance(p, DrivenOperator) or callable(p) else DrivenOperator.static(p)
                     for p in self.perturbation)
        for k, p in enumerate(pert, start=1):
            if isinstance(p, DrivenOperator):
                if p.dim != self.dim:
                    raise DimensionMismatch(f"H_{k} dim {p.dim} vs H0 dim {self.dim}")
                for M, _ in p.terms:
                    hermitian(M)
        object.__setattr__(self, "perturbation", pert)
        if self.period is not None and not self.period > 0:
            raise ValueError("period must be positive")

    @property
    def dim(self) -> int:
        return self.unperturbed.dim

    def H_n(self, n: int, t) -> np.ndarray:
        t = np.asarray(t, float)
        if n == 0:
            return self.unperturbed.hamiltonian(t)
        if n <= len(self.perturbation):
            return np.asarray(self.perturbation[n - 1](t), dtype=complex)
        return np.zeros(t.shape + (self.dim, self.dim), dtype=complex)

    def interaction_n(self, n: int, t) -> np.ndarray:
        U0 = self.unperturbed.propagator(np.asarray(t, float))
        return dagger(U0) @ self.H_n(n, t) @ U0

    def hamiltonian(self, lam: float, t) -> np.ndarray:
        out = np.array(self.H_n(0, t), dtype=complex)
        for n in range(1, len(self.perturbation) + 1):
            out = out + lam ** n * self.H_n(n, t)
        return out


def interaction_picture(problem: DynamicProblem, grid: TimeGrid, order: int | None = None) -> list:
    """H~_1..H~_N as grid functions carrying exact evaluators."""
    N = order or len(problem.perturbation)
    out = []
    for n in range(1, N + 1):
        fn = (lambda t, n=n: problem.interaction_n(n, t))
        out.append(TimeOperatorFunction.sample(fn, grid, problem.period))
    return out


@dataclass(frozen=True, eq=False)
class DynamicSolution:
    problem: DynamicProblem
    mode: str
    tau: float | None
    grid: TimeGrid
    frakC: tuple  # grid arrays (M, d, d)
    C: tuple
    intC: tuple
    Zfun: tuple
    Zinit: tuple
    diagnostics: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.C)

    @property
    def constant(self) -> bool:
        return self.mode in ("floquet", "average")

    def C_const(self, n: int) -> np.ndarray:
        if not self.constant:
            raise ModeMismatch(f"C_n is time-dependent in mode {self.mode!r}")
        return self.C[n - 1][0]

    def _sample(self, arrays, t):
        i = self.grid.index(float(t))
        if i is not None:
            return [a[i] for a in arrays]
        if not 0 <= t <= self.grid.t_max:
            raise QuadratureFailure(f"t={t} outside the solved horizon [0, {self.grid.t_max}]")
        return [TimeOperatorFunction(self.grid, a)(t) for a in arrays]

    def Z_total(self, lam: float, t, order: int | None = None) -> np.ndarray:
        return evaluate_series(self._sample(self.Zfun[: order or self.order], t), lam)

    def intC_total(self, lam: float, t, order: int | None = None) -> np.ndarray:
        return evaluate_series(self._sample(self.intC[: order or self.order], t), lam)


def _check_period(problem: DynamicProblem, tau: float, order: int, config: QuadratureConfig) -> None:
    T = problem.period
    m0 = tau / T
    if abs(m0 - round(m0)) > 1e-9 * max(1.0, m0) or round(m0) < 1:
        raise PeriodMismatch(f"tau={tau} is not a positive integer multiple of the period {T}")
    probe = np.linspace(0.0, T, 257)
    for n in range(1, order + 1):
        a = problem.interaction_n(n, probe)
        b = problem.interaction_n(n, probe + T)
        defect = float(np.max(fro_norm(a - b)))
        if defect > PERIOD_TOL * max(1.0, float(np.max(fro_norm(a)))):
            raise PeriodMismatch(f"interaction-picture H_{n} is not {T}-periodic (defect {defect:.2e})")


def _constants(J, grid: TimeGrid, mode: str, tau, config: QuadratureConfig, period=None):
    if mode == "floquet":
        c = window_average(TimeOperatorFunction(grid, J, period=period), tau, config)
        F = cumulative_array(J - c, grid.dt)
        Zc = -window_average(TimeOperatorFunction(grid, F, period=period), tau, config)
        return c, Zc, F, {}
    cav = infinite_average(J, grid, config.avg_tol)
    F = cumulative_array(J - cav.value, grid.dt)
    zav = infinite_average(F, grid, config.avg_tol)
    return cav.value, -zav.value, F, {"avg_delta": max(cav.delta, zav.delta)}


def _solve_on_grid(problem, grid, mode, N, tau, config, custom):
    Ht = [problem.interaction_n(n, grid.times) for n in range(1, N + 1)]
    frakC, Zfun, Zinit, avg_deltas = [], [], [], []
    M = grid.panels + 1
    d = problem.dim
    for n in range(1, N + 1):
        J = Ht[n - 1] if n == 1 else Ht[n - 1] + B_mixed(Ht[: n - 1], frakC, Zfun)
        J = np.broadcast_to(J, (M, d, d))
        if mode == "magnus":
            c, Zc, Zt = J, np.zeros((d, d), complex), np.zeros((M, d, d), complex)
        elif mode == "custom":
            c_fns, Z_consts = custom
            c = np.broadcast_to(np.asarray(c_fns[n - 1](grid.times), dtype=complex), (M, d, d)) \
                if callable(c_fns[n - 1]) else np.broadcast_to(np.asarray(c_fns[n - 1], complex), (M, d, d))
            Zc = np.asarray(Z_consts[n - 1], dtype=complex)
            Zt = Zc + cumulative_array(J - c, grid.dt)
        else:
            cc, Zc, F, info = _constants(J, grid, mode, tau, config, problem.period)
            if "avg_delta" in info:
                avg_deltas.append(info["avg_delta"])
            cc = 0.5 * (cc + dagger(cc))
            Zc = 0.5 * (Zc + dagger(Zc))
            c = np.broadcast_to(cc, (M, d, d))
            Zt = Zc + F
        frakC.append(np.array(c))
        Zfun.append(0.5 * (Zt + dagger(Zt)))
        Zinit.append(np.array(Zc))
    if mode in ("floquet", "average"):
        C = [np.array(c) for c in frakC]
    else:
        C = c_from_frakc_arrays(frakC, lambda f: cumulative_array(f, grid.dt))
    intC = [cumulative_array(c, grid.dt) for c in C]
    diag = {"panels": grid.panels}
    if avg_deltas:
        diag["avg_delta"] = max(avg_deltas)
    return frakC, C, intC, Zfun, Zinit, diag


def _disagreement(coarse, fine) -> float:
    err = 0.0
    for name in ("Zfun", "intC"):
        for a, b in zip(coarse[name], fine[name]):
            diff = float(np.max(fro_norm(b[::2] - a)))
            err = max(err, diff / max(1.0, float(np.max(fro_norm(b)))))
    return err / 15


def default_mode(problem: DynamicProblem) -> str:
    return "floquet" if problem.period else "magnus"


def solve_dynamic(problem: DynamicProblem, mode: str | None = None, order: int = 2,
                  tau: float | None = None, config: QuadratureConfig | None = None,
                  custom: tuple | None = None, refine: bool = True) -> DynamicSolution:
    """Solve through ``order`` in the given mode.

    The grid is doubled until coefficient functions change by less than
    ``config.quad_tol`` (Richardson estimate, relative to max(1, |coef|));
    ``refine=False`` accepts the initial grid and only reports the estimate
    when it is cheap (never here).
    """
    config = config or QuadratureConfig()
    mode = mode or default_mode(problem)
    if mode not in MODES:
        raise ModeMismatch(f"unknown mode {mode!r}; expected one of {MODES}")
    check_order(order)
    if mode == "custom" and (custom is None or len(custom[0]) < order or len(custom[1]) < order):
        raise ValueError("custom mode needs (c_functions, Z_constants) for every order")
    align = None
    if mode == "floquet":
        if tau is None:
            if not problem.period:
                raise PeriodMismatch("floquet mode needs tau or a declared period")
            tau = problem.period
        if problem.period:
            _check_period(problem, tau, order, config)
            align = problem.period
        else:
            align = tau
        t_max = max(problem.t_max, tau)
    elif mode == "average":
        tau = math.inf
        t_max = problem.t_max
    else:
        t_max = problem.t_max
    grid = TimeGrid.covering(t_max, config, align=align)

    def run(g):
        fc, C, intC, Zf, Zi, diag = _solve_on_grid(problem, g, mode, order, tau, config, custom)
        return {"frakC": fc, "C": C, "intC": intC, "Zfun": Zf, "Zinit": Zi, "diag": diag}

    cur = run(grid)
    est = None
    if refine:
        for _ in range(config.max_refinements):
            finer = run(grid.refined())
            est = _disagreement(cur, finer)
            grid, cur = grid.refined(), finer
            if est <= config.quad_tol:
                break
        else:
            raise QuadratureFailure(f"coefficient functions not converged: estimate {est:.2e} "
                                    f"> {config.quad_tol:.1e}")
    diag = dict(cur["diag"])
    diag["quad_error_estimate"] = est
    sol = DynamicSolution(problem, mode, tau, grid, tuple(cur["frakC"]), tuple(cur["C"]),
                          tuple(cur["intC"]), tuple(cur["Zfun"]), tuple(cur["Zinit"]), diag)
    if mode == "floquet":
        diag["zero_average_defect"] = zero_average_defect(sol)
    return sol


def zero_average_defect(sol: DynamicSolution) -> list[float]:
    """Per order: |<Z_n(.)>_tau| / max|Z_n| (the zero-average condition), floquet mode."""
    out = []
    for Zt in sol.Zfun:
        avg = window_average(TimeOperatorFunction(sol.grid, Zt, period=sol.problem.period), sol.tau)
        out.append(float(fro_norm(avg)) / max(1e-300, float(np.max(fro_norm(Zt)))))
    return out


def periodicity_defect(sol: DynamicSolution, period: float | None = None) -> list[float]:
    """Per order: max over the grid of |Z_n(t + T) - Z_n(t)|."""
    T = period or sol.problem.period
    p = sol.grid.index(T)
    if p is None or p == 0 or p > sol.grid.panels:
        raise PeriodMismatch(f"period {T} is not resolved by the solution grid")
    return [float(np.max(fro_norm(Zt[p:] - Zt[:-p]))) for Zt in sol.Zfun]


def effective_hamiltonian(sol: DynamicSolution, lam: float, order: int | None = None) -> np.ndarray:
    """h(lam) = exp(-iZ(lam)) C(lam) exp(iZ(lam)) for the constant modes."""
    if not sol.constant:
        raise ModeMismatch(f"effective Hamiltonian needs floquet or average mode, not {sol.mode!r}")
    N = order or sol.order
    Z = evaluate_series([z for z in sol.Zinit[:N]], lam)
    C = evaluate_series([c[0] for c in sol.C[:N]], lam)
    W = expm_hermitian(Z)
    return hermitian(W @ C @ dagger(W), tol=1e-9, atol=1e-12)


def assemble_general_evolutor(sol: DynamicSolution, lam: float, t, order: int | None = None) -> np.ndarray:
    """U0(t) exp(-iZ(lam;t)) exp(-i int_0^t C(lam)) exp(iZ(lam;0))."""
    U0 = sol.problem.unperturbed.propagator(float(t))
    Zt = sol.Z_total(lam, t, order)
    Z0 = sol.Z_total(lam, 0.0, order)
    IC = sol.intC_total(lam, t, order)
    return U0 @ expm_hermitian(Zt) @ expm_hermitian(IC) @ dagger(expm_hermitian(Z0))


def interaction_evolutor(sol: DynamicSolution, lam: float, t, order: int | None = None) -> np.ndarray:
    """T(lam; t) = U0(t)^dag U(lam; t)."""
    U0 = sol.problem.unperturbed.propagator(float(t))
    return dagger(U0) @ assemble_general_evolutor(sol, lam, t, order)
