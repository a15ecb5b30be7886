"""Reference propagation of i dU/dt = H(lam; t) U and order-scaling fits.

The integrator is the fourth-order commutator-free exponential scheme with
two Gauss-Legendre nodes per step. Each step is a product of two exact
exponentials of Hermitian matrices, so the result is unitary up to
round-off no matter how coarse the step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import InsufficientData, NoConvergence
from .operators import expm_hermitian, fro_norm, symmetrize

_C1 = 0.5 - math.sqrt(3) / 6
_C2 = 0.5 + math.sqrt(3) / 6
_A1 = (3 - 2 * math.sqrt(3)) / 12
_A2 = (3 + 2 * math.sqrt(3)) / 12


@dataclass(frozen=True)
class PropagationResult:
    U: np.ndarray
    est_error: float
    steps: int


def _ordered_product(stack: np.ndarray) -> np.ndarray:
    """stack[-1] @ ... @ stack[1] @ stack[0] by pairwise (vectorized) reduction."""
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            stack = np.concatenate([stack, np.eye(stack.shape[-1])[None]], axis=0)
        stack = stack[1::2] @ stack[0::2]
    return stack[0]


def cf4_propagate(H: Callable, t0: float, t1: float, steps: int) -> np.ndarray:
    """Evolutor from t0 to t1 with ``steps`` CF4 steps; ``H(times)`` is vectorized."""
    h = (t1 - t0) / steps
    starts = t0 + h * np.arange(steps)
    Ha = symmetrize(H(starts + _C1 * h))
    Hb = symmetrize(H(starts + _C2 * h))
    first = expm_hermitian(_A2 * Ha + _A1 * Hb, h)
    second = expm_hermitian(_A1 * Ha + _A2 * Hb, h)
    per_step = second @ first
    return _ordered_product(per_step)


def propagate_exact(H: Callable, lam: float, t: float, tol: float = 1e-10, t0: float = 0.0,
                    initial_steps: int | None = None, max_steps: int = 2 ** 20) -> PropagationResult:
    """U(lam; t, t0) for ``H(lam, times) -> (M, d, d)``.

    Steps are doubled until two successive results differ by at most ``tol``
    (Frobenius); the reported error estimate is that difference over 15.
    """
    if t == t0:
        d = np.asarray(H(lam, np.array([t0]))).shape[-1]
        return PropagationResult(np.eye(d, dtype=complex), 0.0, 0)

    def Hl(times):
        return np.asarray(H(lam, times), dtype=complex)

    if initial_steps is None:
        probe = Hl(np.linspace(t0, t, 9))
        rate = float(np.max(np.linalg.norm(probe, ord=2, axis=(-2, -1)))) * abs(t - t0)
        initial_steps = max(8, int(2 ** math.ceil(math.log2(max(1.0, 2 * rate)))))
    steps = initial_steps
    prev = cf4_propagate(Hl, t0, t, steps)
    while steps < max_steps:
        steps *= 2
        cur = cf4_propagate(Hl, t0, t, steps)
        diff = float(fro_norm(cur - prev))
        if diff <= tol:
            return PropagationResult(cur, diff / 15, steps)
        prev = cur
    raise NoConvergence(f"no convergence to {tol:.1e} within {max_steps} steps")


@dataclass(frozen=True)
class ScalingVerdict:
    passed: bool
    slope: float
    expected: int
    lambdas: tuple
    errors: tuple

    @property
    def label(self) -> str:
        return f"{'pass' if self.passed else 'fail'}, slope={self.slope:.3f}"


def order_scaling_check(errs: Mapping[float, float], N: int, low: float = 0.4,
                        high: float = 0.6) -> ScalingVerdict:
    """Least-squares slope of log(err) vs log(lam); pass if within [N+1-low, N+1+high]."""
    pts = sorted((float(l), float(e)) for l, e in errs.items())
    if len(pts) < 3:
        raise InsufficientData(f"need at least 3 lambda values, got {len(pts)}")
    lam = np.array([p[0] for p in pts])
    err = np.array([p[1] for p in pts])
    if np.any(lam <= 0) or np.any(err <= 0):
        raise InsufficientData("lambda values and errors must be positive")
    slope = float(np.polyfit(np.log(lam), np.log(err), 1)[0])
    passed = (N + 1 - low) <= slope <= (N + 1 + high)
    return ScalingVerdict(passed, slope, N + 1, tuple(lam), tuple(err))
