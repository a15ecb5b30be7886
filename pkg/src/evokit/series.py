"""Perturbative-order combinatorics for the nested-commutator series.

Conventions: operator lists are 1-based in the maths and 0-based in code,
so ``Z[k - 1]`` holds Z_k. Every function broadcasts over leading axes,
which lets the solvers evaluate whole time grids at once.

Notation for a composition sum::

    S_{n,m}(X; Y) = sum_{k_1 + ... + k_m = n} ad_{Y_{k_1}} ... ad_{Y_{k_m}} X
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, OrderOverflow
from .operators import as_matrix

K_MAX = 32
MAX_ORDER = 6


@lru_cache(maxsize=None)
def _bernoulli_table(K: int) -> tuple[Fraction, ...]:
    beta = [Fraction(1)]
    for k in range(1, K + 1):
        # sum_{j=0}^{k} binom(k+1, j) beta_j = 0
        acc = sum(math.comb(k + 1, j) * beta[j] for j in range(k))
        beta.append(-acc / (k + 1))
    return tuple(beta)


def bernoulli(k: int, k_max: int = K_MAX) -> Fraction:
    """Exact Bernoulli number beta_k (convention beta_1 = -1/2)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > k_max:
        raise OrderOverflow(f"Bernoulli index {k} exceeds table size {k_max}")
    return _bernoulli_table(k_max)[k]


def avxp_coefficients(degree: int) -> list[Fraction]:
    """Taylor coefficients 1/(k+1)! of (e^z - 1)/z."""
    return [Fraction(1, math.factorial(k + 1)) for k in range(degree + 1)]


def inverse_avxp_coefficients(degree: int) -> list[Fraction]:
    """Taylor coefficients beta_k/k! of z/(e^z - 1)."""
    return [bernoulli(k) / math.factorial(k) for k in range(degree + 1)]


@lru_cache(maxsize=None)
def compositions(n: int, m: int) -> tuple[tuple[int, ...], ...]:
    """All ordered m-tuples of positive integers summing to n (lexicographic)."""
    if m < 1 or n < m:
        return ()
    if m == 1:
        return ((n,),)
    return tuple((k,) + rest for k in range(1, n - m + 2) for rest in compositions(n - k, m - 1))


def _check_dims(X, Ys):
    X = as_matrix(X)
    d = X.shape[-1]
    for Y in Ys:
        if np.shape(Y)[-1] != d:
            raise DimensionMismatch(f"operator dims differ: {np.shape(Y)[-1]} vs {d}")
    return X


def composition_sum(X, Y: Sequence, n: int, m: int, skip=None) -> np.ndarray:
    """S_{n,m}(X; Y), omitting the single composition ``skip`` if given.

    Inner (rightmost) ad-chains shared between compositions are evaluated
    once per call.
    """
    X = _check_dims(X, Y[:n])
    memo: dict[tuple[int, ...], np.ndarray] = {(): X}

    def chain(ks):
        if ks not in memo:
            inner = chain(ks[1:])
            Yk = Y[ks[0] - 1]
            memo[ks] = Yk @ inner - inner @ Yk
        return memo[ks]

    total = np.zeros(np.broadcast_shapes(X.shape, *(np.shape(y) for y in Y[:n])), dtype=complex)
    for ks in compositions(n, m):
        if ks != skip:
            total = total + chain(ks)
    return total


def script_G(X, Z: Sequence) -> np.ndarray:
    """G_n(X; Z_1..Z_n) = sum_m (i^m/m!) S_{n,m}(X; Z), with n = len(Z)."""
    n = len(Z)
    return sum((1j ** m / math.factorial(m)) * composition_sum(X, Z, n, m) for m in range(1, n + 1))


def big_G(H: Sequence, Z: Sequence) -> np.ndarray:
    """Right-hand side of the order-n static equation C_n - i[Z_n, H_0] = G_n.

    ``H`` holds H_0..H_n (so n = len(H) - 1) and ``Z`` holds at least
    Z_1..Z_{n-1}; any Z_n supplied is ignored. The i[Z_n, H_0] term of
    G_n(H_0; .) cancels analytically and is never formed.
    """
    n = len(H) - 1
    if n < 1:
        raise ValueError("need at least H_0 and H_1")
    Z = list(Z[: n - 1])
    total = as_matrix(H[n]) + 0j
    for j in range(0, n):
        order = n - j
        if j == 0:
            # Z_n only ever appears in the single-ad term (m=1, k_1=n); drop it.
            for m in range(2, n + 1):
                total = total + (1j ** m / math.factorial(m)) * composition_sum(H[0], Z, n, m)
        else:
            total = total + script_G(H[j], Z[:order])
    return total


def script_R(sign: int, X, Y: Sequence) -> np.ndarray:
    """R_n^(+/-)(X; Y_1..Y_n) = sum_m ((+/- i)^m / (m+1)!) S_{n,m}(X; Y)."""
    n = len(Y)
    s = 1j * sign
    return sum((s ** m / math.factorial(m + 1)) * composition_sum(X, Y, n, m) for m in range(1, n + 1))


def R_fun(sign: int, X: Sequence, Y: Sequence) -> np.ndarray:
    """Aggregated R_n^(+/-) = +/- sum_{j=1}^{n-1} R_{n-j}^(+/-)(X_j; Y_1..Y_{n-j}).

    ``X`` and ``Y`` hold the first n-1 coefficients.
    """
    n = len(X) + 1
    if n < 2 or len(Y) < n - 1:
        raise ValueError("R_fun needs n >= 2 and matching X/Y lists")
    total = sum(script_R(sign, X[j - 1], Y[: n - j]) for j in range(1, n))
    return sign * total


def script_B(sign: int, X, Y: Sequence) -> np.ndarray:
    """B_n^(+/-)(X; Y_1..Y_n) = (i/2) ad_{Y_n} X +/- sum_m |beta_2m|/(2m)! S_{n,2m}(X; Y)."""
    n = len(Y)
    X = _check_dims(X, Y)
    Yn = Y[n - 1]
    total = 0.5j * (Yn @ X - X @ Yn)
    for m in range(1, n // 2 + 1):
        c = float(abs(bernoulli(2 * m))) / math.factorial(2 * m)
        total = total + sign * c * composition_sum(X, Y, n, 2 * m)
    return total


def B_fun(sign: int, X: Sequence, Y: Sequence) -> np.ndarray:
    """Aggregated B_n^(+/-) = sum_{j=1}^{n-1} B_{n-j}^(+/-)(X_j; Y_1..Y_{n-j})."""
    n = len(X) + 1
    if n < 2 or len(Y) < n - 1:
        raise ValueError("B_fun needs n >= 2 and matching X/Y lists")
    return sum(script_B(sign, X[j - 1], Y[: n - j]) for j in range(1, n))


def script_B_mixed(X, Yc, Z: Sequence) -> np.ndarray:
    """B_n(X, Y; Z) = sum_m (i^m beta_m/m!) S_{n,m}((-1)^m X - Y; Z)."""
    n = len(Z)
    total = 0
    for m in range(1, n + 1):
        c = 1j ** m * float(bernoulli(m)) / math.factorial(m)
        if c != 0:
            total = total + c * composition_sum((-1) ** m * as_matrix(X) - as_matrix(Yc), Z, n, m)
    return total


def B_mixed(Ht: Sequence, frakC: Sequence, Z: Sequence) -> np.ndarray:
    """B_n = B_n^-(H~; Z) + B_n^+(c; Z) for the general time-dependent system."""
    return B_fun(-1, Ht, Z) + B_fun(+1, frakC, Z)


def check_order(N: int, max_order: int = MAX_ORDER) -> int:
    if N < 1:
        raise ValueError("order must be >= 1")
    if N > max_order:
        raise OrderOverflow(f"order {N} exceeds the configured maximum {max_order}")
    return N


def evaluate_series(coeffs: Sequence, lam: float) -> np.ndarray:
    """sum_{n>=1} lam^n coeffs[n-1]."""
    out = 0
    for n, c in enumerate(coeffs, start=1):
        out = out + lam ** n * np.asarray(c)
    return np.asarray(out)


def c_from_frakc_arrays(frakC: Sequence[np.ndarray], cumulative) -> list[np.ndarray]:
    """Recover C_n(t) from c_n(t) on a grid.

    C_1 = c_1; C_n = B_n^-(c_1..c_{n-1}; intC_1..intC_{n-1}) + c_n, where
    ``cumulative`` maps grid samples to running integrals from 0.
    """
    C, intC = [], []
    for n, cn in enumerate(frakC, start=1):
        Cn = np.asarray(cn, dtype=complex) if n == 1 else B_fun(-1, frakC[: n - 1], intC) + cn
        C.append(Cn)
        intC.append(cumulative(Cn))
    return C


def frakc_from_c_arrays(C: Sequence[np.ndarray], cumulative) -> list[np.ndarray]:
    """c = avxp(-i ad_{int C}) C order by order: c_n = C_n - R_n^-(C; intC)."""
    intC = [cumulative(np.asarray(Cn, dtype=complex)) for Cn in C]
    out = []
    for n, Cn in enumerate(C, start=1):
        cn = np.asarray(Cn, dtype=complex) if n == 1 else Cn - R_fun(-1, C[: n - 1], intC)
        out.append(cn)
    return out


def _grid_series(series):
    from .quadrature import TimeOperatorFunction

    if not series:
        raise ValueError("empty series")
    if not all(isinstance(f, TimeOperatorFunction) for f in series):
        raise TypeError("expected TimeOperatorFunction coefficients")
    grid = series[0].grid
    if any(f.grid != grid for f in series):
        raise DimensionMismatch("all coefficients must share one time grid")
    return grid, [f.values for f in series]


def c_from_frakc(frakC: Sequence, quad=None) -> list:
    """C_1..C_N from c_1..c_N given as TimeOperatorFunctions on a shared grid."""
    from .quadrature import TimeOperatorFunction, cumulative_array

    check_order(len(frakC), K_MAX)
    grid, vals = _grid_series(frakC)
    out = c_from_frakc_arrays(vals, lambda f: cumulative_array(f, grid.dt))
    return [TimeOperatorFunction(grid, v) for v in out]


def frakc_from_c(C: Sequence, quad=None) -> list:
    """c_1..c_N from C_1..C_N (inverse of :func:`c_from_frakc`)."""
    from .quadrature import TimeOperatorFunction, cumulative_array

    check_order(len(C), K_MAX)
    grid, vals = _grid_series(C)
    out = frakc_from_c_arrays(vals, lambda f: cumulative_array(f, grid.dt))
    return [TimeOperatorFunction(grid, v) for v in out]
