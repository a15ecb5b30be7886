"""Time-function representation, integrals and window averages.

Every time-dependent quantity lives on a uniform grid ``t_i = i * t_max / panels``
so that pointwise commutators between different functions need no
interpolation. Grids are refined by global doubling only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erf

from .errors import AverageNonConvergent, QuadratureFailure
from .operators import as_matrix, fro_norm


@dataclass(frozen=True)
class QuadratureConfig:
    panels: int = 256
    quad_tol: float = 1e-9
    max_refinements: int = 5
    dt_max: float = 0.05
    avg_tol: float = 1e-6

    def __post_init__(self):
        if self.panels < 4:
            raise ValueError("panels must be >= 4")


@dataclass(frozen=True)
class TimeGrid:
    t_max: float
    panels: int

    def __post_init__(self):
        if self.panels < 4:
            raise ValueError("a grid needs at least 4 panels")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")

    @classmethod
    def covering(cls, t_max: float, config: QuadratureConfig | None = None, align: float | None = None):
        """Grid on [0, >= t_max] fine enough for ``config``; ``align`` becomes a grid point."""
        config = config or QuadratureConfig()
        if align is None:
            panels = max(config.panels, math.ceil(t_max / config.dt_max))
            return cls(float(t_max), int(panels))
        per = max(4, math.ceil(align / config.dt_max), math.ceil(config.panels * align / max(t_max, align)))
        dt = align / per
        panels = max(per, math.ceil(t_max / dt - 1e-9))
        return cls(panels * dt, int(panels))

    @property
    def dt(self) -> float:
        return self.t_max / self.panels

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.panels + 1)

    def refined(self) -> "TimeGrid":
        return TimeGrid(self.t_max, 2 * self.panels)

    def index(self, t: float, tol: float = 1e-9) -> int | None:
        """Index of grid point ``t`` or None if ``t`` is off-grid."""
        x = t / self.dt
        i = int(round(x))
        if abs(x - i) <= tol * max(1.0, abs(x)) and 0 <= i <= self.panels:
            return i
        return None


# ----------------------------------------------------------------------------
# waveform library (scalar real functions with exact evaluators)


class Waveform:
    kind = "abstract"
    period: float | None = None

    def __call__(self, t):
        raise NotImplementedError

    def integral(self, t):
        """Antiderivative from 0 to t."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Waveform):
    value: float = 1.0
    kind = "constant"

    @property
    def period(self):
        return 0.0  # periodic with any period

    def __call__(self, t):
        return np.full(np.shape(t), self.value, dtype=float)

    def integral(self, t):
        return self.value * np.asarray(t, dtype=float)

    def to_dict(self):
        return {"type": "constant", "value": self.value}


@dataclass(frozen=True)
class Cosine(Waveform):
    """offset + amplitude * cos(frequency * t + phase)."""

    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0
    offset: float = 0.0
    kind = "cosine"

    @property
    def period(self):
        return 2 * np.pi / abs(self.frequency) if self.frequency else 0.0

    def __call__(self, t):
        return self.offset + self.amplitude * np.cos(self.frequency * np.asarray(t, float) + self.phase)

    def integral(self, t):
        t = np.asarray(t, float)
        w, p = self.frequency, self.phase
        osc = self.amplitude * (np.sin(w * t + p) - np.sin(p)) / w if w else self.amplitude * np.cos(p) * t
        return self.offset * t + osc

    def to_dict(self):
        return {"type": "cosine", "amplitude": self.amplitude, "frequency": self.frequency,
                "phase": self.phase, "offset": self.offset}


@dataclass(frozen=True)
class Sine(Waveform):
    """offset + amplitude * sin(frequency * t + phase)."""

    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0
    offset: float = 0.0
    kind = "sine"

    @property
    def period(self):
        return 2 * np.pi / abs(self.frequency) if self.frequency else 0.0

    def __call__(self, t):
        return self.offset + self.amplitude * np.sin(self.frequency * np.asarray(t, float) + self.phase)

    def integral(self, t):
        t = np.asarray(t, float)
        w, p = self.frequency, self.phase
        osc = self.amplitude * (np.cos(p) - np.cos(w * t + p)) / w if w else self.amplitude * np.sin(p) * t
        return self.offset * t + osc

    def to_dict(self):
        return {"type": "sine", "amplitude": self.amplitude, "frequency": self.frequency,
                "phase": self.phase, "offset": self.offset}


@dataclass(frozen=True)
class Gaussian(Waveform):
    """amplitude * exp(-(t - center)^2 / (2 width^2))."""

    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0
    kind = "gaussian"

    def __call__(self, t):
        x = (np.asarray(t, float) - self.center) / self.width
        return self.amplitude * np.exp(-0.5 * x * x)

    def integral(self, t):
        s = self.width * np.sqrt(2)
        c = self.amplitude * self.width * np.sqrt(np.pi / 2)
        return c * (erf((np.asarray(t, float) - self.center) / s) - erf(-self.center / s))

    def to_dict(self):
        return {"type": "gaussian", "amplitude": self.amplitude, "center": self.center,
                "width": self.width}


@dataclass(frozen=True)
class PiecewiseLinear(Waveform):
    """Linear interpolation through ``points``; end segments extrapolate linearly."""

    points: tuple = ((0.0, 0.0), (1.0, 1.0))
    kind = "piecewise_linear"

    def __post_init__(self):
        pts = tuple((float(a), float(b)) for a, b in self.points)
        if len(pts) < 2 or any(pts[i + 1][0] <= pts[i][0] for i in range(len(pts) - 1)):
            raise ValueError("piecewise_linear needs >= 2 points with increasing times")
        object.__setattr__(self, "points", pts)

    def _slopes(self):
        x = np.array([p[0] for p in self.points])
        y = np.array([p[1] for p in self.points])
        return x, y, np.diff(y) / np.diff(x)

    def __call__(self, t):
        x, y, s = self._slopes()
        t = np.asarray(t, float)
        k = np.clip(np.searchsorted(x, t, side="right") - 1, 0, len(s) - 1)
        return y[k] + s[k] * (t - x[k])

    def _primitive(self, t):
        x, y, s = self._slopes()
        t = np.asarray(t, float)
        k = np.clip(np.searchsorted(x, t, side="right") - 1, 0, len(s) - 1)
        seg = np.concatenate([[0.0], np.cumsum((y[:-1] + y[1:]) / 2 * np.diff(x))])
        dt = t - x[k]
        return seg[k] + y[k] * dt + 0.5 * s[k] * dt * dt

    def integral(self, t):
        return self._primitive(t) - self._primitive(0.0)

    def to_dict(self):
        return {"type": "piecewise_linear", "points": [list(p) for p in self.points]}


WAVEFORMS = {"constant": Constant, "cosine": Cosine, "sine": Sine, "gaussian": Gaussian,
             "piecewise_linear": PiecewiseLinear}


def waveform_from_dict(spec: dict) -> Waveform:
    spec = dict(spec)
    kind = spec.pop("type")
    if kind not in WAVEFORMS:
        raise KeyError(kind)
    if kind == "piecewise_linear":
        spec["points"] = tuple(tuple(p) for p in spec["points"])
    return WAVEFORMS[kind](**spec)


def common_period(periods: Sequence[float | None], rtol: float = 1e-10) -> float | None:
    """Smallest period shared by all entries (0 means 'any period'); None if none exists."""
    finite = [p for p in periods if p not in (None, 0.0)]
    if any(p is None for p in periods):
        return None
    if not finite:
        return 0.0
    base = max(finite)
    for mult in range(1, 65):
        T = base * mult
        if all(abs(T / p - round(T / p)) < rtol * T / p for p in finite):
            return T
    return None


@dataclass(frozen=True)
class DrivenOperator:
    """Operator-valued function t -> sum_k waveform_k(t) * matrix_k."""

    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((as_matrix(M), w) for M, w in self.terms))

    @classmethod
    def static(cls, M) -> "DrivenOperator":
        return cls(((M, Constant(1.0)),))

    @property
    def dim(self) -> int:
        return self.terms[0][0].shape[0]

    @property
    def period(self) -> float | None:
        return common_period([w.period for _, w in self.terms])

    @property
    def is_static(self) -> bool:
        return all(isinstance(w, Constant) for _, w in self.terms)

    def __call__(self, t):
        t = np.asarray(t, float)
        out = np.zeros(t.shape + (self.dim, self.dim), dtype=complex)
        for M, w in self.terms:
            out = out + np.asarray(w(t))[..., None, None] * M
        return out

    def integral(self, t):
        t = np.asarray(t, float)
        out = np.zeros(t.shape + (self.dim, self.dim), dtype=complex)
        for M, w in self.terms:
            out = out + np.asarray(w.integral(t))[..., None, None] * M
        return out


# ----------------------------------------------------------------------------
# grid functions


@dataclass(frozen=True)
class TimeOperatorFunction:
    """Operator samples on a uniform grid, optionally backed by an exact evaluator."""

    grid: TimeGrid
    values: np.ndarray
    evaluator: Callable | None = field(default=None, compare=False)
    period: float | None = None

    @classmethod
    def sample(cls, fn: Callable, grid: TimeGrid, period: float | None = None) -> "TimeOperatorFunction":
        """Sample a vectorized ``fn(times) -> (M, d, d)`` on ``grid``."""
        return cls(grid, np.asarray(fn(grid.times), dtype=complex), fn, period)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def __call__(self, t):
        if self.evaluator is not None:
            return np.asarray(self.evaluator(np.asarray(t, float)), dtype=complex)
        i = self.grid.index(float(t)) if np.ndim(t) == 0 else None
        if i is not None:
            return self.values[i]
        return CubicSpline(self.times, self.values, axis=0)(t)

    def refined(self) -> "TimeOperatorFunction":
        if self.evaluator is None:
            raise QuadratureFailure("cannot refine a grid-only function")
        return TimeOperatorFunction.sample(self.evaluator, self.grid.refined(), self.period)

    def with_values(self, values) -> "TimeOperatorFunction":
        return replace(self, values=np.asarray(values, dtype=complex), evaluator=None)


def cumulative_array(values: np.ndarray, dt: float) -> np.ndarray:
    """Running integral F_i = int_0^{t_i} f on a uniform grid.

    Each panel [t_i, t_{i+1}] is integrated exactly for the cubic through
    four neighbouring samples (one-sided at the ends): fourth order overall.
    """
    f = np.asarray(values)
    M = f.shape[0]
    if M < 5:
        raise QuadratureFailure("cumulative integration needs at least 4 panels")
    panel = np.empty((M - 1,) + f.shape[1:], dtype=np.result_type(f, float))
    panel[1:-1] = (-f[:-3] + 13 * f[1:-2] + 13 * f[2:-1] - f[3:]) / 24
    panel[0] = (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24
    panel[-1] = (f[-4] - 5 * f[-3] + 19 * f[-2] + 9 * f[-1]) / 24
    out = np.zeros_like(f, dtype=panel.dtype)
    out[1:] = np.cumsum(panel, axis=0) * dt
    return out


def cumulative(f: TimeOperatorFunction) -> TimeOperatorFunction:
    """Grid function F(t_i) = int_0^{t_i} f."""
    return TimeOperatorFunction(f.grid, cumulative_array(f.values, f.grid.dt))


def _integrate_grid(values, grid: TimeGrid, a: float, b: float):
    ia, ib = grid.index(a), grid.index(b)
    if ia is None or ib is None:
        raise QuadratureFailure(f"[{a}, {b}] not aligned with the grid (dt={grid.dt})")
    F = cumulative_array(values, grid.dt)
    return F[ib] - F[ia]


def integrate(f, a: float, b: float, config: QuadratureConfig | None = None) -> np.ndarray:
    """int_a^b f(t) dt.

    Grid-only functions are integrated on their own grid (endpoints must be
    grid points), consistent with :func:`cumulative`. Functions with an
    evaluator (a :class:`TimeOperatorFunction` with one, or a plain callable)
    are integrated adaptively with panel doubling until the Richardson error
    estimate is below ``quad_tol``.
    """
    config = config or QuadratureConfig()
    if isinstance(f, TimeOperatorFunction) and f.evaluator is None:
        return _integrate_grid(f.values, f.grid, a, b)
    fn = f.evaluator if isinstance(f, TimeOperatorFunction) else f
    if b == a:
        return np.zeros_like(np.asarray(fn(np.array([a]))[0]))
    panels = config.panels
    prev = None
    for _ in range(config.max_refinements + 1):
        t = np.linspace(a, b, panels + 1)
        cur = cumulative_array(np.asarray(fn(t)), (b - a) / panels)[-1]
        if prev is not None:
            err = float(np.max(fro_norm(np.atleast_2d(cur - prev)))) / 15
            if err <= config.quad_tol * max(1.0, float(np.max(fro_norm(np.atleast_2d(cur))))):
                return cur
        prev, panels = cur, 2 * panels
    raise QuadratureFailure(f"integral did not converge to {config.quad_tol:.1e} "
                            f"after {config.max_refinements} refinements")


def bump(s) -> np.ndarray:
    """C-infinity window exp(-1/(s(1-s))) on (0, 1), zero outside."""
    s = np.asarray(s, float)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    x = s[inside]
    out[inside] = np.exp(-1.0 / (x * (1 - x)))
    return out


def weighted_mean(values: np.ndarray, grid: TimeGrid, T: float) -> np.ndarray:
    """Smooth-window mean of grid samples over [0, T]."""
    w = bump(grid.times / T)
    w[grid.times > T] = 0.0
    return np.tensordot(w, values, axes=(0, 0)) / w.sum()


@dataclass(frozen=True)
class InfiniteAverage:
    value: np.ndarray
    delta: float
    windows: tuple

    @property
    def converged(self) -> bool:
        return bool(np.isfinite(self.delta))


def infinite_average(values: np.ndarray, grid: TimeGrid, avg_tol: float = 1e-6,
                     n_windows: int = 3) -> InfiniteAverage:
    """Estimate lim_{T->inf} (1/T) int_0^T f from samples on [0, grid.t_max].

    Smooth-window means over T = t_max/2^j, j = 0..n_windows-1, are
    Richardson-extrapolated in 1/T; the two finest extrapolants must agree
    to ``avg_tol`` (relative to max(1, |value|)).
    """
    if n_windows < 3:
        raise ValueError("need at least three windows for the tail test")
    windows = tuple(grid.t_max / 2 ** j for j in range(n_windows))
    means = [weighted_mean(values, grid, T) for T in windows]
    rich = [2 * means[j] - means[j + 1] for j in range(n_windows - 1)]
    delta = float(np.max(fro_norm(np.atleast_2d(rich[0] - rich[1]))))
    scale = max(1.0, float(np.max(fro_norm(np.atleast_2d(rich[0])))))
    if delta > avg_tol * scale:
        raise AverageNonConvergent(
            f"window-doubling changed the average by {delta:.3e} > {avg_tol:.1e}")
    return InfiniteAverage(rich[0], delta, windows)


def window_average(f: TimeOperatorFunction, tau: float, config: QuadratureConfig | None = None) -> np.ndarray:
    """<f>_tau = (1/tau) int_0^tau f; ``tau = math.inf`` uses the window ladder.

    When ``f`` declares a period and ``tau`` spans whole periods the
    trapezoid rule is used; otherwise the fourth-order cumulative rule.
    """
    config = config or QuadratureConfig()
    if math.isinf(tau):
        return infinite_average(f.values, f.grid, config.avg_tol).value
    if tau <= 0:
        raise ValueError("tau must be positive")
    if _spans_periods(f.period, tau):
        return _trapezoid_window(f.values, f.grid, tau) / tau
    return _integrate_grid(f.values, f.grid, 0.0, tau) / tau


def _spans_periods(period, tau: float) -> bool:
    if not period:
        return False
    m = tau / period
    return round(m) >= 1 and abs(m - round(m)) <= 1e-9 * max(1.0, m)


def _trapezoid_window(values, grid: TimeGrid, tau: float):
    """Trapezoid rule over whole periods: spectrally accurate for smooth periodic data."""
    i = grid.index(tau)
    if i is None:
        raise QuadratureFailure(f"window {tau} not aligned with the grid (dt={grid.dt})")
    v = values[: i + 1]
    return grid.dt * (v.sum(axis=0) - 0.5 * (v[0] + v[-1]))
