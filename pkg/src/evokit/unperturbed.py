"""Unperturbed Hamiltonians whose propagator is known in closed form.

Either a constant ``H0`` or a commuting family ``H0(t) = sum_m E_m(t) P_m``
with fixed projectors, for which ``U0(t) = sum_m exp(-i int_0^t E_m) P_m``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch
from .operators import dagger, expm_hermitian, hermitian
from .quadrature import Constant, Waveform, common_period
from .spectral import SpectralDecomposition, spectral_decompose


@dataclass(frozen=True)
class StaticH0:
    H0: np.ndarray
    group_tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "H0", hermitian(self.H0))

    @property
    def dim(self) -> int:
        return self.H0.shape[0]

    @property
    def period(self):
        return 0.0

    def decomposition(self) -> SpectralDecomposition:
        return spectral_decompose(self.H0, self.group_tol)

    def hamiltonian(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        return np.broadcast_to(self.H0, t.shape + self.H0.shape)

    def propagator(self, t) -> np.ndarray:
        return expm_hermitian(self.H0, np.asarray(t, float))


@dataclass(frozen=True)
class CommutingFamily:
    """H0(t) = sum_m E_m(t) P_m with fixed orthogonal projectors.

    ``energies[k]`` is the waveform attached to ``projectors[k]``. The
    decomposition sorts groups by E_m(0); :attr:`perm` maps sorted group
    index to input index.
    """

    projectors: tuple
    energies: tuple

    def __post_init__(self):
        if len(self.projectors) != len(self.energies):
            raise DimensionMismatch("one energy waveform per projector required")
        if not all(isinstance(w, Waveform) for w in self.energies):
            raise TypeError("energies must be waveforms")
        object.__setattr__(self, "projectors", tuple(np.asarray(P, dtype=complex) for P in self.projectors))

    @classmethod
    def static(cls, H0, group_tol: float = 1e-9) -> "CommutingFamily":
        S = spectral_decompose(H0, group_tol)
        return cls(tuple(S.projectors), tuple(Constant(float(E)) for E in S.energies))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def period(self):
        return common_period([w.period for w in self.energies])

    @property
    def perm(self) -> np.ndarray:
        e0 = np.array([float(w(0.0)) for w in self.energies])
        return np.argsort(e0, kind="stable")

    @cached_property
    def S0(self) -> SpectralDecomposition:
        e0 = [float(w(0.0)) for w in self.energies]
        return SpectralDecomposition.from_projectors(e0, self.projectors)

    def decomposition(self) -> SpectralDecomposition:
        return self.S0

    def energy_grid(self, t) -> np.ndarray:
        """E_m(t) in sorted group order, shape t.shape + (n_groups,)."""
        t = np.asarray(t, float)
        cols = [np.broadcast_to(self.energies[k](t), t.shape) for k in self.perm]
        return np.stack(cols, axis=-1)

    def phase_grid(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        cols = [np.broadcast_to(self.energies[k].integral(t), t.shape) for k in self.perm]
        return np.stack(cols, axis=-1)

    def hamiltonian(self, t) -> np.ndarray:
        return self.decomposition().operator(self.energy_grid(t))

    def propagator(self, t) -> np.ndarray:
        S = self.decomposition()
        phases = np.exp(-1j * self.phase_grid(t))[..., S.labels]
        return (S.basis * phases[..., None, :]) @ dagger(S.basis)
