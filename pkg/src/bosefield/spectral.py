"""Spectral calculus for the coupling matrix.

Every matrix function of the frequency operator (its powers, cos, sin,
exp(-i Omega t), ...) is evaluated through a single cached
eigendecomposition of Omega^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import config
from .errors import FunctionSingular, NotPositiveDefinite, NotSymmetric


def check_coupling_matrix(m) -> np.ndarray:
    """Validate a coupling matrix and return it as a float array."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotSymmetric(f"coupling matrix must be square and non-empty, got shape {a.shape}")
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    if np.abs(a - a.T).max() > config.SYMMETRY_RTOL * scale:
        raise NotSymmetric("coupling matrix is not symmetric")
    return a


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Eigendecomposition of Omega^2 = U diag(omega**2) U^T.

    Attributes
    ----------
    frequencies : ndarray, shape (n,)
        Ascending normal-mode frequencies, all strictly positive.
    modes : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns.
    source : ndarray, shape (n, n)
        The coupling matrix that was decomposed.
    """

    frequencies: np.ndarray
    modes: np.ndarray
    source: np.ndarray

    def __post_init__(self):
        for arr in (self.frequencies, self.modes, self.source):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.frequencies.shape[0]

    def matrix_function(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Return U f(diag omega) U^T as a dense matrix."""
        vals = np.asarray(f(self.frequencies))
        if not np.all(np.isfinite(vals)):
            raise FunctionSingular("function is not finite on the spectrum")
        return (self.modes * vals) @ self.modes.T

    def apply(self, f: Callable[[np.ndarray], np.ndarray], v) -> np.ndarray:
        return apply_scalar_function(self, f, v)

    def power(self, lam: float) -> np.ndarray:
        return omega_power(self, lam)

    @property
    def omega(self) -> np.ndarray:
        return self._cached("omega", lambda: omega_power(self, 1.0))

    @property
    def sqrt_omega(self) -> np.ndarray:
        return self._cached("sqrt_omega", lambda: omega_power(self, 0.5))

    @property
    def inv_sqrt_omega(self) -> np.ndarray:
        return self._cached("inv_sqrt_omega", lambda: omega_power(self, -0.5))

    @property
    def inv_omega(self) -> np.ndarray:
        return self._cached("inv_omega", lambda: omega_power(self, -1.0))

    def propagator(self, t: float) -> np.ndarray:
        """exp(-i Omega t)."""
        return self.matrix_function(lambda w: np.exp(-1j * w * t))

    def _cached(self, key, make):
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            val = make()
            val.setflags(write=False)
            cache[key] = val
        return cache[key]


def decompose(m) -> SpectralModel:
    """Diagonalize a symmetric positive-definite coupling matrix.

    Raises
    ------
    NotSymmetric
        If ``m`` is not square or not symmetric to relative 1e-12.
    NotPositiveDefinite
        If the smallest eigenvalue is not above 1e-10 times the largest
        (this is how a zero mode surfaces).
    """
    a = check_coupling_matrix(m)
    # symmetrize away the permitted asymmetry so eigh sees an exact symmetric input
    a_sym = 0.5 * (a + a.T)
    evals, evecs = np.linalg.eigh(a_sym)
    lmax = evals[-1]
    if lmax <= 0 or evals[0] <= config.POSITIVITY_RTOL * lmax:
        raise NotPositiveDefinite(
            f"smallest eigenvalue {evals[0]:.3e} is not positive relative to largest {lmax:.3e}"
        )
    return SpectralModel(frequencies=np.sqrt(evals), modes=evecs, source=a.copy())


def apply_scalar_function(s: SpectralModel, f, v) -> np.ndarray:
    """Compute U f(diag omega) U^T v for a real or complex vector ``v``."""
    vals = np.asarray(f(s.frequencies))
    if not np.all(np.isfinite(vals)):
        raise FunctionSingular("function is not finite on the spectrum")
    v = np.asarray(v)
    return s.modes @ (vals * (s.modes.T @ v))


def omega_power(s: SpectralModel, lam: float) -> np.ndarray:
    """Omega**lam as a dense symmetric matrix."""
    out = s.matrix_function(lambda w: w**lam)
    return 0.5 * (out + out.T)


def reconstruct(s: SpectralModel) -> np.ndarray:
    """Omega^2 rebuilt from the decomposition."""
    return s.matrix_function(lambda w: w**2)
