"""Classical phase space of a finite oscillator network.

Phase space is R^n + R^n with points X = (q, p). The frequency operator
supplies the complex structure J, the metric g and the map z onto C^n that
turns the Hamiltonian flow into the unitary group exp(-i Omega t).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedPair
from .spectral import SpectralModel


@dataclass(frozen=True, eq=False)
class PhaseVector:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if q.shape != p.shape or q.ndim != 1:
            raise ValueError(f"q and p must be 1-d of equal length, got {q.shape} and {p.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "PhaseVector":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def from_array(cls, x) -> "PhaseVector":
        x = np.asarray(x, dtype=float)
        n = x.shape[0] // 2
        return cls(x[:n], x[n:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    def __add__(self, other: "PhaseVector") -> "PhaseVector":
        return PhaseVector(self.q + other.q, self.p + other.p)

    def __sub__(self, other: "PhaseVector") -> "PhaseVector":
        return PhaseVector(self.q - other.q, self.p - other.p)

    def __mul__(self, c: float) -> "PhaseVector":
        return PhaseVector(c * self.q, c * self.p)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def _check(s: SpectralModel, *xs: PhaseVector):
    for x in xs:
        if x.n != s.n:
            raise ValueError(f"phase vector has {x.n} modes, model has {s.n}")


def hamiltonian(s: SpectralModel, x: PhaseVector) -> float:
    """H = p.p/2 + q.Omega^2 q/2."""
    _check(s, x)
    return 0.5 * float(x.p @ x.p) + 0.5 * float(x.q @ s.source @ x.q)


def symplectic_form(x: PhaseVector, y: PhaseVector) -> float:
    """s(X, Y) = q.p' - q'.p"""
    return float(x.q @ y.p - y.q @ x.p)


def apply_J(s: SpectralModel, x: PhaseVector) -> PhaseVector:
    """J X = (-Omega^{-1} p, Omega q)."""
    _check(s, x)
    return PhaseVector(-s.inv_omega @ x.p, s.omega @ x.q)


def flow(s: SpectralModel, x: PhaseVector, t: float) -> PhaseVector:
    """Hamiltonian flow Phi_t = cos(Omega t) - sin(Omega t) J."""
    _check(s, x)
    c = s.matrix_function(lambda w: np.cos(w * t))
    sin_over = s.matrix_function(lambda w: np.sin(w * t) / w)
    w_sin = s.matrix_function(lambda w: w * np.sin(w * t))
    return PhaseVector(c @ x.q + sin_over @ x.p, -w_sin @ x.q + c @ x.p)


def hamiltonian_vector_field(s: SpectralModel, x: PhaseVector) -> PhaseVector:
    """X_H X = -J (Omega q, Omega p)."""
    _check(s, x)
    return apply_J(s, PhaseVector(s.omega @ x.q, s.omega @ x.p)) * -1.0


def g_metric(s: SpectralModel, x: PhaseVector, y: PhaseVector) -> float:
    """g(X, Y) = s(X, JY)."""
    return symplectic_form(x, apply_J(s, y))


def inner_plus(s: SpectralModel, x: PhaseVector, y: PhaseVector) -> complex:
    """<X, Y>_+ = (g(X, Y) + i s(X, Y)) / 2."""
    return 0.5 * complex(g_metric(s, x, y), symplectic_form(x, y))


def z_map(s: SpectralModel, x: PhaseVector) -> np.ndarray:
    """z(X) = (Omega^{1/2} q + i Omega^{-1/2} p) / sqrt 2."""
    _check(s, x)
    return (s.sqrt_omega @ x.q + 1j * (s.inv_sqrt_omega @ x.p)) / np.sqrt(2.0)


def z_dagger_map(s: SpectralModel, x: PhaseVector) -> np.ndarray:
    _check(s, x)
    return (s.sqrt_omega @ x.q - 1j * (s.inv_sqrt_omega @ x.p)) / np.sqrt(2.0)


def z_inverse(s: SpectralModel, z) -> PhaseVector:
    """Recover (q, p) from z. Uses z^dagger = conj(z), valid because Omega^{+-1/2} is real."""
    z = np.asarray(z, dtype=complex)
    zd = np.conj(z)
    q = s.inv_sqrt_omega @ (z + zd) / np.sqrt(2.0)
    p = s.sqrt_omega @ (z - zd) / (1j * np.sqrt(2.0))
    return PhaseVector(q.real, p.real)


def annihilation_fn(s: SpectralModel, xi, x: PhaseVector) -> complex:
    """a_c(xi)(X) = conj(xi) . z(X); conjugate-linear in xi."""
    return complex(np.conj(np.asarray(xi)) @ z_map(s, x))


def creation_fn(s: SpectralModel, xi, x: PhaseVector) -> complex:
    """a_c^dagger(xi)(X) = xi . z^dagger(X); linear in xi."""
    return complex(np.asarray(xi) @ z_dagger_map(s, x))


def hamiltonian_via_modes(s: SpectralModel, x: PhaseVector) -> float:
    """Energy as sum_i omega_i |eta_i . z(X)|^2 over real normal modes eta_i.

    Each mode contributes (a_c^dagger a_c + a_c a_c^dagger)/2, which for real
    eta_i equals |eta_i . z|^2.
    """
    z = z_map(s, x)
    amps = s.modes.T @ z
    return float(np.sum(s.frequencies * np.abs(amps) ** 2))


@dataclass(frozen=True, eq=False)
class LinearObservable:
    """A linear function on phase space, tagged by how it was built.

    ``kind`` is one of ``field``, ``momentum``, ``symplectic``,
    ``annihilation``, ``creation``; ``coeff`` is an n-vector (for
    ``symplectic`` a PhaseVector).
    """

    kind: str
    coeff: object

    KINDS = ("field", "momentum", "symplectic", "annihilation", "creation")

    def gradient(self, s: SpectralModel) -> np.ndarray:
        """Complex gradient (d/dq, d/dp) of length 2n."""
        root2 = np.sqrt(2.0)
        if self.kind == "field":
            eta = np.asarray(self.coeff)
            return np.concatenate([eta, np.zeros_like(eta)])
        if self.kind == "momentum":
            eta = np.asarray(self.coeff)
            return np.concatenate([np.zeros_like(eta), eta])
        if self.kind == "symplectic":
            y = self.coeff
            # s(Y, X) = q_Y . p - q . p_Y
            return np.concatenate([-y.p, y.q]).astype(complex)
        if self.kind == "annihilation":
            xb = np.conj(np.asarray(self.coeff, dtype=complex))
            return np.concatenate([s.sqrt_omega @ xb, 1j * (s.inv_sqrt_omega @ xb)]) / root2
        if self.kind == "creation":
            xi = np.asarray(self.coeff, dtype=complex)
            return np.concatenate([s.sqrt_omega @ xi, -1j * (s.inv_sqrt_omega @ xi)]) / root2
        raise UnsupportedPair(f"unknown observable kind {self.kind!r}")

    def __call__(self, s: SpectralModel, x: PhaseVector) -> complex:
        return complex(self.gradient(s) @ x.as_array())


def poisson_bracket(s: SpectralModel, f: LinearObservable, g: LinearObservable) -> complex:
    """{f, g} = s(grad f, grad g), a constant for linear observables."""
    if not (isinstance(f, LinearObservable) and isinstance(g, LinearObservable)):
        raise UnsupportedPair("Poisson bracket is only closed-form for linear observables")
    gf, gg = f.gradient(s), g.gradient(s)
    if gf.shape != (2 * s.n,) or gg.shape != (2 * s.n,):
        raise UnsupportedPair("observable dimension does not match the model")
    n = s.n
    return complex(gf[:n] @ gg[n:] - gg[:n] @ gf[n:])
