"""Truncated symmetric Fock space over C^n.

States are expanded in occupation-number tuples (m_1, ..., m_n) with total
quanta sum(m) <= M. The truncation is by grade: creation operators map the
top grade M to zero and nothing else is touched, so a^dagger(xi) is exactly
the adjoint of a(xi), every generator a^dagger(xi) - a(xi) is exactly
skew-adjoint and every Weyl operator built here is exactly unitary.
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from . import config
from .errors import (
    BasisMismatch,
    DimensionTooLarge,
    NotSelfAdjoint,
    NotUnitary,
    TruncationWarning,
)
from .spectral import SpectralModel


def fock_dimension(n: int, M: int) -> int:
    return math.comb(n + M, M)


class FockBasis:
    """Occupation-number basis of all tuples with total quanta <= M.

    Ordered by grade (total quanta), lexicographically within a grade.
    """

    def __init__(self, n: int, M: int):
        if n < 1 or M < 0:
            raise ValueError("need n >= 1 modes and cutoff M >= 0")
        dim = fock_dimension(n, M)
        cap = config.max_fock_dim()
        if dim > cap:
            raise DimensionTooLarge(f"Fock dimension {dim} exceeds the cap {cap} (BOSEFIELD_MAX_DIM)")
        self.n = n
        self.M = M
        states = []
        for grade in range(M + 1):
            states.extend(sorted(_compositions(grade, n)))
        self.states = np.array(states, dtype=np.int64).reshape(len(states), n)
        self.states.setflags(write=False)
        self.grades = self.states.sum(axis=1)
        self.grades.setflags(write=False)
        self._index = {s: i for i, s in enumerate(states)}

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def index(self, occupation) -> int:
        return self._index[tuple(int(m) for m in occupation)]

    def occupation(self, i: int) -> tuple:
        return tuple(int(m) for m in self.states[i])

    def grade_mask(self, max_grade: int, min_grade: int = 0) -> np.ndarray:
        return (self.grades <= max_grade) & (self.grades >= min_grade)

    def __eq__(self, other):
        return isinstance(other, FockBasis) and (self.n, self.M) == (other.n, other.M)

    def __hash__(self):
        return hash((self.n, self.M))

    def __repr__(self):
        return f"FockBasis(n={self.n}, M={self.M}, dim={self.dim})"

    @cached_property
    def lowering(self) -> list:
        """Sparse a(e_j) for each mode j."""
        ops = []
        for j in range(self.n):
            rows, cols, vals = [], [], []
            for col, occ in enumerate(self.states):
                m = occ[j]
                if m == 0:
                    continue
                lowered = occ.copy()
                lowered[j] -= 1
                rows.append(self._index[tuple(lowered.tolist())])
                cols.append(col)
                vals.append(math.sqrt(m))
            ops.append(sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim)))
        return ops


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative ints summing to ``total``."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def _same_basis(a: FockBasis, b: FockBasis):
    if a != b:
        raise BasisMismatch(f"{a!r} vs {b!r}")


@dataclass(eq=False)
class FockVector:
    basis: FockBasis
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} coefficients, got {self.coeffs.shape}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "FockVector":
        return FockVector(self.basis, self.coeffs / self.norm())

    def inner(self, other: "FockVector") -> complex:
        """<self|other>, conjugate-linear in ``self``."""
        _same_basis(self.basis, other.basis)
        return complex(np.vdot(self.coeffs, other.coeffs))

    def top_grade(self, tol: float = 0.0) -> int:
        nz = np.abs(self.coeffs) > tol
        return int(self.basis.grades[nz].max()) if nz.any() else 0

    def __add__(self, other):
        _same_basis(self.basis, other.basis)
        return FockVector(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_basis(self.basis, other.basis)
        return FockVector(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, c):
        return FockVector(self.basis, c * self.coeffs)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"n": self.basis.n, "M": self.basis.M,
                "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "FockVector":
        basis = FockBasis(int(doc["n"]), int(doc["M"]))
        c = np.array(doc["coeffs"], dtype=float).reshape(-1, 2)
        return cls(basis, c[:, 0] + 1j * c[:, 1])

    @classmethod
    def from_json(cls, text: str) -> "FockVector":
        return cls.from_dict(json.loads(text))


@dataclass(eq=False)
class FockOperator:
    """A matrix on a truncated Fock space (sparse or dense storage)."""

    basis: FockBasis
    matrix: object
    meta: dict = field(default_factory=dict)

    def toarray(self) -> np.ndarray:
        m = self.matrix
        return m.toarray() if sp.issparse(m) else np.asarray(m)

    def adjoint(self) -> "FockOperator":
        return FockOperator(self.basis, self.matrix.conj().T, dict(self.meta))

    def __matmul__(self, other):
        if isinstance(other, FockVector):
            _same_basis(self.basis, other.basis)
            return FockVector(self.basis, np.asarray(self.matrix @ other.coeffs).ravel())
        if isinstance(other, FockOperator):
            _same_basis(self.basis, other.basis)
            return FockOperator(self.basis, self.matrix @ other.matrix, {**self.meta, **other.meta})
        return NotImplemented

    def __add__(self, other):
        _same_basis(self.basis, other.basis)
        return FockOperator(self.basis, self.matrix + other.matrix, {**self.meta, **other.meta})

    def __sub__(self, other):
        _same_basis(self.basis, other.basis)
        return FockOperator(self.basis, self.matrix - other.matrix, {**self.meta, **other.meta})

    def __mul__(self, c):
        return FockOperator(self.basis, c * self.matrix, dict(self.meta))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1


def identity(b: FockBasis) -> FockOperator:
    return FockOperator(b, sp.identity(b.dim, dtype=complex, format="csr"))


def commutator(x: FockOperator, y: FockOperator) -> FockOperator:
    return x @ y - y @ x


def vacuum(b: FockBasis) -> FockVector:
    c = np.zeros(b.dim, dtype=complex)
    c[0] = 1.0
    return FockVector(b, c)


def fock_state(b: FockBasis, occupation) -> FockVector:
    """Normalized occupation-number state |m_1, ..., m_n>."""
    c = np.zeros(b.dim, dtype=complex)
    c[b.index(occupation)] = 1.0
    return FockVector(b, c)


def _amplitude(b: FockBasis, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (b.n,):
        raise ValueError(f"one-particle vector must have length {b.n}")
    if not np.all(np.isfinite(xi)):
        raise ValueError("one-particle vector is not finite")
    return xi


def annihilate(b: FockBasis, xi) -> FockOperator:
    """a(xi) = sum_j conj(xi_j) a(e_j)."""
    xi = _amplitude(b, xi)
    mat = sp.csr_matrix((b.dim, b.dim), dtype=complex)
    for j, lo in enumerate(b.lowering):
        if xi[j] != 0:
            mat = mat + np.conj(xi[j]) * lo
    return FockOperator(b, mat)


def create(b: FockBasis, xi) -> FockOperator:
    """a^dagger(xi), the exact adjoint of a(xi); maps the top grade to zero."""
    return annihilate(b, xi).adjoint()


def number_operator(b: FockBasis) -> FockOperator:
    return FockOperator(b, sp.diags(b.grades.astype(complex), format="csr"))


def d_gamma(b: FockBasis, A) -> FockOperator:
    """Second quantization dGamma(A) = sum_ij A_ij a^dagger(e_i) a(e_j)."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (b.n, b.n):
        raise ValueError(f"one-particle operator must be {b.n}x{b.n}")
    if np.abs(A - A.conj().T).max() > config.SELF_ADJOINT_TOL * max(1.0, np.abs(A).max()):
        raise NotSelfAdjoint("dGamma needs a self-adjoint one-particle operator")
    low = b.lowering
    mat = sp.csr_matrix((b.dim, b.dim), dtype=complex)
    for i in range(b.n):
        for j in range(b.n):
            if A[i, j] != 0:
                mat = mat + A[i, j] * (low[i].T @ low[j])
    return FockOperator(b, mat.tocsr())


def gamma(b: FockBasis, U) -> FockOperator:
    """Gamma(U): the m-fold tensor power of U on each grade m.

    Column |m> is prod_j a^dagger(U e_j)^{m_j} / sqrt(m_j!) |0>, built grade
    by grade from the column with one quantum less. No column ever needs a
    state above the cutoff, so the result is exact.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (b.n, b.n):
        raise ValueError(f"one-particle operator must be {b.n}x{b.n}")
    if np.abs(U.conj().T @ U - np.eye(b.n)).max() > config.UNITARY_TOL:
        raise NotUnitary("Gamma needs a unitary one-particle operator")
    raise_ops = [create(b, U[:, j]).matrix.tocsr() for j in range(b.n)]
    cols = np.zeros((b.dim, b.dim), dtype=complex)
    cols[0, 0] = 1.0
    for idx in range(1, b.dim):
        occ = b.states[idx]
        j = int(np.flatnonzero(occ)[0])
        prev = occ.copy()
        prev[j] -= 1
        pidx = b.index(prev)
        cols[:, idx] = raise_ops[j] @ cols[:, pidx] / math.sqrt(occ[j])
    return FockOperator(b, cols)


def _weyl_generator(b: FockBasis, xi) -> np.ndarray:
    """The self-adjoint matrix i (a^dagger(xi) - a(xi)) as a dense array."""
    a = annihilate(b, xi).matrix
    return (1j * (a.conj().T - a)).toarray()


def weyl_apply(b: FockBasis, xi, vectors) -> np.ndarray:
    """W(xi) applied to the columns of ``vectors`` without forming W.

    Uses the sparse generator a^dagger(xi) - a(xi) with a Krylov-free
    truncated Taylor scheme (scipy's expm_multiply), so the cost grows with
    the number of columns rather than with dim^3.
    """
    a = annihilate(b, _amplitude(b, xi)).matrix
    gen = (a.conj().T - a).tocsr()
    return expm_multiply(gen, np.asarray(vectors, dtype=complex))


def truncation_adequate(b: FockBasis, xi) -> bool:
    return float(np.vdot(xi, xi).real) <= b.M / 4


def _warn_truncation(b: FockBasis, xi, meta: dict):
    if not truncation_adequate(b, xi):
        meta["truncation_warning"] = True
        warnings.warn(
            f"|xi|^2 = {float(np.vdot(xi, xi).real):.3g} exceeds M/4 = {b.M / 4:.3g}",
            TruncationWarning,
            stacklevel=3,
        )


class WeylFamily:
    """The one-parameter group t -> W(t xi) from one eigendecomposition.

    W(t xi) = exp(t (a^dagger(xi) - a(xi))) = V exp(-i t lambda) V^dagger
    where i (a^dagger(xi) - a(xi)) = V diag(lambda) V^dagger.
    """

    def __init__(self, b: FockBasis, xi):
        self.basis = b
        self.xi = _amplitude(b, xi)
        self.eigvals, self.eigvecs = np.linalg.eigh(_weyl_generator(b, self.xi))

    def matrix(self, t: float = 1.0) -> np.ndarray:
        V = self.eigvecs
        return (V * np.exp(-1j * t * self.eigvals)) @ V.conj().T

    def expectation(self, psi: FockVector, ts) -> np.ndarray:
        """<psi|W(t xi)|psi> for each t, without forming the matrices."""
        _same_basis(self.basis, psi.basis)
        w = np.abs(self.eigvecs.conj().T @ psi.coeffs) ** 2
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.exp(-1j * np.outer(ts, self.eigvals)) @ w


def weyl(b: FockBasis, xi) -> FockOperator:
    """Weyl operator W(xi) = exp(a^dagger(xi) - a(xi)), unitary by construction.

    Warns with TruncationWarning (and sets ``meta["truncation_warning"]``)
    when |xi|^2 > M/4.
    """
    xi = _amplitude(b, xi)
    meta = {"truncation_warning": False}
    _warn_truncation(b, xi, meta)
    return FockOperator(b, WeylFamily(b, xi).matrix(1.0), meta)


def coherent(b: FockBasis, xi) -> FockVector:
    """Truncated coherent state exp(-|xi|^2/2) sum_m prod_j xi_j^m_j / sqrt(m_j!) |m>.

    Its norm falls short of one by at most |xi|^(2(M+1)) / (M+1)!
    (see :func:`coherent_tail_bound`).
    """
    xi = _amplitude(b, xi)
    meta = {}
    _warn_truncation(b, xi, meta)
    occ = b.states
    log_fact = gammaln(occ + 1).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        powers = np.prod(np.where(occ == 0, 1.0 + 0j, xi[None, :] ** occ), axis=1)
    norm2 = float(np.vdot(xi, xi).real)
    return FockVector(b, np.exp(-0.5 * norm2 - 0.5 * log_fact) * powers)


def coherent_tail_bound(norm_sq: float, M: int) -> float:
    """Upper bound on 1 - || truncated coherent state ||^2.

    The missing weight exp(-x) sum_{k>M} x^k/k! is at most x^(M+1)/(M+1)!
    by the Lagrange remainder of exp(x).
    """
    return math.exp((M + 1) * math.log(norm_sq) - math.lgamma(M + 2)) if norm_sq > 0 else 0.0


def field_Q(b: FockBasis, s: SpectralModel, eta) -> FockOperator:
    """eta.Q = (a(Omega^{-1/2} eta) + a^dagger(Omega^{-1/2} eta)) / sqrt 2."""
    v = s.inv_sqrt_omega @ np.asarray(eta, dtype=complex)
    a = annihilate(b, v)
    return (a + a.adjoint()) * (1 / math.sqrt(2))


def field_P(b: FockBasis, s: SpectralModel, eta) -> FockOperator:
    """eta.P = i (a^dagger(Omega^{1/2} eta) - a(Omega^{1/2} conj(eta))) / sqrt 2."""
    eta = np.asarray(eta, dtype=complex)
    up = create(b, s.sqrt_omega @ eta)
    down = annihilate(b, s.sqrt_omega @ np.conj(eta))
    return (up - down) * (1j / math.sqrt(2))


def heisenberg_field(b: FockBasis, s: SpectralModel, eta, t: float) -> FockOperator:
    """eta.Q(t) = (a(v_t) + a^dagger(v_t)) / sqrt 2 with v_t = Omega^{-1/2} exp(i Omega t) eta."""
    eta = np.asarray(eta, dtype=complex)
    v = s.inv_sqrt_omega @ (s.propagator(-t) @ eta)
    a = annihilate(b, v)
    return (a + a.adjoint()) * (1 / math.sqrt(2))


def free_evolution(b: FockBasis, s: SpectralModel, t: float) -> np.ndarray:
    """exp(-i dGamma(Omega) t) as a dense matrix; dGamma(Omega) is grade-preserving."""
    H = d_gamma(b, s.omega).toarray()
    evals, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * t * evals)) @ V.conj().T


def vacuum_covariance(s: SpectralModel, i: int, j: int) -> float:
    """<0|Q_i Q_j|0> = (Omega^{-1})_ij / 2 for the Gaussian ground state."""
    return 0.5 * float(s.inv_omega[i, j])


def vacuum_covariance_matrix(s: SpectralModel) -> np.ndarray:
    return 0.5 * np.array(s.inv_omega)


def expectation(psi: FockVector, A: FockOperator) -> complex:
    _same_basis(psi.basis, A.basis)
    return complex(np.vdot(psi.coeffs, np.asarray(A.matrix @ psi.coeffs).ravel()))
