"""Strict localization of vacuum excitations on finite oscillator networks.

A region B is a set of site indices. Omega is strongly non-local on B when
no non-zero h supported in B has Omega h supported in B as well; with
coordinates this is the statement that the block Omega[B^c, B] has trivial
null space. Equivalently, the vectors Omega^{1/2} e_j and Omega^{-1/2} e_j
for j outside B span C^n. In that case no state with finitely many quanta,
other than the vacuum, is indistinguishable from the vacuum outside B.

The numerical side of that statement is tested here through sampled Weyl
expectations, a multi-start search over finite-quanta states and the
polynomial structure of t -> <psi|W(t xi)|psi>.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import config
from .classical import PhaseVector, z_map
from .errors import NotNormalized, SearchBudgetExceeded, TruncationWarning
from .fock import (
    FockBasis,
    FockVector,
    weyl_apply,
    create,
    field_Q,
    vacuum,
    vacuum_covariance,
)
from .spectral import SpectralModel


@dataclass(frozen=True)
class Region:
    """Sorted, duplicate-free set of site indices out of ``range(n)``."""

    indices: tuple
    n: int

    def __post_init__(self):
        idx = tuple(sorted({int(i) for i in self.indices}))
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise ValueError(f"region {idx} is not inside range({self.n})")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def parse(cls, text: str, n: int) -> "Region":
        text = text.strip()
        return cls(tuple(int(t) for t in text.split(",") if t.strip()) if text else (), n)

    @property
    def complement(self) -> tuple:
        inside = set(self.indices)
        return tuple(j for j in range(self.n) if j not in inside)

    def __len__(self):
        return len(self.indices)


def local_generators(region: Region) -> list[PhaseVector]:
    """The phase-space vectors (e_j, 0), (0, e_j) for j in the region."""
    out = []
    for j in region.indices:
        e = np.zeros(region.n)
        e[j] = 1.0
        out.append(PhaseVector(e, np.zeros(region.n)))
        out.append(PhaseVector(np.zeros(region.n), e))
    return out


def _as_region(s: SpectralModel, B) -> Region:
    return B if isinstance(B, Region) else Region(tuple(B), s.n)


def _rank_tol(s: SpectralModel) -> float:
    return config.RANK_RTOL * float(s.frequencies[-1])


def complement_family(s: SpectralModel, B) -> np.ndarray:
    """Columns Omega^{1/2} e_j, Omega^{-1/2} e_j for j outside B."""
    B = _as_region(s, B)
    comp = list(B.complement)
    if not comp:
        return np.zeros((s.n, 0))
    return np.hstack([s.sqrt_omega[:, comp], s.inv_sqrt_omega[:, comp]])


def complement_span_basis(s: SpectralModel, B) -> np.ndarray:
    """Orthonormal basis (as columns) of span_C of the complement family."""
    F = complement_family(s, B)
    if F.shape[1] == 0:
        return np.zeros((s.n, 0), dtype=complex)
    U, sv, _ = np.linalg.svd(F, full_matrices=False)
    keep = sv > config.RANK_RTOL * sv[0] if sv[0] > 0 else np.zeros_like(sv, dtype=bool)
    return U[:, keep].astype(complex)


def complement_span_rank(s: SpectralModel, B) -> int:
    return complement_span_basis(s, B).shape[1]


@dataclass
class LocalityVerdict:
    region: tuple
    strongly_nonlocal: bool
    witness: Optional[np.ndarray]
    span_rank: int
    n: int
    equivalence_consistent: bool
    singular_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "region": list(self.region),
            "strongly_nonlocal": self.strongly_nonlocal,
            "witness": None if self.witness is None else [float(x) for x in self.witness],
            "span_rank": self.span_rank,
            "n": self.n,
            "equivalence_consistent": self.equivalence_consistent,
            "singular_values": [float(x) for x in self.singular_values],
        }


def _null_space_in_region(s: SpectralModel, B: Region):
    """Singular values and null vectors of the block Omega[B^c, B]."""
    inside, comp = list(B.indices), list(B.complement)
    if not inside:
        return np.zeros(0), np.zeros((0, 0))
    if not comp:
        return np.zeros(0), np.eye(len(inside))
    block = s.omega[np.ix_(comp, inside)]
    _, sv, Vh = np.linalg.svd(block, full_matrices=True)
    rank = int(np.sum(sv > _rank_tol(s)))
    return sv, Vh[rank:].T


def strongly_nonlocal(s: SpectralModel, B) -> LocalityVerdict:
    """Test strong non-locality of Omega on B and cross-check the span criterion.

    B empty is always strongly non-local; B equal to all sites never is
    (any h qualifies).
    """
    B = _as_region(s, B)
    sv, null = _null_space_in_region(s, B)
    snl = null.shape[1] == 0
    witness = None
    if not snl:
        h = np.zeros(s.n)
        h[list(B.indices)] = null[:, 0]
        witness = h / np.linalg.norm(h)
    rank = complement_span_rank(s, B)
    return LocalityVerdict(
        region=B.indices,
        strongly_nonlocal=snl,
        witness=witness,
        span_rank=rank,
        n=s.n,
        equivalence_consistent=snl == (rank == s.n),
        singular_values=list(sv),
    )


def witness_defect(s: SpectralModel, B, h) -> float:
    """Largest component of h or Omega h outside B (zero for a valid witness)."""
    B = _as_region(s, B)
    comp = list(B.complement)
    if not comp:
        return 0.0
    h = np.asarray(h)
    return float(max(np.abs(h[comp]).max(), np.abs((s.omega @ h)[comp]).max()))


def knight_equivalence_check(s: SpectralModel, B) -> bool:
    return strongly_nonlocal(s, B).equivalence_consistent


def one_quantum_localization_residual(s: SpectralModel, B, xi) -> float:
    """||P_W xi|| with W = span_C z(H(B^c)); zero iff a^dagger(xi)|0> is localized in B."""
    xi = np.asarray(xi, dtype=complex)
    if abs(np.linalg.norm(xi) - 1) > 1e-10:
        raise NotNormalized("one-quantum amplitude must have unit norm")
    Q = complement_span_basis(s, B)
    return float(np.linalg.norm(Q.conj().T @ xi))


def minimal_one_quantum_residual(s: SpectralModel, B) -> float:
    """min over unit xi of ||P_W xi||: 0 if W is a proper subspace, else 1."""
    return 0.0 if complement_span_rank(s, B) < s.n else 1.0


# -- sampled indistinguishability ------------------------------------------------


@dataclass(frozen=True)
class WeylSample:
    """Deterministic sample of phase-space points outside a region.

    Each generator (e_j, 0), (0, e_j) with j outside B is scaled by every
    entry of ``amplitudes``; ``n_random`` further points are combinations
    of the generators with independent standard normal coefficients. With
    ``normalize_random`` those combinations are rescaled to a norm drawn
    uniformly from [min(amplitudes), max(amplitudes)], which keeps the
    Fock cutoff small at the cost of probing fewer amplitudes.
    """

    amplitudes: tuple = config.WEYL_SAMPLE_AMPLITUDES
    n_random: int = config.WEYL_SAMPLE_RANDOM
    seed: int = config.DEFAULT_SEED
    normalize_random: bool = False

    def points(self, n: int, B: Region) -> list[PhaseVector]:
        comp = list(B.complement)
        if not comp:
            return []
        gens = local_generators(Region(tuple(comp), n))
        pts = [g * a for g in gens for a in self.amplitudes]
        rng = np.random.default_rng(self.seed)
        lo, hi = min(self.amplitudes), max(self.amplitudes)
        for _ in range(self.n_random):
            c = rng.standard_normal(len(gens))
            y = sum((ci * g for ci, g in zip(c, gens)), PhaseVector.zeros(n))
            scale = rng.uniform(lo, hi) / y.norm() if self.normalize_random else 1.0
            pts.append(y * scale)
        return pts

    def amplitudes_for(self, s: SpectralModel, B) -> np.ndarray:
        """The one-particle vectors z(Y) for the sample points, as rows."""
        B = _as_region(s, B)
        pts = self.points(s.n, B)
        if not pts:
            return np.zeros((0, s.n), dtype=complex)
        return np.array([z_map(s, y) for y in pts])

    def to_dict(self) -> dict:
        return {"amplitudes": list(self.amplitudes), "n_random": self.n_random, "seed": self.seed,
                "normalize_random": self.normalize_random}


def _vacuum_values(xis: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * np.sum(np.abs(xis) ** 2, axis=1))


def _check_adequacy(b: FockBasis, xis: np.ndarray, top: int):
    worst = float(np.max(np.sum(np.abs(xis) ** 2, axis=1))) if len(xis) else 0.0
    if worst > (b.M - top) / 4:
        warnings.warn(
            f"sampled |xi|^2 up to {worst:.3g} is large for cutoff M={b.M} with states up to grade {top}",
            TruncationWarning,
            stacklevel=3,
        )
        return True
    return False


def weyl_deviation(psi: FockVector, s: SpectralModel, B, sample: WeylSample = WeylSample()) -> float:
    """sup over the sample of |<psi|W(z(Y))|psi> - exp(-|z(Y)|^2/2)|."""
    if abs(psi.norm() - 1) > 1e-10:
        raise NotNormalized("state must be normalized")
    xis = sample.amplitudes_for(s, B)
    if len(xis) == 0:
        return 0.0
    _check_adequacy(psi.basis, xis, psi.top_grade(1e-14))
    vac = _vacuum_values(xis)
    vals = np.array([np.vdot(psi.coeffs, weyl_apply(psi.basis, xi, psi.coeffs)) for xi in xis])
    return float(np.max(np.abs(vals - vac)))


def one_quantum_deviation(xi_prime, xis: np.ndarray) -> float:
    """Closed form of the sampled deviation for a^dagger(xi')|0>, |xi'| = 1:
    max_k exp(-|xi_k|^2/2) |conj(xi') . xi_k|^2."""
    if len(xis) == 0:
        return 0.0
    overlaps = xis @ np.conj(np.asarray(xi_prime))
    return float(np.max(_vacuum_values(xis) * np.abs(overlaps) ** 2))


def one_quantum_deviation_minimum(s: SpectralModel, B, sample: WeylSample = WeylSample(),
                                  starts: int = 16, seed: int = 0):
    """Minimize the closed-form one-quantum deviation over unit xi'.

    Solved in epigraph form (minimize tau subject to
    tau >= w_k |conj(xi_k) . x|^2 and |x| = 1) with SLSQP from several
    seeded starts plus the directions orthogonal to the sample.
    Returns ``(minimum, argmin)``.
    """
    xis = sample.amplitudes_for(s, B)
    n = s.n
    if len(xis) == 0:
        e = np.zeros(n, dtype=complex)
        e[0] = 1
        return 0.0, e
    w = _vacuum_values(xis)
    A = np.conj(xis)  # row k: x -> conj(xi_k) . x  equals  (xi_k^* x)

    def unpack(v):
        return v[:n] + 1j * v[n:2 * n]

    def f(v):
        return v[-1]

    def cons_epi(v):
        x = unpack(v)
        return v[-1] - w * np.abs(A @ x) ** 2

    def cons_norm(v):
        return np.sum(v[:2 * n] ** 2) - 1.0

    rng = np.random.default_rng(seed)
    candidates = [rng.standard_normal(2 * n) for _ in range(starts)]
    _, sv, Vh = np.linalg.svd(A)
    for row in Vh[-min(n, 2):]:
        x = np.conj(row)
        candidates.append(np.concatenate([x.real, x.imag]))
    best = (np.inf, None)
    for c in candidates:
        c = c / np.linalg.norm(c)
        x0 = np.append(c, one_quantum_deviation(unpack(c), xis))
        res = minimize(f, x0, method="SLSQP",
                       constraints=[{"type": "ineq", "fun": cons_epi}, {"type": "eq", "fun": cons_norm}],
                       options={"ftol": 1e-14, "maxiter": 500})
        x = unpack(res.x)
        x = x / np.linalg.norm(x)
        val = one_quantum_deviation(x, xis)
        if val < best[0]:
            best = (val, x)
    return best


@dataclass
class KnightSearchResult:
    """Outcome of :func:`knight_search`.

    ``status`` is ``"ok"``, ``"budget_exceeded"`` (best point still
    reported) or ``"not_applicable"`` (N = 0: only the vacuum is available).
    """

    status: str
    min_residual: float
    argmin: Optional[FockVector]
    quanta: int
    starts: int
    seed: int
    residuals: list = field(default_factory=list)
    truncation_warning: bool = False
    sample: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "min_residual": None if math.isnan(self.min_residual) else self.min_residual,
            "quanta": self.quanta,
            "starts": self.starts,
            "seed": self.seed,
            "start_residuals": list(self.residuals),
            "truncation_warning": self.truncation_warning,
            "sample": self.sample,
        }
        if self.argmin is not None:
            out["argmin"] = self.argmin.to_dict()
        return out


def knight_search(s: SpectralModel, B, basis: FockBasis, quanta: int,
                  sample: WeylSample = WeylSample(), starts: int = config.KNIGHT_STARTS,
                  seed: int = config.DEFAULT_SEED, maxiter: int = 500) -> KnightSearchResult:
    """Look for a state with 1..N quanta that mimics the vacuum outside B.

    The search runs over normalized vectors supported on grades 1..N (the
    vacuum component is excluded, since the vacuum itself trivially passes)
    and minimizes :func:`weyl_deviation` over the real and imaginary parts of
    the coefficients. Each of ``starts`` seeded starting points is solved in
    epigraph form with SLSQP and then polished with a short Nelder-Mead run.
    """
    B = _as_region(s, B)
    if quanta < 0 or quanta > basis.M - 2:
        raise ValueError(f"need 0 <= N <= M - 2 = {basis.M - 2}")
    if basis.n != s.n:
        raise ValueError("Fock basis and model have different mode counts")
    if quanta == 0:
        return KnightSearchResult("not_applicable", float("nan"), None, 0, 0, seed, sample=sample.to_dict())

    xis = sample.amplitudes_for(s, B)
    trunc = _check_adequacy(basis, xis, quanta)
    support = np.flatnonzero(basis.grade_mask(quanta, 1))
    k = len(support)
    vac = _vacuum_values(xis)
    cols = np.eye(basis.dim, dtype=complex)[:, support]
    blocks = [weyl_apply(basis, xi, cols)[support, :] for xi in xis]

    def coeffs(x):
        c = x[:k] + 1j * x[k:2 * k]
        return c / np.linalg.norm(c)

    def deviations(c):
        return np.array([np.vdot(c, W @ c) for W in blocks]) - vac

    def objective(x):
        if not blocks:
            return 0.0
        return float(np.max(np.abs(deviations(coeffs(x)))))

    # smooth epigraph form: minimize tau with tau >= |dev_k|^2 and |c| = 1
    def epi(v):
        c = v[:k] + 1j * v[k:2 * k]
        return v[-1] - np.abs(deviations(c)) ** 2

    def unit(v):
        return np.sum(v[:2 * k] ** 2) - 1.0

    rng = np.random.default_rng(seed)
    best_val, best_x, residuals, converged = np.inf, None, [], False
    for _ in range(starts):
        x = rng.standard_normal(2 * k)
        x /= np.linalg.norm(x)
        if blocks:
            v0 = np.append(x, objective(x) ** 2)
            res = minimize(lambda v: v[-1], v0, method="SLSQP",
                           constraints=[{"type": "ineq", "fun": epi}, {"type": "eq", "fun": unit}],
                           options={"ftol": 1e-16, "maxiter": maxiter})
            converged |= res.status != 9  # 9: iteration limit
            if objective(res.x[:-1]) < objective(x):
                x = res.x[:-1]
            res = minimize(objective, x, method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 200 * k, "adaptive": True})
            if res.fun < objective(x):
                x = res.x
        else:
            converged = True
        val = objective(x)
        residuals.append(val)
        if val < best_val:
            best_val, best_x = val, x
    exhausted = not converged

    full = np.zeros(basis.dim, dtype=complex)
    full[support] = coeffs(best_x)
    status = "ok"
    if exhausted:
        status = "budget_exceeded"
        warnings.warn("localization search hit its iteration budget", SearchBudgetExceeded, stacklevel=2)
    return KnightSearchResult(status, float(best_val), FockVector(basis, full), quanta, starts, seed,
                              residuals=[float(r) for r in residuals], truncation_warning=trunc,
                              sample=sample.to_dict())


# -- polynomial structure of Weyl expectations -----------------------------------


@dataclass
class DegreeProbe:
    degree: int
    quanta: int
    coefficients: np.ndarray  # monomial coefficients of f(t), lowest order first
    nodes: np.ndarray
    truncation_warning: bool = False

    @property
    def within_bound(self) -> bool:
        return self.degree <= 2 * self.quanta

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "quanta": self.quanta,
            "bound": 2 * self.quanta,
            "within_bound": self.within_bound,
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coefficients],
            "truncation_warning": self.truncation_warning,
        }


def polynomial_degree_probe(psi: FockVector, xi, quanta: Optional[int] = None,
                            floor: float = config.POLY_COEFF_FLOOR) -> DegreeProbe:
    """Fit f(t) = <psi|W(t xi)|psi> exp(t^2 |xi|^2 / 2) on Chebyshev nodes.

    For psi with at most N quanta, f is a polynomial of degree <= 2N. The
    fit uses 4N + 5 nodes in [-1, 1] and degree 4N + 4; the reported degree
    is the largest power whose coefficient exceeds ``floor`` times the
    largest coefficient.
    """
    N = psi.top_grade(1e-14) if quanta is None else quanta
    b = psi.basis
    xi = np.asarray(xi, dtype=complex)
    x2 = float(np.vdot(xi, xi).real)
    trunc = x2 > (b.M - 2 * N) / 4 or b.M < 2 * N + 2
    if trunc:
        warnings.warn("cutoff is tight for this probe", TruncationWarning, stacklevel=2)
    K = 4 * N + 5
    nodes = np.cos((2 * np.arange(K) + 1) * np.pi / (2 * K))
    f = np.array([np.vdot(psi.coeffs, weyl_apply(b, t * xi, psi.coeffs)) for t in nodes])
    f = f * np.exp(0.5 * nodes**2 * x2)
    cheb = np.polynomial.chebyshev
    coeffs = (cheb.cheb2poly(cheb.chebfit(nodes, f.real, K - 1))
              + 1j * cheb.cheb2poly(cheb.chebfit(nodes, f.imag, K - 1)))
    mags = np.abs(coeffs)
    big = np.flatnonzero(mags > floor * mags.max()) if mags.max() > 0 else np.array([0])
    return DegreeProbe(int(big.max()), N, coeffs, nodes, trunc)


# -- Newton-Wigner counterexample ------------------------------------------------


@dataclass
class NewtonWignerResult:
    i: int
    j: int
    excited: float
    vacuum: float
    difference: float
    closed_form: float

    @property
    def agrees(self) -> bool:
        return abs(self.difference - self.closed_form) <= 1e-9 * max(1.0, abs(self.closed_form))

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "excited": self.excited, "vacuum": self.vacuum,
                "difference": self.difference, "closed_form": self.closed_form,
                "agrees": self.agrees}


def newton_wigner_demo(s: SpectralModel, i: int, j: int, basis: FockBasis) -> NewtonWignerResult:
    """Mean-square displacement at site j with one quantum placed at site i.

    excited = <0|a(e_i) Q_j^2 a^dagger(e_i)|0>, vacuum = <0|Q_j^2|0>; their
    difference equals ((Omega^{-1/2})_ij)^2.
    """
    if i == j:
        raise ValueError("need two distinct sites")
    if basis.M < 3:
        raise ValueError("Q_j^2 on a one-quantum state needs cutoff M >= 3")
    e_i = np.zeros(s.n)
    e_i[i] = 1.0
    e_j = np.zeros(s.n)
    e_j[j] = 1.0
    psi = create(basis, e_i) @ vacuum(basis)
    Qpsi = field_Q(basis, s, e_j) @ psi
    excited = float(np.vdot(Qpsi.coeffs, Qpsi.coeffs).real)
    vac = vacuum_covariance(s, j, j)
    return NewtonWignerResult(i, j, excited, vac, excited - vac, float(s.inv_sqrt_omega[i, j]) ** 2)
