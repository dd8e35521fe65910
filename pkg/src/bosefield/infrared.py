"""Brillouin-zone integrals that decide scale-space membership.

A finitely supported displacement q lies in K_lambda iff

    int_BZ |qhat(k)|^2 omega(k)^(2 lambda) dk

is finite. All singularities of the integrand sit at k = 0, so the zone
[-1/2, 1/2]^d is cut into dyadic shells 2^-(j+1) <= |k|_inf <= 2^-j and each
shell is integrated with an adaptive tensor Gauss-Legendre rule. Removing
the cube |k|_inf < eps gives the partial integrals whose behaviour as
eps -> 0 is classified.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import config
from .errors import NotTranslationInvariant, QuadratureFailure
from .models import ModelSpec, dispersion

_GL_ORDER = 10
_MAX_DEPTH = 14


def delta_qhat(k: np.ndarray) -> np.ndarray:
    """Fourier transform of the unit displacement at the origin."""
    return np.ones(k.shape[:-1])


def qhat_from_sites(sites) -> Callable[[np.ndarray], np.ndarray]:
    """Fourier transform qhat(k) = sum_j q(j) exp(-2 pi i j.k) of a finite displacement.

    ``sites`` is an iterable of ``(coords, value)`` pairs.
    """
    sites = [(np.atleast_1d(np.asarray(c, dtype=float)), float(v)) for c, v in sites]

    def qhat(k):
        out = np.zeros(k.shape[:-1], dtype=complex)
        for c, v in sites:
            out += v * np.exp(-2j * np.pi * (k @ c))
        return out

    return qhat


def _gl_box(f, lo, hi, nodes, weights):
    d = len(lo)
    half = (hi - lo) / 2
    mid = (hi + lo) / 2
    grids = np.meshgrid(*[mid[i] + half[i] * nodes for i in range(d)], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = weights
    for _ in range(d - 1):
        w = np.multiply.outer(w, weights)
    vals = f(pts)
    if not np.all(np.isfinite(vals)):
        raise QuadratureFailure("integrand is not finite inside a cell")
    return float(np.prod(half) * math.fsum((w.ravel() * vals).tolist()))


def _adaptive_box(f, lo, hi, rtol, atol, depth, nodes, weights, whole=None):
    if whole is None:
        whole = _gl_box(f, lo, hi, nodes, weights)
    d = len(lo)
    mid = (lo + hi) / 2
    children = []
    for corner in itertools.product((0, 1), repeat=d):
        c = np.array(corner)
        clo = np.where(c == 0, lo, mid)
        chi = np.where(c == 0, mid, hi)
        children.append((clo, chi, _gl_box(f, clo, chi, nodes, weights)))
    refined = math.fsum(v for _, _, v in children)
    if abs(refined - whole) <= max(rtol * abs(refined), atol):
        return refined
    if depth >= _MAX_DEPTH:
        raise QuadratureFailure(f"adaptive refinement did not converge on cell {lo}..{hi}")
    return math.fsum(
        _adaptive_box(f, clo, chi, rtol, atol / 2**d, depth + 1, nodes, weights, whole=v)
        for clo, chi, v in children
    )


def _shell_boxes(d: int, a: float, b: float):
    """Disjoint boxes covering {a <= |k|_inf <= b} in d dimensions."""
    for axis in range(d):
        for sign in (1, -1):
            lo = np.empty(d)
            hi = np.empty(d)
            for j in range(d):
                if j < axis:
                    lo[j], hi[j] = -a, a
                elif j > axis:
                    lo[j], hi[j] = -b, b
            lo[axis], hi[axis] = (a, b) if sign > 0 else (-b, -a)
            yield lo, hi


def _integrand(m: ModelSpec, lam: float, qhat):
    def f(k):
        w2 = dispersion(m, k)
        return np.abs(qhat(k)) ** 2 * w2**lam

    return f


def shell_integral(m: ModelSpec, lam: float, qhat, a: float, b: float, rtol: float = config.IR_RTOL) -> float:
    """Integral over the shell a <= |k|_inf <= b."""
    nodes, weights = np.polynomial.legendre.leggauss(_GL_ORDER)
    f = _integrand(m, lam, qhat)
    parts = []
    for lo, hi in _shell_boxes(m.d, a, b):
        parts.append(_adaptive_box(f, lo, hi, rtol, 1e-300, 0, nodes, weights))
    return math.fsum(parts)


def _dyadic_shells(eps: float):
    b = 0.5
    while b > eps * (1 + 1e-12):
        a = max(b / 2, eps)
        yield a, b
        b = a


def infrared_partial_integral(m: ModelSpec, lam: float, qhat=delta_qhat, eps: float = 0.25,
                              rtol: float = config.IR_RTOL) -> float:
    """int over {eps <= |k|_inf <= 1/2} of |qhat|^2 omega^(2 lam) dk."""
    if not m.translation_invariant:
        raise NotTranslationInvariant("partial integrals need a translation-invariant model")
    if not 0 < eps <= 0.25:
        raise ValueError("eps must lie in (0, 1/4]")
    return math.fsum(shell_integral(m, lam, qhat, a, b, rtol) for a, b in _dyadic_shells(eps))


def partial_integral_sweep(m: ModelSpec, lam: float, qhat=delta_qhat,
                           exponents=config.IR_CUTOFF_EXPONENTS) -> tuple[np.ndarray, np.ndarray]:
    """Partial integrals for eps = 2^-k, k in ``exponents``, sharing shell work."""
    if not m.translation_invariant:
        raise NotTranslationInvariant("partial integrals need a translation-invariant model")
    exponents = sorted(exponents)
    if exponents[0] < 2:
        raise ValueError("cutoffs must satisfy eps <= 1/4")
    shells = []
    values = []
    for k in range(1, exponents[-1]):
        shells.append(shell_integral(m, lam, qhat, 2.0 ** -(k + 1), 2.0**-k))
        if k + 1 in exponents:
            values.append(math.fsum(shells))
    eps = np.array([2.0**-k for k in exponents])
    return eps, np.array(values)


@dataclass
class Classification:
    """Outcome of :func:`classify_scale_membership`.

    ``verdict`` is ``"convergent"``, ``"divergent"`` or ``"inconclusive"``.
    """

    verdict: str
    eps: np.ndarray
    partials: np.ndarray
    log_slope: float
    scale: float
    fit_residual: float
    increment_ratio: float
    value: Optional[float] = None
    thresholds: dict = field(default_factory=lambda: {
        "slope": config.IR_SLOPE_THRESHOLD,
        "residual": config.IR_RESIDUAL_THRESHOLD,
        "growth_ratio": config.IR_GROWTH_RATIO,
        "tail_points": config.IR_TAIL_POINTS,
    })

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "value": self.value,
            "log_slope": self.log_slope,
            "scale": self.scale,
            "fit_residual": self.fit_residual,
            "increment_ratio": self.increment_ratio,
            "thresholds": self.thresholds,
            "table": [{"eps": float(e), "log_inv_eps": float(-np.log(e)), "partial": float(v)}
                      for e, v in zip(self.eps, self.partials)],
        }


def classify_scale_membership(m: ModelSpec, lam: float, qhat=delta_qhat) -> Classification:
    """Decide numerically whether the partial integrals converge as eps -> 0.

    The tail of the sweep is fitted linearly against log(1/eps).

    * tail slope <= 0.05 * max|partial|: convergent; the limit is
      extrapolated assuming geometric decay of the dyadic increments.
    * otherwise divergent, provided the growth is at least logarithmic:
      either the linear fit residual is within 10% of the tail range
      (log divergence), or the dyadic increments do not decay (power growth).
    * anything else (large slope but decaying increments, i.e. a slowly
      converging integrable singularity) is inconclusive.
    """
    eps, vals = partial_integral_sweep(m, lam, qhat)
    L = -np.log(eps)
    t = slice(len(vals) - config.IR_TAIL_POINTS, None)
    slope, intercept = np.polyfit(L[t], vals[t], 1)
    scale = float(np.max(np.abs(vals)))
    tail_range = float(np.ptp(vals[t]))
    resid = float(np.max(np.abs(vals[t] - (intercept + slope * L[t]))))
    rel_resid = resid / tail_range if tail_range > 0 else 0.0
    inc = np.diff(vals)
    ratio = float(inc[-1] / inc[-2]) if inc[-2] != 0 else 0.0

    common = dict(eps=eps, partials=vals, log_slope=float(slope), scale=scale,
                  fit_residual=rel_resid, increment_ratio=ratio)
    if slope <= config.IR_SLOPE_THRESHOLD * scale:
        value = float(vals[-1])
        if 0 < ratio < 1:
            value += float(inc[-1]) * ratio / (1 - ratio)
        return Classification("convergent", value=value, **common)
    if ratio >= config.IR_GROWTH_RATIO and (rel_resid <= config.IR_RESIDUAL_THRESHOLD or ratio > 1):
        return Classification("divergent", **common)
    return Classification("inconclusive", **common)
