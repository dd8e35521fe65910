import time

import numpy as np
import pytest
from scipy import integrate

from bosefield import ModelSpec, classify_scale_membership, dispersion, infrared_partial_integral
from bosefield.errors import NotTranslationInvariant
from bosefield.infrared import partial_integral_sweep, qhat_from_sites


def oracle_1d(m, lam, eps, q=lambda k: 1.0):
    f = lambda k: abs(q(k)) ** 2 * dispersion(m, k) ** lam
    opts = dict(epsabs=0, epsrel=1e-12, limit=200)
    return integrate.quad(f, eps, 0.5, **opts)[0] + integrate.quad(f, -0.5, -eps, **opts)[0]


@pytest.mark.parametrize("nu,lam,eps", [(0.25, -0.5, 0.25), (0.5, -0.5, 2**-8), (0.5, -1.0, 2**-6), (0.1, 0.5, 2**-3)])
def test_partial_integral_1d_matches_quad(nu, lam, eps):
    m = ModelSpec.from_nu(8, nu)
    assert infrared_partial_integral(m, lam, eps=eps) == pytest.approx(oracle_1d(m, lam, eps), rel=1e-8)


def test_partial_integral_2d_matches_dblquad():
    m = ModelSpec.from_nu((4, 4), 0.25)
    eps = 2**-4
    f = lambda y, x: dispersion(m, np.array([x, y])) ** -0.5
    total = 0.0
    # the region eps <= |k|_inf <= 1/2 as four rectangles
    for (x0, x1, y0, y1) in [(eps, 0.5, -0.5, 0.5), (-0.5, -eps, -0.5, 0.5), (-eps, eps, eps, 0.5), (-eps, eps, -0.5, -eps)]:
        total += integrate.dblquad(f, x0, x1, y0, y1, epsabs=0, epsrel=1e-10)[0]
    assert infrared_partial_integral(m, -0.5, eps=eps) == pytest.approx(total, rel=1e-7)


def test_displacement_profile():
    m = ModelSpec.from_nu(8, 0.4)
    sites = [((0,), 1.0), ((1,), -1.0)]
    q = qhat_from_sites(sites)
    expected = oracle_1d(m, -0.5, 2**-3, q=lambda k: q(np.array([[k]]))[0])
    assert infrared_partial_integral(m, -0.5, qhat=q, eps=2**-3) == pytest.approx(expected, rel=1e-8)


def test_sweep_is_monotone_for_positive_integrand():
    _, vals = partial_integral_sweep(ModelSpec.from_nu(8, 0.5), -0.5)
    assert np.all(np.diff(vals) > 0)


def test_classification_cases():
    t0 = time.perf_counter()
    crit = classify_scale_membership(ModelSpec.from_nu(8, 0.5), -0.5)
    assert crit.verdict == "divergent"
    # omega(k) ~ sqrt(2) pi |k| for nu = 1/2, omega0 = 1, so the partials grow like (sqrt(2)/pi) log(1/eps)
    assert crit.log_slope == pytest.approx(np.sqrt(2) / np.pi, rel=0.02)
    gapped = classify_scale_membership(ModelSpec.from_nu(8, 0.25), -0.5)
    assert gapped.verdict == "convergent"
    exact = integrate.quad(lambda k: dispersion(ModelSpec.from_nu(8, 0.25), k) ** -0.5, -0.5, 0.5, epsrel=1e-12)[0]
    assert gapped.value == pytest.approx(exact, rel=1e-6)
    assert classify_scale_membership(ModelSpec.from_nu((4, 4), 0.25), -0.5).verdict == "convergent"
    assert classify_scale_membership(ModelSpec.from_nu(8, 0.5), -1.0).verdict == "divergent"
    assert time.perf_counter() - t0 < 60


def test_slow_integrable_singularity_is_inconclusive():
    # |k|^-0.9 is integrable but the partials are still growing at eps = 2^-12
    assert classify_scale_membership(ModelSpec.from_nu(8, 0.5), -0.45).verdict == "inconclusive"


def test_rejects_open_boundaries_and_bad_eps():
    with pytest.raises(NotTranslationInvariant):
        infrared_partial_integral(ModelSpec.lattice((4,), 1, 1, periodic=False), -0.5)
    with pytest.raises(ValueError):
        infrared_partial_integral(ModelSpec.from_nu(4, 0.25), -0.5, eps=0.4)
