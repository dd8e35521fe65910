import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosefield import ModelSpec, build_omega_squared, decompose
from bosefield.errors import NotNormalized
from bosefield.fock import FockBasis, FockVector, create, vacuum
from bosefield.locality import (
    Region,
    WeylSample,
    complement_span_rank,
    knight_search,
    minimal_one_quantum_residual,
    newton_wigner_demo,
    one_quantum_deviation,
    one_quantum_deviation_minimum,
    one_quantum_localization_residual,
    polynomial_degree_probe,
    strongly_nonlocal,
    weyl_deviation,
    witness_defect,
)

from conftest import random_coupling, random_spd, spd_models

COUPLED = np.array([[2.0, 1.0], [1.0, 2.0]])


def regions(n):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


def test_region_parsing():
    assert Region.parse("2, 0,2", 4).indices == (0, 2)
    assert Region.parse("", 3).complement == (0, 1, 2)
    with pytest.raises(ValueError):
        Region.parse("5", 3)


def test_edge_regions(rng):
    s = decompose(random_spd(rng, 3))
    assert strongly_nonlocal(s, ()).strongly_nonlocal
    full = strongly_nonlocal(s, (0, 1, 2))
    assert not full.strongly_nonlocal and full.equivalence_consistent


@given(spd_models(max_n=5))
@settings(max_examples=40, deadline=None)
def test_equivalence_and_witness(s):
    for B in regions(s.n):
        v = strongly_nonlocal(s, B)
        assert v.equivalence_consistent
        if v.witness is not None:
            assert witness_defect(s, B, v.witness) < 1e-8
            assert np.linalg.norm(v.witness) == pytest.approx(1.0)


def test_diagonal_model_is_local_everywhere():
    s = decompose(np.diag([1.0, 2.0, 3.0]))
    for B in regions(3):
        if B:
            assert not strongly_nonlocal(s, B).strongly_nonlocal


def test_block_model_locality():
    m = np.zeros((3, 3))
    m[:2, :2] = COUPLED
    m[2, 2] = 1.5
    s = decompose(m)
    assert strongly_nonlocal(s, (0,)).strongly_nonlocal
    assert not strongly_nonlocal(s, (0, 1)).strongly_nonlocal
    assert not strongly_nonlocal(s, (2,)).strongly_nonlocal


def test_locality_is_monotone_in_region():
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = decompose(random_coupling(rng, 5, density=0.3))
        for B in regions(5):
            if not strongly_nonlocal(s, B).strongly_nonlocal:
                for j in set(range(5)) - set(B):
                    assert not strongly_nonlocal(s, tuple(B) + (j,)).strongly_nonlocal


def test_one_quantum_residual_monotone(rng):
    # enlarging B shrinks the complement span, so the projection residual cannot grow
    s = decompose(random_spd(rng, 4))
    xi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    xi /= np.linalg.norm(xi)
    chain = [(), (0,), (0, 1), (0, 1, 2), (0, 1, 2, 3)]
    res = [one_quantum_localization_residual(s, B, xi) for B in chain]
    assert all(a >= b - 1e-12 for a, b in zip(res, res[1:]))
    assert res[-1] == 0.0
    with pytest.raises(NotNormalized):
        one_quantum_localization_residual(s, (0,), 2 * xi)


def test_minimal_one_quantum_residual_matches_rank(rng):
    s = decompose(random_spd(rng, 3))
    assert minimal_one_quantum_residual(s, (0,)) == 1.0
    assert complement_span_rank(s, (0,)) == 3
    d = decompose(np.diag([1.0, 2.0, 3.0]))
    assert minimal_one_quantum_residual(d, (0,)) == 0.0


def test_weyl_sample_deterministic():
    B = Region((0,), 3)
    a, b = WeylSample(seed=4).points(3, B), WeylSample(seed=4).points(3, B)
    assert all(np.array_equal(x.as_array(), y.as_array()) for x, y in zip(a, b))
    assert len(a) == 4 * 3 + 20
    for p in a:
        assert np.all(p.q[0] == 0) and np.all(p.p[0] == 0)
    assert WeylSample().points(2, Region((0, 1), 2)) == []


def test_one_quantum_closed_form_matches_fock():
    s = decompose(COUPLED)
    b = FockBasis(2, 20)
    xi = np.array([0.6, 0.8j])
    psi = create(b, xi) @ vacuum(b)
    sample = WeylSample()
    assert weyl_deviation(psi, s, (0,), sample) == pytest.approx(
        one_quantum_deviation(xi, sample.amplitudes_for(s, (0,))), abs=1e-10)


def test_localization_dichotomy():
    d = decompose(np.diag([1.0, 2.0]))
    b = FockBasis(2, 20)
    r = knight_search(d, (0,), b, 1)
    assert r.min_residual <= 1e-6
    target = create(b, [1.0, 0.0]) @ vacuum(b)
    assert abs(r.argmin.inner(target)) ** 2 >= 0.999

    c = decompose(COUPLED)
    r = knight_search(c, (0,), b, 1)
    analytic, _ = one_quantum_deviation_minimum(c, (0,))
    assert abs(r.min_residual - analytic) <= 1e-4
    assert r.min_residual > 0.01


def test_search_not_applicable_and_bounds():
    s = decompose(COUPLED)
    b = FockBasis(2, 6)
    r = knight_search(s, (0,), b, 0)
    assert r.status == "not_applicable" and r.argmin is None
    assert r.to_dict()["min_residual"] is None
    with pytest.raises(ValueError):
        knight_search(s, (0,), b, 5)


@pytest.mark.parametrize("seed", range(6))
def test_search_matches_closed_form_on_fleet(seed):
    rng = np.random.default_rng(100 + seed)
    n = 2 + seed % 2
    s = decompose(random_spd(rng, n))
    sample = WeylSample(seed=seed, normalize_random=True)
    b = FockBasis(n, 8 if n == 2 else 6)
    r = knight_search(s, (0,), b, 1, sample=sample, seed=seed)
    analytic, _ = one_quantum_deviation_minimum(s, (0,), sample, seed=seed)
    assert abs(r.min_residual - analytic) <= 1e-4


def test_search_never_beats_vacuum_free_lower_bound():
    # a two-quantum search contains all one-quantum states, so it can only do at least as well
    s = decompose(COUPLED)
    b = FockBasis(2, 16)
    sample = WeylSample(normalize_random=True)
    one = knight_search(s, (0,), b, 1, sample=sample).min_residual
    two = knight_search(s, (0,), b, 2, sample=sample).min_residual
    assert two <= one + 1e-9


@pytest.mark.parametrize("N", [1, 2, 3])
def test_polynomial_degree_bound(N):
    rng = np.random.default_rng(N)
    b = FockBasis(2, 2 * N + 10)
    mask = b.grade_mask(N)
    for _ in range(50 // 3 + 1):
        c = np.zeros(b.dim, dtype=complex)
        c[mask] = rng.standard_normal(mask.sum()) + 1j * rng.standard_normal(mask.sum())
        psi = FockVector(b, c).normalized()
        xi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        xi *= rng.uniform(0.3, 1.0) / np.linalg.norm(xi)
        probe = polynomial_degree_probe(psi, xi, quanta=N)
        assert probe.within_bound and probe.degree <= 2 * N


def test_newton_wigner(rng):
    s = decompose(COUPLED)
    b = FockBasis(2, 3)
    r = newton_wigner_demo(s, 0, 1, b)
    assert r.agrees and r.difference > 0
    d = newton_wigner_demo(decompose(np.diag([1.0, 2.0])), 0, 1, b)
    assert d.difference == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        newton_wigner_demo(s, 0, 0, b)
    with pytest.raises(ValueError):
        newton_wigner_demo(s, 0, 1, FockBasis(2, 2))


@pytest.mark.filterwarnings("ignore::bosefield.errors.TruncationWarning")
def test_local_coherent_states_look_like_vacuum_outside():
    from bosefield.classical import PhaseVector, z_map
    from bosefield.fock import coherent, coherent_tail_bound

    s = decompose(np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 0.5], [0.0, 0.5, 2.0]]))
    b = FockBasis(3, 20)
    rng = np.random.default_rng(8)
    for B in [(0,), (1, 2)]:
        for _ in range(3):
            q, p = np.zeros(3), np.zeros(3)
            q[list(B)] = rng.standard_normal(len(B))
            p[list(B)] = rng.standard_normal(len(B))
            x = PhaseVector(q, p)
            x = x * (rng.uniform(0.2, 1.0) / np.linalg.norm(z_map(s, x)))
            z = z_map(s, x)
            dev = weyl_deviation(coherent(b, z).normalized(), s, B)
            # the tail bound is far below double precision here, so the float floor applies
            assert dev <= max(1e-12, 10 * coherent_tail_bound(float(np.vdot(z, z).real), b.M))


def test_newton_wigner_on_ring():
    s = decompose(build_omega_squared(ModelSpec.from_nu(6, 0.25)))
    r = newton_wigner_demo(s, 0, 3, FockBasis(6, 3))
    assert r.agrees and r.difference > 0
