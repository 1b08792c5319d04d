"""
Tests for wehrl/states.py
"""

import math

import numpy as np
from pytest import approx, mark, raises

from wehrl.errors import DomainError, ShapeError
from wehrl.functionals import Cap, cap_threshold, concentration, parse_phi, wehrl_entropy
from wehrl.polyspace import basis_size, random_sphere_point, random_unitary
from wehrl.quadrature import make_generator, sample_sphere
from wehrl.states import (DensityState, coherent_state, conjugate, husimi, maximally_mixed, mixture,
                          near_coherent, pure_state, random_state, state_concentration,
                          state_concentration_deficit, state_entropy, state_entropy_deficit,
                          trace_distance_to_coherent, trace_norm)


@mark.parametrize("d N".split(), [(1, 2), (1, 4), (2, 2), (2, 4)])
def test_pure_state_husimi_is_modulus_squared(random_polys, d, N):
    points = sample_sphere(200, 31, d).points
    for Q in random_polys[(d, N)]:
        np.testing.assert_allclose(husimi(pure_state(Q), points), np.abs(Q(points)) ** 2, atol=1e-12)


@mark.parametrize("d N".split(), [(1, 3), (2, 4), (3, 2)])
def test_maximally_mixed_husimi_is_constant(d, N):
    points = sample_sphere(100, 32, d).points
    np.testing.assert_allclose(husimi(maximally_mixed(d, N), points), 1.0 / basis_size(d, N), rtol=1e-12)


def test_coherent_husimi(rng):
    eta = random_sphere_point(2, rng)
    rho = coherent_state(3, eta)
    assert rho.rank == 1
    points = sample_sphere(100, 33, 2).points
    np.testing.assert_allclose(husimi(rho, points), np.abs(points @ np.conj(eta)) ** 6, atol=1e-12)
    assert husimi(rho, eta) == approx(1.0)


def test_trace_norm_between_coherent_states(rng):
    a, b = random_sphere_point(2, rng), random_sphere_point(2, rng)
    N = 3
    expected = 2.0 * math.sqrt(1.0 - abs(np.vdot(b, a)) ** (2 * N))
    assert trace_norm(coherent_state(N, a).matrix - coherent_state(N, b).matrix) == approx(expected, rel=1e-9)


def test_coherent_state_distance_vanishes(rng):
    eta = random_sphere_point(1, rng)
    result = trace_distance_to_coherent(coherent_state(4, eta), seed=34, starts=2)
    assert result.value == approx(0.0, abs=1e-5)
    assert abs(np.vdot(result.argmax, eta)) == approx(1.0, abs=1e-5)


def test_mixed_state_distance_is_positive(rng):
    rho = near_coherent(1, 3, 0.3, rng)
    result = trace_distance_to_coherent(rho, seed=35, starts=2)
    assert 0.0 < result.value <= 2.0


@mark.parametrize("phi_text", ["power:2", "xlogx"])
def test_pure_state_entropy_matches_polynomial(random_polys, phi_text):
    phi = parse_phi(phi_text)
    Q = random_polys[(2, 2)][0]
    assert state_entropy(pure_state(Q), phi).value == approx(wehrl_entropy(Q, phi).value, rel=1e-10)


def test_mixing_raises_entropy(random_polys):
    phi = parse_phi("power:2")
    Q = random_polys[(1, 4)][0]
    mixed = mixture([pure_state(Q), maximally_mixed(1, 4)], [0.5, 0.5])
    assert state_entropy(mixed, phi).value > state_entropy(pure_state(Q), phi).value
    assert state_entropy(mixed, parse_phi("linear")).value == -1.0


def test_pure_state_concentration_matches_polynomial(random_polys):
    Q = random_polys[(2, 4)][2]
    cap = Cap(random_sphere_point(2, make_generator(36)), cap_threshold(4, 2, 0.3), 4)
    assert state_concentration(pure_state(Q), cap).value == approx(concentration(Q, cap).value, abs=1e-10)


def test_maximally_mixed_concentration_is_the_measure():
    cap = Cap(random_sphere_point(2, make_generator(37)), 0.2, 3)
    assert state_concentration(maximally_mixed(2, 3), cap).value == approx(cap.measure(), abs=1e-10)
    with raises(DomainError):
        state_concentration(maximally_mixed(1, 3), cap)


def test_coherent_deficits_vanish(rng):
    eta = random_sphere_point(2, rng)
    rho = coherent_state(3, eta)
    assert state_entropy_deficit(rho, parse_phi("power:2"), eta).value == approx(0.0, abs=1e-10)
    conc = state_concentration_deficit(rho, 0.2, eta, n=20_000, seed=38)
    assert conc.value == approx(0.0, abs=1e-8)
    with raises(DomainError):
        state_entropy_deficit(rho, parse_phi("linear"), eta)


def test_near_coherent_deficits_are_non_negative(rng):
    rho = near_coherent(2, 3, 0.2, rng)
    center = trace_distance_to_coherent(rho, seed=39, starts=2).argmax
    assert state_entropy_deficit(rho, parse_phi("power:2"), center).value > 0
    conc = state_concentration_deficit(rho, 0.2, center, n=50_000, seed=39)
    assert conc.value >= -4 * conc.stderr


def test_conjugation_preserves_spectrum(rng):
    rho = random_state(2, 3, 3, rng)
    moved = conjugate(rho, random_unitary(3, rng))
    np.testing.assert_allclose(moved.eigenvalues, rho.eigenvalues, atol=1e-12)
    assert moved.rank == 3


def test_components_rebuild_the_state(rng):
    rho = random_state(1, 4, 2, rng)
    rebuilt = mixture([pure_state(Q) for _, Q in rho.components()], [lam for lam, _ in rho.components()])
    np.testing.assert_allclose(rebuilt.matrix, rho.matrix, atol=1e-12)


def test_state_validation():
    dim = basis_size(1, 2)
    with raises(ShapeError):
        DensityState(1, 2, np.eye(dim + 1) / (dim + 1))
    with raises(DomainError):
        DensityState(1, 2, np.eye(dim))
    skew = np.eye(dim, dtype=complex) / dim
    skew[0, 1] = 0.1j
    with raises(DomainError):
        DensityState(1, 2, skew)
    with raises(DomainError):
        DensityState(1, 2, np.diag([1.5, -0.5, 0.0]))


def test_mixture_validation(rng):
    a, b = random_state(1, 2, 1, rng), random_state(1, 3, 1, rng)
    with raises(DomainError):
        mixture([a, a], [0.7, 0.7])
    with raises(ShapeError):
        mixture([a, a], [1.0])
    with raises(ShapeError):
        mixture([a, b], [0.5, 0.5])


def test_random_state_rank_and_eps_ranges(rng):
    with raises(DomainError):
        random_state(1, 2, 4, rng)
    with raises(DomainError):
        near_coherent(1, 2, 1.5, rng)


def test_rank_one_states_reduce_to_polynomials(rng):
    power = parse_phi("power:2")
    for _ in range(10):
        d = int(rng.integers(1, 3))
        N = int(rng.integers(1, 5))
        rho = random_state(d, N, 1, rng)
        (lam, Q), = rho.components()
        assert lam == approx(1.0)
        cap = Cap(random_sphere_point(d, rng), 0.3, N)
        assert state_entropy(rho, power).value == approx(wehrl_entropy(Q, power).value, abs=1e-8)
        assert state_concentration(rho, cap).value == approx(concentration(Q, cap).value, abs=1e-8)
