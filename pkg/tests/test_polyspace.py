"""
Tests for wehrl/polyspace.py
"""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis.strategies import integers
from pytest import approx, mark, raises

from wehrl.errors import DomainError, ShapeError
from wehrl.polyspace import (AffinePoly, HomPoly, SpherePoint, basis_size, bombieri_inner, embed_affine,
                             enumerate_affine_indices, enumerate_multiindices, evaluate, fock_rescale, from_affine,
                             gradient, normalized_affine_kernel, orthonormal_monomials, random_polynomial,
                             random_sphere_point, random_unitary, reproducing_kernel, rotate, rotation_matrix,
                             to_affine, unitary_to_pole)
from wehrl.quadrature import build_sphere_rule, gram_matrix, integrate_sphere, make_generator

GRID = [(d, N) for d in (1, 2, 3) for N in range(1, 9)]


def test_enumeration_order_puts_pole_monomial_first():
    assert enumerate_multiindices(1, 2) == [(2, 0), (1, 1), (0, 2)]
    alphas = enumerate_multiindices(2, 3)
    assert alphas[0] == (3, 0, 0)
    assert len(alphas) == basis_size(2, 3) == 10
    assert all(sum(a) == 3 for a in alphas)


def test_enumeration_refuses_oversized_basis():
    with raises(ShapeError):
        enumerate_multiindices(20, 20)


@mark.parametrize("d N".split(), GRID)
def test_quadrature_inner_product_matches_bombieri(d, N):
    rng = make_generator(11, d, N)
    G = basis_size(d, N) * gram_matrix(build_sphere_rule(d, N), N)
    for _ in range(50):
        P = random_polynomial(d, N, rng)
        Q = random_polynomial(d, N, rng)
        assert abs(P.coeffs @ G @ np.conj(Q.coeffs) - bombieri_inner(P, Q)) < 1e-10


def test_rule_integrates_products_pointwise(rng):
    P = random_polynomial(2, 3, rng)
    Q = random_polynomial(2, 3, rng)
    numeric = basis_size(2, 3) * integrate_sphere(lambda z: evaluate(P, z) * np.conj(evaluate(Q, z)),
                                                  build_sphere_rule(2, 3))
    assert abs(numeric - bombieri_inner(P, Q)) < 1e-10


@mark.parametrize("d N".split(), GRID)
def test_kernel_has_unit_norm_and_reproduces(d, N):
    rng = make_generator(12, d, N)
    for _ in range(10):
        eta = random_sphere_point(d, rng)
        K = reproducing_kernel(N, eta)
        Q = random_polynomial(d, N, rng)
        assert K.norm() == approx(1.0, abs=1e-10)
        assert abs(bombieri_inner(Q, K) - evaluate(Q, eta)) < 1e-10


def test_kernel_rejects_non_unit_center():
    with raises(DomainError):
        reproducing_kernel(3, np.array([1.0, 1.0]))


@given(integers(min_value=0, max_value=10 ** 6))
@settings(max_examples=25, deadline=None)
def test_unit_polynomial_is_bounded_by_one(seed):
    rng = make_generator(seed)
    Q = random_polynomial(2, 3, rng)
    points = np.array([random_sphere_point(2, rng) for _ in range(50)])
    assert np.all(np.abs(evaluate(Q, points)) ** 2 <= 1.0 + 1e-12)


def test_rotation_moves_kernel_center(rng):
    R = random_unitary(3, rng)
    eta = random_sphere_point(2, rng)
    rotated = rotate(reproducing_kernel(5, eta), R)
    expected = reproducing_kernel(5, R @ eta)
    np.testing.assert_allclose(rotated.coeffs, expected.coeffs, atol=1e-10)


def test_rotation_is_unitary_on_the_space(rng):
    M = rotation_matrix(2, 4, random_unitary(3, rng))
    np.testing.assert_allclose(M.conj().T @ M, np.eye(M.shape[0]), atol=1e-10)
    Q = random_polynomial(2, 4, rng)
    assert rotate(Q, random_unitary(3, rng)).norm() == approx(1.0, abs=1e-10)


def test_rotation_rejects_non_unitary(rng):
    Q = random_polynomial(1, 3, rng)
    with raises(DomainError):
        rotate(Q, np.array([[1.0, 0.5], [0.0, 1.0]]))
    with raises(ShapeError):
        rotate(Q, np.eye(3))


def test_unitary_to_pole(rng):
    eta = random_sphere_point(3, rng)
    R = unitary_to_pole(eta)
    np.testing.assert_allclose(R @ eta, np.eye(4)[0], atol=1e-12)
    np.testing.assert_allclose(R.conj().T @ R, np.eye(4), atol=1e-12)


def test_euler_identity_for_gradient(rng):
    Q = random_polynomial(2, 5, rng)
    points = np.array([random_sphere_point(2, rng) for _ in range(20)])
    grads = gradient(Q, points)
    np.testing.assert_allclose(np.sum(points * grads, axis=1), 5 * evaluate(Q, points), atol=1e-12)


def test_homogeneous_shape_errors():
    with raises(ShapeError):
        HomPoly(2, 3, np.zeros(4))
    with raises(ShapeError):
        HomPoly.from_terms(1, 3, {(2, 0): 1.0})
    with raises(ShapeError):
        bombieri_inner(HomPoly.monomial(1, 2, (2, 0)), HomPoly.monomial(1, 3, (3, 0)))
    with raises(DomainError):
        HomPoly(1, 2, np.zeros(3)).normalized()


def test_sphere_point_validation_and_coords():
    with raises(DomainError):
        SpherePoint(np.array([1.0, 1.0]))
    p = SpherePoint(np.array([0.6, 0.8j]))
    rho, theta = p.coords
    q = SpherePoint.from_coords(rho, theta)
    np.testing.assert_allclose(q.ambient, p.ambient, atol=1e-12)


def test_affine_chart_matches_homogeneous(rng):
    Q = random_polynomial(2, 3, rng)
    q = to_affine(Q)
    z = np.array([0.3 + 0.1j, -0.2j])
    assert q(z) == approx(Q(np.concatenate([[1.0], z])))
    assert from_affine(q).norm() == approx(1.0)


def test_affine_terms_and_degree_bound():
    q = AffinePoly.from_terms(1, 2, {(0,): 1.0, (2,): 0.5})
    assert q.terms() == {(0,): 1.0, (2,): 0.5}
    with raises(ShapeError):
        AffinePoly.from_terms(1, 2, {(3,): 1.0})
    with raises(ShapeError):
        embed_affine(q, 1)


def test_fock_rescale_scales_coefficients():
    f = AffinePoly.from_terms(1, 1, {(0,): 1.0, (1,): 1.0})
    q = fock_rescale(f, 16)
    assert q.N == 16
    assert q.terms()[(1,)] == approx(math.sqrt(16 / math.pi))
    assert q.terms()[(0,)] == approx(1.0)


def test_normalized_affine_kernel_has_unit_norm():
    q = normalized_affine_kernel(6, [0.4 - 0.2j, 0.1])
    assert q.norm() == approx(1.0, abs=1e-12)
    w = np.array([0.4 - 0.2j, 0.1])
    assert q(w) == approx((1.0 + np.vdot(w, w).real) ** 3, rel=1e-12)
    with raises(DomainError):
        normalized_affine_kernel(3, [np.inf])


def test_orthonormal_coordinates_carry_the_norm(rng):
    Q = random_polynomial(2, 4, rng) * 3.0
    coords = Q.orthonormal_coords()
    assert np.sum(np.abs(coords) ** 2) == approx(Q.norm() ** 2, rel=1e-12)
    points = np.array([random_sphere_point(2, rng) for _ in range(7)])
    np.testing.assert_allclose(orthonormal_monomials(points, 2, 4) @ coords, evaluate(Q, points), atol=1e-12)
    np.testing.assert_allclose(HomPoly.from_orthonormal(2, 4, coords).coeffs, Q.coeffs, atol=1e-14)


@mark.parametrize("d N".split(), [(1, 30), (2, 20), (3, 24)])
def test_rotation_matches_substitution_at_high_degree(d, N, rng):
    Q = random_polynomial(d, N, rng)
    R = random_unitary(d + 1, rng)
    points = np.array([random_sphere_point(d, rng) for _ in range(6)])
    rotated = rotate(Q, R)
    np.testing.assert_allclose(evaluate(rotated, points), evaluate(Q, points @ np.conj(R)), atol=1e-9)
    assert rotated.norm() == approx(1.0, abs=1e-9)


@mark.slow
def test_rotation_of_a_monomial_at_degree_forty(rng):
    Q = HomPoly.monomial(3, 40, (10, 10, 10, 10)).normalized()
    R = random_unitary(4, rng)
    points = np.array([random_sphere_point(3, rng) for _ in range(4)])
    rotated = rotate(Q, R)
    assert rotated.norm() == approx(1.0, abs=1e-8)
    np.testing.assert_allclose(evaluate(rotated, points), evaluate(Q, points @ np.conj(R)), atol=1e-8)


def test_affine_indices_follow_homogeneous_order():
    assert enumerate_affine_indices(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    indices = enumerate_affine_indices(3, 4)
    assert len(indices) == basis_size(3, 4) == len(set(indices))
    assert all(sum(beta) <= 4 for beta in indices)
