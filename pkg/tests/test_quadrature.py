"""
Tests for wehrl/quadrature.py
"""

import math

import numpy as np
from pytest import approx, mark, raises

from wehrl.errors import DomainError, EvaluationError, ShapeError
from wehrl.polyspace import basis_size
from wehrl.quadrature import (STREAM_SPHERE, RunningMoments, build_sphere_rule, derive_seed, gram_matrix,
                              integrate_sphere, make_generator, map_sphere_chunks, monte_carlo_mean,
                              sample_fubini_study, sample_gaussian_weight, sample_sphere, sphere_mean)


@mark.parametrize("d", (1, 2, 3))
def test_rule_weights_form_a_probability_measure(d):
    rule = build_sphere_rule(d, 6)
    assert rule.total_weight() == approx(1.0, abs=1e-13)
    assert integrate_sphere(lambda z: np.ones(z.shape[0]), rule) == approx(1.0, abs=1e-13)


@mark.parametrize("d N".split(), [(1, 3), (2, 4), (3, 2)])
def test_rule_integrates_pole_power(d, N):
    # int |zeta_1|^{2N} dsigma = 1 / binom(N+d, d)
    value = integrate_sphere(lambda z: np.abs(z[:, 0]) ** (2 * N), build_sphere_rule(d, N))
    assert value == approx(1.0 / basis_size(d, N), abs=1e-13)


def test_gram_matrix_is_diagonal_with_monomial_norms():
    d, N = 2, 3
    G = gram_matrix(build_sphere_rule(d, N), N)
    off = G - np.diag(np.diag(G))
    assert np.max(np.abs(off)) < 1e-13
    # int |zeta^alpha|^2 = alpha! d! / (N+d)!
    assert G[0, 0].real == approx(math.factorial(N) * math.factorial(d) / math.factorial(N + d))


def test_gram_matrix_needs_enough_degree():
    with raises(DomainError):
        gram_matrix(build_sphere_rule(1, 2), 3)


def test_rule_rejects_bad_arguments():
    with raises(ShapeError):
        build_sphere_rule(0, 4)
    with raises(DomainError):
        build_sphere_rule(2, 0)


def test_integrate_sphere_reports_the_bad_node():
    with raises(EvaluationError, match="node"):
        integrate_sphere(lambda z: np.where(np.abs(z[:, 0]) > 0.5, np.nan, 1.0), build_sphere_rule(1, 4))


def test_substreams_are_reproducible_and_distinct():
    a = make_generator(7, 1, 2).standard_normal(4)
    b = make_generator(7, 1, 2).standard_normal(4)
    c = make_generator(7, 1, 3).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert derive_seed(7, 6, 0) == derive_seed(7, 6, 0)
    assert derive_seed(7, 6, 0) != derive_seed(7, 6, 1)
    assert 0 <= derive_seed(7, 6, 0) < 2 ** 63


def test_chunk_results_do_not_depend_on_workers():
    fn = lambda z: np.abs(z[:, 0]) ** 2
    serial = np.concatenate(map_sphere_chunks(fn, 150_000, 3, 2, STREAM_SPHERE, workers=1))
    pooled = np.concatenate(map_sphere_chunks(fn, 150_000, 3, 2, STREAM_SPHERE, workers=4))
    np.testing.assert_array_equal(serial, pooled)


def test_sphere_samples_lie_on_the_sphere():
    cloud = sample_sphere(10_000, 5, 3)
    assert cloud.points.shape == (10_000, 4)
    np.testing.assert_allclose(np.linalg.norm(cloud.points, axis=1), 1.0, atol=1e-12)
    np.testing.assert_array_equal(cloud.points, sample_sphere(10_000, 5, 3).points)


def test_sphere_mean_of_pole_power():
    mean, err = sphere_mean(lambda z: np.abs(z[:, 0]) ** 4, 200_000, 1, 1)
    assert abs(mean - 1.0 / 3.0) < 5 * err


def test_gaussian_weight_second_moment():
    # each complex coordinate has E|z_j|^2 = 1/pi
    z = sample_gaussian_weight(200_000, 2, 2).points
    mean, err = monte_carlo_mean(np.sum(np.abs(z) ** 2, axis=1))
    assert abs(mean - 2.0 / math.pi) < 5 * err


def test_fubini_study_density():
    # for d=1, P(|z|^2 < 1) = 1/2 under (1+|z|^2)^{-2} dz / pi
    z = sample_fubini_study(100_000, 4, 1).points
    mean, err = monte_carlo_mean((np.abs(z[:, 0]) ** 2 < 1.0).astype(float))
    assert abs(mean - 0.5) < 5 * err


def test_running_moments_match_batch_statistics():
    values = make_generator(9).standard_normal(1000)
    moments = RunningMoments()
    for chunk in np.array_split(values, 7):
        moments.update(chunk)
    mean, err = monte_carlo_mean(values)
    assert float(moments.mean()) == approx(mean)
    assert float(moments.stderr()) == approx(err)


def test_monte_carlo_mean_rejects_empty_sample():
    with raises(DomainError):
        monte_carlo_mean(np.array([]))
    with raises(DomainError):
        sample_sphere(0, 1, 2)
