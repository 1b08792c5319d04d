"""
Tests for wehrl/functionals.py
"""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis.strategies import floats, integers
from pytest import approx, mark, raises

from wehrl.errors import ConfigError, DomainError
from wehrl.functionals import (Cap, CapComplement, ConvexFn, Indicator, Superlevel, affine_ball_region,
                               affine_concentration, affine_distance, affine_entropy, alpha_coefficient, cap_measure,
                               cap_threshold, cap_union, concentration, concentration_deficit, distance_to_kernels,
                               entropy_deficit, extremal_concentration, extremal_entropy, fraenkel_asymmetry,
                               optimal_concentration, parse_phi, region_concentration_deficit, require_unit,
                               stability_coefficient, sup_modulus, wehrl_entropy)
from wehrl.polyspace import HomPoly, normalized_affine_kernel, random_polynomial, random_sphere_point, to_affine
from wehrl.quadrature import make_generator


def pole(d):
    center = np.zeros(d + 1, dtype=complex)
    center[0] = 1.0
    return center


@mark.parametrize("text name".split(), [
    ("linear", "linear"),
    ("linear:2,1", "linear:2,1"),
    ("xlogx", "xlogx"),
    ("power:2", "power:2"),
    (" hinge:0.3 ", "hinge:0.3"),
])
def test_parse_phi(text, name):
    assert parse_phi(text).name == name


@mark.parametrize("text", ["power:0.5", "hinge:1.5", "hinge", "cubic", "linear:1", "xlogx:2"])
def test_parse_phi_rejects(text):
    with raises(ConfigError) as e:
        parse_phi(text)
    assert e.value.field == "phi"


def test_concave_phi_is_rejected():
    with raises(DomainError):
        ConvexFn.custom(np.sqrt, lambda t: 0.5 / np.sqrt(t))


@given(integers(1, 12), integers(1, 4), floats(0.01, 0.99))
@settings(max_examples=50)
def test_cap_threshold_inverts_cap_measure(N, d, omega):
    assert cap_measure(N, d, cap_threshold(N, d, omega)) == approx(omega, rel=1e-9)


@mark.parametrize("d N omega".split(), [(1, 3, 0.2), (2, 4, 0.1), (3, 6, 0.5)])
def test_extremal_concentration_on_pole_cap(d, N, omega):
    Q = HomPoly.monomial(d, N, (N,) + (0,) * d)
    cap = Cap(pole(d), cap_threshold(N, d, omega), N)
    result = concentration(Q, cap)
    assert result.exact
    assert result.value == approx(extremal_concentration(N, d, omega), abs=1e-12)


def test_cap_concentration_is_at_most_extremal(random_polys):
    rng = make_generator(11)
    for (d, N), polys in random_polys.items():
        for Q in polys:
            for omega in (0.05, 0.3, 0.7):
                cap = Cap(random_sphere_point(d, rng), cap_threshold(N, d, omega), N)
                assert concentration(Q, cap).value <= extremal_concentration(N, d, omega) + 1e-12


def test_cap_concentration_matches_monte_carlo(random_polys):
    Q = random_polys[(2, 4)][0]
    cap = Cap(random_sphere_point(2, make_generator(12)), cap_threshold(4, 2, 0.2), 4)
    exact = concentration(Q, cap).value
    mc = concentration(Q, Indicator(cap.contains, 2, cap.measure()), n=100_000, seed=12)
    assert mc.stderr is not None
    assert abs(mc.value - exact) <= 5 * mc.stderr


def test_cap_complement_concentration(random_polys):
    Q = random_polys[(1, 4)][1]
    cap = Cap(random_sphere_point(1, make_generator(13)), 0.1, 4)
    outside = concentration(Q, CapComplement(cap.center, cap.t, cap.N))
    assert outside.value == approx(1.0 - concentration(Q, cap).value, abs=1e-12)
    assert cap_union([cap], complement=True).measure() == approx(1.0 - cap.measure())
    assert cap_union([cap]) is cap


def test_declared_measure_is_checked():
    cap = Cap(pole(2), 0.2, 3)
    region = Indicator(cap.contains, 2, cap.measure() + 0.1, samples=20_000)
    with raises(DomainError):
        region.check_measure()


def test_wrong_declared_measure_is_rejected_on_use():
    cap = Cap(pole(2), cap_threshold(3, 2, 0.1724), 3)
    Q = HomPoly.monomial(2, 3, (3, 0, 0))
    with raises(DomainError):
        concentration(Q, Indicator(cap.contains, 2, cap.measure() + 0.3, samples=20_000))
    with raises(DomainError):
        Indicator(cap.contains, 2, cap.measure() + 0.3, samples=20_000).measure()
    honest = Indicator(cap.contains, 2, cap.measure(), samples=20_000)
    assert honest.measure() == cap.measure()


def test_optimal_concentration_dominates_caps(random_polys):
    Q = random_polys[(2, 2)][2]
    sup = sup_modulus(Q, 14)
    best = optimal_concentration(Q, 0.2, n=100_000, seed=14)
    cap = concentration(Q, Cap(sup.argmax, cap_threshold(2, 2, 0.2), 2))
    assert best.value >= cap.value - 5 * best.stderr
    assert best.value <= extremal_concentration(2, 2, 0.2) + 5 * best.stderr
    via_region = concentration(Q, Superlevel(Q, 0.2), n=100_000, seed=14)
    assert via_region.functional == "optimal_concentration"


def test_region_dimension_mismatch(pole_kernel):
    with raises(DomainError):
        concentration(pole_kernel, Cap(pole(1), 0.3, 4))


def test_require_unit(pole_kernel):
    require_unit(pole_kernel)
    with raises(DomainError):
        require_unit(pole_kernel * 2.0)
    with raises(DomainError):
        sup_modulus(pole_kernel * 2.0)


@mark.parametrize("phi_text", ["power:2", "power:3"])
def test_kernel_entropy_is_extremal(random_kernel, phi_text):
    phi = parse_phi(phi_text)
    result = wehrl_entropy(random_kernel, phi)
    assert result.exact
    assert result.value == approx(extremal_entropy(4, 2, phi), rel=1e-10)


def test_pole_kernel_xlogx_entropy(pole_kernel):
    phi = parse_phi("xlogx")
    assert wehrl_entropy(pole_kernel, phi).value == approx(extremal_entropy(4, 2, phi), rel=1e-5)


@mark.parametrize("N", [1, 2, 5, 10])
def test_extremal_xlogx_entropy_for_d1(N):
    assert extremal_entropy(N, 1, parse_phi("xlogx")) == approx(N / (N + 1), rel=1e-9)


def test_linear_entropy_is_closed_form(random_polys):
    Q = random_polys[(2, 4)][0]
    result = wehrl_entropy(Q, parse_phi("linear:2,1"))
    assert result.value == -2.0 - math.comb(6, 2)
    assert result.extras["method"] == "exact"
    assert extremal_entropy(4, 2, parse_phi("linear:2,1")) == result.value


def test_entropy_is_minimized_by_kernels(random_polys):
    for phi_text in ("power:2", "xlogx"):
        phi = parse_phi(phi_text)
        for (d, N), polys in random_polys.items():
            for Q in polys:
                assert wehrl_entropy(Q, phi).value >= extremal_entropy(N, d, phi) - 1e-6


def test_hinge_entropy_uses_monte_carlo(random_polys):
    Q = random_polys[(1, 2)][0]
    result = wehrl_entropy(Q, parse_phi("hinge:0.3"), n=20_000, seed=15)
    assert result.extras["method"] == "mc"
    assert result.stderr > 0


def test_kernel_distance_vanishes(random_kernel):
    sup = sup_modulus(random_kernel, 16)
    assert sup.T == approx(1.0, abs=1e-10)
    assert abs(abs(np.vdot(sup.argmax, sup.argmax)) - 1.0) < 1e-10
    assert distance_to_kernels(random_kernel, 16, sup=sup).value == approx(0.0, abs=1e-4)


def test_distance_identity(random_polys):
    for (d, N), polys in random_polys.items():
        result = distance_to_kernels(polys[0], 17, cross_check=True)
        assert 0.0 < result.value <= math.sqrt(2.0)
        assert result.extras["identity_gap"] <= 1e-6


def test_sup_is_attained_among_samples(random_polys):
    Q = random_polys[(2, 4)][3]
    sup = sup_modulus(Q, 18)
    points = np.array([random_sphere_point(2, make_generator(18 + k)) for k in range(2000)])
    assert np.max(np.abs(Q(points)) ** 2) <= sup.T + 1e-9


def test_coefficients_need_omega_below_omega_tilde():
    assert stability_coefficient(0.1, 4, 2, 0.3) > 0
    assert alpha_coefficient(0.1, 4, 2, 0.3) > 0
    with raises(DomainError):
        stability_coefficient(0.3, 4, 2, 0.3)
    with raises(DomainError):
        alpha_coefficient(0.5, 4, 2, 0.3)
    with raises(DomainError):
        stability_coefficient(0.1, 4, 2, 1.5)


def test_kernel_deficits_vanish(random_kernel):
    conc = concentration_deficit(random_kernel, 0.2, n=20_000, seed=19)
    assert conc.value == approx(0.0, abs=1e-6)
    assert conc.D2 == approx(0.0, abs=1e-8)
    ent = entropy_deficit(random_kernel, parse_phi("power:2"), seed=19)
    assert ent.value == approx(0.0, abs=1e-8)
    assert ent.stderr is None


def test_linear_entropy_deficit_is_rejected(random_kernel):
    with raises(DomainError):
        entropy_deficit(random_kernel, parse_phi("linear"))


def test_random_deficits_are_non_negative(random_polys):
    Q = random_polys[(2, 4)][1]
    conc = concentration_deficit(Q, 0.2, n=50_000, seed=20)
    assert conc.value >= -4 * conc.stderr
    assert conc.D2 > 0
    assert entropy_deficit(Q, parse_phi("power:2"), seed=20).value > 0
    cap = Cap(random_sphere_point(2, make_generator(20)), cap_threshold(4, 2, 0.2), 4)
    assert region_concentration_deficit(Q, cap).value >= -1e-12


def test_cap_has_small_asymmetry():
    cap = Cap(random_sphere_point(2, make_generator(21)), cap_threshold(3, 2, 0.3), 3)
    result = fraenkel_asymmetry(cap, n=20_000, seed=21, starts=3)
    assert result.value < 0.1
    assert abs(abs(np.vdot(result.argmax, cap.center)) - 1.0) < 0.05


def test_cap_union_asymmetry_is_large():
    caps = [Cap(pole(1), 0.8, 2), Cap(np.array([0.0, 1.0]), 0.8, 2)]
    region = cap_union(caps, samples=20_000, seed=22)
    assert fraenkel_asymmetry(region, n=20_000, seed=22, starts=3).value > 0.3


@mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_affine_ball_measure(radius):
    assert affine_ball_region(3, 2, radius).measure() == approx((radius ** 2 / (1 + radius ** 2)) ** 2)
    assert affine_ball_region(3, 2, radius, [0.5, -0.5j]).measure() == approx(
        (radius ** 2 / (1 + radius ** 2)) ** 2)


def test_affine_ball_rejects_radius():
    with raises(DomainError):
        affine_ball_region(3, 2, 0.0)


def test_affine_kernel_concentrates_like_the_pole():
    q = normalized_affine_kernel(4, [0.0, 0.0])
    result = affine_concentration(q, 1.0)
    assert result.value == approx(extremal_concentration(4, 2, 0.25), abs=1e-12)


def test_affine_kernel_is_at_distance_zero():
    q = normalized_affine_kernel(5, [0.3, -0.2j])
    assert affine_distance(q, 17).value == approx(0.0, abs=1e-4)


@mark.parametrize("phi_text", ["power:2", "xlogx"])
def test_affine_entropy_agrees_with_homogenization(random_polys, phi_text):
    phi = parse_phi(phi_text)
    Q = random_polys[(2, 4)][3]
    q = to_affine(Q)
    assert affine_entropy(q, phi).value == approx(wehrl_entropy(Q, phi).value, rel=1e-12)


def test_affine_kernel_entropy_is_extremal():
    phi = parse_phi("power:2")
    kernel = normalized_affine_kernel(4, [0.7j, 0.2])
    assert affine_entropy(kernel, phi).value == approx(extremal_entropy(4, 2, phi), rel=1e-10)


@mark.slow
@mark.parametrize("d N".split(), [(1, 6), (2, 6)])
def test_distance_identity_at_scale(d, N):
    rng = make_generator(23)
    for k in range(50):
        Q = random_polynomial(d, N, rng)
        assert distance_to_kernels(Q, k, cross_check=True).extras["identity_gap"] <= 1e-6
