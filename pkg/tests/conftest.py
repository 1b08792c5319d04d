"""
Shared fixtures: seeded generators and small unit-norm polynomials
"""

import pytest

from wehrl.polyspace import HomPoly, random_polynomial, random_sphere_point, reproducing_kernel
from wehrl.quadrature import make_generator


@pytest.fixture
def rng():
    return make_generator(20240611)


@pytest.fixture
def pole_kernel():
    """zeta_1^N for d=2, N=4"""
    return HomPoly.monomial(2, 4, (4, 0, 0))


@pytest.fixture
def random_kernel(rng):
    return reproducing_kernel(4, random_sphere_point(2, rng))


@pytest.fixture
def random_polys(rng):
    """Five unit-norm random polynomials for each (d, N) in a small grid"""
    return {(d, N): [random_polynomial(d, N, rng) for _ in range(5)] for d in (1, 2) for N in (2, 4)}
