#!/usr/bin/env python3
"""
Homogeneous and affine polynomial spaces with the Bombieri inner product

Coefficients are stored densely, indexed by the lexicographic enumeration of
multi-indices with the first entry descending, so zeta_1^N sits at index 0.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space
from scipy.special import gammaln

from .constants import EVAL_BLOCK_ELEMENTS, MAX_BASIS_SIZE, UNIT_TOL
from .errors import DomainError, ShapeError

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]


def basis_size(d: int, N: int) -> int:
    """Dimension binom(N+d, d) of the degree-N homogeneous space in d+1 variables"""
    return math.comb(N + d, d)


@lru_cache(maxsize=1024)
def _enumerate(parts: int, total: int) -> Tuple[MultiIndex, ...]:
    if parts == 1:
        return ((total,),)
    out = []
    for first in range(total, -1, -1):
        for rest in _enumerate(parts - 1, total - first):
            out.append((first,) + rest)
    return tuple(out)


def _check_dims(d: int, N: int, min_degree: int = 0) -> None:
    if int(d) != d or d < 1:
        raise ShapeError(f"Invalid dimension d={d} (must be an integer >= 1)")
    if int(N) != N or N < min_degree:
        raise ShapeError(f"Invalid degree N={N} (must be an integer >= {min_degree})")


def enumerate_multiindices(d: int, N: int) -> List[MultiIndex]:
    """Enumerate all alpha in N_0^{d+1} with |alpha| = N

    Args:
        d: Dimension (the polynomials have d+1 variables)
        N: Degree

    Returns:
        List of tuples, lexicographically descending (zeta_1^N first)

    Raises:
        ShapeError: If the basis would exceed MAX_BASIS_SIZE entries
    """
    _check_dims(d, N)
    size = basis_size(d, N)
    if size > MAX_BASIS_SIZE:
        raise ShapeError(f"Basis of size {size} for (d={d}, N={N}) exceeds {MAX_BASIS_SIZE}")
    return list(_enumerate(d + 1, N))


def enumerate_affine_indices(d: int, N: int) -> List[MultiIndex]:
    """Affine multi-indices beta in N_0^d with |beta| <= N, in homogeneous order"""
    return [alpha[1:] for alpha in enumerate_multiindices(d, N)]


@lru_cache(maxsize=64)
def _exponents(d: int, N: int) -> np.ndarray:
    exps = np.array(enumerate_multiindices(d, N), dtype=np.int64).reshape(-1, d + 1)
    exps.setflags(write=False)
    return exps


def exponent_matrix(d: int, N: int) -> np.ndarray:
    """Read-only (dim, d+1) array of the enumerated multi-indices"""
    return _exponents(d, N)


@lru_cache(maxsize=64)
def _weights(d: int, N: int) -> np.ndarray:
    """alpha!/N! for every basis index (squared Bombieri norm of zeta^alpha)"""
    exps = _exponents(d, N)
    w = np.exp(gammaln(exps + 1).sum(axis=1) - gammaln(N + 1))
    w.setflags(write=False)
    return w


@lru_cache(maxsize=64)
def _index_map(d: int, N: int) -> Dict[MultiIndex, int]:
    return {alpha: i for i, alpha in enumerate(_enumerate(d + 1, N))}


@lru_cache(maxsize=64)
def _key_table(d: int, N: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    base = (N + 1) ** np.arange(d + 1, dtype=np.int64)
    keys = _exponents(d, N) @ base
    order = np.argsort(keys)
    return base, keys[order], order


def _lookup(d: int, N: int, exps: np.ndarray) -> np.ndarray:
    """Basis indices of an array of exponent vectors of total degree N"""
    base, sorted_keys, order = _key_table(d, N)
    return order[np.searchsorted(sorted_keys, exps @ base)]


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """Point of the unit sphere in C^{d+1}"""

    ambient: np.ndarray

    def __post_init__(self):
        vec = np.array(self.ambient, dtype=complex).reshape(-1)
        if vec.size < 2:
            raise ShapeError(f"Sphere point needs at least 2 components, got {vec.size}")
        if abs(np.linalg.norm(vec) - 1.0) > UNIT_TOL:
            raise DomainError(f"Point is not on the unit sphere (|zeta| = {np.linalg.norm(vec):.15g})")
        vec.setflags(write=False)
        object.__setattr__(self, 'ambient', vec)

    @property
    def d(self) -> int:
        return self.ambient.size - 1

    @classmethod
    def from_coords(cls, rho: Sequence[float], theta: Sequence[float]) -> 'SpherePoint':
        """Build a point from the (rho, theta) parametrization"""
        rho = np.asarray(rho, dtype=float).reshape(1, -1)
        theta = np.asarray(theta, dtype=float).reshape(1, -1)
        return cls(zeta_from_coords(rho, theta)[0])

    @property
    def coords(self) -> Tuple[np.ndarray, np.ndarray]:
        """(rho, theta) with rho in [0,1]^d and theta in [0, 2pi)^{d+1}"""
        mod2 = np.abs(self.ambient) ** 2
        rho = np.zeros(self.d)
        prefix = 1.0
        for j in range(self.d):
            rho[j] = 0.0 if prefix <= 0.0 else min(max(1.0 - mod2[j] / prefix, 0.0), 1.0)
            prefix *= rho[j]
        theta = np.mod(np.angle(self.ambient), 2 * np.pi)
        return rho, theta


def zeta_from_coords(rho: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Vectorized parametrization: rho (m, d), theta (m, d+1) -> points (m, d+1)"""
    rho = np.atleast_2d(np.asarray(rho, dtype=float))
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    m, d = rho.shape
    if theta.shape != (m, d + 1):
        raise ShapeError(f"theta must have shape {(m, d + 1)}, got {theta.shape}")
    mod2 = np.empty((m, d + 1))
    prefix = np.ones(m)
    for j in range(d):
        mod2[:, j] = prefix * (1.0 - rho[:, j])
        prefix = prefix * rho[:, j]
    mod2[:, d] = prefix
    return np.sqrt(np.clip(mod2, 0.0, None)) * np.exp(1j * theta)


PointLike = Union[SpherePoint, Sequence[complex], np.ndarray]


def as_points(zeta: PointLike, d: int) -> Tuple[np.ndarray, bool]:
    """Coerce a point or an array of points to shape (m, d+1)

    Returns:
        (points, single) where single tells whether one point was passed
    """
    arr = zeta.ambient if isinstance(zeta, SpherePoint) else np.asarray(zeta, dtype=complex)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr).astype(complex, copy=False)
    if arr.ndim != 2 or arr.shape[1] != d + 1:
        raise ShapeError(f"Points must have {d + 1} components, got shape {arr.shape}")
    return arr, single


def unit_vector(eta: PointLike) -> np.ndarray:
    """Validate and return a unit vector as a flat complex array"""
    vec = eta.ambient if isinstance(eta, SpherePoint) else np.asarray(eta, dtype=complex).reshape(-1)
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > UNIT_TOL:
        raise DomainError(f"Expected a unit vector, got |eta| = {norm:.15g}")
    return vec


def monomials(points: np.ndarray, d: int, N: int) -> np.ndarray:
    """Evaluate every degree-N monomial at points of shape (m, d+1) -> (m, dim)"""
    m = points.shape[0]
    exps = _exponents(d, N)
    powers = np.empty((m, d + 1, N + 1), dtype=complex)
    powers[:, :, 0] = 1.0
    for k in range(1, N + 1):
        powers[:, :, k] = powers[:, :, k - 1] * points
    out = np.ones((m, exps.shape[0]), dtype=complex)
    for j in range(d + 1):
        out *= powers[:, j, exps[:, j]]
    return out


def orthonormal_monomials(points: np.ndarray, d: int, N: int) -> np.ndarray:
    """Evaluate the orthonormal basis (N!/alpha!)^{1/2} zeta^alpha -> (m, dim)"""
    return monomials(points, d, N) / np.sqrt(_weights(d, N))


def _evaluate_coeffs(coeffs: np.ndarray, points: np.ndarray, d: int, N: int) -> np.ndarray:
    dim = basis_size(d, N)
    rows = max(1, EVAL_BLOCK_ELEMENTS // dim)
    out_shape = (points.shape[0],) + coeffs.shape[1:]
    out = np.empty(out_shape, dtype=complex)
    for start in range(0, points.shape[0], rows):
        block = points[start:start + rows]
        out[start:start + rows] = monomials(block, d, N) @ coeffs
    return out


@dataclass(frozen=True, eq=False)
class HomPoly:
    """Homogeneous polynomial of degree N in d+1 complex variables"""

    d: int
    N: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_dims(self.d, self.N, min_degree=1)
        arr = np.array(self.coeffs, dtype=complex).reshape(-1)
        expected = basis_size(self.d, self.N)
        if arr.size != expected:
            raise ShapeError(f"Expected {expected} coefficients for (d={self.d}, N={self.N}), got {arr.size}")
        arr.setflags(write=False)
        object.__setattr__(self, 'd', int(self.d))
        object.__setattr__(self, 'N', int(self.N))
        object.__setattr__(self, 'coeffs', arr)

    @classmethod
    def from_terms(cls, d: int, N: int, terms: Mapping[Sequence[int], complex]) -> 'HomPoly':
        """Sparse constructor from a map alpha -> coefficient"""
        _check_dims(d, N, min_degree=1)
        index = _index_map(d, N)
        coeffs = np.zeros(basis_size(d, N), dtype=complex)
        for alpha, value in terms.items():
            key = tuple(int(a) for a in alpha)
            if len(key) != d + 1:
                raise ShapeError(f"Multi-index {key} has length {len(key)}, expected {d + 1}")
            if min(key) < 0 or sum(key) != N:
                raise ShapeError(f"Multi-index {key} does not have degree {N}")
            coeffs[index[key]] += complex(value)
        return cls(d, N, coeffs)

    @classmethod
    def monomial(cls, d: int, N: int, alpha: Sequence[int], coef: complex = 1.0) -> 'HomPoly':
        return cls.from_terms(d, N, {tuple(alpha): coef})

    @classmethod
    def from_orthonormal(cls, d: int, N: int, coords: np.ndarray) -> 'HomPoly':
        """Build from coordinates in the orthonormal monomial basis"""
        _check_dims(d, N, min_degree=1)
        return cls(d, N, np.asarray(coords, dtype=complex) / np.sqrt(_weights(d, N)))

    def orthonormal_coords(self) -> np.ndarray:
        return self.coeffs * np.sqrt(_weights(self.d, self.N))

    def terms(self) -> Dict[MultiIndex, complex]:
        """Non-zero coefficients as a map alpha -> a_alpha"""
        alphas = _enumerate(self.d + 1, self.N)
        return {alphas[i]: complex(self.coeffs[i]) for i in np.flatnonzero(self.coeffs)}

    def norm(self) -> float:
        return float(np.sqrt(np.real(bombieri_inner(self, self))))

    def normalized(self) -> 'HomPoly':
        norm = self.norm()
        if norm == 0.0:
            raise DomainError("Cannot normalize the zero polynomial")
        return HomPoly(self.d, self.N, self.coeffs / norm)

    def evaluate(self, zeta: PointLike) -> Union[complex, np.ndarray]:
        return evaluate(self, zeta)

    __call__ = evaluate

    def _check_same(self, other: 'HomPoly') -> None:
        if not isinstance(other, HomPoly) or (self.d, self.N) != (other.d, other.N):
            raise ShapeError("Polynomials must share dimension and degree")

    def __add__(self, other: 'HomPoly') -> 'HomPoly':
        self._check_same(other)
        return HomPoly(self.d, self.N, self.coeffs + other.coeffs)

    def __sub__(self, other: 'HomPoly') -> 'HomPoly':
        self._check_same(other)
        return HomPoly(self.d, self.N, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> 'HomPoly':
        return HomPoly(self.d, self.N, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> 'HomPoly':
        return HomPoly(self.d, self.N, self.coeffs / complex(scalar))

    def __neg__(self) -> 'HomPoly':
        return HomPoly(self.d, self.N, -self.coeffs)

    def __repr__(self) -> str:
        return f"HomPoly(d={self.d}, N={self.N}, terms={len(np.flatnonzero(self.coeffs))})"


def bombieri_inner(P: HomPoly, Q: HomPoly) -> complex:
    """Inner product sum_alpha (alpha!/N!) a_alpha conj(b_alpha)

    Raises:
        ShapeError: If P and Q differ in dimension or degree
    """
    if (P.d, P.N) != (Q.d, Q.N):
        raise ShapeError(f"Shape mismatch: (d={P.d}, N={P.N}) vs (d={Q.d}, N={Q.N})")
    return complex(np.sum(_weights(P.d, P.N) * P.coeffs * np.conj(Q.coeffs)))


def evaluate(Q: HomPoly, zeta: PointLike) -> Union[complex, np.ndarray]:
    """Evaluate Q at one point (returns complex) or at an (m, d+1) array"""
    points, single = as_points(zeta, Q.d)
    values = _evaluate_coeffs(Q.coeffs, points, Q.d, Q.N)
    return complex(values[0]) if single else values


@lru_cache(maxsize=32)
def _derivative_maps(d: int, N: int) -> Tuple[Tuple[np.ndarray, np.ndarray, np.ndarray], ...]:
    """Per variable j: (source, target, factor) with dQ/dzeta_j[target] = factor * a[source]"""
    exps = _exponents(d, N)
    maps = []
    for j in range(d + 1):
        src = np.flatnonzero(exps[:, j] > 0)
        lowered = exps[src].copy()
        lowered[:, j] -= 1
        maps.append((src, _lookup(d, N - 1, lowered), exps[src, j].astype(float)))
    return tuple(maps)


def gradient(Q: HomPoly, zeta: PointLike) -> np.ndarray:
    """Holomorphic partials dQ/dzeta_j at points -> (m, d+1) (or (d+1,) for one point)"""
    points, single = as_points(zeta, Q.d)
    partial_coeffs = np.zeros((basis_size(Q.d, Q.N - 1), Q.d + 1), dtype=complex)
    for j, (src, dst, factor) in enumerate(_derivative_maps(Q.d, Q.N)):
        partial_coeffs[dst, j] = factor * Q.coeffs[src]
    grads = _evaluate_coeffs(partial_coeffs, points, Q.d, Q.N - 1)
    return grads[0] if single else grads


def reproducing_kernel(N: int, eta: PointLike) -> HomPoly:
    """K_N(., eta) = (zeta . conj(eta))^N

    Raises:
        DomainError: If eta is not a unit vector
    """
    vec = unit_vector(eta)
    d = vec.size - 1
    _check_dims(d, N, min_degree=1)
    mono = monomials(np.conj(vec)[None, :], d, N)[0]
    return HomPoly(d, N, mono / _weights(d, N))


def _check_unitary(R: np.ndarray, n: int) -> np.ndarray:
    R = np.asarray(R, dtype=complex)
    if R.shape != (n, n):
        raise ShapeError(f"Rotation must be {n}x{n}, got {R.shape}")
    defect = np.max(np.abs(R.conj().T @ R - np.eye(n)))
    if defect > UNIT_TOL:
        raise DomainError(f"Matrix is not unitary (max |R*R - I| = {defect:.3g})")
    return R


def _plane_factors(M: np.ndarray) -> Tuple[List[Tuple[int, int, np.ndarray]], np.ndarray]:
    """Factor a unitary M = G_1 ... G_k diag(phases) into plane rotations

    Each factor (i, j, g) acts as the 2x2 unitary g on coordinates i < j.
    """
    work = np.array(M, dtype=complex)
    n = work.shape[0]
    factors = []
    for c in range(n - 1):
        for j in range(c + 1, n):
            a, b = work[c, c], work[j, c]
            if abs(b) < 1e-15:
                continue
            r = math.hypot(abs(a), abs(b))
            h = np.array([[np.conj(a), np.conj(b)], [-b, a]]) / r
            work[[c, j]] = h @ work[[c, j]]
            factors.append((c, j, h.conj().T))
    return factors, np.diag(work).copy()


@lru_cache(maxsize=32)
def _pair_table(d: int, N: int, i: int, j: int) -> Tuple[np.ndarray, ...]:
    """Entry k: basis indices idx[r, p] of the monomials with alpha_i = p, alpha_j = k - p"""
    exps = _exponents(d, N)
    tables = []
    for k in range(N + 1):
        rests = exps[(exps[:, i] == k) & (exps[:, j] == 0)]
        p = np.arange(k + 1)
        grid = np.repeat(rests[:, None, :], k + 1, axis=1)
        grid[:, :, i] = p[None, :]
        grid[:, :, j] = k - p[None, :]
        idx = _lookup(d, N, grid.reshape(-1, d + 1)).reshape(-1, k + 1)
        idx.setflags(write=False)
        tables.append(idx)
    return tuple(tables)


def _linear_powers(u: complex, v: complex, N: int) -> List[np.ndarray]:
    """Coefficients of (u + v y)^m in ascending powers of y, m = 0..N"""
    step = np.array([u, v], dtype=complex)
    out = [np.ones(1, dtype=complex)]
    for _ in range(N):
        out.append(np.convolve(out[-1], step))
    return out


def _substitute_pair(coeffs: np.ndarray, d: int, N: int, i: int, j: int, g: np.ndarray) -> np.ndarray:
    """Coefficients of Q(G zeta) where G acts as g on (zeta_i, zeta_j)"""
    first = _linear_powers(g[0, 0], g[0, 1], N)
    second = _linear_powers(g[1, 0], g[1, 1], N)
    out = np.empty_like(coeffs)
    for k, idx in enumerate(_pair_table(d, N, i, j)):
        if idx.shape[0] == 0:
            continue
        # row p: (g00 zi + g01 zj)^p (g10 zi + g11 zj)^(k-p), column s: power of zj
        B = np.array([np.convolve(first[p], second[k - p]) for p in range(k + 1)])
        out[idx] = np.einsum('rp...,pq->rq...', coeffs[idx], B[:, ::-1])
    return out


def _substitute(coeffs: np.ndarray, d: int, N: int, M: np.ndarray) -> np.ndarray:
    """Coefficients of Q(M zeta) for unitary M; coeffs may carry trailing columns"""
    factors, phases = _plane_factors(M)
    out = np.asarray(coeffs, dtype=complex)
    for i, j, g in factors:
        out = _substitute_pair(out, d, N, i, j, g)
    scale = np.prod(phases[None, :] ** _exponents(d, N), axis=1)
    return out * scale.reshape((-1,) + (1,) * (out.ndim - 1))


def rotate(Q: HomPoly, R: np.ndarray) -> HomPoly:
    """pi(R) Q (zeta) = Q(R^{-1} zeta), expanded exactly

    Raises:
        DomainError: If R is not unitary within UNIT_TOL
    """
    R = _check_unitary(R, Q.d + 1)
    if not np.any(Q.coeffs):
        return Q
    return HomPoly(Q.d, Q.N, _substitute(Q.coeffs, Q.d, Q.N, R.conj().T))


def rotation_matrix(d: int, N: int, R: np.ndarray) -> np.ndarray:
    """Matrix of pi(R) in the orthonormal monomial basis (unitary)"""
    _check_dims(d, N, min_degree=1)
    R = _check_unitary(R, d + 1)
    sqrt_w = np.sqrt(_weights(d, N))
    images = _substitute(np.eye(basis_size(d, N), dtype=complex), d, N, R.conj().T)
    return sqrt_w[:, None] * images / sqrt_w[None, :]


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR factorization of a complex Gaussian matrix"""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    Qm, Rm = np.linalg.qr(Z)
    diag = np.diag(Rm)
    return Qm * (diag / np.abs(diag))


def random_sphere_point(d: int, rng: np.random.Generator) -> np.ndarray:
    vec = rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)
    return vec / np.linalg.norm(vec)


def random_polynomial(d: int, N: int, rng: np.random.Generator) -> HomPoly:
    """Unit-norm polynomial with i.i.d. complex Gaussian orthonormal coordinates"""
    dim = basis_size(d, N)
    coords = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return HomPoly.from_orthonormal(d, N, coords / np.linalg.norm(coords))


def unitary_to_pole(eta: PointLike) -> np.ndarray:
    """Unitary R with R eta = e_1"""
    vec = unit_vector(eta)
    complement = null_space(np.conj(vec)[None, :])
    return np.vstack([np.conj(vec)[None, :], complement.conj().T])


@dataclass(frozen=True, eq=False)
class AffinePoly:
    """Polynomial of degree <= N in d complex variables (affine chart zeta_1 = 1)

    Coefficients follow enumerate_affine_indices(d, N), which is the
    homogeneous order with the first exponent dropped.
    """

    d: int
    N: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_dims(self.d, self.N, min_degree=1)
        arr = np.array(self.coeffs, dtype=complex).reshape(-1)
        expected = basis_size(self.d, self.N)
        if arr.size != expected:
            raise ShapeError(f"Expected {expected} coefficients for affine (d={self.d}, N={self.N}), got {arr.size}")
        arr.setflags(write=False)
        object.__setattr__(self, 'coeffs', arr)

    @classmethod
    def from_terms(cls, d: int, N: int, terms: Mapping[Sequence[int], complex]) -> 'AffinePoly':
        _check_dims(d, N, min_degree=1)
        index = _index_map(d, N)
        coeffs = np.zeros(basis_size(d, N), dtype=complex)
        for beta, value in terms.items():
            key = tuple(int(b) for b in beta)
            if len(key) != d:
                raise ShapeError(f"Affine multi-index {key} has length {len(key)}, expected {d}")
            if min(key, default=0) < 0 or sum(key) > N:
                raise ShapeError(f"Affine multi-index {key} exceeds degree {N}")
            coeffs[index[(N - sum(key),) + key]] += complex(value)
        return cls(d, N, coeffs)

    def terms(self) -> Dict[MultiIndex, complex]:
        alphas = _enumerate(self.d + 1, self.N)
        return {alphas[i][1:]: complex(self.coeffs[i]) for i in np.flatnonzero(self.coeffs)}

    def evaluate(self, z: Union[Sequence[complex], np.ndarray]) -> Union[complex, np.ndarray]:
        arr = np.asarray(z, dtype=complex)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        if arr.shape[1] != self.d:
            raise ShapeError(f"Affine points must have {self.d} components, got shape {arr.shape}")
        points = np.hstack([np.ones((arr.shape[0], 1), dtype=complex), arr])
        values = _evaluate_coeffs(self.coeffs, points, self.d, self.N)
        return complex(values[0]) if single else values

    __call__ = evaluate

    def norm(self) -> float:
        return from_affine(self).norm()

    def normalized(self) -> 'AffinePoly':
        return to_affine(from_affine(self).normalized())


def to_affine(Q: HomPoly) -> AffinePoly:
    """q(z) = Q(1, z)"""
    return AffinePoly(Q.d, Q.N, Q.coeffs)


def from_affine(q: AffinePoly) -> HomPoly:
    """Homogenize q to degree N"""
    return HomPoly(q.d, q.N, q.coeffs)


def normalized_affine_kernel(N: int, w: Union[Sequence[complex], np.ndarray]) -> AffinePoly:
    """Unit-norm kernel (1 + z.conj(w))^N / (1 + |w|^2)^{N/2}"""
    w = np.asarray(w, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(w)):
        raise DomainError("Kernel center must be finite")
    eta = np.concatenate([[1.0], w]) / np.sqrt(1.0 + np.vdot(w, w).real)
    return to_affine(reproducing_kernel(N, eta))


def embed_affine(f: AffinePoly, N: int, scale: float = 1.0) -> AffinePoly:
    """Re-express f(scale * z) in the degree-N affine space (N >= deg f)"""
    if N < f.N:
        raise ShapeError(f"Target degree {N} is below the degree bound {f.N} of f")
    terms: Dict[MultiIndex, complex] = {}
    for beta, value in f.terms().items():
        terms[beta] = value * scale ** sum(beta)
    return AffinePoly.from_terms(f.d, N, terms)


def fock_rescale(f: AffinePoly, N: int) -> AffinePoly:
    """q^N(z) = f(sqrt(N/pi) z) in the degree-N space"""
    return embed_affine(f, N, math.sqrt(N / math.pi))


def affine_from_coeff_map(d: int, N: int, terms: Optional[Mapping[Sequence[int], complex]] = None) -> AffinePoly:
    """Affine polynomial from a sparse map, defaulting to the constant 1"""
    return AffinePoly.from_terms(d, N, terms if terms is not None else {(0,) * d: 1.0})
