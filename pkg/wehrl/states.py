#!/usr/bin/env python3
"""
Density states on the degree-N polynomial space, Husimi functions and
operator versions of the entropy, concentration and distance functionals

Matrices are written in the orthonormal monomial basis (N!/alpha!)^{1/2} zeta^alpha
with the polyspace ordering.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .constants import (DEFAULT_RULE_DEGREE, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_WORKERS, EIGEN_CLIP_TOL,
                        SUP_MC_POOL, UNIT_TOL)
from .errors import ConvergenceError, DomainError, ShapeError
from .functionals import (Cap, CapComplement, ConvexFn, FunctionalResult, Region, cap_concentration,
                          entropy_rule_degree, extremal_concentration, require_unit, sup_modulus, top_mass_terms)
from .levelsets import from_values
from .polyspace import (HomPoly, PointLike, as_points, basis_size, orthonormal_monomials, random_sphere_point,
                        rotation_matrix, unit_vector, unitary_to_pole)
from .quadrature import (STREAM_SPHERE, STREAM_STARTS, build_sphere_rule, integrate_sphere, make_generator,
                         map_sphere_chunks, sphere_mean)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DensityState:
    """Positive semidefinite unit-trace operator with a cached eigendecomposition"""

    d: int
    N: int
    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dim = basis_size(self.d, self.N)
        rho = np.array(self.matrix, dtype=complex)
        if rho.shape != (dim, dim):
            raise ShapeError(f"State matrix must be {dim}x{dim} for (d={self.d}, N={self.N}), got {rho.shape}")
        asym = np.max(np.abs(rho - rho.conj().T))
        if asym > UNIT_TOL:
            raise DomainError(f"State matrix is not Hermitian (max |rho - rho*| = {asym:.3g})")
        rho = 0.5 * (rho + rho.conj().T)
        trace = np.trace(rho).real
        if abs(trace - 1.0) > UNIT_TOL:
            raise DomainError(f"State trace {trace:.15g} out of range (must be 1)")
        eigenvalues, eigenvectors = np.linalg.eigh(rho)
        lowest = eigenvalues.min()
        if lowest < -EIGEN_CLIP_TOL:
            raise DomainError(f"State has a negative eigenvalue {lowest:.3g}")
        if lowest < 0.0:
            logger.warning(f"Clipping negative eigenvalue(s) down to {lowest:.3g}")
            eigenvalues = np.clip(eigenvalues, 0.0, None)
        rho.setflags(write=False)
        object.__setattr__(self, 'matrix', rho)
        object.__setattr__(self, 'eigenvalues', eigenvalues)
        object.__setattr__(self, 'eigenvectors', eigenvectors)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.eigenvalues > EIGEN_CLIP_TOL))

    def components(self) -> List[Tuple[float, HomPoly]]:
        """(lambda_j, Q_j) for the non-zero eigenvalues, Q_j of unit norm"""
        out = []
        for lam, vec in zip(self.eigenvalues[::-1], self.eigenvectors.T[::-1]):
            if lam > EIGEN_CLIP_TOL:
                out.append((float(lam), HomPoly.from_orthonormal(self.d, self.N, vec)))
        return out


def pure_state(Q: HomPoly) -> DensityState:
    """Rank-1 state |Q><Q| of a unit-norm polynomial"""
    require_unit(Q)
    c = Q.orthonormal_coords()
    return DensityState(Q.d, Q.N, np.outer(c, np.conj(c)))


def coherent_state(N: int, eta: PointLike) -> DensityState:
    """Projector pi_eta with entries conj(e_alpha(eta)) e_beta(eta)"""
    vec = unit_vector(eta)
    d = vec.size - 1
    e = orthonormal_monomials(vec[None, :], d, N)[0]
    return DensityState(d, N, np.outer(np.conj(e), e))


def maximally_mixed(d: int, N: int) -> DensityState:
    dim = basis_size(d, N)
    return DensityState(d, N, np.eye(dim) / dim)


def mixture(states: Sequence[DensityState], weights: Sequence[float]) -> DensityState:
    """Convex combination sum_k w_k rho_k"""
    weights = np.asarray(weights, dtype=float)
    if len(states) == 0 or len(states) != weights.size:
        raise ShapeError("Need one weight per state")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > UNIT_TOL:
        raise DomainError("Mixture weights must be non-negative and sum to 1")
    d, N = states[0].d, states[0].N
    if any((s.d, s.N) != (d, N) for s in states):
        raise ShapeError("Mixed states must share dimension and degree")
    return DensityState(d, N, sum(w * s.matrix for w, s in zip(weights, states)))


def random_state(d: int, N: int, rank: int, rng: np.random.Generator) -> DensityState:
    """G G* / tr(G G*) for a complex Gaussian dim x rank matrix G"""
    dim = basis_size(d, N)
    if not 1 <= rank <= dim:
        raise DomainError(f"Rank {rank} out of range (must be in [1, {dim}])")
    G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = G @ G.conj().T
    return DensityState(d, N, rho / np.trace(rho).real)


def near_coherent(d: int, N: int, eps: float, rng: np.random.Generator, rank: int = 2) -> DensityState:
    """(1 - eps) pi_eta + eps rho_random for a random center eta"""
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"eps={eps} out of range (must be in [0, 1])")
    eta = random_sphere_point(d, rng)
    return mixture([coherent_state(N, eta), random_state(d, N, rank, rng)], [1.0 - eps, eps])


def conjugate(rho: DensityState, R: np.ndarray) -> DensityState:
    """pi(R) rho pi(R)*"""
    M = rotation_matrix(rho.d, rho.N, R)
    return DensityState(rho.d, rho.N, M @ rho.matrix @ M.conj().T)


def _husimi_values(rho: DensityState, points: np.ndarray) -> np.ndarray:
    V = np.conj(orthonormal_monomials(points, rho.d, rho.N))
    u = np.real(np.sum(np.conj(V) * (V @ rho.matrix.T), axis=1))
    return np.clip(u, 0.0, 1.0)


def husimi(rho: DensityState, zeta: PointLike):
    """u_rho(zeta) = <K_N(., zeta), rho K_N(., zeta)> in [0, 1]"""
    points, single = as_points(zeta, rho.d)
    u = _husimi_values(rho, points)
    return float(u[0]) if single else u


def state_entropy(rho: DensityState, phi: ConvexFn, rule_degree: int = DEFAULT_RULE_DEGREE,
                  n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                  workers: int = DEFAULT_WORKERS) -> FunctionalResult:
    """-binom(N+d, d) int Phi(u_rho) dsigma"""
    dim = rho.dim
    if phi.is_linear:
        a, b = phi.params
        return FunctionalResult("state_entropy", -a - b * dim, None, None, {"phi": phi.name, "method": "exact"})
    degree = entropy_rule_degree(rho.N, rho.d, phi, rule_degree)

    def integrand(points: np.ndarray) -> np.ndarray:
        return phi(_husimi_values(rho, points))

    if degree is not None:
        value = -dim * integrate_sphere(integrand, build_sphere_rule(rho.d, degree))
        return FunctionalResult("state_entropy", value, None, None,
                                {"phi": phi.name, "method": "exact", "rule_degree": degree})
    mean, err = sphere_mean(integrand, n, seed, rho.d, STREAM_SPHERE, workers)
    return FunctionalResult("state_entropy", -dim * float(mean), dim * float(err), None,
                            {"phi": phi.name, "method": "mc"})


def state_concentration(rho: DensityState, region: Region, n: int = DEFAULT_SAMPLES,
                        seed: int = DEFAULT_SEED, workers: int = DEFAULT_WORKERS) -> FunctionalResult:
    """int_Omega u_rho dsigma / int u_rho dsigma

    Caps are exact through the eigendecomposition; other regions use Monte Carlo.
    """
    if region.d != rho.d:
        raise DomainError(f"Region dimension {region.d} does not match d={rho.d}")
    omega = region.measure()
    if not 0.0 < omega < 1.0:
        raise DomainError(f"Region measure {omega} out of range (must be in (0, 1))")
    if isinstance(region, Cap):
        inside = sum(lam * cap_concentration(Q, region) for lam, Q in rho.components())
        value = 1.0 - inside if isinstance(region, CapComplement) else inside
        return FunctionalResult("state_concentration", float(np.clip(value, 0.0, 1.0)), None, None,
                                {"measure": omega, "method": "exact"})

    def integrand(points: np.ndarray) -> np.ndarray:
        return rho.dim * _husimi_values(rho, points) * region.contains(points)

    mean, err = sphere_mean(integrand, n, seed, rho.d, STREAM_SPHERE, workers)
    return FunctionalResult("state_concentration", float(np.clip(mean, 0.0, 1.0)), float(err), None,
                            {"measure": omega, "method": "mc"})


def trace_norm(A: np.ndarray) -> float:
    return float(np.linalg.svd(A, compute_uv=False).sum())


def _unpack(x: np.ndarray, n: int) -> np.ndarray:
    z = x[:n] + 1j * x[n:]
    norm = np.linalg.norm(z)
    return z / norm if norm > 0 else np.eye(n, dtype=complex)[0]


def _husimi_starts(rho: DensityState, seed: int, count: int) -> List[np.ndarray]:
    """Approximate Husimi maximizers: the sup point of the leading eigenpolynomial plus pool maxima"""
    starts = []
    _, leading = rho.components()[0]
    try:
        starts.append(sup_modulus(leading, seed).argmax)
    except ConvergenceError as e:
        starts.append(e.best.argmax)
    rng = make_generator(seed, STREAM_STARTS, 3)
    pool = rng.standard_normal((SUP_MC_POOL, rho.d + 1)) + 1j * rng.standard_normal((SUP_MC_POOL, rho.d + 1))
    pool /= np.linalg.norm(pool, axis=1, keepdims=True)
    u = _husimi_values(rho, pool)
    n = rho.d + 1
    for z in pool[np.argsort(u)[::-1][:count]]:
        res = minimize(lambda x: -husimi(rho, _unpack(x, n)), np.concatenate([z.real, z.imag]),
                       method='Nelder-Mead', options={'xatol': 1e-8, 'fatol': 1e-12, 'maxiter': 2000})
        starts.append(_unpack(res.x, n))
    return starts


def trace_distance_to_coherent(rho: DensityState, seed: int = DEFAULT_SEED, starts: int = 8) -> FunctionalResult:
    """D_N(rho) = min over eta of ||rho - pi_eta||_1 with its minimizer"""
    n = rho.d + 1

    def objective(x: np.ndarray) -> float:
        return trace_norm(rho.matrix - coherent_state(rho.N, _unpack(x, n)).matrix)

    best_value, best_eta = np.inf, None
    any_converged = False
    for eta0 in _husimi_starts(rho, seed, starts):
        res = minimize(objective, np.concatenate([eta0.real, eta0.imag]), method='Nelder-Mead',
                       options={'xatol': 1e-10, 'fatol': 1e-12, 'maxiter': 4000})
        any_converged = any_converged or res.success
        for x in (res.x, np.concatenate([eta0.real, eta0.imag])):
            value = objective(x)
            if value < best_value:
                best_value, best_eta = value, _unpack(x, n)
    if not any_converged:
        logger.warning(f"Trace-distance search did not converge; reporting best value {best_value:.6g}")
    return FunctionalResult("state_distance", float(min(best_value, 2.0)), None, best_eta)


def _pole_conjugated(rho: DensityState, center: np.ndarray) -> DensityState:
    return conjugate(rho, unitary_to_pole(center))


def state_entropy_deficit(rho: DensityState, phi: ConvexFn, center: np.ndarray,
                          rule_degree: int = DEFAULT_RULE_DEGREE, n: int = DEFAULT_SAMPLES,
                          seed: int = DEFAULT_SEED, workers: int = DEFAULT_WORKERS) -> FunctionalResult:
    """S_{N, Phi}(rho) - S_{N, Phi}(pi_eta) on common nodes/samples

    `center` (normally the trace-distance minimizer) is rotated to the pole
    so that |zeta_1|^{2N} serves as the control variate.

    Raises:
        DomainError: For linear Phi
    """
    if phi.is_linear:
        raise DomainError("Entropy deficit is identically zero for linear Phi")
    aligned = _pole_conjugated(rho, center)
    N, dim = rho.N, rho.dim

    def difference(points: np.ndarray) -> np.ndarray:
        return phi(np.abs(points[:, 0]) ** (2 * N)) - phi(_husimi_values(aligned, points))

    degree = entropy_rule_degree(N, rho.d, phi, rule_degree)
    if degree is not None:
        value = dim * integrate_sphere(difference, build_sphere_rule(rho.d, degree))
        return FunctionalResult("state_entropy_deficit", float(value), None, None,
                                {"phi": phi.name, "method": "exact"})
    mean, err = sphere_mean(difference, n, seed, rho.d, STREAM_SPHERE, workers)
    return FunctionalResult("state_entropy_deficit", dim * float(mean), dim * float(err), None,
                            {"phi": phi.name, "method": "mc"})


def state_concentration_deficit(rho: DensityState, omega: float, center: np.ndarray,
                                n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                                workers: int = DEFAULT_WORKERS) -> FunctionalResult:
    """1 - C_{N, Omega}(rho) / C_{N, Omega*}(pi_e1) for the Husimi superlevel set of measure omega"""
    if not 0.0 < omega < 1.0:
        raise DomainError(f"Measure {omega} out of range (must be in (0, 1))")
    aligned = _pole_conjugated(rho, center)
    N, d, dim = rho.N, rho.d, rho.dim

    def pair(points: np.ndarray) -> np.ndarray:
        return np.stack([_husimi_values(aligned, points), np.abs(points[:, 0]) ** (2 * N)], axis=1)

    samples = np.concatenate(map_sphere_chunks(pair, n, seed, d, STREAM_SPHERE, workers))
    emp_u, _ = from_values(samples[:, 0], N, d, None, seed).integral_mu_inverse(omega)
    emp_0, _ = from_values(samples[:, 1], N, d, 1.0, seed).integral_mu_inverse(omega)
    terms = top_mass_terms(samples[:, 1], omega) - top_mass_terms(samples[:, 0], omega)
    err = float(terms.std(ddof=1) / np.sqrt(terms.size))
    optimum = extremal_concentration(N, d, omega)
    return FunctionalResult("state_concentration_deficit", float(dim * (emp_0 - emp_u) / optimum),
                            dim * err / optimum, None,
                            {"omega": omega, "optimal": optimum,
                             "concentration": float(np.clip(optimum - dim * (emp_0 - emp_u), 0.0, 1.0))})
