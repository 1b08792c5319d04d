#!/usr/bin/env python3
"""
Product quadrature and seeded Monte Carlo sampling on the unit sphere of C^{d+1}

The exact rule integrates against the normalized surface measure sigma in the
(rho, theta) parametrization. Monte Carlo draws come from counter-based Philox
substreams keyed by (seed, stream, chunk), so results do not depend on how the
chunks are scheduled.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import roots_jacobi

from .constants import CHUNK_SAMPLES, DEFAULT_WORKERS, EVAL_BLOCK_ELEMENTS
from .errors import DomainError, EvaluationError, ShapeError
from .polyspace import basis_size, monomials, zeta_from_coords

logger = logging.getLogger(__name__)

# Substream identifiers; distinct consumers of the same seed never share draws
STREAM_SPHERE = 0
STREAM_FUBINI_STUDY = 1
STREAM_GAUSSIAN = 2
STREAM_STARTS = 3
STREAM_REGIONS = 4
STREAM_RESAMPLE = 5
STREAM_ITEMS = 6


@dataclass(frozen=True)
class SphereRule:
    """Tensor-product rule for sigma on the unit sphere of C^{d+1}

    Nodes are never materialized all at once; iterate with `blocks`.
    """

    d: int
    degree: int
    radial_nodes: Tuple[np.ndarray, ...]
    radial_weights: Tuple[np.ndarray, ...]
    angles: np.ndarray
    phase_reduced: bool = True

    @property
    def n_angles(self) -> int:
        return self.d if self.phase_reduced else self.d + 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(r) for r in self.radial_nodes) + (len(self.angles),) * self.n_angles

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def total_weight(self) -> float:
        return float(np.prod([w.sum() for w in self.radial_weights]))

    def blocks(self, block_size: int = 1 << 16) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """Yield (points, weights) for consecutive blocks of nodes"""
        shape = self.shape
        angle_weight = 1.0 / len(self.angles) ** self.n_angles
        for start in range(0, self.size, block_size):
            flat = np.arange(start, min(start + block_size, self.size))
            idx = np.unravel_index(flat, shape)
            m = flat.size
            rho = np.empty((m, self.d))
            weights = np.full(m, angle_weight)
            for j in range(self.d):
                rho[:, j] = self.radial_nodes[j][idx[j]]
                weights *= self.radial_weights[j][idx[j]]
            theta = np.zeros((m, self.d + 1))
            offset = 1 if self.phase_reduced else 0
            for k in range(self.n_angles):
                theta[:, k + offset] = self.angles[idx[self.d + k]]
            yield zeta_from_coords(rho, theta), weights


def _radial_rule(n: int, power: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes/weights on [0,1] for the weight rho^power"""
    x, w = roots_jacobi(n, 0.0, float(power))
    return (1.0 + x) / 2.0, w / 2.0 ** (power + 1)


def build_sphere_rule(d: int, N_max: int, phase_reduced: bool = True) -> SphereRule:
    """Build the product rule exact for zeta^alpha conj(zeta)^beta, |alpha| = |beta| <= N_max

    Args:
        d: Dimension
        N_max: Polynomial degree budget of the rule
        phase_reduced: Fix theta_1 = 0; exact for integrands invariant under
            zeta -> e^{i phi} zeta

    Returns:
        SphereRule whose weights sum to 1
    """
    if int(d) != d or d < 1:
        raise ShapeError(f"Invalid dimension d={d} (must be an integer >= 1)")
    if int(N_max) != N_max or N_max < 1:
        raise DomainError(f"Invalid rule degree {N_max} (must be an integer >= 1)")
    nodes, weights = [], []
    for j in range(1, d + 1):
        r, w = _radial_rule(N_max + 1, d - j)
        nodes.append(r)
        weights.append(w)
    # d! normalizes prod_j rho_j^{d-j} to a probability measure
    weights[0] = weights[0] * math.factorial(d)
    n_theta = 2 * N_max + 1
    angles = 2.0 * np.pi * np.arange(n_theta) / n_theta
    rule = SphereRule(d, N_max, tuple(nodes), tuple(weights), angles, phase_reduced)
    logger.debug(f"Sphere rule d={d} N_max={N_max}: {rule.size} nodes")
    return rule


def _block_rows(width: int) -> int:
    return max(1, EVAL_BLOCK_ELEMENTS // max(width, 1))


def integrate_sphere(f: Callable[[np.ndarray], np.ndarray], rule: SphereRule, vectorized: bool = True):
    """Integrate f against sigma with the product rule

    Args:
        f: Function of an (m, d+1) array of points returning m values
            (or of a single point when vectorized is False)
        rule: SphereRule
        vectorized: Whether f accepts arrays of points

    Returns:
        float or complex integral value

    Raises:
        EvaluationError: If f returns a non-finite value at some node
    """
    total = 0.0 + 0.0j
    is_complex = False
    for points, weights in rule.blocks():
        if vectorized:
            values = np.asarray(f(points))
        else:
            values = np.array([f(p) for p in points])
        if values.shape != weights.shape:
            raise ShapeError(f"Integrand returned shape {values.shape}, expected {weights.shape}")
        bad = ~np.isfinite(values)
        if np.any(bad):
            node = points[np.argmax(bad)]
            raise EvaluationError(f"Non-finite integrand value at node {np.array2string(node, precision=6)}")
        is_complex = is_complex or np.iscomplexobj(values)
        total += np.dot(weights, values)
    return complex(total) if is_complex else float(total.real)


def gram_matrix(rule: SphereRule, N: int) -> np.ndarray:
    """G[alpha, beta] = int zeta^alpha conj(zeta^beta) dsigma on the rule nodes"""
    if N > rule.degree:
        raise DomainError(f"Degree {N} exceeds the rule degree {rule.degree}")
    dim = basis_size(rule.d, N)
    G = np.zeros((dim, dim), dtype=complex)
    for points, weights in rule.blocks(_block_rows(dim)):
        M = monomials(points, rule.d, N)
        G += (M * weights[:, None]).T @ np.conj(M)
    return G


def make_generator(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the substream (seed, *key)"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))))


def derive_seed(seed: int, *key: int) -> int:
    """Independent 63-bit seed for the substream (seed, *key)"""
    state = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))


@dataclass(frozen=True, eq=False)
class SampleCloud:
    """Seeded i.i.d. sample; regenerating with the same seed is bit-exact"""

    points: np.ndarray
    seed: int
    count: int
    kind: str = "sphere"


def _chunk_sizes(n: int, chunk: int = CHUNK_SAMPLES) -> List[int]:
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _sphere_chunk(d: int, size: int, seed: int, stream: int, index: int) -> np.ndarray:
    rng = make_generator(seed, stream, index)
    g = rng.standard_normal((size, 2 * (d + 1)))
    z = g[:, :d + 1] + 1j * g[:, d + 1:]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def iter_sphere_chunks(n: int, seed: int, d: int, stream: int = STREAM_SPHERE) -> Iterator[np.ndarray]:
    """Yield uniform sphere samples chunk by chunk (chunk i from substream (stream, i))"""
    if n < 1:
        raise DomainError(f"Sample count {n} out of range (must be >= 1)")
    for index, size in enumerate(_chunk_sizes(n)):
        yield _sphere_chunk(d, size, seed, stream, index)


def map_sphere_chunks(fn: Callable[[np.ndarray], np.ndarray], n: int, seed: int, d: int,
                      stream: int = STREAM_SPHERE, workers: int = DEFAULT_WORKERS) -> List[np.ndarray]:
    """Apply fn to every sample chunk in a thread pool, results in chunk order"""
    if n < 1:
        raise DomainError(f"Sample count {n} out of range (must be >= 1)")
    sizes = _chunk_sizes(n)

    def task(index: int) -> np.ndarray:
        return fn(_sphere_chunk(d, sizes[index], seed, stream, index))

    if workers <= 1 or len(sizes) == 1:
        return [task(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(len(sizes))))


def sample_sphere(n: int, seed: int, d: int) -> SampleCloud:
    """n points i.i.d. uniform on the unit sphere of C^{d+1}"""
    points = np.concatenate(list(iter_sphere_chunks(n, seed, d)))
    return SampleCloud(points, int(seed), int(n), "sphere")


def sample_fubini_study(n: int, seed: int, d: int) -> SampleCloud:
    """n points of C^d i.i.d. w.r.t. dm = beta_d (1+|z|^2)^{-(d+1)} dz"""
    zeta = np.concatenate(list(iter_sphere_chunks(n, seed, d, STREAM_FUBINI_STUDY)))
    attempt = 0
    while True:
        bad = zeta[:, 0] == 0
        if not np.any(bad):
            break
        logger.warning(f"Resampling {int(bad.sum())} Fubini-Study draw(s) with zeta_1 = 0")
        zeta[bad] = _sphere_chunk(d, int(bad.sum()), seed, STREAM_RESAMPLE, attempt)
        attempt += 1
    z = zeta[:, 1:] / zeta[:, :1]
    return SampleCloud(z, int(seed), int(n), "fubini_study")


def sample_gaussian_weight(n: int, seed: int, d: int) -> SampleCloud:
    """n points of C^d with density e^{-pi |z|^2} (a probability density)"""
    if n < 1:
        raise DomainError(f"Sample count {n} out of range (must be >= 1)")
    parts = []
    for index, size in enumerate(_chunk_sizes(n)):
        g = make_generator(seed, STREAM_GAUSSIAN, index).standard_normal((size, 2 * d))
        parts.append((g[:, :d] + 1j * g[:, d:]) / np.sqrt(2.0 * np.pi))
    return SampleCloud(np.concatenate(parts), int(seed), int(n), "gaussian")


def monte_carlo_mean(values: np.ndarray) -> Tuple[float, float]:
    """(mean, standard error) of i.i.d. values"""
    values = np.asarray(values, dtype=float).reshape(-1)
    n = values.size
    if n == 0:
        raise DomainError("Cannot average an empty sample")
    if n == 1:
        return float(values[0]), float('inf')
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n))


@dataclass
class RunningMoments:
    """Streaming sums for mean/stderr over chunked samples (columns allowed)"""

    count: int = 0
    total: Optional[np.ndarray] = None
    total_sq: Optional[np.ndarray] = None

    def update(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        s, s2 = values.sum(axis=0), (values ** 2).sum(axis=0)
        self.total = s if self.total is None else self.total + s
        self.total_sq = s2 if self.total_sq is None else self.total_sq + s2
        self.count += values.shape[0]

    def mean(self) -> np.ndarray:
        return self.total / self.count

    def stderr(self) -> np.ndarray:
        if self.count < 2:
            return np.full_like(self.total, np.inf)
        var = (self.total_sq - self.total ** 2 / self.count) / (self.count - 1)
        return np.sqrt(np.clip(var, 0.0, None) / self.count)


def sphere_mean(fn: Callable[[np.ndarray], np.ndarray], n: int, seed: int, d: int,
                stream: int = STREAM_SPHERE, workers: int = DEFAULT_WORKERS) -> Tuple[np.ndarray, np.ndarray]:
    """Monte Carlo mean and stderr of fn over n uniform sphere samples

    fn maps an (m, d+1) chunk to m values or an (m, k) array of k estimands.
    """
    moments = RunningMoments()
    for values in map_sphere_chunks(fn, n, seed, d, stream, workers):
        moments.update(values)
    return moments.mean(), moments.stderr()
