#!/usr/bin/env python3
"""
Concentration, generalized Wehrl entropy, sup-modulus, distance to kernels,
cap geometry and Fraenkel asymmetry for polynomials on the unit sphere
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize
from scipy.special import beta as beta_fn
from scipy.special import betainc, betaincc, ndtri, xlogy
from scipy.stats import qmc

from .constants import (ASYMMETRY_SAMPLES, ASYMMETRY_STARTS, CLAMP_TOL, CONVEXITY_GRID, CONVEXITY_TOL,
                        DEFAULT_RULE_DEGREE, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_WORKERS, IDENTITY_TOL,
                        RULE_MAX_NODES, SMOOTH_RULE_PADDING, SUP_GRAD_TOL, SUP_MAX_ITER, SUP_MC_POOL,
                        SUP_MC_STARTS, SUP_QUASI_STARTS, SUP_STALL_GRAD_TOL, SUP_TOL)
from .errors import ConfigError, ConvergenceError, DomainError, EvaluationError
from .levelsets import build_profile, from_values, mu0_inverse
from .polyspace import (AffinePoly, HomPoly, basis_size, bombieri_inner, evaluate, exponent_matrix, from_affine,
                        gradient, reproducing_kernel, rotate, unit_vector, unitary_to_pole)
from .quadrature import (STREAM_REGIONS, STREAM_SPHERE, STREAM_STARTS, build_sphere_rule, integrate_sphere,
                         make_generator, map_sphere_chunks, sample_sphere, sphere_mean)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Convex functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConvexFn:
    """Convex function on [0, 1] with a left derivative

    Convexity is checked on a uniform grid at construction.
    """

    tag: str
    func: Callable[[np.ndarray], np.ndarray]
    left_derivative: Callable[[np.ndarray], np.ndarray]
    params: Tuple[float, ...] = ()
    smooth: bool = True
    poly_degree: Optional[int] = None

    def __post_init__(self):
        grid = np.linspace(0.0, 1.0, CONVEXITY_GRID)
        values = np.asarray(self.func(grid), dtype=float)
        if not np.all(np.isfinite(values)):
            raise DomainError(f"Phi '{self.tag}' is not finite on [0, 1]")
        for step in (1, 10, 100, (CONVEXITY_GRID - 1) // 2):
            mid = values[step:-step]
            chord = 0.5 * (values[:-2 * step] + values[2 * step:])
            if np.any(mid > chord + CONVEXITY_TOL):
                raise DomainError(f"Phi '{self.tag}' fails the midpoint convexity check")

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    @property
    def is_linear(self) -> bool:
        return self.tag == "linear"

    @property
    def name(self) -> str:
        if self.tag in ("power", "hinge"):
            return f"{self.tag}:{self.params[0]:g}"
        if self.tag == "linear" and self.params != (1.0, 0.0):
            return f"linear:{self.params[0]:g},{self.params[1]:g}"
        return self.tag

    @classmethod
    def linear(cls, a: float = 1.0, b: float = 0.0) -> 'ConvexFn':
        return cls("linear", lambda t: a * t + b, lambda t: np.full_like(t, a, dtype=float), (a, b), True, 1)

    @classmethod
    def xlogx(cls) -> 'ConvexFn':
        return cls("xlogx", lambda t: xlogy(t, t), lambda t: np.log(t) + 1.0)

    @classmethod
    def power(cls, p: float) -> 'ConvexFn':
        if not p >= 1.0:
            raise DomainError(f"Power {p} out of range (must be >= 1 for convexity)")
        degree = int(p) if float(p).is_integer() else None
        return cls("power", lambda t: t ** p, lambda t: p * t ** (p - 1.0), (float(p),), True, degree)

    @classmethod
    def hinge(cls, t0: float) -> 'ConvexFn':
        if not 0.0 < t0 < 1.0:
            raise DomainError(f"Hinge point {t0} out of range (must be in (0, 1))")
        return cls("hinge", lambda t: np.maximum(t - t0, 0.0), lambda t: (t > t0).astype(float),
                   (float(t0),), False)

    @classmethod
    def custom(cls, func: Callable, left_derivative: Callable, smooth: bool = True) -> 'ConvexFn':
        return cls("custom", func, left_derivative, (), smooth)


def parse_phi(text: str) -> ConvexFn:
    """Parse linear | linear:A,B | xlogx | power:P | hinge:T0"""
    text = text.strip()
    kind, _, arg = text.partition(':')
    try:
        if kind == "linear":
            if not arg:
                return ConvexFn.linear()
            a, b = (float(x) for x in arg.split(','))
            return ConvexFn.linear(a, b)
        if kind == "xlogx" and not arg:
            return ConvexFn.xlogx()
        if kind == "power" and arg:
            return ConvexFn.power(float(arg))
        if kind == "hinge" and arg:
            return ConvexFn.hinge(float(arg))
    except (ValueError, DomainError) as e:
        raise ConfigError(f"Invalid Phi '{text}': {e}", field="phi") from e
    raise ConfigError(f"Unknown Phi '{text}' (expected linear, xlogx, power:P or hinge:T0)", field="phi")


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

def cap_measure(N: int, d: int, t: float) -> float:
    """sigma of the cap {|zeta . conj(eta)|^{2N} > t}, independent of eta"""
    if not 0.0 < t < 1.0:
        raise DomainError(f"Cap level t={t} out of range (must be in (0, 1))")
    return float((1.0 - t ** (1.0 / N)) ** d)


def cap_threshold(N: int, d: int, omega: float) -> float:
    """Level t with cap_measure(N, d, t) = omega"""
    if not 0.0 < omega < 1.0:
        raise DomainError(f"Measure {omega} out of range (must be in (0, 1))")
    return float((1.0 - omega ** (1.0 / d)) ** N)


class Region:
    """Measurable subset of the unit sphere in C^{d+1}"""

    d: int
    exact = False

    def contains(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def measure(self) -> float:
        raise NotImplementedError

    def describe(self) -> Dict[str, Any]:
        return {"kind": type(self).__name__.lower()}


@dataclass(eq=False)
class Cap(Region):
    """Delta_t(eta) = {|zeta . conj(eta)|^{2N} > t}"""

    center: np.ndarray
    t: float
    N: int
    exact = True

    def __post_init__(self):
        self.center = unit_vector(self.center)
        self.d = self.center.size - 1
        cap_measure(self.N, self.d, self.t)

    @property
    def cos2(self) -> float:
        return float(self.t ** (1.0 / self.N))

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.abs(points @ np.conj(self.center)) ** 2 > self.cos2

    def measure(self) -> float:
        return cap_measure(self.N, self.d, self.t)

    def describe(self) -> Dict[str, Any]:
        return {"kind": "cap", "t": self.t, "N": self.N}


@dataclass(eq=False)
class CapComplement(Cap):
    """Complement of a cap"""

    def contains(self, points: np.ndarray) -> np.ndarray:
        return ~super().contains(points)

    def measure(self) -> float:
        return 1.0 - super().measure()

    def describe(self) -> Dict[str, Any]:
        return {"kind": "cap_complement", "t": self.t, "N": self.N}


@dataclass(eq=False)
class Indicator(Region):
    """Region given by a vectorized membership predicate

    A declared measure is checked against a Monte Carlo estimate the first
    time it is read; without one the estimate is used.
    """

    predicate: Callable[[np.ndarray], np.ndarray]
    d: int
    declared: Optional[float] = None
    label: str = "indicator"
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    _estimate: Optional[Tuple[float, float]] = field(default=None, repr=False)
    _checked: bool = field(default=False, repr=False)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.predicate(points), dtype=bool)

    def estimate_measure(self) -> Tuple[float, float]:
        if self._estimate is None:
            mean, err = sphere_mean(lambda p: self.contains(p).astype(float), self.samples, self.seed,
                                    self.d, STREAM_REGIONS)
            self._estimate = (float(mean), float(err))
        return self._estimate

    def measure(self) -> float:
        if self.declared is None:
            return self.estimate_measure()[0]
        if not self._checked:
            self.check_measure()
        return self.declared

    def check_measure(self, sigmas: float = 4.0) -> Tuple[float, float]:
        """Raise DomainError when the declared measure disagrees with the estimate"""
        estimate, err = self.estimate_measure()
        if self.declared is not None and abs(estimate - self.declared) > sigmas * max(err, 1.0 / self.samples):
            raise DomainError(f"Declared measure {self.declared} disagrees with estimate "
                              f"{estimate:.6f} +/- {err:.2g}")
        self._checked = True
        return estimate, err

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.label, "measure": self.measure()}


def cap_union(caps: Sequence[Cap], complement: bool = False, samples: int = DEFAULT_SAMPLES,
              seed: int = DEFAULT_SEED) -> Region:
    """Union of caps (optionally complemented); a single cap stays exact"""
    if not caps:
        raise DomainError("A cap union needs at least one cap")
    if len(caps) == 1:
        cap = caps[0]
        return CapComplement(cap.center, cap.t, cap.N) if complement else cap
    d = caps[0].d

    def member(points: np.ndarray) -> np.ndarray:
        inside = np.zeros(points.shape[0], dtype=bool)
        for cap in caps:
            inside |= cap.contains(points)
        return ~inside if complement else inside

    label = "cap_union_complement" if complement else "cap_union"
    return Indicator(member, d, None, label, samples, seed)


@dataclass(eq=False)
class Superlevel(Region):
    """{|P|^2 > threshold} with threshold chosen so that the measure is omega"""

    poly: HomPoly
    omega: float
    threshold: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.omega < 1.0:
            raise DomainError(f"Superlevel measure {self.omega} out of range (must be in (0, 1))")
        self.d = self.poly.d

    def resolve(self, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> 'Superlevel':
        if self.threshold is None:
            profile = build_profile(self.poly, n, seed)
            self.threshold = float(profile.mu_inverse(self.omega))
        return self

    def contains(self, points: np.ndarray) -> np.ndarray:
        if self.threshold is None:
            self.resolve()
        return np.abs(evaluate(self.poly, points)) ** 2 > self.threshold

    def measure(self) -> float:
        return self.omega

    def describe(self) -> Dict[str, Any]:
        return {"kind": "superlevel", "omega": self.omega, "threshold": self.threshold}


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass
class FunctionalResult:
    """Value of a functional with its stderr (None when exact)"""

    functional: str
    value: float
    stderr: Optional[float] = None
    argmax: Optional[np.ndarray] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.stderr is None

    def to_record(self, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        argmax = None
        if self.argmax is not None:
            argmax = [float(x) for z in np.asarray(self.argmax).reshape(-1) for x in (z.real, z.imag)]
        record = {
            "functional": self.functional,
            "value": float(self.value),
            "stderr": None if self.stderr is None else float(self.stderr),
            "argmax": argmax,
            "config": config or {},
        }
        for key, value in self.extras.items():
            record[key] = value
        return record


@dataclass
class SupResult:
    T: float
    argmax: np.ndarray
    converged_starts: int
    total_starts: int


def require_unit(Q: HomPoly) -> None:
    norm = Q.norm()
    if abs(norm - 1.0) > IDENTITY_TOL:
        raise DomainError(f"Polynomial must have unit norm (|Q| = {norm:.12g}); normalize first")


def _clamp_modulus(U: np.ndarray) -> np.ndarray:
    peak = float(np.max(U)) if U.size else 0.0
    if peak > 1.0 + CLAMP_TOL:
        if peak > 1.0 + SUP_TOL:
            raise EvaluationError(f"|Q|^2 = {peak:.15g} exceeds 1 for a unit-norm polynomial")
        logger.warning(f"Clamping |Q|^2 = {peak:.15g} to 1")
    return np.clip(U, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Sup-modulus and distance to kernels
# ---------------------------------------------------------------------------

def _quasi_random_starts(count: int, d: int, seed: int) -> np.ndarray:
    sampler = qmc.Sobol(d=2 * (d + 1), scramble=True, seed=make_generator(seed, STREAM_STARTS, 0))
    u = np.clip(sampler.random(count), 1e-12, 1.0 - 1e-12)
    g = ndtri(u)
    z = g[:, :d + 1] + 1j * g[:, d + 1:]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _best_pool_starts(Q: HomPoly, count: int, pool: int, seed: int) -> np.ndarray:
    rng = make_generator(seed, STREAM_STARTS, 1)
    z = rng.standard_normal((pool, Q.d + 1)) + 1j * rng.standard_normal((pool, Q.d + 1))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    U = np.abs(evaluate(Q, z)) ** 2
    return z[np.argsort(U)[::-1][:count]]


def _tangent_gradient(Q: HomPoly, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """|Q|^2 at X and its gradient projected on the sphere tangent space"""
    values = evaluate(Q, X)
    grad = 2.0 * values[:, None] * np.conj(gradient(Q, X))
    radial = np.real(np.sum(np.conj(X) * grad, axis=1))
    return np.abs(values) ** 2, grad - radial[:, None] * X


def _multistart_ascent(Q: HomPoly, X: np.ndarray, max_iter: int = SUP_MAX_ITER
                       ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched projected gradient ascent of |Q|^2 with Armijo backtracking

    Returns:
        (points, values, converged) for every start
    """
    X = X.copy()
    m = X.shape[0]
    steps = np.full(m, 1.0 / (2.0 * Q.N))
    active = np.ones(m, dtype=bool)
    converged = np.zeros(m, dtype=bool)
    values = np.abs(evaluate(Q, X)) ** 2
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        f, g = _tangent_gradient(Q, X[idx])
        gnorm = np.linalg.norm(g, axis=1)
        done = gnorm < SUP_GRAD_TOL
        converged[idx[done]] = True
        active[idx[done]] = False
        keep = ~done
        idx, f, g, gnorm = idx[keep], f[keep], g[keep], gnorm[keep]
        if idx.size == 0:
            break
        x = X[idx]
        s = steps[idx].copy()
        accepted = np.zeros(idx.size, dtype=bool)
        new_x = x.copy()
        new_f = f.copy()
        for _ in range(60):
            pending = ~accepted
            trial = x[pending] + s[pending, None] * g[pending]
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            ft = np.abs(evaluate(Q, trial)) ** 2
            ok = ft >= f[pending] + 1e-4 * s[pending] * gnorm[pending] ** 2
            where = np.flatnonzero(pending)[ok]
            new_x[where] = trial[ok]
            new_f[where] = ft[ok]
            accepted[where] = True
            if accepted.all():
                break
            s[~accepted] *= 0.5
        X[idx] = new_x
        values[idx] = new_f
        steps[idx] = np.where(accepted, 2.0 * s, s)
        stalled = ~accepted
        if np.any(stalled):
            converged[idx[stalled]] = gnorm[stalled] < SUP_STALL_GRAD_TOL
            active[idx[stalled]] = False
    values = np.abs(evaluate(Q, X)) ** 2
    return X, values, converged


def sup_modulus(Q: HomPoly, seed: int = DEFAULT_SEED, quasi_starts: int = SUP_QUASI_STARTS,
                mc_starts: int = SUP_MC_STARTS) -> SupResult:
    """T = sup |Q|^2 on the sphere with its maximizer

    Multistart: quasi-random Sobol points plus the best points of a Monte
    Carlo pool, each refined by projected gradient ascent.

    Raises:
        DomainError: If Q does not have unit norm
        ConvergenceError: If no start converges (carries the best-so-far result)
        EvaluationError: If T exceeds 1 + SUP_TOL
    """
    require_unit(Q)
    starts = np.vstack([_quasi_random_starts(quasi_starts, Q.d, seed),
                        _best_pool_starts(Q, mc_starts, SUP_MC_POOL, seed)])
    X, values, converged = _multistart_ascent(Q, starts)
    best = int(np.argmax(values))
    T = float(values[best])
    result = SupResult(min(T, 1.0), X[best], int(converged.sum()), starts.shape[0])
    if not converged.any():
        logger.warning(f"sup_modulus: none of {starts.shape[0]} starts converged (best T={T:.12g})")
        raise ConvergenceError("sup_modulus did not converge from any start", best=result)
    if T > 1.0 + SUP_TOL:
        raise EvaluationError(f"sup |Q|^2 = {T:.15g} exceeds 1 for a unit-norm polynomial")
    logger.debug(f"sup_modulus: T={T:.15g} ({result.converged_starts}/{result.total_starts} starts converged)")
    return result


def distance_from_sup(T: float) -> float:
    """D = sqrt(2 (1 - sqrt(T)))"""
    return math.sqrt(max(2.0 * (1.0 - math.sqrt(min(max(T, 0.0), 1.0))), 0.0))


def kernel_distance_squared(Q: HomPoly, eta: np.ndarray) -> float:
    """||Q - K_N(., eta)||^2 through Bombieri inner products"""
    K = reproducing_kernel(Q.N, eta)
    diff = Q - K
    return float(np.real(bombieri_inner(diff, diff)))


def _direct_kernel_distance(Q: HomPoly, start: np.ndarray) -> Tuple[float, np.ndarray]:
    n = Q.d + 1
    phase = np.angle(evaluate(Q, start))
    start = start * np.exp(-1j * phase / Q.N)

    def objective(x: np.ndarray) -> float:
        z = x[:n] + 1j * x[n:]
        return kernel_distance_squared(Q, z / np.linalg.norm(z))

    x0 = np.concatenate([start.real, start.imag])
    res = minimize(objective, x0, method='BFGS', options={'gtol': 1e-12, 'maxiter': 2000})
    z = res.x[:n] + 1j * res.x[n:]
    return float(res.fun), z / np.linalg.norm(z)


def distance_to_kernels(Q: HomPoly, seed: int = DEFAULT_SEED, cross_check: bool = False,
                        sup: Optional[SupResult] = None) -> FunctionalResult:
    """D_N(Q) = sqrt(2 (1 - sqrt(T))); optionally cross-checked by direct minimization"""
    sup = sup if sup is not None else sup_modulus(Q, seed)
    D = distance_from_sup(sup.T)
    extras: Dict[str, Any] = {"T": sup.T}
    if cross_check:
        direct, _ = _direct_kernel_distance(Q, sup.argmax)
        extras["direct_squared"] = direct
        extras["identity_gap"] = abs(D ** 2 - direct)
    return FunctionalResult("distance", D, None, sup.argmax, extras)


# ---------------------------------------------------------------------------
# Concentration
# ---------------------------------------------------------------------------

def extremal_concentration(N: int, d: int, omega: float) -> float:
    """C_{N, Omega*}(zeta_1^N) = I_{omega^{1/d}}(d, N+1)"""
    if not 0.0 < omega <= 1.0:
        raise DomainError(f"Measure {omega} out of range (must be in (0, 1])")
    return float(betainc(d, N + 1, omega ** (1.0 / d)))


def cap_concentration(Q: HomPoly, cap: Cap) -> float:
    """Exact: rotate the center to the pole, then sum incomplete beta weights"""
    if abs(abs(cap.center[0]) - 1.0) <= IDENTITY_TOL:
        rotated = Q
    else:
        rotated = rotate(Q, unitary_to_pole(cap.center))
    coords = np.abs(rotated.orthonormal_coords()) ** 2
    r = 1.0 - cap.cos2
    a1 = exponent_matrix(Q.d, Q.N)[:, 0]
    fractions = betainc(Q.N + Q.d - a1, a1 + 1, r)
    return float(np.clip(np.dot(coords, fractions), 0.0, 1.0))


def _check_region_measure(region: Region) -> float:
    omega = region.measure()
    if not 0.0 < omega < 1.0:
        raise DomainError(f"Region measure {omega} out of range (must be in (0, 1))")
    return omega


def concentration(Q: HomPoly, region: Region, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                  workers: int = DEFAULT_WORKERS) -> FunctionalResult:
    """C_{N, Omega}(Q) = binom(N+d, N) int_Omega |Q|^2 dsigma

    Caps (and their complements) are computed exactly; other regions by
    Monte Carlo.
    """
    require_unit(Q)
    if region.d != Q.d:
        raise DomainError(f"Region dimension {region.d} does not match d={Q.d}")
    omega = _check_region_measure(region)
    if isinstance(region, CapComplement):
        value = 1.0 - cap_concentration(Q, region)
        return FunctionalResult("concentration", value, None, None, {"measure": omega, "method": "exact"})
    if isinstance(region, Cap):
        value = cap_concentration(Q, region)
        return FunctionalResult("concentration", value, None, None, {"measure": omega, "method": "exact"})
    if isinstance(region, Superlevel) and region.poly is Q:
        return optimal_concentration(Q, region.omega, n, seed, workers)
    if isinstance(region, Superlevel):
        region.resolve(n, seed + 1)
    dim = basis_size(Q.d, Q.N)

    def integrand(points: np.ndarray) -> np.ndarray:
        U = _clamp_modulus(np.abs(evaluate(Q, points)) ** 2)
        return dim * U * region.contains(points)

    mean, err = sphere_mean(integrand, n, seed, Q.d, STREAM_SPHERE, workers)
    value = float(np.clip(mean, 0.0, 1.0))
    return FunctionalResult("concentration", value, float(err), None, {"measure": omega, "method": "mc"})


def optimal_concentration(Q: HomPoly, omega: float, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                          workers: int = DEFAULT_WORKERS) -> FunctionalResult:
    """Concentration over the superlevel set {|Q|^2 > t_hat} of measure omega"""
    if not 0.0 < omega < 1.0:
        raise DomainError(f"Measure {omega} out of range (must be in (0, 1))")
    require_unit(Q)
    profile = build_profile(Q, n, seed, workers=workers)
    t_hat = float(profile.mu_inverse(omega))
    integral, err = profile.integral_mu_inverse(omega)
    dim = basis_size(Q.d, Q.N)
    value = float(np.clip(dim * integral, 0.0, 1.0))
    return FunctionalResult("optimal_concentration", value, dim * err, None,
                            {"measure": omega, "threshold": t_hat, "method": "mc"})


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------

def _rule_nodes(d: int, degree: int) -> int:
    return (degree + 1) ** d * (2 * degree + 1) ** d


def entropy_rule_degree(N: int, d: int, phi: ConvexFn, rule_degree: int) -> Optional[int]:
    """Degree of an exact rule for Phi(|Q|^2), or None when Monte Carlo is required"""
    if not phi.smooth:
        return None
    if phi.poly_degree is not None:
        degree = max(rule_degree, phi.poly_degree * N)
        return degree if _rule_nodes(d, degree) <= RULE_MAX_NODES else None
    degree = max(rule_degree, 2 * N + SMOOTH_RULE_PADDING)
    while degree > N and _rule_nodes(d, degree) > RULE_MAX_NODES:
        degree -= 1
    return degree if _rule_nodes(d, degree) <= RULE_MAX_NODES else None


def wehrl_entropy(Q: HomPoly, phi: ConvexFn, rule_degree: int = DEFAULT_RULE_DEGREE,
                  n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                  workers: int = DEFAULT_WORKERS) -> FunctionalResult:
    """S_{N, Phi}(Q) = -binom(N+d, d) int Phi(|Q|^2) dsigma

    Linear Phi is closed form; smooth Phi uses the exact rule; non-smooth Phi
    uses Monte Carlo.
    """
    require_unit(Q)
    dim = basis_size(Q.d, Q.N)
    if phi.is_linear:
        a, b = phi.params
        return FunctionalResult("entropy", -a - b * dim, None, None, {"phi": phi.name, "method": "exact"})
    degree = entropy_rule_degree(Q.N, Q.d, phi, rule_degree)

    def integrand(points: np.ndarray) -> np.ndarray:
        return phi(_clamp_modulus(np.abs(evaluate(Q, points)) ** 2))

    if degree is not None:
        value = -dim * integrate_sphere(integrand, build_sphere_rule(Q.d, degree))
        return FunctionalResult("entropy", value, None, None,
                                {"phi": phi.name, "method": "exact", "rule_degree": degree})
    mean, err = sphere_mean(integrand, n, seed, Q.d, STREAM_SPHERE, workers)
    return FunctionalResult("entropy", -dim * float(mean), dim * float(err), None,
                            {"phi": phi.name, "method": "mc"})


def extremal_entropy(N: int, d: int, phi: ConvexFn) -> float:
    """S_{N, Phi}(zeta_1^N) = -binom(N+d, d) int_0^1 Phi(mu0^{-1}(s)) ds"""
    dim = basis_size(d, N)
    if phi.is_linear:
        a, b = phi.params
        return -a - b * dim
    points = None
    if phi.tag == "hinge":
        t0 = phi.params[0]
        points = [float((1.0 - t0 ** (1.0 / N)) ** d)]
    value, _ = quad(lambda s: float(phi(mu0_inverse(s, N, d))), 0.0, 1.0,
                    epsabs=0.0, epsrel=1e-11, limit=500, points=points)
    return -dim * value


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------

def _tail_integral(omega: float, omega_tilde: float, N: int, d: int) -> float:
    """int_omega^omega_tilde (1 - s^{1/d})^N ds"""
    a, b = omega ** (1.0 / d), omega_tilde ** (1.0 / d)
    return float(d * beta_fn(d, N + 1) * (betaincc(d, N + 1, a) - betaincc(d, N + 1, b)))


def _check_thresholds(omega: float, omega_tilde: float) -> None:
    if not 0.0 < omega_tilde <= 1.0:
        raise DomainError(f"omega_tilde={omega_tilde} out of range (must be in (0, 1])")
    if not 0.0 < omega < omega_tilde:
        raise DomainError(f"omega={omega} out of range (must be in (0, omega_tilde={omega_tilde}))")


def stability_coefficient(omega: float, N: int, d: int, omega_tilde: float) -> float:
    """N^d int_omega^omega_tilde (1 - s^{1/d})^N ds"""
    _check_thresholds(omega, omega_tilde)
    return float(N ** d * _tail_integral(omega, omega_tilde, N, d))


def alpha_coefficient(omega: float, N: int, d: int, omega_tilde: float) -> float:
    """N^d omega^2 (1 - omega^{1/d})^{N-1} int_omega^omega_tilde (1 - s^{1/d})^N ds"""
    _check_thresholds(omega, omega_tilde)
    return float(N ** d * omega ** 2 * (1.0 - omega ** (1.0 / d)) ** (N - 1)
                 * _tail_integral(omega, omega_tilde, N, d))


# ---------------------------------------------------------------------------
# Deficits with the extremal profile as control variate
# ---------------------------------------------------------------------------

@dataclass
class DeficitResult:
    value: float
    stderr: Optional[float]
    T: float
    D2: float
    extras: Dict[str, Any] = field(default_factory=dict)


def _pole_aligned(Q: HomPoly, sup: SupResult) -> HomPoly:
    return rotate(Q, unitary_to_pole(sup.argmax / np.linalg.norm(sup.argmax)))


def top_mass_terms(U: np.ndarray, omega: float) -> np.ndarray:
    """Per-sample terms whose mean is the empirical int_0^omega mu^{-1}"""
    n = U.size
    k = max(int(math.ceil(omega * n)), 1)
    level = np.partition(U, n - k)[n - k]
    return np.where(U >= level, U, 0.0)


def concentration_deficit(Q: HomPoly, omega: float, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                          sup: Optional[SupResult] = None, workers: int = DEFAULT_WORKERS) -> DeficitResult:
    """Relative deficit 1 - C_{N, Omega_Q}(Q) / C_{N, Omega*}(zeta_1^N) for the superlevel set of measure omega

    Samples of |Q'|^2 (maximizer rotated to the pole) and |zeta_1|^{2N} share
    the same points; the extremal integral is known exactly.
    """
    require_unit(Q)
    if not 0.0 < omega < 1.0:
        raise DomainError(f"Measure {omega} out of range (must be in (0, 1))")
    sup = sup if sup is not None else sup_modulus(Q, seed)
    aligned = _pole_aligned(Q, sup)
    N, d = Q.N, Q.d
    dim = basis_size(d, N)

    def pair(points: np.ndarray) -> np.ndarray:
        U = _clamp_modulus(np.abs(evaluate(aligned, points)) ** 2)
        U0 = np.abs(points[:, 0]) ** (2 * N)
        return np.stack([U, U0], axis=1)

    samples = np.concatenate(map_sphere_chunks(pair, n, seed, d, STREAM_SPHERE, workers))
    prof_q = from_values(samples[:, 0], N, d, sup.T, seed)
    prof_0 = from_values(samples[:, 1], N, d, 1.0, seed)
    emp_q, _ = prof_q.integral_mu_inverse(omega)
    emp_0, _ = prof_0.integral_mu_inverse(omega)
    terms = top_mass_terms(samples[:, 1], omega) - top_mass_terms(samples[:, 0], omega)
    err = float(terms.std(ddof=1) / math.sqrt(terms.size))
    optimum = extremal_concentration(N, d, omega)
    value = dim * (emp_0 - emp_q) / optimum
    D2 = distance_from_sup(sup.T) ** 2
    return DeficitResult(float(value), dim * err / optimum, sup.T, D2,
                         {"omega": omega, "optimal": optimum,
                          "concentration": float(np.clip(optimum - dim * (emp_0 - emp_q), 0.0, 1.0))})


def region_concentration_deficit(Q: HomPoly, region: Region, n: int = DEFAULT_SAMPLES,
                                 seed: int = DEFAULT_SEED, workers: int = DEFAULT_WORKERS) -> FunctionalResult:
    """1 - C_{N, Omega}(Q) / C_{N, Omega*}(zeta_1^N) for a given region"""
    result = concentration(Q, region, n, seed, workers)
    optimum = extremal_concentration(Q.N, Q.d, region.measure())
    stderr = None if result.stderr is None else result.stderr / optimum
    return FunctionalResult("concentration_deficit", 1.0 - result.value / optimum, stderr, None,
                            {"measure": region.measure(), "concentration": result.value})


def entropy_deficit(Q: HomPoly, phi: ConvexFn, n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                    sup: Optional[SupResult] = None, rule_degree: int = DEFAULT_RULE_DEGREE,
                    workers: int = DEFAULT_WORKERS) -> DeficitResult:
    """S_{N, Phi}(Q) - S_{N, Phi}(zeta_1^N) evaluated on common nodes/samples

    Raises:
        DomainError: For linear Phi (the deficit is identically zero)
    """
    if phi.is_linear:
        raise DomainError("Entropy deficit is identically zero for linear Phi")
    require_unit(Q)
    sup = sup if sup is not None else sup_modulus(Q, seed)
    aligned = _pole_aligned(Q, sup)
    N, d = Q.N, Q.d
    dim = basis_size(d, N)

    def difference(points: np.ndarray) -> np.ndarray:
        U = _clamp_modulus(np.abs(evaluate(aligned, points)) ** 2)
        U0 = np.abs(points[:, 0]) ** (2 * N)
        return phi(U0) - phi(U)

    D2 = distance_from_sup(sup.T) ** 2
    degree = entropy_rule_degree(N, d, phi, rule_degree)
    if degree is not None:
        value = dim * integrate_sphere(difference, build_sphere_rule(d, degree))
        return DeficitResult(float(value), None, sup.T, D2, {"phi": phi.name, "method": "exact"})
    mean, err = sphere_mean(difference, n, seed, d, STREAM_SPHERE, workers)
    return DeficitResult(dim * float(mean), dim * float(err), sup.T, D2, {"phi": phi.name, "method": "mc"})


# ---------------------------------------------------------------------------
# Fraenkel asymmetry
# ---------------------------------------------------------------------------

def fraenkel_asymmetry(region: Region, n: int = ASYMMETRY_SAMPLES, seed: int = DEFAULT_SEED,
                       starts: int = ASYMMETRY_STARTS, smoothing: float = 0.01) -> FunctionalResult:
    """inf over eta of sigma(Omega \\ Delta) + sigma(Delta \\ Omega), divided by sigma(Omega)

    Delta ranges over caps of the same measure. The center search runs
    Nelder-Mead on a sigmoid-smoothed symmetric difference over one fixed
    sample cloud; the reported value uses hard indicators on that cloud.
    """
    omega = _check_region_measure(region)
    d = region.d
    cloud = sample_sphere(n, seed, d).points
    inside = region.contains(cloud)
    cos2 = 1.0 - omega ** (1.0 / d)
    target = inside.astype(float)

    def center(x: np.ndarray) -> np.ndarray:
        z = x[:d + 1] + 1j * x[d + 1:]
        norm = np.linalg.norm(z)
        return z / norm if norm > 0 else np.eye(d + 1, dtype=complex)[0]

    def smoothed(x: np.ndarray) -> float:
        overlap = np.abs(cloud @ np.conj(center(x))) ** 2
        soft = 0.5 * (1.0 + np.tanh((overlap - cos2) / (2.0 * smoothing)))
        return float(np.mean(np.abs(target - soft)))

    def hard(eta: np.ndarray) -> float:
        in_cap = np.abs(cloud @ np.conj(eta)) ** 2 > cos2
        return float(np.mean(inside ^ in_cap))

    members = cloud[inside]
    initial: List[np.ndarray] = []
    if members.shape[0] > 0:
        scatter = members.T @ np.conj(members)
        _, vecs = np.linalg.eigh(scatter)
        initial.append(vecs[:, -1])
        rng = make_generator(seed, STREAM_STARTS, 2)
        picks = rng.choice(members.shape[0], size=min(starts - 1, members.shape[0]), replace=False)
        initial.extend(members[picks])
    else:
        initial.append(np.eye(d + 1, dtype=complex)[0])

    best_value, best_eta = np.inf, initial[0]
    for eta0 in initial:
        x0 = np.concatenate([eta0.real, eta0.imag])
        res = minimize(smoothed, x0, method='Nelder-Mead',
                       options={'xatol': 1e-5, 'fatol': 1e-7, 'maxiter': 4000})
        for candidate in (center(res.x), eta0 / np.linalg.norm(eta0)):
            value = hard(candidate)
            if value < best_value:
                best_value, best_eta = value, candidate
    A = float(min(best_value / omega, 2.0))
    stderr = math.sqrt(best_value * (1.0 - best_value) / n) / omega
    return FunctionalResult("asymmetry", A, stderr, best_eta, {"measure": omega})


# ---------------------------------------------------------------------------
# Affine chart
# ---------------------------------------------------------------------------

def affine_ball_region(N: int, d: int, radius: float, center: Optional[Sequence[complex]] = None) -> Cap:
    """Fubini-Study ball of Euclidean radius `radius` about `center` (default 0) as a cap

    {|z|^2 < R^2} corresponds to {|zeta_1|^2 > 1/(1+R^2)}.
    """
    if not radius > 0:
        raise DomainError(f"Radius {radius} out of range (must be > 0)")
    w = np.zeros(d, dtype=complex) if center is None else np.asarray(center, dtype=complex).reshape(-1)
    eta = np.concatenate([[1.0], w]) / math.sqrt(1.0 + float(np.vdot(w, w).real))
    return Cap(eta, (1.0 / (1.0 + radius ** 2)) ** N, N)


def affine_concentration(q: AffinePoly, radius: float, center: Optional[Sequence[complex]] = None
                         ) -> FunctionalResult:
    """Concentration of a unit-norm affine polynomial on a ball"""
    return concentration(from_affine(q), affine_ball_region(q.N, q.d, radius, center))


def affine_distance(q: AffinePoly, seed: int = DEFAULT_SEED) -> FunctionalResult:
    return distance_to_kernels(from_affine(q), seed)


def affine_entropy(q: AffinePoly, phi: ConvexFn, **kwargs) -> FunctionalResult:
    return wehrl_entropy(from_affine(q), phi, **kwargs)
