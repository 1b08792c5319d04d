#!/usr/bin/env python3
"""
Stability sweeps: numerical checks of the entropy/concentration inequalities,
their stability versions, the sharpness family and the Bargmann-Fock limit

Every sweep item draws its randomness from the substream (seed, STREAM_ITEMS,
item), so records are reproducible regardless of worker count.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .config import SweepConfig
from .constants import DEFICIT_SIGMAS, IDENTITY_TOL, KERNEL_DISTANCE, RATIO_COLLAPSE, RESOLVED_DISTANCE
from .errors import ConvergenceError, DomainError
from .functionals import (Cap, ConvexFn, Region, SupResult, affine_ball_region, alpha_coefficient, cap_threshold,
                          cap_union, concentration, concentration_deficit, distance_from_sup, distance_to_kernels,
                          entropy_deficit, extremal_concentration, extremal_entropy, fraenkel_asymmetry,
                          parse_phi, region_concentration_deficit, stability_coefficient, sup_modulus,
                          wehrl_entropy)
from .levelsets import build_profile, check_differential_inequality, check_ratio_monotonicity
from .polyspace import (AffinePoly, HomPoly, basis_size, bombieri_inner, fock_rescale, from_affine, random_polynomial,
                        random_sphere_point, reproducing_kernel)
from .quadrature import STREAM_ITEMS, derive_seed, make_generator, monte_carlo_mean, sample_gaussian_weight
from .states import (DensityState, near_coherent, random_state, state_concentration_deficit,
                     state_entropy_deficit, trace_distance_to_coherent)

logger = logging.getLogger(__name__)

DebugCallback = Optional[Callable[[str], None]]

STATUS_OK = "ok"
STATUS_EXTREMAL = "extremal"
STATUS_VIOLATION = "violation"
STATUS_UNRESOLVED = "unresolved"
STATUS_LINEAR = "excluded: linear"
STATUS_SUB_THRESHOLD = "possible N < N_Phi regime"


@dataclass
class StabilityRecord:
    """One (polynomial or state, functional, parameter) evaluation of a sweep"""

    sweep: str
    item: int
    functional: str
    parameter: str
    d: int
    N: int
    eps: Optional[float] = None
    T: Optional[float] = None
    D2: Optional[float] = None
    asymmetry2: Optional[float] = None
    deficit: Optional[float] = None
    deficit_stderr: Optional[float] = None
    coefficient: Optional[float] = None
    alpha: Optional[float] = None
    ratio: Optional[float] = None
    implied_constant: Optional[float] = None
    status: str = STATUS_OK

    def to_row(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SweepItem:
    index: int
    seed: int
    poly: Optional[HomPoly] = None
    state: Optional[DensityState] = None
    eps: Optional[float] = None


def _notify(debug_callback: DebugCallback, message: str) -> None:
    logger.debug(message)
    if debug_callback:
        debug_callback(message)


def _tolerance(stderr: Optional[float]) -> float:
    if stderr is None:
        return IDENTITY_TOL
    return max(DEFICIT_SIGMAS * stderr, IDENTITY_TOL)


def _eps_grid(config: SweepConfig) -> np.ndarray:
    if config.count == 1:
        return np.array([config.eps_min])
    return np.geomspace(config.eps_min, config.eps_max, config.count)


# ---------------------------------------------------------------------------
# Item generators
# ---------------------------------------------------------------------------

def near_kernel_polynomial(d: int, N: int, eps: float, rng: np.random.Generator) -> HomPoly:
    """(K_N(., eta) + eps P) / |...| with P a random unit polynomial orthogonal to the kernel"""
    K = reproducing_kernel(N, random_sphere_point(d, rng))
    P = random_polynomial(d, N, rng)
    P = P - K * bombieri_inner(P, K)
    return (K + P.normalized() * eps).normalized()


def generate_items(config: SweepConfig) -> List[SweepItem]:
    """Polynomials for a sweep, one substream per item

    Generators: gaussian (unitarily invariant random polynomials), near_kernel
    (log-spaced eps in [eps_min, eps_max]), kernel, file (one polynomial).
    """
    from .formats import load_poly

    if config.generator == 'file':
        poly = load_poly(config.poly_file)
        if not isinstance(poly, HomPoly):
            poly = from_affine(poly)
        return [SweepItem(0, derive_seed(config.seed, STREAM_ITEMS, 0), poly.normalized())]
    eps = _eps_grid(config)
    items = []
    for i in range(config.count):
        rng = make_generator(config.seed, STREAM_ITEMS, i)
        seed = derive_seed(config.seed, STREAM_ITEMS, i)
        if config.generator == 'gaussian':
            items.append(SweepItem(i, seed, random_polynomial(config.d, config.N, rng)))
        elif config.generator == 'kernel':
            items.append(SweepItem(i, seed, reproducing_kernel(config.N, random_sphere_point(config.d, rng)), eps=0.0))
        else:
            e = float(eps[i])
            items.append(SweepItem(i, seed, near_kernel_polynomial(config.d, config.N, e, rng), eps=e))
    return items


def generate_state_items(config: SweepConfig) -> List[SweepItem]:
    """Density states: near-coherent mixtures (near_kernel/kernel) or random states (gaussian)"""
    eps = _eps_grid(config)
    items = []
    for i in range(config.count):
        rng = make_generator(config.seed, STREAM_ITEMS, i)
        seed = derive_seed(config.seed, STREAM_ITEMS, i)
        if config.generator == 'gaussian':
            rank = min(config.state_rank, basis_size(config.d, config.N))
            items.append(SweepItem(i, seed, state=random_state(config.d, config.N, rank, rng)))
        else:
            e = 0.0 if config.generator == 'kernel' else float(eps[i])
            items.append(SweepItem(i, seed, state=near_coherent(config.d, config.N, e, rng, config.state_rank),
                                   eps=e))
    return items


def _run_items(task: Callable[[SweepItem], List[Any]], items: Sequence[SweepItem], workers: int,
               label: str, debug_callback: DebugCallback) -> List[Any]:
    """Run independent items in a thread pool; results keep item order"""
    results: List[Any] = [None] * len(items)
    if workers <= 1 or len(items) <= 1:
        for count, item in enumerate(items, 1):
            results[count - 1] = task(item)
            _notify(debug_callback, f"{label}: item {item.index} finished ({count}/{len(items)})")
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(task, item): k for k, item in enumerate(items)}
            for count, future in enumerate(as_completed(futures), 1):
                k = futures[future]
                results[k] = future.result()
                _notify(debug_callback, f"{label}: item {items[k].index} finished ({count}/{len(items)})")
    return [row for rows in results for row in rows]


def _sup(Q: HomPoly, seed: int) -> SupResult:
    try:
        return sup_modulus(Q, seed)
    except ConvergenceError as e:
        logger.warning(f"Using best-so-far sup for item seed {seed}: {e}")
        if e.best is None:
            raise
        return e.best


def _classify(deficit: float, stderr: Optional[float], D2: float) -> str:
    if deficit < -_tolerance(stderr):
        return STATUS_VIOLATION
    if math.sqrt(D2) < KERNEL_DISTANCE:
        return STATUS_EXTREMAL
    if abs(deficit) <= _tolerance(stderr):
        return STATUS_UNRESOLVED
    return STATUS_OK


def _ratio(deficit: float, D2: float) -> Optional[float]:
    if math.sqrt(D2) <= KERNEL_DISTANCE:
        return None
    return deficit / D2


# ---------------------------------------------------------------------------
# Concentration stability
# ---------------------------------------------------------------------------

def random_test_regions(d: int, N: int, omega: float, count: int, rng: np.random.Generator,
                        samples: int, seed: int) -> List[Region]:
    """Alternating single caps and unions of two caps of measure omega/2 each"""
    regions: List[Region] = []
    for k in range(count):
        if k % 2 == 0:
            regions.append(Cap(random_sphere_point(d, rng), cap_threshold(N, d, omega), N))
        else:
            t = cap_threshold(N, d, omega / 2.0)
            caps = [Cap(random_sphere_point(d, rng), t, N) for _ in range(2)]
            regions.append(cap_union(caps, False, samples, seed + k))
    return regions


def sweep_concentration_stability(config: SweepConfig, debug_callback: DebugCallback = None
                                  ) -> List[StabilityRecord]:
    """Relative concentration deficits against D_N(Q)^2 and the asymmetry of test regions

    For each polynomial and omega: the superlevel-set deficit with the
    coefficients N^d int_omega^omega_tilde (1 - s^{1/d})^N ds and alpha(omega),
    then one record per random test region with its Fraenkel asymmetry.

    Raises:
        ConfigError: When an omega is not below omega_tilde
    """
    config.validate()
    config.validate_stability()
    omega_tilde = config.resolved_omega_tilde
    d, N = config.d, config.N

    def task(item: SweepItem) -> List[StabilityRecord]:
        Q = item.poly
        sup = _sup(Q, item.seed)
        D2 = distance_from_sup(sup.T) ** 2
        rng = make_generator(item.seed, STREAM_ITEMS, 1)
        rows = []
        for omega in config.omegas:
            coefficient = stability_coefficient(omega, N, d, omega_tilde)
            alpha = alpha_coefficient(omega, N, d, omega_tilde)
            result = concentration_deficit(Q, omega, config.samples, item.seed, sup, workers=1)
            ratio = _ratio(result.value, D2)
            implied = None
            if result.value > _tolerance(result.stderr) and ratio is not None:
                implied = D2 * coefficient / result.value
            rows.append(StabilityRecord("concentration", item.index, "concentration", f"omega={omega:g}", d, N,
                                        item.eps, sup.T, D2, None, result.value, result.stderr, coefficient,
                                        alpha, ratio, implied, _classify(result.value, result.stderr, D2)))
            regions = random_test_regions(d, N, omega, config.random_regions, rng,
                                          config.asymmetry_samples, item.seed)
            for k, region in enumerate(regions):
                deficit = region_concentration_deficit(Q, region, config.samples, item.seed + k, workers=1)
                A2 = None
                implied = None
                if config.asymmetry:
                    A = fraenkel_asymmetry(region, config.asymmetry_samples, item.seed + k)
                    A2 = A.value ** 2
                    if deficit.value > _tolerance(deficit.stderr):
                        implied = A2 * alpha / deficit.value
                status = STATUS_VIOLATION if deficit.value < -_tolerance(deficit.stderr) else STATUS_OK
                rows.append(StabilityRecord("concentration", item.index, "region",
                                            f"{region.describe()['kind']}:omega={omega:g}", d, N, item.eps, sup.T,
                                            D2, A2, deficit.value, deficit.stderr, coefficient, alpha,
                                            None, implied, status))
        return rows

    items = generate_items(config)
    logger.info(f"Concentration sweep: {len(items)} polynomials, d={d}, N={N}, omegas={config.omegas}, "
                f"omega_tilde={omega_tilde}")
    return _run_items(task, items, config.workers, "sweep-conc", debug_callback)


# ---------------------------------------------------------------------------
# Entropy stability
# ---------------------------------------------------------------------------

def flag_ratio_collapse(records: List[StabilityRecord]) -> int:
    """Mark resolved records whose ratio falls far below the median of their Phi group

    Returns:
        Number of flagged records
    """
    flagged = 0
    groups: Dict[str, List[StabilityRecord]] = {}
    for rec in records:
        if rec.ratio is not None and rec.D2 is not None and math.sqrt(rec.D2) > RESOLVED_DISTANCE:
            groups.setdefault(rec.parameter, []).append(rec)
    for parameter, group in groups.items():
        median = float(np.median([r.ratio for r in group]))
        if median <= 0:
            continue
        for rec in group:
            if rec.status == STATUS_OK and rec.ratio < RATIO_COLLAPSE * median:
                rec.status = STATUS_SUB_THRESHOLD
                flagged += 1
    if flagged:
        logger.warning(f"{flagged} record(s) with a collapsing deficit/D^2 ratio")
    return flagged


def sweep_wehrl_stability(config: SweepConfig, debug_callback: DebugCallback = None) -> List[StabilityRecord]:
    """Entropy deficits S(Q) - S(zeta_1^N) against D_N(Q)^2 for every Phi

    Linear Phi is reported as excluded; collapsing ratios are flagged, not failed.
    """
    config.validate()
    d, N = config.d, config.N
    phis = [parse_phi(text) for text in config.phi]

    def task(item: SweepItem) -> List[StabilityRecord]:
        Q = item.poly
        sup = _sup(Q, item.seed)
        D2 = distance_from_sup(sup.T) ** 2
        rows = []
        for phi in phis:
            if phi.is_linear:
                rows.append(StabilityRecord("wehrl", item.index, "entropy", phi.name, d, N, item.eps, sup.T, D2,
                                            status=STATUS_LINEAR))
                continue
            result = entropy_deficit(Q, phi, config.samples, item.seed, sup, config.rule_degree, workers=1)
            ratio = _ratio(result.value, D2)
            implied = D2 / result.value if ratio is not None and result.value > _tolerance(result.stderr) else None
            rows.append(StabilityRecord("wehrl", item.index, "entropy", phi.name, d, N, item.eps, sup.T, D2, None,
                                        result.value, result.stderr, None, None, ratio, implied,
                                        _classify(result.value, result.stderr, D2)))
        return rows

    items = generate_items(config)
    logger.info(f"Wehrl sweep: {len(items)} polynomials, d={d}, N={N}, phi={[p.name for p in phis]}")
    records = _run_items(task, items, config.workers, "sweep-wehrl", debug_callback)
    flag_ratio_collapse(records)
    return records


# ---------------------------------------------------------------------------
# Lieb-Solovej inequalities
# ---------------------------------------------------------------------------

def sweep_lieb_solovej(config: SweepConfig, debug_callback: DebugCallback = None) -> List[StabilityRecord]:
    """S(Q) >= S(zeta_1^N) for every Phi and C_Omega(Q) <= C_Omega*(zeta_1^N) on random caps

    The deficit column holds the gap to the bound; negative beyond tolerance is a violation.
    """
    config.validate()
    d, N = config.d, config.N
    phis = [parse_phi(text) for text in config.phi]
    bounds = {phi.name: extremal_entropy(N, d, phi) for phi in phis}

    def task(item: SweepItem) -> List[StabilityRecord]:
        Q = item.poly
        rng = make_generator(item.seed, STREAM_ITEMS, 2)
        rows = []
        for phi in phis:
            S = wehrl_entropy(Q, phi, config.rule_degree, config.samples, item.seed, workers=1)
            gap = S.value - bounds[phi.name]
            status = STATUS_VIOLATION if gap < -_tolerance(S.stderr) else STATUS_OK
            rows.append(StabilityRecord("lieb_solovej", item.index, "entropy", phi.name, d, N, item.eps,
                                        deficit=gap, deficit_stderr=S.stderr, status=status))
        for k in range(max(config.random_regions, 1)):
            omega = float(rng.uniform(0.02, 0.98))
            cap = Cap(random_sphere_point(d, rng), cap_threshold(N, d, omega), N)
            C = concentration(Q, cap)
            gap = extremal_concentration(N, d, cap.measure()) - C.value
            status = STATUS_VIOLATION if gap < -IDENTITY_TOL else STATUS_OK
            rows.append(StabilityRecord("lieb_solovej", item.index, "concentration", f"cap:omega={omega:.6f}",
                                        d, N, item.eps, deficit=gap, deficit_stderr=None, status=status))
        return rows

    items = generate_items(config)
    logger.info(f"Lieb-Solovej sweep: {len(items)} polynomials, d={d}, N={N}")
    return _run_items(task, items, config.workers, "sweep-ls", debug_callback)


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def sweep_state_stability(config: SweepConfig, debug_callback: DebugCallback = None) -> List[StabilityRecord]:
    """Entropy and concentration deficits of density states against D_N(rho)^2 (trace distance)"""
    config.validate()
    config.validate_stability()
    omega_tilde = config.resolved_omega_tilde
    d, N = config.d, config.N
    phis = [parse_phi(text) for text in config.phi]

    def task(item: SweepItem) -> List[StabilityRecord]:
        rho = item.state
        distance = trace_distance_to_coherent(rho, item.seed)
        D2 = distance.value ** 2
        center = distance.argmax
        rows = []
        for phi in phis:
            if phi.is_linear:
                rows.append(StabilityRecord("states", item.index, "state_entropy", phi.name, d, N, item.eps,
                                            D2=D2, status=STATUS_LINEAR))
                continue
            result = state_entropy_deficit(rho, phi, center, config.rule_degree, config.samples, item.seed, 1)
            ratio = _ratio(result.value, D2)
            implied = D2 / result.value if ratio is not None and result.value > _tolerance(result.stderr) else None
            rows.append(StabilityRecord("states", item.index, "state_entropy", phi.name, d, N, item.eps,
                                        None, D2, None, result.value, result.stderr, None, None, ratio, implied,
                                        _classify(result.value, result.stderr, D2)))
        for omega in config.omegas:
            coefficient = stability_coefficient(omega, N, d, omega_tilde)
            result = state_concentration_deficit(rho, omega, center, config.samples, item.seed, 1)
            ratio = _ratio(result.value, D2)
            implied = None
            if ratio is not None and result.value > _tolerance(result.stderr):
                implied = D2 * coefficient / result.value
            rows.append(StabilityRecord("states", item.index, "state_concentration", f"omega={omega:g}", d, N,
                                        item.eps, None, D2, None, result.value, result.stderr, coefficient,
                                        alpha_coefficient(omega, N, d, omega_tilde), ratio, implied,
                                        _classify(result.value, result.stderr, D2)))
        return rows

    items = generate_state_items(config)
    logger.info(f"State sweep: {len(items)} states, d={d}, N={N}, rank={config.state_rank}")
    records = _run_items(task, items, config.workers, "sweep-states", debug_callback)
    flag_ratio_collapse(records)
    return records


# ---------------------------------------------------------------------------
# Sharpness family
# ---------------------------------------------------------------------------

@dataclass
class SharpnessReport:
    d: int
    N: int
    phi: str
    rows: List[Dict[str, Any]]
    slope_distance: Optional[float]
    slope_deficit: Optional[float]
    ratio_spread: Optional[float]
    status: str

    def summary(self) -> Dict[str, Any]:
        return {"d": self.d, "N": self.N, "phi": self.phi, "slope_distance": self.slope_distance,
                "slope_deficit": self.slope_deficit, "ratio_spread": self.ratio_spread, "status": self.status}


def sharpness_polynomial(d: int, N: int, eps: float) -> HomPoly:
    """Homogenization of 1 + eps z_1: (zeta_1^N + eps zeta_1^{N-1} zeta_2) / sqrt(1 + eps^2/N)"""
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"eps={eps} out of range (must be in [0, 1])")
    lead = (N,) + (0,) * d
    mixed = (N - 1, 1) + (0,) * (d - 1)
    return HomPoly.from_terms(d, N, {lead: 1.0, mixed: eps}) / math.sqrt(1.0 + eps ** 2 / N)


def _log_slope(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    if len(x) < 2:
        return None
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def sharpness_family(d: int, N: int, eps_list: Sequence[float], phi: Optional[ConvexFn] = None,
                     omega: Optional[float] = None, n: int = 200_000, seed: int = 0,
                     rule_degree: int = 16, workers: int = 1) -> SharpnessReport:
    """D_N and deficits along q = 1 + eps z_1 with log-log fitted exponents

    The kernel closest to this family is (1 + (eps/N) z_1)^N normalized, so
    D_N grows like eps^2 and the entropy deficit like D_N^2. The report
    carries both fitted slopes and the spread (max/min) of deficit/D^2.
    """
    phi = phi if phi is not None else ConvexFn.xlogx()
    rows = []
    for k, eps in enumerate(eps_list):
        Q = sharpness_polynomial(d, N, float(eps))
        item_seed = derive_seed(seed, STREAM_ITEMS, k)
        sup = _sup(Q, item_seed)
        D = distance_from_sup(sup.T)
        row: Dict[str, Any] = {"eps": float(eps), "T": sup.T, "D": D, "D2": D ** 2,
                               "norm": Q.norm()}
        if eps == 0.0:
            row.update({"entropy_deficit": 0.0, "entropy_deficit_stderr": None, "ratio": None})
        else:
            result = entropy_deficit(Q, phi, n, item_seed, sup, rule_degree, workers)
            row.update({"entropy_deficit": result.value, "entropy_deficit_stderr": result.stderr,
                        "ratio": _ratio(result.value, D ** 2)})
        if omega is not None:
            conc = concentration_deficit(Q, omega, n, item_seed, sup, workers)
            row.update({"concentration_deficit": conc.value, "concentration_deficit_stderr": conc.stderr})
        rows.append(row)
    fit = [r for r in rows if r["eps"] > 0 and r["D"] > KERNEL_DISTANCE and r["entropy_deficit"] > 0]
    slope_distance = _log_slope([r["eps"] for r in fit], [r["D"] for r in fit])
    slope_deficit = _log_slope([r["eps"] for r in fit], [r["entropy_deficit"] for r in fit])
    ratios = [r["ratio"] for r in fit if r["ratio"] is not None]
    spread = float(max(ratios) / min(ratios)) if ratios and min(ratios) > 0 else None
    status = STATUS_OK
    if slope_distance is None or slope_deficit is None:
        status = STATUS_UNRESOLVED
    elif spread is None or spread >= 2.0 or abs(slope_deficit - 2.0 * slope_distance) > 0.2:
        status = "not sharp"
    logger.info(f"Sharpness d={d} N={N} {phi.name}: slope(D)={slope_distance}, slope(deficit)={slope_deficit}, "
                f"ratio spread={spread}")
    return SharpnessReport(d, N, phi.name, rows, slope_distance, slope_deficit, spread, status)


# ---------------------------------------------------------------------------
# Bargmann-Fock limit
# ---------------------------------------------------------------------------

@dataclass
class FockReport:
    d: int
    area: float
    phi: str
    oracle: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    converging: Optional[bool] = None

    def summary(self) -> Dict[str, Any]:
        return {"d": self.d, "area": self.area, "phi": self.phi, "oracle": self.oracle,
                "converging": self.converging}


def fock_norm_squared(f: AffinePoly) -> float:
    """int |F|^2 e^{-pi |z|^2} dz = sum |c_beta|^2 beta! / pi^{|beta|}"""
    total = 0.0
    for beta, value in f.terms().items():
        log_weight = float(np.sum(gammaln(np.asarray(beta) + 1.0))) - sum(beta) * math.log(math.pi)
        total += abs(value) ** 2 * math.exp(log_weight)
    return total


def ball_radius(d: int, area: float) -> float:
    """Radius r of the Euclidean ball in C^d with volume pi^d r^{2d} / d! = area"""
    if not area > 0:
        raise DomainError(f"Area {area} out of range (must be > 0)")
    return (area * math.factorial(d) / math.pi ** d) ** (1.0 / (2 * d))


def fock_sup(f: AffinePoly, z: np.ndarray, norm2: float, starts: int = 8) -> float:
    """sup |F|^2 e^{-pi |z|^2} / ||F||^2, multistart Nelder-Mead from the best samples"""
    d = f.d

    def density(x: np.ndarray) -> float:
        w = x[:d] + 1j * x[d:]
        return float(abs(f.evaluate(w)) ** 2 * math.exp(-math.pi * float(np.vdot(w, w).real)) / norm2)

    values = np.abs(f.evaluate(z)) ** 2 * np.exp(-math.pi * np.sum(np.abs(z) ** 2, axis=1)) / norm2
    best = float(values.max())
    for w in z[np.argsort(values)[::-1][:starts]]:
        res = minimize(lambda x: -density(x), np.concatenate([w.real, w.imag]), method='Nelder-Mead',
                       options={'xatol': 1e-10, 'fatol': 1e-14, 'maxiter': 4000})
        best = max(best, -float(res.fun))
    return min(best, 1.0)


def fock_oracle(f: AffinePoly, area: float, phi: ConvexFn, n: int, seed: int) -> Dict[str, Any]:
    """Bargmann-Fock concentration on the centered ball of volume `area`, entropy and distance

    Monte Carlo with the Gaussian weight e^{-pi |z|^2}; ||F|| is exact.
    """
    d = f.d
    z = sample_gaussian_weight(n, seed, d).points
    norm2 = fock_norm_squared(f)
    r = ball_radius(d, area)
    F2 = np.abs(f.evaluate(z)) ** 2 / norm2
    inside = np.sum(np.abs(z) ** 2, axis=1) < r ** 2
    conc, conc_err = monte_carlo_mean(F2 * inside)
    g = np.exp(-math.pi * np.sum(np.abs(z) ** 2, axis=1))
    u = np.clip(F2 * g, 0.0, 1.0)
    ent, ent_err = monte_carlo_mean(-phi(u) / g)
    T = fock_sup(f, z, norm2)
    return {"concentration": conc, "concentration_stderr": conc_err, "entropy": ent, "entropy_stderr": ent_err,
            "T": T, "D": distance_from_sup(T), "radius": r}


def fock_limit_check(f: AffinePoly, degrees: Sequence[int], area: float = 1.0, phi: Optional[ConvexFn] = None,
                     n: int = 200_000, seed: int = 0, rule_degree: int = 16, workers: int = 1) -> FockReport:
    """Projective functionals of q^N(z) = f(sqrt(N/pi) z) against the Bargmann-Fock oracle

    The ball of volume `area` is rescaled to radius sqrt(pi/N) r, which is a
    cap about e_1. Convergence holds when the last degree is at least as close
    to the oracle as the first, up to 2 stderr.
    """
    phi = phi if phi is not None else ConvexFn.xlogx()
    degrees = [int(N) for N in degrees]
    if not degrees or any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise DomainError(f"Degrees {degrees} must be a non-empty increasing list")
    if degrees[0] < f.N:
        raise DomainError(f"Degree {degrees[0]} is below the degree {f.N} of f")
    oracle = fock_oracle(f, area, phi, n, seed)
    report = FockReport(f.d, area, phi.name, oracle)
    r = oracle["radius"]
    for N in degrees:
        q = fock_rescale(f, N).normalized()
        Q = from_affine(q)
        radius = math.sqrt(math.pi / N) * r
        conc = concentration(Q, affine_ball_region(N, f.d, radius))
        ent = wehrl_entropy(Q, phi, rule_degree, n, seed, workers)
        dist = distance_to_kernels(Q, seed)
        report.rows.append({
            "N": N, "concentration": conc.value, "concentration_stderr": conc.stderr,
            "concentration_gap": conc.value - oracle["concentration"],
            "entropy": ent.value, "entropy_stderr": ent.stderr, "entropy_gap": ent.value - oracle["entropy"],
            "D": dist.value, "D_gap": dist.value - oracle["D"],
        })
        logger.info(f"Fock limit N={N}: C={conc.value:.6f} (oracle {oracle['concentration']:.6f}), "
                    f"S={ent.value:.6f} (oracle {oracle['entropy']:.6f})")
    first, last = report.rows[0], report.rows[-1]
    err = oracle["concentration_stderr"] + (last["concentration_stderr"] or 0.0)
    report.converging = abs(last["concentration_gap"]) <= abs(first["concentration_gap"]) + 2.0 * err
    return report


# ---------------------------------------------------------------------------
# Differential-inequality audit
# ---------------------------------------------------------------------------

@dataclass
class AuditRecord:
    item: int
    d: int
    N: int
    T: float
    samples: int
    ode_status: str
    ode_points: int
    ode_excluded: int
    ode_violations: int
    ratio_status: str
    ratio_violations: int

    def to_row(self) -> Dict[str, Any]:
        return asdict(self)


def audit_polynomial(Q: HomPoly, index: int, samples: int, seed: int, omega_tilde: float,
                     workers: int = 1) -> AuditRecord:
    sup = _sup(Q, seed)
    profile = build_profile(Q, samples, seed, T=sup.T, workers=workers)
    ode = check_differential_inequality(profile, omega_tilde=omega_tilde)
    ratio = check_ratio_monotonicity(profile, omega_tilde=omega_tilde)
    return AuditRecord(index, Q.d, Q.N, sup.T, samples, ode.status, int(ode.t.size), ode.excluded,
                       ode.violations, ratio.status, ratio.violations)


def differential_inequality_audit(config: SweepConfig, polys: Optional[Sequence[HomPoly]] = None,
                                  debug_callback: DebugCallback = None) -> List[AuditRecord]:
    """Distribution-function ODE and ratio-monotonicity audits on (mu^{-1}(omega_tilde), T)

    Uses `config.audit_samples` per polynomial; the polynomials default to
    the configured generator.
    """
    config.validate()
    omega_tilde = config.resolved_omega_tilde
    if polys is None:
        items = generate_items(config)
    else:
        items = [SweepItem(i, derive_seed(config.seed, STREAM_ITEMS, i), Q) for i, Q in enumerate(polys)]
    if config.audit_samples < 1_000_000:
        logger.warning(f"Audit with {config.audit_samples} samples per polynomial may be inconclusive")
    records = []
    for item in items:
        rec = audit_polynomial(item.poly, item.index, config.audit_samples, item.seed, omega_tilde, config.workers)
        _notify(debug_callback, f"audit: item {item.index} {rec.ode_status}/{rec.ratio_status}")
        records.append(rec)
    return records


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------

def summarize(records: Sequence[Any], runtime: float) -> Dict[str, Any]:
    """{min_ratio, max_ratio, violations, runtime, records, statuses}"""
    ratios = [r.ratio for r in records if getattr(r, 'ratio', None) is not None]
    statuses: Dict[str, int] = {}
    violations = 0
    for rec in records:
        for key in ('status', 'ode_status', 'ratio_status'):
            value = getattr(rec, key, None)
            if value is not None:
                statuses[value] = statuses.get(value, 0) + 1
        if getattr(rec, 'status', None) == STATUS_VIOLATION:
            violations += 1
        violations += getattr(rec, 'ode_violations', 0) + getattr(rec, 'ratio_violations', 0)
    return {
        "min_ratio": min(ratios) if ratios else None,
        "max_ratio": max(ratios) if ratios else None,
        "violations": violations,
        "runtime": runtime,
        "records": len(records),
        "statuses": dict(sorted(statuses.items())),
    }


class Stopwatch:
    """Wall-clock timer for sweep summaries"""

    def __init__(self):
        self.start = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.start
