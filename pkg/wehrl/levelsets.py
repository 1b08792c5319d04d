#!/usr/bin/env python3
"""
Distribution functions of U = |Q|^2, the extremal profile and deficit integrals
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc

from .constants import (CLAMP_TOL, CROSSING_GRID_POINTS, DEFAULT_WORKERS, FD_QUANTILE_FACTOR,
                        FD_QUANTILE_WINDOW, FD_RELATIVE_BANDWIDTH, NOISE_SIGMAS, PROFILE_GRID_POINTS,
                        SUP_TOL)
from .errors import DomainError
from .polyspace import HomPoly, evaluate
from .quadrature import STREAM_SPHERE, map_sphere_chunks

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


def mu0(t: ArrayLike, N: int, d: int) -> np.ndarray:
    """Extremal distribution function (1 - t^{1/N})^d, zero for t >= 1"""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return (1.0 - t ** (1.0 / N)) ** d


def mu0_inverse(s: ArrayLike, N: int, d: int) -> np.ndarray:
    """Inverse extremal profile (1 - s^{1/d})^N"""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    return (1.0 - s ** (1.0 / d)) ** N


@dataclass(frozen=True)
class ExtremalProfile:
    """Profile of zeta_1^N, known in closed form"""

    N: int
    d: int

    def mu(self, t: ArrayLike) -> np.ndarray:
        return mu0(t, self.N, self.d)

    def mu_inverse(self, s: ArrayLike) -> np.ndarray:
        return mu0_inverse(s, self.N, self.d)


def integral_mu0_inverse(s: ArrayLike, N: int, d: int) -> np.ndarray:
    """int_0^s (1 - x^{1/d})^N dx = d B(d, N+1) I_{s^{1/d}}(d, N+1)"""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    return d * beta_fn(d, N + 1) * betainc(d, N + 1, s ** (1.0 / d))


def integral_mu0(t: ArrayLike, N: int, d: int) -> np.ndarray:
    """int_0^t (1 - x^{1/N})^d dx = N B(N, d+1) I_{t^{1/N}}(N, d+1)"""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return N * beta_fn(N, d + 1) * betainc(N, d + 1, t ** (1.0 / N))


def extremal_integral(N: int, d: int, s: Optional[float] = None, t: Optional[float] = None) -> float:
    """Closed-form int_0^s mu0^{-1} (when s is given) or int_0^t mu0 (when t is given)"""
    if (s is None) == (t is None):
        raise DomainError("Pass exactly one of s or t")
    if s is not None:
        return float(integral_mu0_inverse(s, N, d))
    return float(integral_mu0(t, N, d))


@dataclass(frozen=True, eq=False)
class LevelProfile:
    """Empirical distribution function of U from a sorted sample"""

    values: np.ndarray
    N: int
    d: int
    T: float
    seed: Optional[int] = None

    @property
    def count(self) -> int:
        return int(self.values.size)

    def mu(self, t: ArrayLike) -> Union[float, np.ndarray]:
        """Fraction of samples with U > t; zero for t >= T"""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise DomainError("Level t out of range (must be >= 0)")
        above = self.count - np.searchsorted(self.values, t_arr, side='right')
        out = np.where(t_arr >= self.T, 0.0, above / self.count)
        return float(out) if out.ndim == 0 else out

    def mu_inverse(self, s: ArrayLike) -> Union[float, np.ndarray]:
        """Order statistic of rank ceil(s n) from the top

        Raises:
            DomainError: If s lies outside (0, 1)
        """
        s_arr = np.asarray(s, dtype=float)
        if np.any((s_arr <= 0.0) | (s_arr >= 1.0)):
            raise DomainError(f"s={s} out of range (must be in (0, 1))")
        k = np.ceil(s_arr * self.count).astype(np.int64)
        out = self.values[self.count - k]
        return float(out) if out.ndim == 0 else out

    def mu_stderr(self, t: ArrayLike) -> np.ndarray:
        m = np.asarray(self.mu(t), dtype=float)
        return np.sqrt(m * (1.0 - m) / self.count)

    @cached_property
    def _descending_cumsum(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.values[::-1])])

    def integral_mu(self, t_hat: float) -> Tuple[float, float]:
        """int_0^t_hat mu(t) dt = E[min(U, t_hat)], with stderr"""
        clipped = np.minimum(self.values, t_hat)
        return float(clipped.mean()), float(clipped.std(ddof=1) / math.sqrt(self.count))

    def integral_mu_inverse(self, s_hat: float) -> Tuple[float, float]:
        """int_0^s_hat of the empirical step function mu^{-1}, with stderr"""
        if not 0.0 < s_hat <= 1.0:
            raise DomainError(f"s_hat={s_hat} out of range (must be in (0, 1])")
        n = self.count
        k = min(int(math.floor(s_hat * n)), n)
        value = self._descending_cumsum[k] / n
        if k < n:
            value += (s_hat - k / n) * self.values[n - 1 - k]
        level = self.values[n - max(k, 1)]
        tail = np.where(self.values >= level, self.values, 0.0)
        return float(value), float(tail.std(ddof=1) / math.sqrt(n))


def _clamped_modulus(Q: HomPoly):
    def fn(points: np.ndarray) -> np.ndarray:
        U = np.abs(evaluate(Q, points)) ** 2
        peak = U.max()
        if peak > 1.0 + CLAMP_TOL:
            logger.warning(f"|Q|^2 = {peak:.15g} exceeds 1; clamping (check normalization)")
        return np.minimum(U, 1.0)
    return fn


def build_profile(Q: HomPoly, n: int, seed: int, T: Optional[float] = None,
                  workers: int = DEFAULT_WORKERS) -> LevelProfile:
    """Sample U = |Q|^2 at n uniform points and build its empirical profile

    Args:
        Q: Unit-norm polynomial
        n: Sample count
        seed: RNG seed (chunk substreams keyed by chunk index)
        T: Supremum of U; the sample maximum is used when omitted
        workers: Thread pool size for chunk evaluation

    Returns:
        LevelProfile
    """
    chunks = map_sphere_chunks(_clamped_modulus(Q), n, seed, Q.d, STREAM_SPHERE, workers)
    return from_values(np.concatenate(chunks), Q.N, Q.d, T, seed)


def from_values(values: np.ndarray, N: int, d: int, T: Optional[float] = None,
                seed: Optional[int] = None) -> LevelProfile:
    """Profile from precomputed samples of U"""
    values = np.sort(np.asarray(values, dtype=float).reshape(-1))
    if values.size < 2:
        raise DomainError("A profile needs at least two samples")
    top = float(values[-1])
    if T is None:
        T = top
    elif top > T + SUP_TOL:
        logger.warning(f"Sample maximum {top:.12g} exceeds the supplied T={T:.12g}; using the sample maximum")
        T = top
    values.setflags(write=False)
    return LevelProfile(values, int(N), int(d), float(T), seed)


@dataclass
class CrossingPoints:
    t_star: Optional[float]
    s_star: Optional[float]
    mu_at_t_star: Optional[float] = None
    gap: Optional[float] = None
    degenerate: bool = False


def crossing_points(profile: LevelProfile, noise_sigmas: float = NOISE_SIGMAS) -> CrossingPoints:
    """t* = sup{t in (0, T): mu(t) >= mu0(t)} and s* = mu0(t*)

    Returns a degenerate result when mu and mu0 agree within sampling noise.
    """
    N, d, T = profile.N, profile.d, profile.T
    if T >= 1.0 - SUP_TOL:
        return CrossingPoints(None, None, degenerate=True)
    grid = np.linspace(0.0, T, CROSSING_GRID_POINTS + 2)[1:-1]
    diff = profile.mu(grid) - mu0(grid, N, d)
    noise = noise_sigmas * profile.mu_stderr(grid) + 1.0 / profile.count
    if np.all(np.abs(diff) <= noise):
        logger.info("Profile matches the extremal profile within noise; no crossing")
        return CrossingPoints(None, None, degenerate=True)
    above = np.flatnonzero(diff >= 0)
    if above.size == 0:
        return CrossingPoints(None, None, degenerate=True)
    i = above[-1]
    lo = grid[i]
    hi = grid[i + 1] if i + 1 < grid.size else T
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if profile.mu(mid) >= mu0(mid, N, d):
            lo = mid
        else:
            hi = mid
    t_star = lo
    s_star = float(mu0(t_star, N, d))
    mu_t = float(profile.mu(t_star))
    return CrossingPoints(t_star, s_star, mu_t, abs(mu_t - s_star))


@dataclass
class DeficitIntegrals:
    inverse: Optional[float] = None
    inverse_stderr: Optional[float] = None
    distribution: Optional[float] = None
    distribution_stderr: Optional[float] = None


def deficit_integrals(profile: LevelProfile, s_hat: Optional[float] = None,
                      t_hat: Optional[float] = None) -> DeficitIntegrals:
    """int_0^s_hat (mu0^{-1} - mu^{-1}) ds and int_0^t_hat (mu - mu0) dt

    Both are non-negative up to sampling error.
    """
    out = DeficitIntegrals()
    if s_hat is not None:
        value, err = profile.integral_mu_inverse(s_hat)
        out.inverse = float(integral_mu0_inverse(s_hat, profile.N, profile.d)) - value
        out.inverse_stderr = err
    if t_hat is not None:
        if not 0.0 < t_hat <= 1.0:
            raise DomainError(f"t_hat={t_hat} out of range (must be in (0, 1])")
        value, err = profile.integral_mu(t_hat)
        out.distribution = value - float(integral_mu0(t_hat, profile.N, profile.d))
        out.distribution_stderr = err
    return out


def _audit_range(profile: LevelProfile, omega_tilde: float) -> Tuple[float, float]:
    if omega_tilde >= 1.0:
        return profile.T * 1e-3, profile.T
    return profile.mu_inverse(omega_tilde), profile.T


def _default_grid(lo: float, hi: float, points: int = 50) -> np.ndarray:
    return np.linspace(lo, hi, points + 2)[1:-1]


@dataclass
class DifferentialReport:
    status: str
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    noise: np.ndarray
    flagged: np.ndarray
    excluded: int = 0

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.flagged))


def _ode_rhs(m: np.ndarray, t: np.ndarray, N: int, d: int) -> np.ndarray:
    """(d/(N t)) mu^{1-1/d} (1 - mu^{1/d})"""
    m = np.clip(m, 0.0, 1.0)
    return d / (N * t) * m ** (1.0 - 1.0 / d) * (1.0 - m ** (1.0 / d))


def _bandwidth(profile: LevelProfile, t: float) -> float:
    n = profile.count
    i = int(np.searchsorted(profile.values, t))
    lo = profile.values[max(i - FD_QUANTILE_WINDOW, 0)]
    hi = profile.values[min(i + FD_QUANTILE_WINDOW, n - 1)]
    spacing = (hi - lo) / (2 * FD_QUANTILE_WINDOW)
    h = max(FD_RELATIVE_BANDWIDTH * profile.T, FD_QUANTILE_FACTOR * spacing)
    return min(h, 0.5 * t)


def check_differential_inequality(profile: LevelProfile, grid: Optional[Sequence[float]] = None,
                                  omega_tilde: float = 1.0,
                                  noise_sigmas: float = NOISE_SIGMAS) -> DifferentialReport:
    """Audit mu'(t) <= -(d/(N t)) mu^{1-1/d} (1 - mu^{1/d}) on (mu^{-1}(omega_tilde), T)

    The slope is compared in integrated form over [t-h, t+h]:
    mu(t+h) - mu(t-h) <= -int g, with Simpson's rule for the right side.
    """
    N, d, n = profile.N, profile.d, profile.count
    lo, hi = _audit_range(profile, omega_tilde)
    grid = _default_grid(lo, hi) if grid is None else np.asarray(grid, dtype=float)
    inside = (grid > lo) & (grid < hi)
    excluded = int(np.count_nonzero(~inside))
    t = grid[inside]
    lhs = np.empty(t.size)
    rhs = np.empty(t.size)
    noise = np.empty(t.size)
    disc = np.empty(t.size)
    for k, tk in enumerate(t):
        h = _bandwidth(profile, tk)
        pts = np.array([tk - h, tk, tk + h])
        m = np.asarray(profile.mu(pts), dtype=float)
        g = _ode_rhs(m, pts, N, d)
        simpson = h / 3.0 * (g[0] + 4.0 * g[1] + g[2])
        trapezoid = h * (g[0] + 2.0 * g[1] + g[2]) / 2.0
        lhs[k] = m[2] - m[0]
        rhs[k] = -simpson
        p = max(m[0] - m[2], 1.0 / n)
        eps = 1e-6
        dg = (_ode_rhs(m + eps, pts, N, d) - _ode_rhs(m - eps, pts, N, d)) / (2 * eps)
        sd = np.sqrt(np.clip(m * (1 - m), 1.0 / n, None) / n)
        rhs_var = (h / 3.0) ** 2 * np.sum((np.array([1.0, 4.0, 1.0]) * dg * sd) ** 2)
        noise[k] = math.sqrt(p * (1 - p) / n + rhs_var)
        disc[k] = abs(simpson - trapezoid)
    excess = lhs - rhs
    flagged = excess > noise_sigmas * noise + disc
    if t.size == 0 or np.count_nonzero(noise >= np.abs(rhs)) > t.size / 2:
        status = "inconclusive"
        logger.warning(f"Differential-inequality audit inconclusive ({n} samples, {t.size} grid points)")
    elif np.any(flagged):
        status = "violations"
    else:
        status = "pass"
    return DifferentialReport(status, t, lhs, rhs, noise, flagged, excluded)


@dataclass
class RatioReport:
    status: str
    t: np.ndarray
    ratio: np.ndarray
    noise: np.ndarray
    flagged: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.flagged))


def check_ratio_monotonicity(profile: LevelProfile, grid: Optional[Sequence[float]] = None,
                             omega_tilde: float = 1.0, noise_sigmas: float = NOISE_SIGMAS) -> RatioReport:
    """Audit that (mu^{1/d} - mu0^{1/d}) / t^{1/N} is non-increasing on (t^omega_tilde, T)"""
    N, d, n = profile.N, profile.d, profile.count
    lo, hi = _audit_range(profile, omega_tilde)
    grid = _default_grid(lo, hi) if grid is None else np.asarray(grid, dtype=float)
    t = grid[(grid > lo) & (grid < hi)]
    m = np.asarray(profile.mu(t), dtype=float)
    ratio = (m ** (1.0 / d) - mu0(t, N, d) ** (1.0 / d)) / t ** (1.0 / N)
    m_safe = np.maximum(m, 1.0 / n)
    noise = (m_safe ** (1.0 / d - 1.0) / d) * np.sqrt(m_safe * (1 - m_safe) / n) / t ** (1.0 / N)
    rises = np.diff(ratio)
    flagged = rises > noise_sigmas * np.sqrt(noise[1:] ** 2 + noise[:-1] ** 2)
    if t.size < 2:
        status = "inconclusive"
    elif np.any(flagged):
        status = "violations"
    else:
        status = "pass"
    return RatioReport(status, t, ratio, noise, flagged)


PROFILE_COLUMNS = ('t', 'mu_empirical', 'mu0', 'diff')


def profile_rows(profile: LevelProfile, points: int = PROFILE_GRID_POINTS) -> List[Dict[str, float]]:
    """(t, mu_empirical, mu0, diff) on a uniform t-grid over [0, T]"""
    grid = np.linspace(0.0, profile.T, points)
    emp = np.asarray(profile.mu(grid), dtype=float)
    ext = mu0(grid, profile.N, profile.d)
    return [dict(zip(PROFILE_COLUMNS, (float(x) for x in row))) for row in zip(grid, emp, ext, emp - ext)]


def export_profile_csv(profile: LevelProfile, path: str, points: int = PROFILE_GRID_POINTS) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(PROFILE_COLUMNS)
        for row in profile_rows(profile, points):
            writer.writerow([repr(row[key]) for key in PROFILE_COLUMNS])
