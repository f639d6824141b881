"""Zero counting and argument increments for truncated series.

Two independent counters are provided: a certified argument-principle
winding count along circles, and an Aberth-Ehrlich root finder.  They are
meant to cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import gammaln

from . import kernels
from .gaussian_core import SeedLineage, VarianceProfile, sample_coefficients
from .series import SeriesSample, OutsideCertifiedRadius, log_term_magnitudes, truncation_order

__all__ = [
    "Arc",
    "CountMethod",
    "ZeroCountResult",
    "ZeroOnContour",
    "RootFindingError",
    "IncrementResult",
    "circle_increment",
    "arc_argument_increment",
    "expected_increment",
    "arc_delta",
    "count_zeros_winding",
    "count_zeros_roots",
    "find_roots",
    "sample_counts",
    "sup_power_gauss",
]

_TWO_PI = 2.0 * math.pi
# target dbound*dtheta / |F| on the initial grid
_GRID_RATIO = 0.25
_MAX_DEPTH = 50
_RETRY_STEP = 1e-6
_MAX_RETRIES = 8


class ZeroOnContour(ArithmeticError):
    """The function (numerically) vanishes on the integration contour."""


class RootFindingError(ArithmeticError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class Arc:
    """Counterclockwise arc ``center + R e^{i theta}``, ``theta_start <= theta <= theta_end``."""

    R: float
    theta_start: float
    theta_end: float
    center: complex = 0j

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        span = self.theta_end - self.theta_start
        if not 0 < span <= _TWO_PI + 1e-12:
            raise ValueError("need 0 < theta_end - theta_start <= 2*pi")

    @classmethod
    def circle(cls, R: float, center: complex = 0j) -> "Arc":
        return cls(R, 0.0, _TWO_PI, center)

    @property
    def span(self) -> float:
        return self.theta_end - self.theta_start

    @property
    def length(self) -> float:
        return self.R * self.span

    @property
    def is_full_circle(self) -> bool:
        return abs(self.span - _TWO_PI) <= 1e-12

    @property
    def midpoint(self) -> complex:
        """The point ``w`` at the middle of the arc."""
        t = 0.5 * (self.theta_start + self.theta_end)
        return self.center + self.R * complex(math.cos(t), math.sin(t))

    def shifted(self, w: complex) -> "Arc":
        """The same arc translated by ``-w``."""
        return replace(self, center=self.center - w)


class CountMethod(str, Enum):
    WINDING = "winding"
    ROOTS = "roots"


@dataclass(frozen=True)
class ZeroCountResult:
    """``min_modulus_seen`` is the smallest ``f*`` met on the contour for the
    winding method, and the smallest distance from a root to the circle for
    the roots method."""

    count: int
    method: CountMethod
    subdivisions: int
    min_modulus_seen: float
    R: float
    near_contour: bool = False


@dataclass(frozen=True)
class IncrementResult:
    increment: float
    subdivisions: int
    min_modulus: float


def sup_power_gauss(p: np.ndarray, r: float) -> np.ndarray:
    """``max_{0<=s<=r} s^p e^{-s^2/2}``; the maximum sits at ``s = min(r, sqrt p)``."""
    p = np.asarray(p, dtype=float)
    s = np.minimum(r, np.sqrt(p))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(p * np.log(s) - 0.5 * s * s)
    return np.where(p == 0, 1.0, out)


def _scaled_grid_values(coeffs, arc: Arc, log_scale: float, n: int, local: bool):
    c = complex(arc.center)
    if arc.is_full_circle and c == 0 and arc.theta_start == 0.0:
        # F(theta_j) = sum_k b_k e^{ik theta_j}, theta_j = 2 pi j / n, via FFT
        k = np.arange(coeffs.size)
        with np.errstate(divide="ignore"):
            logb = k * math.log(arc.R) - 0.5 * gammaln(k + 1) - log_scale
        b = coeffs * np.exp(logb)
        folded = np.zeros(n, dtype=np.complex128)
        np.add.at(folded, k % n, b)
        vals = np.fft.ifft(folded) * n
        theta = _TWO_PI * np.arange(n + 1) / n
        return theta, np.append(vals, vals[0])
    theta = np.linspace(arc.theta_start, arc.theta_end, n + 1)
    pts = c + arc.R * np.exp(1j * theta)
    scale = 0.5 * np.abs(pts) ** 2 if local else log_scale
    return theta, kernels.series_eval(coeffs, pts, scale)


def _increment(sample: SeriesSample, arc: Arc, backend=None) -> IncrementResult:
    impl = kernels if backend is None else backend
    coeffs = sample.coefficients
    c = complex(arc.center)
    R = arc.R
    rho = abs(c) + R
    if not sample.exact and rho > sample.r_valid * (1 + 1e-12):
        raise OutsideCertifiedRadius(rho, sample.r_valid)
    k = np.arange(coeffs.size)
    local = c != 0
    if not local:
        # F = f e^{-rho^2/2}; |dF/dtheta| <= R sum_k k |c_k| rho^{k-1} / sqrt(k!) e^{-rho^2/2}
        log_scale = 0.5 * rho * rho
        logt = log_term_magnitudes(coeffs, rho) - log_scale
        with np.errstate(divide="ignore"):
            logd = logt[1:] + np.log(k[1:]) - math.log(rho) + math.log(R)
        dbound = math.fsum(np.exp(logd)) if logd.size else 0.0
        terms = np.exp(logt)
    else:
        # F = f(z) e^{-|z|^2/2} along z = c + R e^{i theta}: same phase as f, and
        # |dF/dtheta| <= R (|f'| + |c| |f|) e^{-|z|^2/2}, each bounded termwise
        # by the exact sup of s^p e^{-s^2/2} over s <= rho
        log_scale = 0.0
        absc = np.abs(coeffs)
        inv = np.exp(-0.5 * gammaln(k + 1.0))
        terms = absc * inv * sup_power_gauss(k, rho)
        deriv = absc * inv * k * sup_power_gauss(np.maximum(k - 1.0, 0.0), rho)
        dbound = R * (math.fsum(deriv) + abs(c) * math.fsum(terms))
    scale_sum = math.fsum(terms)
    if scale_sum == 0.0:
        raise ZeroOnContour("function vanishes identically")
    floor = 8.0 * coeffs.size * np.finfo(float).eps * scale_sum
    # rough size of F on the contour (Parseval, exact for center 0); sets the grid
    rms = math.sqrt(math.fsum(terms * terms))
    n = max(int(math.ceil(arc.span * dbound / (_GRID_RATIO * rms))), 16)
    if arc.is_full_circle and not local:
        n = 1 << max(4, (n - 1).bit_length())
    theta, vals = _scaled_grid_values(coeffs, arc, log_scale, n, local)
    total, n_evals, min_mod, status = impl.refine_segments(
        coeffs, c, float(R), log_scale, dbound, floor, theta, vals, _MAX_DEPTH, local)
    if status == kernels.ZERO_ON_CONTOUR:
        raise ZeroOnContour(f"zero on contour (R={R:.9g}, min |F|={min_mod:.3g})")
    if status == kernels.DEPTH_EXCEEDED:
        raise ZeroOnContour("refinement depth exceeded near a small value on the contour")
    return IncrementResult(total, n + n_evals, min_mod)


def arc_argument_increment(sample: SeriesSample, arc: Arc) -> float:
    """Increment of ``arg f`` along the arc.

    The arc is split into a grid, and every segment is certified by the
    bound ``|F(theta) - F(a)| <= D |theta - a|`` with
    ``D = R sum_k k |c_k| rho^{k-1} / sqrt(k!)`` (everything scaled by
    ``exp(-rho^2/2)``, ``rho = |center| + R``).  A certified segment's
    increment is the principal phase difference of its endpoint values;
    other segments are bisected.  Raises :class:`ZeroOnContour` when a
    segment cannot be certified above the rounding floor.
    """
    return _increment(sample, arc).increment


def circle_increment(sample: SeriesSample, R: float, backend=None) -> IncrementResult:
    return _increment(sample, Arc.circle(R), backend)


def expected_increment(arc: Arc) -> float:
    """``E Delta_gamma arg f = Im int conj(z) dz`` for a G.E.F. along the arc.

    For ``z = c + R e^{i theta}`` this is
    ``R^2 (theta_e - theta_s) + Im(R conj(c) (e^{i theta_e} - e^{i theta_s}))``,
    which reduces to ``|I| R`` for arcs centered at the origin.
    """
    c = complex(arc.center)
    chord = complex(math.cos(arc.theta_end), math.sin(arc.theta_end)) - \
        complex(math.cos(arc.theta_start), math.sin(arc.theta_start))
    return arc.R ** 2 * arc.span + (arc.R * c.conjugate() * chord).imag


def arc_delta(sample: SeriesSample, arc: Arc) -> float:
    """Centered increment ``delta(f, I) = Delta_I arg f - E Delta_I arg f``."""
    return arc_argument_increment(sample, arc) - expected_increment(arc)


def count_zeros_winding(sample: SeriesSample, R: float, backend=None) -> ZeroCountResult:
    """``n(R)`` from the certified winding number on the circle of radius ``R``.

    A zero numerically on the circle triggers up to 8 retries at
    ``R + 1e-6``, ``R + 2e-6``, ...; the radius actually used is reported.
    """
    if not sample.exact and R > sample.r_valid * (1 + 1e-12):
        raise OutsideCertifiedRadius(R, sample.r_valid)
    last = None
    for attempt in range(_MAX_RETRIES + 1):
        radius = R + attempt * _RETRY_STEP
        if not sample.exact and radius > sample.r_valid * (1 + 1e-12):
            break
        try:
            res = circle_increment(sample, radius, backend)
        except ZeroOnContour as exc:
            last = exc
            continue
        turns = res.increment / _TWO_PI
        count = int(round(turns))
        if abs(turns - count) > 1e-6:
            raise ArithmeticError(f"non-integral winding {turns!r}")
        return ZeroCountResult(count, CountMethod.WINDING, res.subdivisions,
                               res.min_modulus, radius, near_contour=attempt > 0)
    raise ZeroOnContour(f"zero on contour after {_MAX_RETRIES} retries") from last


def _trim(coeffs: np.ndarray):
    """Split off zeros at the origin and trailing zero coefficients."""
    nz = np.flatnonzero(coeffs != 0)
    if nz.size == 0:
        raise RootFindingError("identically zero function")
    low, high = int(nz[0]), int(nz[-1])
    return low, coeffs[low: high + 1], low


def find_roots(sample: SeriesSample, *, max_iter: int = 200, tol: float = 1e-12,
               jitter: float = 1e-3, backend=None) -> np.ndarray:
    """All roots of the polynomial ``sum_{k<=K} c_k z^k / sqrt(k!)``.

    Zero low-order coefficients give exact roots at the origin.  The rest
    are found by Aberth-Ehrlich iteration on the rescaled polynomial
    ``q(u) = p(s u)``, ``s = |p_0 / p_d|^{1/d}``, started from the circle
    ``|u| = 1`` with angular jitter ``jitter``.
    """
    impl = kernels if backend is None else backend
    coeffs = np.asarray(sample.coefficients)
    n_origin, core, offset = _trim(coeffs)
    d = core.size - 1
    if d == 0:
        return np.zeros(n_origin, dtype=np.complex128)
    k = np.arange(offset, offset + d + 1)
    logp = np.log(np.abs(core)) - 0.5 * gammaln(k + 1)
    log_s = (logp[0] - logp[-1]) / d
    phase = core / np.abs(core)
    logq = logp + np.arange(d + 1) * log_s
    q = phase * np.exp(logq - logq.max())
    j = np.arange(d)
    ang = _TWO_PI * j / d + 0.5 * math.pi / d + jitter * np.sin(1.7 * j + 0.3)
    init = np.exp(1j * ang)
    # Fujiwara bound on the moduli of the roots of q
    ratios = np.abs(q[:-1] / q[-1])
    powers = 1.0 / (d - np.arange(d))
    bound = 2.0 * float(np.max(ratios ** powers))
    bound = max(bound, 2.0)
    u, iters, converged = impl.aberth(q, init, max_iter, tol, bound)
    roots = u * math.exp(log_s)
    if not converged:
        res = _residuals(sample, roots)
        raise RootFindingError(
            f"Aberth iteration did not converge in {max_iter} iterations "
            f"(max relative residual {res.max():.3g})", res)
    return np.concatenate([np.zeros(n_origin, dtype=np.complex128), roots])


def _residuals(sample: SeriesSample, roots: np.ndarray) -> np.ndarray:
    """``|f(z)|`` relative to ``sum |c_k| |z|^k / sqrt(k!)`` at each root."""
    if roots.size == 0:
        return np.zeros(0)
    vals = np.abs(kernels.series_eval(sample.coefficients, roots, 0.0))
    absc = np.abs(sample.coefficients).astype(np.complex128)
    scale = np.abs(kernels.series_eval(absc, np.abs(roots).astype(np.complex128), 0.0))
    return vals / np.where(scale > 0, scale, 1.0)


def count_zeros_roots(sample: SeriesSample, R: float, *, flag_distance: float = 1e-7,
                      max_degree: int = 400, backend=None) -> ZeroCountResult:
    """``n(R)`` by locating every root of the truncated series."""
    if sample.K > max_degree:
        raise ValueError(f"degree {sample.K} exceeds the root finder's bound {max_degree}")
    roots = find_roots(sample, backend=backend)
    if roots.size == 0:
        return ZeroCountResult(0, CountMethod.ROOTS, 0, math.inf, R)
    dist = np.abs(np.abs(roots) - R)
    count = int(np.count_nonzero(np.abs(roots) < R))
    mind = float(dist.min())
    return ZeroCountResult(count, CountMethod.ROOTS, int(roots.size), mind, R,
                           near_contour=mind < flag_distance)


def sample_counts(profile: VarianceProfile, R: float, lineage: SeedLineage, indices,
                  *, method: str = "winding", backend=None) -> np.ndarray:
    """``n(R)`` for the samples ``lineage.child(i)``, ``i`` in ``indices``.

    Coefficients are truncated at the planner order for radius ``R``.
    """
    K = truncation_order(max(R, 1.0))
    counter = count_zeros_winding if method == "winding" else count_zeros_roots
    out = np.empty(len(indices), dtype=np.int64)
    for j, i in enumerate(indices):
        sample = sample_coefficients(profile, K, lineage.child(int(i)))
        out[j] = counter(sample, R, backend=backend).count
    return out
