"""Truncated Gaussian Taylor series in the basis ``e_k(z) = z^k / sqrt(k!)``.

Besides plain evaluation this module plans truncation orders with a
probabilistic certificate and expands translated functions
``T_w g(z) = g(w + z) exp(-z conj(w) - |w|^2/2)`` in the same basis.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels
from .gaussian_core import SeedLineage

__all__ = [
    "DEFAULT_EPS_AMP",
    "DEFAULT_EPS_PROB",
    "SeriesSample",
    "TranslationMatrix",
    "OutsideCertifiedRadius",
    "tail_sum",
    "truncation_order",
    "certified_radius",
    "evaluate",
    "evaluate_star",
    "log_term_magnitudes",
    "translation_matrix",
    "translate_sample",
]

DEFAULT_EPS_AMP = 1e-9
DEFAULT_EPS_PROB = 1e-12

# relative slack when testing |z| <= r_valid
_RADIUS_SLACK = 1e-12


class OutsideCertifiedRadius(ValueError):
    """Evaluation requested outside the disk where the truncation is certified."""

    def __init__(self, z, r_valid):
        super().__init__(f"outside certified radius: |z|={abs(z):.6g} > r_valid={r_valid:.6g}")


@dataclass(frozen=True, eq=False)
class SeriesSample:
    """One truncated series ``sum_{k<=K} c_k e_k(z)``.

    ``eps_amp``/``eps_prob`` certify that the omitted tail of ``f*`` is below
    ``eps_amp`` on the disk of radius ``r_valid`` except with probability
    ``eps_prob``.  Exact polynomials carry ``r_valid = inf`` and zero
    tolerances.
    """

    coefficients: np.ndarray
    r_valid: float
    eps_amp: float = DEFAULT_EPS_AMP
    eps_prob: float = DEFAULT_EPS_PROB
    lineage: SeedLineage | None = None

    def __post_init__(self):
        c = np.ascontiguousarray(self.coefficients, dtype=np.complex128)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if self.exact:
            return
        if not (0 < self.eps_amp < 1 and 0 < self.eps_prob < 1):
            raise ValueError("eps_amp and eps_prob must lie in (0, 1)")
        if self.K < math.ceil(self.r_valid ** 2 - 1e-9):
            raise ValueError("K must be at least ceil(r_valid**2)")

    @property
    def K(self) -> int:
        return self.coefficients.size - 1

    @property
    def exact(self) -> bool:
        return math.isinf(self.r_valid) and self.eps_amp == 0 and self.eps_prob == 0

    @classmethod
    def exact_series(cls, coefficients) -> "SeriesSample":
        """A finite series with no omitted tail (valid on the whole plane)."""
        return cls(np.asarray(coefficients, dtype=complex), math.inf, 0.0, 0.0)

    @classmethod
    def from_polynomial(cls, monomial_coeffs) -> "SeriesSample":
        """Exact series for ``sum p_k z^k``, i.e. ``c_k = p_k sqrt(k!)``."""
        p = np.asarray(monomial_coeffs, dtype=complex)
        k = np.arange(p.size)
        return cls.exact_series(p * np.exp(0.5 * gammaln(k + 1)))

    def to_dict(self) -> dict:
        c = self.coefficients
        return {
            "coefficients": [[float(v.real), float(v.imag)] for v in c],
            "K": self.K,
            "r_valid": None if math.isinf(self.r_valid) else self.r_valid,
            "eps_amp": self.eps_amp,
            "eps_prob": self.eps_prob,
            "lineage": None if self.lineage is None else self.lineage.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SeriesSample":
        c = np.array([complex(re, im) for re, im in d["coefficients"]])
        lin = d.get("lineage")
        r_valid = math.inf if d.get("r_valid") is None else d["r_valid"]
        return cls(c, r_valid, d["eps_amp"], d["eps_prob"],
                   None if lin is None else SeedLineage(**lin))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SeriesSample":
        return cls.from_dict(json.loads(text))


def _log_tail_terms(k: np.ndarray, r: float) -> np.ndarray:
    return -0.5 * (np.sqrt(k) - r) ** 2


def tail_sum(K: int, r: float) -> float:
    """``S(K, r) = sum_{k > K} exp(-(sqrt(k) - r)^2 / 2)``."""
    r = max(float(r), 1.0)
    # terms past sqrt(k) = r + 40 are below exp(-800)
    k_end = int(math.ceil((r + 40.0) ** 2))
    if K + 1 > k_end:
        return 0.0
    k = np.arange(K + 1, k_end + 1, dtype=np.float64)
    return math.fsum(np.exp(_log_tail_terms(k, r))[::-1])


def _required_tail(eps_amp: float, eps_prob: float) -> float:
    # 2 exp(-(eps/S)^2/2) <= delta  <=>  S <= eps / sqrt(2 log(2/delta))
    return eps_amp / math.sqrt(2.0 * math.log(2.0 / eps_prob))


@functools.lru_cache(maxsize=4096)
def truncation_order(r: float, eps_amp: float = DEFAULT_EPS_AMP,
                     eps_prob: float = DEFAULT_EPS_PROB) -> int:
    """Smallest ``K >= ceil(r^2)`` whose omitted tail is certified.

    With ``S = tail_sum(K, r)``, the tail of ``f*`` on the disk of radius
    ``r`` exceeds ``eps_amp`` with probability at most
    ``2 exp(-(eps_amp/S)^2/2)``, which is required to be ``<= eps_prob``.
    Radii below 1 are treated as 1.
    """
    if not (0 < eps_amp < 1 and 0 < eps_prob < 1):
        raise ValueError("eps_amp and eps_prob must lie in (0, 1)")
    r = max(float(r), 1.0)
    target = _required_tail(eps_amp, eps_prob)
    k0 = int(math.ceil(r * r - 1e-12))
    k_end = int(math.ceil((r + 40.0) ** 2))
    k = np.arange(k0 + 1, k_end + 1, dtype=np.float64)
    terms = np.exp(_log_tail_terms(k, r))
    # suffix[i] = sum of terms[i:], i.e. S(k0 + i, r)
    suffix = np.cumsum(terms[::-1])[::-1]
    ok = np.flatnonzero(suffix <= target)
    if ok.size == 0:
        return k_end
    K = k0 + int(ok[0])
    # confirm with an exactly rounded sum at the boundary
    while tail_sum(K, r) > target:
        K += 1
    while K > k0 and tail_sum(K - 1, r) <= target:
        K -= 1
    return K


@functools.lru_cache(maxsize=4096)
def certified_radius(K: int, eps_amp: float = DEFAULT_EPS_AMP,
                     eps_prob: float = DEFAULT_EPS_PROB) -> float:
    """Largest radius ``r`` (to 1e-9) with ``truncation_order(r) <= K``."""
    if K < truncation_order(1.0, eps_amp, eps_prob):
        raise ValueError(f"K={K} too small to certify even the unit disk")
    target = _required_tail(eps_amp, eps_prob)
    lo, hi = 1.0, math.sqrt(K)

    def ok(r):
        return K >= math.ceil(r * r - 1e-12) and tail_sum(K, r) <= target

    if ok(hi):
        return hi
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _check_radius(sample: SeriesSample, z: np.ndarray) -> None:
    if sample.exact:
        return
    az = np.abs(z)
    limit = sample.r_valid * (1 + _RADIUS_SLACK)
    if np.any(az > limit):
        bad = complex(np.ravel(z)[np.argmax(np.ravel(az))])
        raise OutsideCertifiedRadius(bad, sample.r_valid)


def evaluate(sample: SeriesSample, z):
    """``f(z) = sum c_k z^k / sqrt(k!)``; scalar or array ``z``."""
    za = np.asarray(z, dtype=np.complex128)
    _check_radius(sample, za)
    out = kernels.series_eval(sample.coefficients, za, 0.0)
    return complex(out) if out.ndim == 0 else out


def evaluate_star(sample: SeriesSample, z):
    """``f*(z) = |f(z)| exp(-|z|^2/2)``, with the Gaussian factor folded
    into the series evaluation so large ``|z|`` cannot overflow."""
    za = np.asarray(z, dtype=np.complex128)
    _check_radius(sample, za)
    out = np.abs(kernels.series_eval(sample.coefficients, za, 0.5 * np.abs(za) ** 2))
    return float(out) if out.ndim == 0 else out


def log_term_magnitudes(coefficients, rho: float) -> np.ndarray:
    """``log(|c_k| rho^k / sqrt(k!))`` (``-inf`` where ``c_k = 0``)."""
    c = np.abs(np.asarray(coefficients))
    k = np.arange(c.size)
    with np.errstate(divide="ignore"):
        logc = np.log(c)
        logr = k * math.log(rho) if rho > 0 else np.where(k == 0, 0.0, -np.inf)
    return logc + logr - 0.5 * gammaln(k + 1)


@dataclass(frozen=True, eq=False)
class TranslationMatrix:
    """``entries[n, k] = <T_{-w} e_k, e_n>`` for ``n <= K_out``, ``k <= K_in``."""

    w: complex
    entries: np.ndarray

    @property
    def K_in(self) -> int:
        return self.entries.shape[1] - 1

    @property
    def K_out(self) -> int:
        return self.entries.shape[0] - 1

    def column_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.entries) ** 2, axis=0))


def default_translation_rows(w: complex, K_in: int,
                             eps_amp: float = DEFAULT_EPS_AMP,
                             eps_prob: float = DEFAULT_EPS_PROB) -> int:
    return truncation_order(abs(w) + math.sqrt(K_in), eps_amp, eps_prob)


_LOG_1E100 = 100.0 * math.log(10.0)


def _laguerre_diagonals(x: float, m: np.ndarray, J: int) -> np.ndarray:
    """``phi[j, i] = sqrt(j!/(j+m_i)!) x^(m_i/2) e^(-x/2) L_j^(m_i)(x)``.

    Forward three-term recurrence on the normalized quantities (all bounded
    by 1), with per-column rescaling to keep the running pair in range:

        sqrt((j+1)(j+1+m)) phi_{j+1} = (2j+1+m-x) phi_j - sqrt(j(j+m)) phi_{j-1}
    """
    m = np.asarray(m, dtype=np.float64)
    out = np.empty((J + 1, m.size))
    scale = 0.5 * (m * math.log(x) - x - gammaln(m + 1))
    prev = np.zeros(m.size)
    cur = np.ones(m.size)
    out[0] = np.exp(scale)
    for j in range(J):
        nxt = ((2 * j + 1 + m - x) * cur - math.sqrt(j) * np.sqrt(j + m) * prev) \
            / np.sqrt((j + 1) * (j + 1 + m))
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if big.any():
            prev[big] *= 1e-100
            cur[big] *= 1e-100
            scale[big] += _LOG_1E100
        small = (np.abs(cur) < 1e-100) & (np.abs(prev) < 1e-100) & (cur != 0)
        if small.any():
            prev[small] *= 1e100
            cur[small] *= 1e100
            scale[small] -= _LOG_1E100
        out[j + 1] = cur * np.exp(scale)
    return out


def translation_matrix(w: complex, K_in: int, K_out: int | None = None) -> TranslationMatrix:
    """Expansion of ``T_{-w} e_k`` in the basis ``e_n``.

    Expanding ``(z - w)^k exp(z conj(w))`` gives the double sum
    ``sqrt(n!/k!) e^{-|w|^2/2} sum_j C(k,j) (-w)^{k-j} conj(w)^{n-j} / (n-j)!``.
    The phase of every term is ``exp(i (k-n) arg w)`` up to sign, so the sum is
    an alternating real sum, i.e. a generalized Laguerre polynomial in
    ``x = |w|^2``:

        n >= k:  phi_k^(n-k)(x) e^{-i(n-k) arg w}
        n <  k:  phi_n^(k-n)(x) (-1)^(k-n) e^{i(k-n) arg w}

    with ``phi`` from :func:`_laguerre_diagonals`.  The alternating sum
    itself cancels catastrophically for ``|w|`` of a few units, and so does
    the column recurrence from ``T_{-w}(z g) = (z - w) T_{-w} g``; the
    normalized Laguerre recurrence does not.  Entries with ``n <= K_out``
    are exact up to rounding.  ``K_out`` defaults to the planner order at
    radius ``|w| + sqrt(K_in)``.
    """
    if K_in < 0:
        raise ValueError("K_in must be non-negative")
    w = complex(w)
    if K_out is None:
        K_out = default_translation_rows(w, K_in)
    if K_out < 0:
        raise ValueError("K_out must be non-negative")
    out = np.zeros((K_out + 1, K_in + 1), dtype=np.complex128)
    x = abs(w) ** 2
    if x == 0:
        d = min(K_in, K_out) + 1
        out[np.arange(d), np.arange(d)] = 1.0
        out.setflags(write=False)
        return TranslationMatrix(w, out)
    theta = math.atan2(w.imag, w.real)
    # lower part n = k + m, m >= 0
    m_lo = np.arange(K_out + 1)
    phi = _laguerre_diagonals(x, m_lo, K_in)
    for k in range(K_in + 1):
        m = m_lo[: K_out - k + 1]
        if m.size == 0:
            break
        out[k + m, k] = phi[k, : m.size] * np.exp(-1j * m * theta)
    # upper part k = n + m, m >= 1
    if K_in >= 1:
        m_up = np.arange(1, K_in + 1)
        phi = _laguerre_diagonals(x, m_up, min(K_in, K_out))
        sign = np.where(m_up % 2 == 0, 1.0, -1.0)
        for n in range(min(K_in, K_out) + 1):
            m = m_up[: K_in - n]
            if m.size == 0:
                break
            out[n, n + m] = phi[n, : m.size] * sign[: m.size] * np.exp(1j * m * theta)
    out.setflags(write=False)
    return TranslationMatrix(w, out)


def translate_sample(sample: SeriesSample, w: complex, K_out: int | None = None,
                     r_out: float | None = None) -> SeriesSample:
    """Coefficients ``zeta_n(w) = <T_w f, e_n>`` of the translated function.

    ``zeta_n(w) = sum_k <T_w e_k, e_n> c_k``, i.e. the matrix of
    :func:`translation_matrix` at ``-w`` applied to the coefficients.  The
    result is certified on the disk of radius ``r_out`` (default
    ``r_valid - |w|``); ``K_out`` defaults to the planner order there.
    """
    w = complex(w)
    if sample.exact:
        r_avail = math.inf
    else:
        r_avail = sample.r_valid - abs(w)
        if r_avail <= 0:
            raise OutsideCertifiedRadius(w, sample.r_valid)
    if r_out is None:
        r_out = r_avail
    if r_out > r_avail:
        raise OutsideCertifiedRadius(w + r_out, sample.r_valid)
    if K_out is None:
        if math.isinf(r_out):
            raise ValueError("K_out is required when translating an exact series without r_out")
        K_out = truncation_order(max(r_out, 1.0))
    if w == 0 and K_out >= sample.K:
        coeffs = np.zeros(K_out + 1, dtype=np.complex128)
        coeffs[: sample.K + 1] = sample.coefficients
    else:
        M = translation_matrix(-w, sample.K, K_out)
        coeffs = M.entries @ sample.coefficients
    eps_amp = DEFAULT_EPS_AMP if sample.exact else sample.eps_amp
    eps_prob = DEFAULT_EPS_PROB if sample.exact else sample.eps_prob
    r_valid = min(r_out, certified_radius(K_out, eps_amp, eps_prob)) \
        if K_out >= truncation_order(1.0, eps_amp, eps_prob) else min(r_out, 0.0)
    if sample.exact:
        amp, prob = eps_amp, eps_prob
    else:
        amp, prob = sample.eps_amp + eps_amp, min(sample.eps_prob + eps_prob, 0.5)
    amp = min(amp, 0.5)
    return SeriesSample(coeffs, r_valid, amp, prob, sample.lineage)
