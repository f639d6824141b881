"""Deficit probabilities of the zero count by change of measure.

Samples are drawn from the tilted law ``gamma_a`` (banded variance profile)
and reweighted by ``d gamma / d gamma_a`` to estimate probabilities under
the standard law ``gamma`` of the G.E.F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from .analytic import edelman_kostlan_mean
from .gaussian_core import (ProfileKind, SeedLineage, VarianceProfile, complex_normals,
                            profile_value)
from .series import truncation_order
from .zeros import sample_counts

__all__ = [
    "log_rn_weight",
    "rn_weight",
    "TiltedEstimate",
    "is_estimate_deficit",
    "weight_second_moment",
    "TailSign",
    "TailEstimate",
    "mc_estimate_tail",
    "clopper_pearson",
    "deficit_c1",
    "log_weight_bound_off_U",
    "bernstein_diagnostic",
]

LOW_ESS_FRACTION = 0.01


def _tilted_indices(profile: VarianceProfile, n_coeffs: int):
    if profile.kind is ProfileKind.CONSTANT_ONE:
        return np.empty(0, dtype=np.int64), np.empty(0)
    idx = profile.special_indices()
    idx = idx[idx < n_coeffs]
    a = np.array([profile_value(profile, int(k)) for k in idx], dtype=float)
    keep = a != 1.0
    return idx[keep], a[keep]


def log_rn_weight(profile: VarianceProfile, eta) -> np.ndarray:
    """``log d gamma / d gamma_a`` at the coefficient rows ``eta``.

    ``sum_k [log a_k^2 - |eta_k|^2 (1 - a_k^{-2})]`` over the indices where
    ``a_k != 1``.  Accepts a single sequence or a 2-d array of rows.
    """
    eta = np.asarray(eta, dtype=np.complex128)
    single = eta.ndim == 1
    eta2 = np.atleast_2d(eta)
    idx, a = _tilted_indices(profile, eta2.shape[1])
    if idx.size == 0:
        out = np.zeros(eta2.shape[0])
        return out[0] if single else out
    if np.any(a == 0):
        raise ValueError("singular measures: a_k = 0 on a sampled coordinate")
    a2 = a * a
    m2 = np.abs(eta2[:, idx]) ** 2
    out = np.sum(np.log(a2) - m2 * (1.0 - 1.0 / a2), axis=1)
    return out[0] if single else out


def rn_weight(profile: VarianceProfile, eta) -> float:
    """``d gamma / d gamma_a (eta)``."""
    return np.exp(log_rn_weight(profile, eta))


@dataclass(frozen=True)
class TiltedEstimate:
    p_hat: float
    stderr: float
    ess: float
    n_samples: int
    event_spec: dict
    hit_rate: float = 0.0
    ci95: tuple = (0.0, 0.0)
    low_ess: bool = False
    method: str = "is"

    def to_dict(self) -> dict:
        d = dict(self.event_spec)
        d.update({"p_hat": self.p_hat, "stderr": self.stderr, "ess": self.ess,
                  "n": self.n_samples, "method": self.method, "hit_rate": self.hit_rate,
                  "ci_lo": self.ci95[0], "ci_hi": self.ci95[1], "low_ess": self.low_ess})
        return d


def deficit_c1(R: float, alpha: float) -> float:
    """``(R^2 - E n_g(R)) / R^alpha`` for the banded profile at ``R`` (exact)."""
    return (R * R - edelman_kostlan_mean(VarianceProfile.jlm(R, alpha), R)) / R ** alpha


def _weighted_ratio(logw: np.ndarray, hit: np.ndarray):
    """Self-normalized estimate ``sum w 1_E / sum w``, delta-method stderr and ESS."""
    w = np.exp(logw - logw.max())
    sw = math.fsum(w)
    p = math.fsum(w[hit]) / sw
    var = math.fsum((w * (hit - p)) ** 2) / sw ** 2
    ess = sw * sw / math.fsum(w * w)
    return p, math.sqrt(var), ess


def is_estimate_deficit(R: float, alpha: float, c: float | None, n_samples: int,
                        lineage: SeedLineage, *, defensive: float = 0.0,
                        backend=None) -> TiltedEstimate:
    """Estimate ``P{n(R) <= R^2 - c R^alpha}`` for the G.E.F. by sampling
    the banded profile and reweighting.

    ``c`` defaults to half the exact mean deficit constant at this ``R``.
    The estimator is the ratio ``sum w 1_E / sum w``; its stderr is the
    delta-method ratio variance and ``ess = (sum w)^2 / sum w^2``.

    With ``defensive = lam > 0`` the first ``round(lam n)`` samples are drawn
    from the standard law and the rest from the banded one, and each sample
    is weighted by ``d gamma / d(lam gamma + (1 - lam) gamma_a)``, which is at
    most ``1 / lam``.  Use it when the pure weights have infinite variance
    (see :func:`weight_second_moment`).
    """
    if R < 2:
        raise ValueError("R must be >= 2")
    if not 0.5 < alpha < 1:
        raise ValueError("alpha must lie in (1/2, 1)")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if not 0.0 <= defensive < 1.0:
        raise ValueError("defensive must lie in [0, 1)")
    if c is None:
        c = 0.5 * deficit_c1(R, alpha)
    threshold = R * R - c * R ** alpha
    spec = {"R": float(R), "alpha": float(alpha), "c": float(c), "threshold": threshold,
            "defensive": float(defensive)}
    if threshold < 0:
        # n(R) >= 0 always, so the event is empty
        return TiltedEstimate(0.0, 0.0, float(n_samples), n_samples, spec, 0.0, (0.0, 0.0))
    profile = VarianceProfile.jlm(R, alpha)
    K = truncation_order(R)
    n0 = int(round(defensive * n_samples))
    idx = np.arange(n_samples)
    counts = np.concatenate([
        sample_counts(VarianceProfile.constant(), R, lineage, idx[:n0], backend=backend),
        sample_counts(profile, R, lineage, idx[n0:], backend=backend)])
    hit = counts <= threshold
    bands, a = _tilted_indices(profile, K + 1)
    eta = np.zeros((n_samples, K + 1), dtype=np.complex128)
    for i in idx:
        # same draws as sample_counts: tilted coefficients are zeta_k * a_k
        zeta = complex_normals(lineage.child(int(i)), K + 1)
        eta[i, bands] = zeta[bands] * (a if i >= n0 else 1.0)
    logw = log_rn_weight(profile, eta)
    if n0 > 0:
        logw = -np.logaddexp(math.log(defensive), math.log1p(-defensive) - logw)
    p, se, ess = _weighted_ratio(logw, hit)
    ci = (max(0.0, p - 1.96 * se), min(1.0, p + 1.96 * se))
    return TiltedEstimate(p, se, ess, n_samples, spec, float(hit.mean()), ci,
                          ess < LOW_ESS_FRACTION * n_samples)


def weight_second_moment(R: float, alpha: float) -> float:
    """``E_{gamma_a} (d gamma / d gamma_a)^2`` for the banded profile (exact).

    Per coordinate it is ``a^4 / (2 a^2 - 1)``, so the product is
    ``((1 - t^2)^2 / (1 - 4 t^2))^N`` with ``t = R^{alpha-1}``; infinite once
    ``t >= 1/2``.
    """
    t = R ** (alpha - 1.0)
    if t >= 0.5:
        return math.inf
    N = math.floor(R)
    return ((1.0 - t * t) ** 2 / (1.0 - 4.0 * t * t)) ** N


class TailSign(str, Enum):
    EXCESS = "excess"
    DEFICIT = "deficit"
    BOTH = "both"


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class TailEstimate:
    R: float
    alpha: float
    sign: TailSign
    n_samples: int
    counts: dict = field(default_factory=dict)

    def p(self, sign=None) -> float:
        s = TailSign(sign or self.sign).value
        return self.counts[s] / self.n_samples

    def ci(self, sign=None) -> tuple[float, float]:
        s = TailSign(sign or self.sign).value
        return clopper_pearson(self.counts[s], self.n_samples)

    @property
    def p_hat(self) -> float:
        return self.p()

    def to_dict(self) -> dict:
        d = {"R": self.R, "alpha": self.alpha, "sign": self.sign.value, "n": self.n_samples}
        for s in TailSign:
            lo, hi = self.ci(s)
            d[f"p_{s.value}"] = self.p(s)
            d[f"ci_lo_{s.value}"] = lo
            d[f"ci_hi_{s.value}"] = hi
        return d


def mc_estimate_tail(R: float, alpha: float, sign, n_samples: int, lineage: SeedLineage,
                     *, profile: VarianceProfile | None = None, backend=None) -> TailEstimate:
    """Plain Monte Carlo frequencies of ``n(R) - R^2 > R^alpha`` (excess),
    ``R^2 - n(R) > R^alpha`` (deficit) and ``|n(R) - R^2| > R^alpha`` (both).

    All three are always recorded; ``sign`` picks the headline value.
    """
    profile = VarianceProfile.constant() if profile is None else profile
    n = sample_counts(profile, R, lineage, np.arange(n_samples), backend=backend)
    dev = n - R * R
    lim = R ** alpha
    counts = {"excess": int(np.sum(dev > lim)), "deficit": int(np.sum(-dev > lim)),
              "both": int(np.sum(np.abs(dev) > lim))}
    return TailEstimate(float(R), float(alpha), TailSign(sign), n_samples, counts)


def plain_deficit(R: float, threshold: float, n_samples: int, lineage: SeedLineage,
                  *, backend=None) -> tuple[float, tuple[float, float]]:
    """Plain Monte Carlo ``P{n(R) <= threshold}`` with its exact 95% interval."""
    n = sample_counts(VarianceProfile.constant(), R, lineage, np.arange(n_samples),
                      backend=backend)
    k = int(np.sum(n <= threshold))
    return k / n_samples, clopper_pearson(k, n_samples)


def log_weight_bound_off_U(R: float, alpha: float) -> float:
    """Exact bound on ``log d gamma_a / d gamma`` outside ``U``.

    Off ``U``, ``sum |eta|^2 (1 - a^{-2}) < R^{alpha - 1/2} log R`` over the
    bands, and ``-sum log a_k^2 = -N log(1 - R^{2 alpha - 2})``.
    """
    N = math.floor(R)
    return R ** (alpha - 0.5) * math.log(R) - N * math.log1p(-R ** (2 * alpha - 2))


def bernstein_diagnostic(R: float, lineage: SeedLineage, n_samples: int,
                         alpha: float = 0.75) -> dict:
    """Band statistic ``X = sum_{J-} |zeta|^2 - sum_{J+} |zeta|^2`` under the
    standard law, and the events ``U`` (under ``gamma_a``) and ``U~``
    (under ``gamma``) built from it.

    Reports the empirical tails of ``X`` against ``2 exp(-t^2/(16(e+1)N))``
    at ``t = sqrt N`` and ``sqrt N log N``, the frequencies of ``U`` and
    ``U~`` against ``(c1/4) R^{alpha-2}``, and the largest sampled
    ``log d gamma_a / d gamma`` off ``U`` against the exact bound.
    """
    profile = VarianceProfile.jlm(R, alpha)
    N = math.floor(R)
    lo_m, hi_m = profile.j_minus
    lo_p, hi_p = profile.j_plus
    t_tilt = profile.tilt
    z = np.array([complex_normals(lineage.child(i), 2 * N) for i in range(n_samples)])
    m2 = np.abs(z) ** 2
    X = m2[:, :N].sum(axis=1) - m2[:, N:].sum(axis=1)
    out = {"R": float(R), "alpha": float(alpha), "N": N, "n": n_samples,
           "mean_X": float(X.mean()), "stderr_X": float(X.std(ddof=1) / math.sqrt(n_samples)),
           "mean_X_swapped": float(-X.mean()), "tails": []}
    for t in (0.0, math.sqrt(N), math.sqrt(N) * math.log(N)):
        emp = float(np.mean(X >= t))
        bound = min(1.0, 2.0 * math.exp(-t * t / (16.0 * (math.e + 1.0) * N)))
        se = math.sqrt(emp * (1 - emp) / n_samples)
        out["tails"].append({"t": t, "empirical": emp, "stderr": se, "bound": bound,
                             "pass": emp <= bound + 3 * se})
    c1 = deficit_c1(R, alpha)
    target = 0.25 * c1 * R ** (alpha - 2.0)
    level = math.sqrt(R) * math.log(R)
    p_u_tilde = float(np.mean(X >= level))
    # U under gamma_a: eta = a * zeta on the bands
    a2 = np.concatenate([np.full(N, 1.0 + t_tilt), np.full(N, 1.0 - t_tilt)])
    eta2 = m2 * a2
    excess = (eta2 * (1.0 - 1.0 / a2)).sum(axis=1)
    in_U = excess >= R ** (alpha - 0.5) * math.log(R)
    p_u = float(np.mean(in_U))
    log_ratio = -np.sum(np.log(a2)) + excess   # log d gamma_a / d gamma
    off = ~in_U
    bound = log_weight_bound_off_U(R, alpha)
    max_off = float(log_ratio[off].max()) if off.any() else -math.inf
    out.update({
        "c1": c1, "U_target": target, "p_U_tilde": p_u_tilde, "p_U": p_u,
        "U_small": bool(max(p_u, p_u_tilde) <= target),
        "log_ratio_max_off_U": max_off, "log_ratio_bound_off_U": bound,
        "log_ratio_bound_holds": bool(max_off < bound),
        "asymptotic_log_bound": 2.0 * R ** (2 * alpha - 1),
        "bands": [[lo_m, hi_m], [lo_p, hi_p]],
    })
    return out
