"""Closed-form quantities and probability-bound formulas for G.E.F. zeros.

Each bound has an evaluator (:func:`bound_value`) and a Monte Carlo
validator (:func:`validate_bound`).  Validators estimate the event
frequency conservatively: suprema are over-estimated and infima
under-estimated with explicit Lipschitz corrections, so the empirical
frequency can only err upwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, special

from . import kernels
from .gaussian_core import (ProfileKind, SeedLineage, VarianceProfile, coefficient_batch,
                            complex_normals)
from .series import DEFAULT_EPS_AMP, SeriesSample, truncation_order
from .zeros import Arc, arc_delta, sup_power_gauss

__all__ = [
    "edelman_kostlan_mean",
    "measured_c1",
    "BoundId",
    "BoundSpec",
    "BoundHypothesisError",
    "bound_value",
    "ValidationReport",
    "validate_bound",
    "fit_arc_delta_B",
    "InequalityReport",
    "check_elementary_inequalities",
    "DEFAULT_BOUND_GRID",
]


# ---------------------------------------------------------------- mean count

def _log_weights(k: np.ndarray, r: float) -> np.ndarray:
    """``log(r^{2k}/k!) - r^2``, the Poisson(r^2) log-masses."""
    return 2.0 * k * math.log(r) - special.gammaln(k + 1.0) - r * r


def edelman_kostlan_mean(profile: VarianceProfile, r: float) -> float:
    """Expected number of zeros of ``sum zeta_k a_k z^k/sqrt(k!)`` in ``|z| < r``.

    Uses ``E n = r C'(r) / (2 C(r))`` with ``C(r) = sum a_k^2 r^{2k}/k!``.
    For profiles that differ from the constant one at finitely many indices
    the identity ``sum (k - r^2) r^{2k}/k! = 0`` reduces this to finite sums:

        E n = r^2 + sum_S (a_k^2 - 1)(k - r^2) p_k / (1 + sum_S (a_k^2 - 1) p_k)

    with ``p_k`` the Poisson(r^2) masses.  Tables are finite sums.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0:
        return 0.0
    r = float(r)
    if profile.kind is ProfileKind.CONSTANT_ONE:
        return r * r
    if profile.kind is ProfileKind.JLM_BANDED:
        k = profile.special_indices().astype(float)
        a2 = _band_squares(profile, k)
        p = np.exp(_log_weights(k, r))
        num = math.fsum((a2 - 1.0) * (k - r * r) * p)
        den = 1.0 + math.fsum((a2 - 1.0) * p)
        return r * r + num / den
    a = np.asarray(profile.values, dtype=float)
    k = np.arange(a.size, dtype=float)
    keep = a > 0
    if not keep.any():
        raise ValueError("table profile is identically zero")
    k, a = k[keep], a[keep]
    logw = 2.0 * np.log(a) + 2.0 * k * math.log(r) - special.gammaln(k + 1.0)
    w = np.exp(logw - logw.max())
    return math.fsum(k * w) / math.fsum(w)


def _band_squares(profile: VarianceProfile, k: np.ndarray) -> np.ndarray:
    lo, hi = profile.j_minus
    t = profile.tilt
    return np.where((k >= lo) & (k <= hi), 1.0 + t, 1.0 - t)


def measured_c1(R_list, alpha: float) -> float:
    """Largest ``c`` with ``E n_g(R) <= R^2 - c R^alpha`` at every ``R`` listed.

    ``g`` is the banded profile at radius ``R``; the mean is exact.
    """
    vals = []
    for R in R_list:
        mean = edelman_kostlan_mean(VarianceProfile.jlm(R, alpha), R)
        vals.append((R * R - mean) / R ** alpha)
    return float(min(vals))


# ---------------------------------------------------------------- bound formulas

class BoundId(str, Enum):
    NSV_SUM = "nsv_sum"
    BERNSTEIN = "bernstein"
    MAX_FSTAR = "max_fstar"
    MIN_MAX_F = "min_max_f"
    SMALL_ON_CURVE = "small_on_curve"
    ARC_DELTA_TAIL = "arc_delta_tail"


class BoundHypothesisError(ValueError):
    pass


@dataclass(frozen=True)
class BoundSpec:
    """A bound formula and its parameters.

    Parameter names: ``nsv_sum`` (t, S), ``bernstein`` (t, K, n),
    ``max_fstar`` (r, M), ``min_max_f`` (r, m), ``small_on_curve`` (r, eps),
    ``arc_delta_tail`` (r, m, B with B defaulting to 1).
    """

    bound_id: BoundId
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "bound_id", BoundId(self.bound_id))
        object.__setattr__(self, "params", {k: float(v) for k, v in self.params.items()})
        _check_hypotheses(self)

    def to_dict(self) -> dict:
        return {"bound_id": self.bound_id.value, "params": dict(self.params)}


_REQUIRED = {
    BoundId.NSV_SUM: ("t", "S"),
    BoundId.BERNSTEIN: ("t", "K", "n"),
    BoundId.MAX_FSTAR: ("r", "M"),
    BoundId.MIN_MAX_F: ("r", "m"),
    BoundId.SMALL_ON_CURVE: ("r", "eps"),
    BoundId.ARC_DELTA_TAIL: ("r", "m"),
}


def _require(cond: bool, text: str):
    if not cond:
        raise BoundHypothesisError(f"precondition failed: {text}")


def _check_hypotheses(spec: BoundSpec):
    p = spec.params
    for name in _REQUIRED[spec.bound_id]:
        _require(name in p, f"missing parameter {name}")
    b = spec.bound_id
    if b is BoundId.NSV_SUM:
        _require(p["t"] > 0, "t > 0")
        _require(p["S"] > 0, "S > 0")
    elif b is BoundId.BERNSTEIN:
        _require(p["K"] > 0, "K > 0")
        _require(p["n"] >= 1, "n >= 1")
        _require(0 < p["t"] <= 5 * p["K"] * p["n"], "0 < t <= 5Kn")
    elif b is BoundId.MAX_FSTAR:
        _require(p["r"] >= 1, "r >= 1")
        _require(p["M"] >= 1, "M >= 1")
    elif b is BoundId.MIN_MAX_F:
        _require(p["r"] >= 1, "r >= 1")
        _require(p["m"] >= 3, "m >= 3")
    elif b is BoundId.SMALL_ON_CURVE:
        _require(p["r"] >= 1, "r >= 1")
        _require(0 < p["eps"] <= 0.25, "0 < eps <= 1/4")
    else:
        B = p.setdefault("B", 1.0)
        _require(B >= 1, "B >= 1")
        _require(p["r"] >= 1, "r >= 1")
        _require(p["m"] >= 25 * B, "m >= 25B")


def _raw_bound(spec: BoundSpec) -> float:
    p = spec.params
    b = spec.bound_id
    if b is BoundId.NSV_SUM:
        return 2.0 * math.exp(-0.5 * (p["t"] / p["S"]) ** 2)
    if b is BoundId.BERNSTEIN:
        return 2.0 * math.exp(-p["t"] ** 2 / (16.0 * p["K"] * p["n"]))
    if b is BoundId.MAX_FSTAR:
        return 18.0 * p["r"] ** 2 * math.exp(-p["M"] ** 2 / 32.0)
    if b is BoundId.MIN_MAX_F:
        m = p["m"]
        return math.exp(-(m * m / math.log(m)) * p["r"] ** 4)
    if b is BoundId.SMALL_ON_CURVE:
        e = p["eps"]
        return 100.0 * p["r"] * e * math.sqrt(math.log(1.0 / e))
    m, r, B = p["m"], p["r"], p["B"]
    return 2.0 * math.exp(-(m * m * r ** 4) / (16.0 * B * B * math.log(m)))


def bound_value(spec: BoundSpec) -> float:
    """The bound's probability value, clamped to ``[0, 1]``."""
    return min(1.0, max(0.0, _raw_bound(spec)))


# ---------------------------------------------------------------- validators

@dataclass(frozen=True)
class ValidationReport:
    bound_id: str
    params: dict
    empirical_freq: float
    stderr: float
    bound: float
    n_trials: int
    passed: bool

    def to_dict(self) -> dict:
        return {"bound_id": self.bound_id, "params": dict(self.params),
                "empirical": self.empirical_freq, "stderr": self.stderr,
                "bound": self.bound, "n": self.n_trials, "pass": self.passed}


def _grid_disk(r: float, h: float) -> np.ndarray:
    x = np.arange(-r, r + 0.5 * h, h)
    zz = (x[:, None] + 1j * x[None, :]).ravel()
    return zz[np.abs(zz) <= r]


def _basis_star(K: int, z: np.ndarray) -> np.ndarray:
    """``e_k(z) exp(-|z|^2/2)`` as a ``(K+1, len(z))`` array."""
    out = np.empty((K + 1, z.size), dtype=np.complex128)
    t = np.exp(-0.5 * np.abs(z) ** 2).astype(np.complex128)
    for k in range(K + 1):
        out[k] = t
        t = t * z / math.sqrt(k + 1.0)
    return out


def _basis(K: int, z: np.ndarray) -> np.ndarray:
    out = np.empty((K + 1, z.size), dtype=np.complex128)
    t = np.ones(z.size, dtype=np.complex128)
    for k in range(K + 1):
        out[k] = t
        t = t * z / math.sqrt(k + 1.0)
    return out


def _gradient_bound(coeffs: np.ndarray, r: float) -> np.ndarray:
    """Per-row bound on ``|grad f*|`` over ``|z| <= r``.

    ``|grad(|f| e^{-|z|^2/2})| <= (|f'| + |z||f|) e^{-|z|^2/2}``; each term
    ``(k s^{k-1} + s^{k+1}) e^{-s^2/2} / sqrt(k!)`` is bounded by the sum of
    the exact suprema of its two parts.
    """
    k = np.arange(coeffs.shape[1], dtype=float)
    inv = np.exp(-0.5 * special.gammaln(k + 1.0))
    w = (k * sup_power_gauss(np.maximum(k - 1.0, 0.0), r) + sup_power_gauss(k + 1.0, r)) * inv
    return np.abs(coeffs) @ w


def _batches(n: int, size: int = 2000):
    for lo in range(0, n, size):
        yield np.arange(lo, min(n, lo + size))


def _events_nsv_sum(spec, n_trials, lineage):
    n_terms = int(spec.params.get("n_terms", 32))
    a = np.exp(-0.5 * special.gammaln(np.arange(n_terms) + 1.0))
    S = math.fsum(a)
    if abs(S - spec.params["S"]) > 1e-9 * S:
        raise ValueError(f"S must equal sum of 1/sqrt(k!) over {n_terms} terms ({S!r})")
    hits = np.empty(n_trials, dtype=bool)
    for idx in _batches(n_trials):
        eta = np.array([complex_normals(lineage.child(int(i)), n_terms) for i in idx])
        hits[idx] = np.abs(eta) @ a > spec.params["t"]
    return hits


def _events_bernstein(spec, n_trials, lineage):
    n = int(spec.params["n"])
    hits = np.empty(n_trials, dtype=bool)
    for idx in _batches(n_trials):
        zeta = np.array([complex_normals(lineage.child(int(i)), n) for i in idx])
        psi = np.abs(zeta) ** 2 - 1.0
        hits[idx] = np.abs(psi.sum(axis=1)) > spec.params["t"]
    return hits


def _events_max_fstar(spec, n_trials, lineage):
    r, M = spec.params["r"], spec.params["M"]
    h = 0.1
    # grid points up to r + h so every point of r D has one within h/sqrt(2)
    K = truncation_order(r + h)
    z = _grid_disk(r + h, h)
    E = _basis_star(K, z)
    hits = np.empty(n_trials, dtype=bool)
    for idx in _batches(n_trials):
        c = coefficient_batch(VarianceProfile.constant(), K, lineage, idx)
        grid_max = np.abs(c @ E).max(axis=1)
        # every point of the disk is within h/sqrt(2) of a grid point
        upper = grid_max + _gradient_bound(c, r + h) * h / math.sqrt(2.0) + DEFAULT_EPS_AMP
        hits[idx] = upper >= M
    return hits


def _events_min_max_f(spec, n_trials, lineage):
    r, m = spec.params["r"], spec.params["m"]
    K = truncation_order(r)
    theta = 2.0 * math.pi * np.arange(512) / 512
    E = _basis(K, r * np.exp(1j * theta))
    tail = DEFAULT_EPS_AMP * math.exp(0.5 * r * r)
    level = math.exp(-m * r * r)
    hits = np.empty(n_trials, dtype=bool)
    for idx in _batches(n_trials):
        c = coefficient_batch(VarianceProfile.constant(), K, lineage, idx)
        # grid max on the boundary is a lower bound for the max over the disk
        lower = np.abs(c @ E).max(axis=1) - tail
        hits[idx] = lower <= level
    return hits


def _curve_points(r: float, s: np.ndarray) -> np.ndarray:
    # the segment [0, r] on the real axis, a curve of length r
    return s.astype(np.complex128)


def _events_small_on_curve(spec, n_trials, lineage):
    r, eps = spec.params["r"], spec.params["eps"]
    K = truncation_order(r)
    n_grid = 1024
    s = np.linspace(0.0, r, n_grid + 1)
    E = _basis_star(K, _curve_points(r, s))
    hits = np.empty(n_trials, dtype=bool)
    for idx in _batches(n_trials):
        c = coefficient_batch(VarianceProfile.constant(), K, lineage, idx)
        vals = np.abs(c @ E)
        L = _gradient_bound(c, r)
        for row, i in enumerate(idx):
            hits[i] = _min_below(c[row], L[row], s, vals[row], eps)
    return hits


def _min_below(coeffs, L, s, vals, eps, depth: int = 6) -> bool:
    """Conservative decision of ``min f* < eps`` along the segment.

    Returns False only when every sub-segment is certified to stay at or
    above ``eps``; undecided cases count as hits.
    """
    slack = DEFAULT_EPS_AMP
    if np.any(vals < eps + slack):
        return True
    a, b = s[:-1], s[1:]
    fa, fb = vals[:-1], vals[1:]
    for _ in range(depth):
        lower = np.minimum(fa, fb) - 0.5 * L * (b - a) - slack
        bad = lower < eps
        if not bad.any():
            return False
        a, b = a[bad], b[bad]
        fa, fb = fa[bad], fb[bad]
        sub = np.linspace(0.0, 1.0, 17)
        pts = a[:, None] + (b - a)[:, None] * sub[None, :]
        v = np.abs(kernels.series_eval(coeffs, pts.astype(np.complex128), 0.5 * pts ** 2))
        if np.any(v < eps + slack):
            return True
        a, b = pts[:, :-1].ravel(), pts[:, 1:].ravel()
        fa, fb = v[:, :-1].ravel(), v[:, 1:].ravel()
    return True


def _arc_for(r: float) -> Arc:
    # arc of the circle |z| = r with length r: a good curve inside r D
    return Arc(r, 0.0, 1.0)


def arc_delta_samples(r: float, n_trials: int, lineage: SeedLineage) -> np.ndarray:
    """``delta(f, gamma)`` for the standard test arc over ``n_trials`` samples."""
    K = truncation_order(r)
    arc = _arc_for(r)
    out = np.empty(n_trials)
    for idx in _batches(n_trials):
        c = coefficient_batch(VarianceProfile.constant(), K, lineage, idx)
        for row, i in enumerate(idx):
            sample = SeriesSample(c[row], r_valid=r)
            out[i] = arc_delta(sample, arc)
    return out


def _events_arc_delta(spec, n_trials, lineage):
    r, m = spec.params["r"], spec.params["m"]
    d = arc_delta_samples(r, n_trials, lineage)
    return np.abs(d) >= m * r * r


_EVENTS = {
    BoundId.NSV_SUM: _events_nsv_sum,
    BoundId.BERNSTEIN: _events_bernstein,
    BoundId.MAX_FSTAR: _events_max_fstar,
    BoundId.MIN_MAX_F: _events_min_max_f,
    BoundId.SMALL_ON_CURVE: _events_small_on_curve,
    BoundId.ARC_DELTA_TAIL: _events_arc_delta,
}


def validate_bound(spec: BoundSpec, n_trials: int, lineage: SeedLineage) -> ValidationReport:
    """Empirical frequency of the bounded event against the bound.

    Passes when ``freq <= bound + 3*stderr`` with the binomial stderr.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    hits = _EVENTS[spec.bound_id](spec, n_trials, lineage)
    p = float(np.mean(hits))
    se = math.sqrt(p * (1.0 - p) / n_trials)
    bound = bound_value(spec)
    return ValidationReport(spec.bound_id.value, dict(spec.params), p, se, bound,
                            n_trials, p <= bound + 3.0 * se)


def fit_arc_delta_B(r: float, n_trials: int, lineage: SeedLineage,
                    m_grid=(1.5, 2.0, 3.0, 4.0, 6.0)) -> tuple[float, np.ndarray]:
    """Smallest ``B`` for which ``2 exp(-m^2 r^4 / (16 B^2 log m))`` covers the
    observed tail of ``|delta| / r^2`` at every ``m`` in ``m_grid`` with hits.

    The bound's hypothesis ``m >= 25B`` is ignored for the fit.  Returns
    ``(B, deltas)``; ``B`` is 0 when no threshold is ever reached.
    """
    d = arc_delta_samples(r, n_trials, lineage)
    B2 = 0.0
    for m in m_grid:
        p = float(np.mean(np.abs(d) >= m * r * r))
        if p <= 0 or m <= 1:
            continue
        # 2 exp(-x/B^2) >= p  <=>  B^2 >= x / log(2/p)
        x = m * m * r ** 4 / (16.0 * math.log(m))
        B2 = max(B2, x / math.log(2.0 / p))
    return math.sqrt(B2), d


DEFAULT_BOUND_GRID = {
    BoundId.NSV_SUM: [{"t_over_S": q} for q in (1.0, 2.0, 3.0, 4.0)],
    BoundId.BERNSTEIN: [{"n": n, "t": t, "K": math.e + 1.0}
                        for n in (8, 32)
                        for t in (math.sqrt(n), 2 * math.sqrt(n), math.sqrt(n) * math.log(n), n)],
    BoundId.MAX_FSTAR: [{"r": r, "M": M} for r in (1.0, 2.0) for M in (4.0, 8.0, 12.0, 16.0)],
    BoundId.MIN_MAX_F: [{"r": r, "m": m} for r in (1.0, 1.5) for m in (3.0, 4.0)],
    BoundId.SMALL_ON_CURVE: [{"r": r, "eps": e} for r in (1.0, 2.0)
                             for e in (1e-4, 1e-3, 1e-2, 0.25)],
    BoundId.ARC_DELTA_TAIL: [{"r": r, "m": 25.0, "B": 1.0} for r in (1.0, 2.0)],
}


def nsv_spec(t_over_S: float, n_terms: int = 32) -> BoundSpec:
    """``nsv_sum`` spec for weights ``a_k = 1/sqrt(k!)``, ``k < n_terms``."""
    S = math.fsum(np.exp(-0.5 * special.gammaln(np.arange(n_terms) + 1.0)))
    return BoundSpec(BoundId.NSV_SUM, {"t": t_over_S * S, "S": S, "n_terms": n_terms})


def grid_specs(bound_id: BoundId) -> list[BoundSpec]:
    bid = BoundId(bound_id)
    if bid is BoundId.NSV_SUM:
        return [nsv_spec(p["t_over_S"]) for p in DEFAULT_BOUND_GRID[bid]]
    return [BoundSpec(bid, p) for p in DEFAULT_BOUND_GRID[bid]]


# ---------------------------------------------------------------- inequalities

@dataclass
class InequalityReport:
    n_checked: int = 0
    violations: list = field(default_factory=list)
    min_slack: dict = field(default_factory=dict)
    quad_max_rel_diff: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"n_checked": self.n_checked, "violations": self.violations,
                "min_slack": self.min_slack, "quad_max_rel_diff": self.quad_max_rel_diff,
                "ok": self.ok}


DEFAULT_INEQUALITY_GRID = {
    "k": list(range(1, 201)),
    "t": np.geomspace(1e-3, 1e4, 241).tolist(),
    "d": np.linspace(0.05, 10.0, 200).tolist(),
    "quad_k": [1, 2, 4, 10, 50, 200],
}


def _poisson_tail_quad(k: int, u: float) -> float:
    """``int_u^inf t^k e^{-t}/k! dt`` by adaptive quadrature in log form."""
    lg = special.gammaln(k + 1.0)
    f = lambda t: math.exp(k * math.log(t) - t - lg)
    peak = max(u, float(k))
    val, _ = integrate.quad(f, u, peak + 60.0 + 10.0 * math.sqrt(peak),
                            epsabs=1e-300, epsrel=1e-12, limit=400, points=None)
    return val


def check_elementary_inequalities(grid_spec: dict | None = None) -> InequalityReport:
    """Pointwise checks of three elementary inequalities on a grid.

    * ``k log t - t <= k log k - k - (sqrt t - sqrt k)^2`` for all ``(k, t)``;
    * ``int_u^inf t^k e^{-t}/k! dt <= exp(-(sqrt u - sqrt k)^2)`` for ``u >= k``;
    * the same tail at ``u = (sqrt k + d)^2`` is at most ``exp(-d^2)``.

    The Gamma tail comes from ``scipy.special.gammaincc`` and is
    cross-checked by quadrature on a subset of ``k``.
    """
    g = dict(DEFAULT_INEQUALITY_GRID)
    if grid_spec:
        g.update(grid_spec)
    rep = InequalityReport()
    k = np.asarray(g["k"], dtype=float)[:, None]
    t = np.asarray(g["t"], dtype=float)[None, :]
    if np.any(k <= 0) or np.any(t <= 0):
        raise ValueError("grid needs k > 0 and t > 0")
    lhs = k * np.log(t) - t
    rhs = k * np.log(k) - k - (np.sqrt(t) - np.sqrt(k)) ** 2
    # rounding allowance proportional to the magnitudes involved
    tol = 1e-12 * (np.abs(k * np.log(t)) + t + np.abs(k * np.log(k)) + k + 1.0)
    slack = rhs - lhs
    bad = np.argwhere(slack < -tol)
    for i, j in bad[:20]:
        rep.violations.append({"claim": "log_inequality", "k": float(k[i, 0]),
                               "t": float(t[0, j]), "slack": float(slack[i, j])})
    rep.n_checked += slack.size
    rep.min_slack["log_inequality"] = float(slack.min())

    d = np.asarray(g["d"], dtype=float)[None, :]
    if np.any(d <= 0):
        raise ValueError("grid needs d > 0")
    u = (np.sqrt(k) + d) ** 2
    tail = special.gammaincc(k + 1.0, u)
    with np.errstate(divide="ignore"):
        log_tail = np.log(tail)
    # compare in log form so tiny values keep their meaning
    margin = -d ** 2 - log_tail
    bad = np.argwhere((tail > np.exp(-d ** 2) * (1 + 1e-10)) & (margin < 0))
    for i, j in bad[:20]:
        rep.violations.append({"claim": "gamma_tail", "k": float(k[i, 0]), "d": float(d[0, j]),
                               "tail": float(tail[i, j]), "bound": float(np.exp(-d[0, j] ** 2))})
    rep.n_checked += tail.size
    finite = np.isfinite(margin)
    rep.min_slack["gamma_tail_log_margin"] = float(margin[finite].min()) if finite.any() else math.inf

    # the intermediate form with u >= k taken on the t grid
    uu = np.broadcast_to(t, (k.size, t.size))
    kk = np.broadcast_to(k, uu.shape)
    sel = uu >= kk
    tail_u = special.gammaincc(kk[sel] + 1.0, uu[sel])
    bnd_u = np.exp(-(np.sqrt(uu[sel]) - np.sqrt(kk[sel])) ** 2)
    bad_u = np.flatnonzero(tail_u > bnd_u * (1 + 1e-10))
    for i in bad_u[:20]:
        rep.violations.append({"claim": "gamma_tail_u", "k": float(kk[sel][i]),
                               "u": float(uu[sel][i])})
    rep.n_checked += int(sel.sum())

    worst = 0.0
    for kq in g["quad_k"]:
        for dq in (0.5, 1.0, 2.0, 4.0):
            uq = (math.sqrt(kq) + dq) ** 2
            q = _poisson_tail_quad(int(kq), uq)
            ref = float(special.gammaincc(kq + 1.0, uq))
            worst = max(worst, abs(q - ref) / max(ref, 1e-300))
    rep.quad_max_rel_diff = worst
    if worst > 1e-6:
        rep.violations.append({"claim": "quadrature_crosscheck", "rel_diff": worst})
    return rep
