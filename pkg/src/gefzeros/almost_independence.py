"""Covariances of translated coefficients and their decorrelation.

``zeta_k(w) = <T_w f, e_k>`` is a standard complex Gaussian for every
center ``w`` and degree ``k``.  Coefficients at distant centers are almost
orthogonal; :func:`decorrelate` turns such a family into exactly
independent Gaussians plus small remainders, and
:func:`almost_independence_demo` runs the whole construction on samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from .gaussian_core import SeedLineage, VarianceProfile, sample_coefficients
from .series import DEFAULT_EPS_AMP, default_translation_rows, translation_matrix, \
    truncation_order

__all__ = [
    "coefficient_covariance",
    "family_covariance",
    "CovarianceMatrix",
    "Decomposition",
    "decorrelate",
    "neumann_coefficients",
    "pair_covariance_bound",
    "row_sum_check",
    "rounding_floor",
    "random_covariance",
    "DemoReport",
    "almost_independence_demo",
]

_NEUMANN_STOP = 1e-14


def rounding_floor(length: int) -> float:
    """Absolute rounding allowance for an inner product of unit vectors of this length."""
    return (length + 1) * np.finfo(float).eps


@lru_cache(maxsize=64)
def _columns(w: complex, K_in: int, K_out: int) -> np.ndarray:
    return translation_matrix(w, K_in, K_out).entries


def coefficient_covariance(w1: complex, k1: int, w2: complex, k2: int) -> complex:
    """``E{zeta_{k1}(w1) conj(zeta_{k2}(w2))} = <T_{-w2} e_{k2}, T_{-w1} e_{k1}>``.

    Both vectors are expanded in the basis ``e_n`` up to the planner order
    and the inner product is their dot product.
    """
    if not (0 <= k1 <= 200 and 0 <= k2 <= 200):
        raise ValueError("degrees must lie in 0..200")
    if abs(w1) > 12 or abs(w2) > 12:
        raise ValueError("centers must satisfy |w| <= 12")
    w1, w2 = complex(w1), complex(w2)
    K_out = max(default_translation_rows(w1, k1), default_translation_rows(w2, k2))
    a = _columns(w1, k1, K_out)[:, k1]
    b = _columns(w2, k2, K_out)[:, k2]
    return complex(np.vdot(a, b))


def _family_rows(centers, K) -> int:
    Ks = [int(K)] * len(centers) if np.ndim(K) == 0 else [int(k) for k in K]
    return max(default_translation_rows(complex(w), k) for w, k in zip(centers, Ks))


def family_covariance(centers, K) -> np.ndarray:
    """Covariance of ``zeta_k(w_j)``, ``k <= K_j``, ordered center by center."""
    centers = [complex(w) for w in centers]
    Ks = [int(K)] * len(centers) if np.ndim(K) == 0 else [int(k) for k in K]
    K_out = _family_rows(centers, K)
    cols = [_columns(w, k, K_out) for w, k in zip(centers, Ks)]
    big = np.concatenate(cols, axis=1)
    return big.conj().T @ big


def pair_covariance_bound(w1: complex, k1: int, w2: complex, k2: int) -> float | None:
    """``2 exp(-d^2/8)`` with ``d = |w1 - w2| - sqrt(k1) - sqrt(k2)``, or None if ``d <= 0``."""
    d = abs(complex(w1) - complex(w2)) - math.sqrt(k1) - math.sqrt(k2)
    if d <= 0:
        return None
    return 2.0 * math.exp(-d * d / 8.0)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Hermitian matrix with unit diagonal and row sums ``delta_i <= 1/3``."""

    Gamma: np.ndarray
    delta: np.ndarray = field(init=False)

    def __post_init__(self):
        G = np.array(self.Gamma, dtype=np.complex128)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("Gamma must be square")
        if not np.allclose(G, G.conj().T, atol=1e-12, rtol=0):
            raise ValueError("Gamma must be Hermitian")
        if not np.allclose(np.diag(G), 1.0, atol=1e-10, rtol=0):
            raise ValueError("Gamma must have unit diagonal")
        off = np.abs(G - np.diag(np.diag(G)))
        delta = off.sum(axis=1)
        if np.any(delta > 1.0 / 3.0):
            i = int(np.argmax(delta))
            raise ValueError(f"row {i} has off-diagonal sum {delta[i]:.6g} > 1/3")
        G.setflags(write=False)
        delta.setflags(write=False)
        object.__setattr__(self, "Gamma", G)
        object.__setattr__(self, "delta", delta)

    @property
    def n(self) -> int:
        return self.Gamma.shape[0]


@dataclass(frozen=True)
class Decomposition:
    """``mixing = Gamma^{-1/2}``.

    With ``zeta = mixing xi`` independent standard Gaussians,
    ``xi_i = zeta_i + s_i eta_i`` where ``eta_i`` is standard and ``s_i`` the
    standard deviation of ``((I - mixing) xi)_i``.  ``certified_bound`` is
    the row sum of ``|I - mixing|``, which dominates ``s`` and is at most
    ``delta``.
    """

    mixing: np.ndarray
    s: np.ndarray
    certified_bound: np.ndarray
    n_terms: int


def random_covariance(n: int, rng: np.random.Generator, *, max_delta: float = 1.0 / 3.0
                      ) -> CovarianceMatrix:
    """Random admissible ``Gamma`` of size ``n``: unit diagonal, Hermitian,
    with the largest off-diagonal row sum uniform in ``(0.01, 1) * max_delta``."""
    E = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    # random sparsity so some rows are nearly decoupled
    E *= rng.random((n, n)) < rng.uniform(0.2, 1.0)
    E = np.triu(E, 1)
    E = E + E.conj().T
    rows = np.abs(E).sum(axis=1).max()
    if rows > 0:
        E *= rng.uniform(0.01, 1.0) * max_delta / rows * (1 - 1e-12)
    return CovarianceMatrix(np.eye(n) + E)


def neumann_coefficients(n: int) -> np.ndarray:
    """``binom(2k, k) / 4^k`` for ``k < n``: the series of ``(1 - x)^{-1/2}``."""
    k = np.arange(n, dtype=float)
    return np.exp(special.gammaln(2 * k + 1) - 2 * special.gammaln(k + 1) - k * math.log(4.0))


def decorrelate(cov: CovarianceMatrix) -> Decomposition:
    """``Gamma^{-1/2} = sum_k alpha_k Delta^k`` with ``Delta = I - Gamma``.

    Stops once every row of ``|alpha_k Delta^k|`` sums below ``1e-14``.  The
    geometric envelope ``sum_j |(Delta^k)_ij| <= delta_i / 3^{k-1}`` is
    asserted for every term.
    """
    n = cov.n
    I = np.eye(n, dtype=np.complex128)
    D = I - cov.Gamma
    delta = cov.delta
    mixing = I.copy()
    term = I.copy()
    k = 0
    alpha = 1.0
    while True:
        k += 1
        term = D @ term
        alpha *= (2 * k - 1) / (2 * k)
        rows = np.abs(term).sum(axis=1)
        envelope = delta / 3.0 ** (k - 1)
        assert np.all(rows <= envelope * (1 + 1e-12) + 1e-15 * k), "Neumann envelope"
        mixing += alpha * term
        if np.all(alpha * rows <= _NEUMANN_STOP) or k > 200:
            break
    tilde = I - mixing
    bound = np.abs(tilde).sum(axis=1)
    var = np.einsum("ij,jk,ik->i", tilde, cov.Gamma, tilde.conj()).real
    s = np.sqrt(np.maximum(var, 0.0))
    return Decomposition(mixing, s, bound, k)


def row_sum_check(centers, R, sigma) -> dict:
    """Row sums ``2 sum_{j != i} (1 + R_j^2) exp(-D_ij^2/8)`` against ``exp(-2 sigma_i^2)``.

    ``D_ij = |w_i - w_j| - R_i - R_j``.  ``hypotheses`` reports whether the
    disks ``D(w_j, R_j + 8 sigma_j)`` are pairwise disjoint with ``R_j >= 1``
    and ``sigma_j >= max(1, sqrt(log R_j))``; the inequality is only expected
    under them.
    """
    w = np.asarray(centers, dtype=np.complex128)
    R = np.broadcast_to(np.asarray(R, dtype=float), w.shape)
    sg = np.broadcast_to(np.asarray(sigma, dtype=float), w.shape)
    n = w.size
    hyp = bool(np.all(R >= 1) and np.all(sg >= np.maximum(1.0, np.sqrt(np.log(R)))))
    lhs = np.zeros(n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dist = abs(w[i] - w[j])
            if dist <= R[i] + R[j] + 8 * sg[i] + 8 * sg[j]:
                hyp = False
            Dij = dist - R[i] - R[j]
            lhs[i] += 2.0 * (1.0 + R[j] ** 2) * math.exp(-Dij * Dij / 8.0)
    rhs = np.exp(-2.0 * sg ** 2)
    return {"hypotheses": hyp, "lhs": lhs.tolist(), "rhs": rhs.tolist(),
            "holds": bool(np.all(lhs <= rhs))}


@dataclass
class DemoReport:
    centers: list
    r: float
    rho: float
    A: float
    K: int
    n_trials: int
    delta_max: float
    certified_max: float
    sup_h: list
    exceed_freq: float
    tail_bound: float
    cov_excess: float
    cov_floor: float
    row_sum: dict

    @property
    def cov_bound_holds(self) -> bool:
        return bool(self.cov_excess <= self.cov_floor)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["cov_bound_holds"] = self.cov_bound_holds
        d["centers"] = [[float(complex(c).real), float(complex(c).imag)] for c in self.centers]
        return d


def almost_independence_demo(centers, r: float, rho: float, lineage: SeedLineage, *,
                             A: float = 20.0, n_trials: int = 1000) -> DemoReport:
    """Split ``T_{w_j} f = f_j + h_j`` with independent ``f_j`` on sampled ``f``.

    The family is ``zeta_k(w_j)``, ``k <= K`` with ``K`` the planner order at
    radius ``r``; coefficients beyond ``K`` are covered by the truncation
    certificate, which adds ``2 eps_amp`` to each remainder bound.  The
    reported ``sup_h`` is the largest over trials of
    ``sum_k |h_jk| >= max_{r D} |h_j| e^{-|z|^2/2}``.
    """
    centers = [complex(w) for w in centers]
    if not centers:
        raise ValueError("need at least one center")
    if r < 1:
        raise ValueError("r must be >= 1")
    if rho < max(1.0, math.sqrt(math.log(r))):
        raise ValueError("rho must be >= max(1, sqrt(log r))")
    rad = r + A * rho
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(centers[i] - centers[j]) <= 2 * rad:
                raise ValueError(f"disks D(w, r + A rho) with A={A:g} are not disjoint")
    K = truncation_order(max(r, 1.0))
    nc = len(centers)
    Gamma = family_covariance(centers, K)
    # the two halves of the inner product are conjugate; symmetrize rounding
    Gamma = 0.5 * (Gamma + Gamma.conj().T)
    np.fill_diagonal(Gamma, 1.0)
    cov = CovarianceMatrix(Gamma)
    dec = decorrelate(cov)
    tilde = np.eye(cov.n) - dec.mixing

    # largest amount by which a cross covariance exceeds 2 exp(-d^2/8)
    cov_excess = -math.inf
    root = np.sqrt(np.arange(K + 1))
    for a in range(nc):
        for b in range(a + 1, nc):
            block = np.abs(Gamma[a * (K + 1):(a + 1) * (K + 1), b * (K + 1):(b + 1) * (K + 1)])
            d = abs(centers[a] - centers[b]) - root[:, None] - root[None, :]
            ok = d > 0
            if ok.any():
                bd = 2.0 * np.exp(-d[ok] ** 2 / 8.0)
                cov_excess = max(cov_excess, float(np.max(block[ok] - bd)))

    R_f = max(abs(w) for w in centers) + r
    K_f = truncation_order(R_f)
    rows = [translation_matrix(-w, K_f, K).entries for w in centers]
    level = math.exp(-rho * rho)
    sup_h = np.zeros(nc)
    exceed = 0
    for t in range(n_trials):
        c = sample_coefficients(VarianceProfile.constant(), K_f, lineage.child(t)).coefficients
        xi = np.concatenate([M @ c for M in rows])
        h = (tilde @ xi).reshape(nc, K + 1)
        sup = np.abs(h).sum(axis=1) + 2.0 * DEFAULT_EPS_AMP
        sup_h = np.maximum(sup_h, sup)
        exceed += bool(np.any(sup >= level))
    Rj = math.sqrt(K)
    sigma = max(1.0, math.sqrt(math.log(Rj)))
    return DemoReport(
        centers=centers, r=float(r), rho=float(rho), A=float(A), K=K, n_trials=n_trials,
        delta_max=float(cov.delta.max()), certified_max=float(dec.certified_bound.max()),
        sup_h=sup_h.tolist(), exceed_freq=exceed / n_trials,
        tail_bound=2.0 * math.exp(-0.5 * math.exp(rho * rho)),
        cov_excess=cov_excess, cov_floor=rounding_floor(_family_rows(centers, K)),
        row_sum=row_sum_check(centers, Rj, sigma))
