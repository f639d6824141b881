import math

import mpmath
import numpy as np
import pytest
from scipy import special, stats

from gefzeros.gaussian_core import SeedLineage, VarianceProfile, sample_coefficients
from gefzeros.series import (OutsideCertifiedRadius, SeriesSample, certified_radius,
                             evaluate, evaluate_star, tail_sum, translate_sample,
                             translation_matrix, truncation_order)

GOLDEN_K_R4 = 96   # truncation_order(4, 1e-6, 1e-9), pinned


def _sample(lin, r=3.0):
    return sample_coefficients(VarianceProfile.constant(), truncation_order(r), lin)


# ---------------------------------------------------------------- planner

def test_planner_golden():
    assert truncation_order(4, 1e-6, 1e-9) == GOLDEN_K_R4


def test_planner_matches_direct_summation():
    # independent oracle: walk K upward summing S(K, r) with mpmath
    r, eps, delta = 4, 1e-6, 1e-9
    target = eps / math.sqrt(2 * math.log(2 / delta))
    K = 16
    while True:
        S = mpmath.nsum(lambda k: mpmath.exp(-(mpmath.sqrt(k) - r) ** 2 / 2), [K + 1, mpmath.inf])
        if S <= target:
            break
        K += 1
    assert K == truncation_order(r, eps, delta)


def test_planner_defaults_and_monotone():
    assert truncation_order(0.2) == truncation_order(1.0)
    prev = 0
    for r in (1, 2, 3, 4, 6, 8, 12):
        K = truncation_order(r)
        assert K >= math.ceil(r * r) and K >= prev
        prev = K
    assert truncation_order(6, 1e-6, 1e-9) >= truncation_order(4, 1e-6, 1e-9)
    with pytest.raises(ValueError):
        truncation_order(2, 0.0, 1e-3)


def test_planner_condition_holds_and_is_minimal():
    for r in (1, 3.5, 7):
        K = truncation_order(r)
        target = 1e-9 / math.sqrt(2 * math.log(2 / 1e-12))
        assert tail_sum(K, r) <= target < tail_sum(K - 1, r)


def test_certified_radius_inverts_planner():
    for K in (62, 100, 224):
        r = certified_radius(K)
        assert truncation_order(r) <= K
        assert truncation_order(r + 1e-6) > K or r == math.sqrt(K)


# ---------------------------------------------------------------- evaluation

def test_trivial_series():
    one = SeriesSample.exact_series([1, 0, 0])
    assert evaluate(one, 3 + 4j) == 1.0
    lin = SeriesSample.exact_series([0, 1, 0])
    assert evaluate(lin, 2) == 2.0
    assert evaluate_star(one, 0) == 1.0


def test_evaluate_against_mpmath(lineage):
    s = _sample(lineage, 4.0)
    rng = np.random.default_rng(5)
    z = 4.0 * np.sqrt(rng.random(100)) * np.exp(2j * np.pi * rng.random(100))
    got = evaluate(s, z)
    mpmath.mp.dps = 40
    worst = 0.0
    for zi, gi in zip(z, got):
        zz = mpmath.mpc(zi.real, zi.imag)
        ref = mpmath.fsum(mpmath.mpc(c.real, c.imag) * zz ** k / mpmath.sqrt(mpmath.factorial(k))
                          for k, c in enumerate(s.coefficients))
        worst = max(worst, float(abs(gi - complex(ref)) / abs(ref)))
    assert worst <= 1e-10


def test_evaluate_star_large_radius(lineage):
    s = sample_coefficients(VarianceProfile.constant(), truncation_order(20), lineage)
    z = 19.5 * np.exp(1j * np.linspace(0, 6, 7))
    v = evaluate_star(s, z)
    assert np.all(np.isfinite(v)) and np.all(v < 20)


def test_outside_radius(lineage):
    s = _sample(lineage, 3.0)
    with pytest.raises(OutsideCertifiedRadius, match="outside certified radius"):
        evaluate(s, s.r_valid + 1)


def test_fstar_law_and_invariance():
    base = SeedLineage(77)
    z0 = 1.5 - 0.5j
    w = 2 + 1j
    a, b, c = [], [], []
    for i in range(4000):
        s = _sample(base.child(i), 3.0)
        vals = evaluate_star(s, np.array([z0, 0, w]))
        a.append(vals[0] ** 2)
        b.append(vals[1])
        c.append(vals[2])
    assert stats.kstest(a, "expon").pvalue > 0.01
    assert stats.ks_2samp(b, c).pvalue > 0.01


def test_covariance_kernel():
    base = SeedLineage(99)
    rng = np.random.default_rng(3)
    pts = 2 * np.sqrt(rng.random((10, 2))) * np.exp(2j * np.pi * rng.random((10, 2)))
    n = 20_000
    vals = np.array([evaluate(_sample(base.child(i), 2.0), pts.ravel()) for i in range(n)])
    vals = vals.reshape(n, 10, 2)
    prod = vals[:, :, 0] * vals[:, :, 1].conj()
    mean = prod.mean(axis=0)
    target = np.exp(pts[:, 0] * pts[:, 1].conj())
    se_re = prod.real.std(axis=0, ddof=1) / math.sqrt(n)
    se_im = prod.imag.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(mean.real - target.real) <= 4 * se_re + 1e-12)
    assert np.all(np.abs(mean.imag - target.imag) <= 4 * se_im + 1e-12)


def test_truncation_certificate_empirical():
    # sup over |z| = r of the omitted tail of f*, against a 4K-term reference
    base = SeedLineage(123)
    r = 2.0
    K = truncation_order(r)
    theta = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    z = r * np.exp(1j * theta)
    exceed = 0
    n = 2000
    for i in range(n):
        full = sample_coefficients(VarianceProfile.constant(), 4 * K, base.child(i))
        tail = SeriesSample.exact_series(np.concatenate([np.zeros(K + 1),
                                                         full.coefficients[K + 1:]]))
        exceed += np.max(evaluate_star(tail, z)) > 1e-9
    assert exceed / n <= 1e-12 + 3 * math.sqrt(1 / n) * 0.5


def test_json_roundtrip(lineage):
    s = _sample(lineage)
    t = SeriesSample.from_json(s.to_json())
    assert np.array_equal(s.coefficients, t.coefficients) and t.r_valid == s.r_valid
    e = SeriesSample.from_polynomial([1, 2, 3])
    assert SeriesSample.from_json(e.to_json()).exact


# ---------------------------------------------------------------- translations

def test_translation_identity_at_zero():
    M = translation_matrix(0, 10, 12).entries
    assert np.array_equal(M[:11], np.eye(11)) and not M[11:].any()


def test_translation_closed_form():
    # |<e_j, T_w e_{j+m}>| = sqrt(j!/(j+m)!) x^{m/2} e^{-x/2} |L_j^(m)(x)|
    w = 2.3 - 1.1j
    x = abs(w) ** 2
    M = translation_matrix(w, 30, 60).entries
    for j in range(0, 25, 4):
        for m in range(0, 20, 3):
            ref = math.exp(0.5 * (special.gammaln(j + 1) - special.gammaln(j + m + 1))
                           + 0.5 * m * math.log(x) - 0.5 * x) * abs(special.eval_genlaguerre(j, m, x))
            assert abs(abs(M[j + m, j]) - ref) <= 1e-12
            if j + m <= 30:
                assert abs(abs(M[j, j + m]) - ref) <= 1e-12


def test_translation_e0_overlap():
    d = 1.7
    a = translation_matrix(0, 0, 80).entries[:, 0]
    b = translation_matrix(d, 0, 80).entries[:, 0]
    assert abs(abs(np.vdot(a, b)) - math.exp(-d * d / 2)) < 1e-14


def test_translation_column_norms():
    T = translation_matrix(1.0, 5)
    n = T.column_norms()
    assert np.all(n >= 1 - 1e-8) and np.all(n <= 1 + 1e-12)


def test_translate_pointwise(lineage):
    s = sample_coefficients(VarianceProfile.constant(), truncation_order(6), lineage)
    w = 1.2 + 0.7j
    t = translate_sample(s, w, r_out=3.0)
    rng = np.random.default_rng(2)
    z = 3 * np.sqrt(rng.random(50)) * np.exp(2j * np.pi * rng.random(50))
    lhs = evaluate(t, z)
    rhs = evaluate(s, w + z) * np.exp(-z * np.conj(w) - abs(w) ** 2 / 2)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) <= 1e-8


def test_translate_zero_and_inverse(lineage):
    s = sample_coefficients(VarianceProfile.constant(), truncation_order(8), lineage)
    same = translate_sample(s, 0, K_out=s.K, r_out=2.0)
    assert np.array_equal(same.coefficients, s.coefficients)
    w = 0.8 - 0.4j
    back = translate_sample(translate_sample(s, w, r_out=6.0), -w, r_out=4.0)
    z = 3.0 * np.exp(1j * np.linspace(0, 6, 40))
    assert np.max(np.abs(evaluate(back, z) - evaluate(s, z))) * math.exp(-4.5) < 1e-8


def test_translated_coefficients_are_standard():
    base = SeedLineage(5)
    w = 1.5 + 0.5j
    vals = []
    for i in range(4000):
        s = sample_coefficients(VarianceProfile.constant(), truncation_order(5), base.child(i))
        vals.append(translate_sample(s, w, K_out=70, r_out=1.0).coefficients[[0, 3]])
    vals = np.array(vals)
    for col in vals.T:
        assert stats.kstest(np.abs(col) ** 2, "expon").pvalue > 0.01
