import math

import numpy as np
import pytest

from gefzeros.analytic import edelman_kostlan_mean
from gefzeros.gaussian_core import SeedLineage, VarianceProfile, complex_normals
from gefzeros.rare_events import (TailSign, bernstein_diagnostic, deficit_c1,
                                  is_estimate_deficit, log_rn_weight, log_weight_bound_off_U,
                                  mc_estimate_tail, plain_deficit, rn_weight,
                                  weight_second_moment)


def test_weight_constant_profile():
    assert rn_weight(VarianceProfile.constant(), np.ones(5, dtype=complex)) == 1.0


def test_weight_single_index():
    p = VarianceProfile.table([1.0, math.sqrt(2.0)])
    assert rn_weight(p, [0.3 + 0.1j, 1.0]) == pytest.approx(2 * math.exp(-0.5))
    assert rn_weight(p, [0, 1j]) == pytest.approx(1.2131, abs=1e-4)


def test_weight_singular():
    with pytest.raises(ValueError, match="singular"):
        log_rn_weight(VarianceProfile.table([1.0, 0.0]), [1.0, 1.0])


def test_weight_unbiased_on_bounded_event():
    # E_{gamma_a}[w 1{|eta_1|^2 < 1}] = P_gamma{|zeta|^2 < 1} = 1 - e^{-1}
    a = math.sqrt(1.6)
    p = VarianceProfile.table([1.0, a])
    n = 100_000
    eta = a * complex_normals(SeedLineage(4), n)
    rows = np.zeros((n, 2), dtype=complex)
    rows[:, 1] = eta
    w = np.exp(log_rn_weight(p, rows))
    x = w * (np.abs(eta) ** 2 < 1)
    assert abs(x.mean() - (1 - math.exp(-1))) < 4 * x.std() / math.sqrt(n)
    assert abs(w.mean() - 1) < 4 * w.std() / math.sqrt(n)


def test_weight_second_moment():
    assert weight_second_moment(4, 0.75) == math.inf
    R, alpha = 64.0, 0.75
    t = R ** (alpha - 1)
    per = (1 - t * t) ** 2 / (1 - 4 * t * t)
    assert weight_second_moment(R, alpha) == pytest.approx(per ** 64)
    # one (1 + t, 1 - t) band pair by sampling under the tilted law
    a = np.sqrt([1 + t, 1 - t])
    p = VarianceProfile.table([1.0, a[0], a[1]])
    n = 200_000
    rows = np.zeros((n, 3), dtype=complex)
    rows[:, 1:] = complex_normals(SeedLineage(8), 2 * n).reshape(n, 2) * a
    w2 = np.exp(2 * log_rn_weight(p, rows))
    assert abs(w2.mean() - per) < 4 * w2.std() / math.sqrt(n)


def test_deficit_direction():
    for R in range(2, 21):
        assert edelman_kostlan_mean(VarianceProfile.jlm(R, 0.75), R) < R * R
        assert deficit_c1(R, 0.75) > 0


def test_empty_event():
    est = is_estimate_deficit(3, 0.75, 1e6, 10, SeedLineage(0))
    assert est.p_hat == 0.0 and est.hit_rate == 0.0


def test_is_preconditions():
    with pytest.raises(ValueError):
        is_estimate_deficit(1.5, 0.75, None, 10, SeedLineage(0))
    with pytest.raises(ValueError):
        is_estimate_deficit(4, 1.2, None, 10, SeedLineage(0))
    with pytest.raises(ValueError):
        is_estimate_deficit(4, 0.75, None, 10, SeedLineage(0), defensive=1.0)


def test_is_matches_plain_mc():
    R, alpha, thr = 3.0, 0.75, 7
    c = (R * R - thr - 0.5) / R ** alpha
    est = is_estimate_deficit(R, alpha, c, 1500, SeedLineage(21), defensive=0.2)
    p, (lo, hi) = plain_deficit(R, thr, 3000, SeedLineage(22))
    assert est.ci95[0] <= hi and lo <= est.ci95[1]
    assert est.ess > 100 and not est.low_ess


def test_is_deterministic():
    a = is_estimate_deficit(3, 0.75, None, 60, SeedLineage(5))
    b = is_estimate_deficit(3, 0.75, None, 60, SeedLineage(5))
    assert a == b
    assert set(a.to_dict()) >= {"p_hat", "stderr", "ess", "n", "ci_lo", "ci_hi", "c"}


def test_mc_tail_fields():
    est = mc_estimate_tail(3, 0.5, "deficit", 200, SeedLineage(6))
    d = est.to_dict()
    for s in TailSign:
        assert f"p_{s.value}" in d
    assert est.p("both") == pytest.approx(est.p("excess") + est.p("deficit"))
    assert est == mc_estimate_tail(3, 0.5, "deficit", 200, SeedLineage(6))


def test_large_deviation_shrinks():
    # alpha = 2: |n - R^2| > R^2 only via n = 0 or n > 2 R^2
    ps = [mc_estimate_tail(R, 2.0, "both", 400, SeedLineage(7)).p() for R in (1, 2, 3)]
    assert ps[0] >= ps[1] >= ps[2]
    assert ps[2] == 0.0


def test_bernstein_diagnostic():
    out = bernstein_diagnostic(8, SeedLineage(12), 4000)
    assert out["N"] == 8
    assert out["tails"][0]["bound"] == 1.0
    assert all(t["pass"] for t in out["tails"])
    assert abs(out["mean_X"]) < 4 * out["stderr_X"]
    assert out["log_ratio_bound_holds"]
    assert out["log_ratio_bound_off_U"] == log_weight_bound_off_U(8, 0.75)
