import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from gefzeros.analytic import (BoundHypothesisError, BoundId, BoundSpec, bound_value,
                               check_elementary_inequalities, edelman_kostlan_mean,
                               grid_specs, measured_c1, nsv_spec, validate_bound)
from gefzeros.gaussian_core import SeedLineage, VarianceProfile


def _ek_oracle(a2, r):
    # direct series r C'(r) / (2 C(r)) in extended precision
    mpmath.mp.dps = 50
    r = mpmath.mpf(r)
    C = mpmath.fsum(mpmath.mpf(a) * r ** (2 * k) / mpmath.factorial(k) for k, a in enumerate(a2))
    dC = mpmath.fsum(mpmath.mpf(a) * 2 * k * r ** (2 * k - 1) / mpmath.factorial(k)
                     for k, a in enumerate(a2) if k)
    return float(r * dC / (2 * C))


def test_constant_mean():
    for r in (0.5, 1, 2, 3, 4, 10):
        assert edelman_kostlan_mean(VarianceProfile.constant(), r) == pytest.approx(r * r, abs=1e-12)
    assert edelman_kostlan_mean(VarianceProfile.constant(), 2) == 4.0
    assert edelman_kostlan_mean(VarianceProfile.constant(), 0) == 0.0


def test_monomial_mean():
    vals = [0.0] * 5 + [1.0]
    for r in (0.3, 1.0, 4.0):
        assert edelman_kostlan_mean(VarianceProfile.table(vals), r) == pytest.approx(5.0)


@pytest.mark.parametrize("R", [4, 8, 16])
def test_banded_mean_matches_series(R):
    p = VarianceProfile.jlm(R, 0.75)
    K = int((R + 12) ** 2)
    a2 = [1.0] * (K + 1)
    for k in p.special_indices():
        a2[k] = float(p.tilt + 1) if k <= p.j_minus[1] else float(1 - p.tilt)
    ref = _ek_oracle(a2, R)
    assert edelman_kostlan_mean(p, R) == pytest.approx(ref, rel=1e-12)
    assert edelman_kostlan_mean(p, R) < R * R


def test_table_mean_matches_series():
    vals = [1.0, 0.0, 2.0, 0.5, 1.5]
    a2 = [v * v for v in vals]
    assert edelman_kostlan_mean(VarianceProfile.table(vals), 1.3) == pytest.approx(
        _ek_oracle(a2, 1.3), rel=1e-13)


def test_measured_c1():
    c1 = measured_c1([4, 8, 16], 0.75)
    assert c1 > 0
    for R in (4, 8, 16):
        ek = edelman_kostlan_mean(VarianceProfile.jlm(R, 0.75), R)
        assert ek <= R * R - c1 * R ** 0.75 + 1e-12


def test_bound_examples():
    assert bound_value(BoundSpec("bernstein", {"K": 1, "n": 16, "t": 4})) == 1.0
    assert bound_value(BoundSpec("max_fstar", {"r": 1, "M": 8})) == 1.0
    assert bound_value(BoundSpec("max_fstar", {"r": 1, "M": 20})) == pytest.approx(
        18 * math.exp(-12.5))
    assert bound_value(BoundSpec("small_on_curve", {"r": 1, "eps": 0.25})) == 1.0
    assert bound_value(BoundSpec("nsv_sum", {"t": 4, "S": 1})) == pytest.approx(2 * math.exp(-8))


def test_bound_hypotheses():
    with pytest.raises(BoundHypothesisError, match="precondition failed"):
        BoundSpec("small_on_curve", {"r": 1, "eps": 0.5})
    with pytest.raises(BoundHypothesisError, match="m >= 25B"):
        BoundSpec("arc_delta_tail", {"r": 1, "m": 10})
    with pytest.raises(BoundHypothesisError, match="missing parameter"):
        BoundSpec("max_fstar", {"r": 1})
    with pytest.raises(BoundHypothesisError):
        BoundSpec("bernstein", {"K": 1, "n": 1, "t": 6})


def test_validate_examples():
    lin = SeedLineage(41)
    rep = validate_bound(BoundSpec("max_fstar", {"r": 1, "M": 4}), 10_000, lin)
    assert rep.empirical_freq < 18 * math.exp(-0.5) and rep.passed
    rep = validate_bound(nsv_spec(4.0), 10_000, lin)
    assert rep.empirical_freq <= 2 * math.exp(-8) + 3 * rep.stderr
    d = rep.to_dict()
    assert set(d) == {"bound_id", "params", "empirical", "stderr", "bound", "n", "pass"}


def test_validator_sees_events():
    # a bound that is far too small must fail: the simulators are not vacuous
    lin = SeedLineage(3)
    spec = BoundSpec("bernstein", {"K": 100.0, "n": 8, "t": 2.0})
    rep = validate_bound(spec, 4000, lin)
    assert rep.empirical_freq > 0.1


@pytest.mark.parametrize("bid", list(BoundId))
def test_grid_specs_valid(bid):
    specs = grid_specs(bid)
    assert specs and all(0 <= bound_value(s) <= 1 for s in specs)


def test_inequality_examples():
    rep = check_elementary_inequalities({"k": [1], "t": [1.0], "d": [1.0], "quad_k": [1]})
    assert rep.ok and rep.min_slack["log_inequality"] == pytest.approx(0.0, abs=1e-14)
    k, t = 100, 150
    slack_term = (math.sqrt(t) - math.sqrt(k)) ** 2
    assert slack_term == pytest.approx(5.05, abs=0.01)
    rep = check_elementary_inequalities({"k": [k], "t": [t], "d": [1.0], "quad_k": [k]})
    assert rep.ok and rep.min_slack["log_inequality"] > 0
    # k = 4, d = 2: quadrature oracle for the tail
    u = (2 + 2) ** 2
    tail, _ = integrate.quad(lambda s: s ** 4 * math.exp(-s) / 24, u, np.inf)
    assert tail <= math.exp(-4)


def test_inequalities_default_grid():
    rep = check_elementary_inequalities()
    assert rep.ok, rep.violations[:3]
    assert rep.quad_max_rel_diff < 1e-8
