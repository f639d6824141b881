import math

import numpy as np
import pytest

from gefzeros import kernels
from gefzeros.gaussian_core import SeedLineage, VarianceProfile, sample_coefficients
from gefzeros.series import SeriesSample, translate_sample, truncation_order
from gefzeros.zeros import (Arc, RootFindingError, ZeroOnContour, _residuals, arc_argument_increment,
                            arc_delta, count_zeros_roots, count_zeros_winding, find_roots,
                            sample_counts)


def _gef(lin, R=3.0):
    return sample_coefficients(VarianceProfile.constant(), truncation_order(R), lin)


def test_constant_function_has_no_zeros():
    one = SeriesSample.exact_series([1.0])
    assert arc_argument_increment(one, Arc(2.0, 0.3, 2.0)) == 0.0
    assert count_zeros_winding(one, 5.0).count == 0
    assert count_zeros_roots(one, 5.0).count == 0


def test_identity_winds_once():
    z = SeriesSample.from_polynomial([0, 1])
    assert arc_argument_increment(z, Arc.circle(1.0)) == pytest.approx(2 * math.pi, abs=1e-12)


def test_cubic_example():
    # (z - 0.5)(z + 0.5i)(z - 2)
    p = np.poly([0.5, -0.5j, 2.0])[::-1]
    s = SeriesSample.from_polynomial(p)
    assert count_zeros_winding(s, 1.0).count == 2
    assert count_zeros_roots(s, 1.0).count == 2
    assert count_zeros_winding(s, 3.0).count == 3


def test_double_root_at_origin():
    s = SeriesSample.from_polynomial([0, 0, 1])
    assert count_zeros_roots(s, 1.0).count == 2
    assert count_zeros_winding(s, 1.0).count == 2


def test_zero_on_contour_raises():
    s = SeriesSample.from_polynomial([-1, 1])   # zero at z = 1
    with pytest.raises(ZeroOnContour):
        arc_argument_increment(s, Arc(1.0, -0.5, 0.5))


def test_winding_retry_moves_radius():
    s = SeriesSample.from_polynomial([-1, 1])
    res = count_zeros_winding(s, 1.0)
    assert res.count == 1 and res.near_contour and res.R > 1.0


def test_integrality_random(lineage):
    for i in range(20):
        s = _gef(lineage.child(i), 4.0)
        inc = arc_argument_increment(s, Arc.circle(4.0)) / (2 * math.pi)
        assert abs(inc - round(inc)) < 1e-9


def test_residuals(lineage):
    s = _gef(lineage, 3.0)
    roots = find_roots(s)
    assert roots.size == s.K
    assert np.max(_residuals(s, roots)) < 1e-8


def test_cross_method_agreement():
    base = SeedLineage(31)
    mismatch = 0
    for i in range(300):
        s = _gef(base.child(i), 3.0)
        a = count_zeros_winding(s, 3.0)
        b = count_zeros_roots(s, 3.0)
        if a.count != b.count:
            mismatch += 1
            assert a.near_contour or b.min_modulus_seen < 1e-6
    assert mismatch <= 1


def test_arc_delta_full_circle_and_additivity(lineage):
    s = _gef(lineage, 3.0)
    R = 2.5
    full = arc_delta(s, Arc.circle(R))
    n = count_zeros_winding(s, R).count
    assert full == pytest.approx(2 * math.pi * (n - R * R), abs=1e-9)
    halves = arc_delta(s, Arc(R, 0, math.pi)) + arc_delta(s, Arc(R, math.pi, 2 * math.pi))
    assert halves == pytest.approx(full, abs=1e-9)


def test_arc_delta_mean_zero():
    base = SeedLineage(8)
    R = 3.0
    arc = Arc(R, 0.0, 1.0 / R)   # |I| = 1
    d = np.array([arc_delta(_gef(base.child(i), R), arc) for i in range(4000)])
    assert abs(d.mean()) <= 4 * d.std(ddof=1) / math.sqrt(d.size)


def test_delta_translation_invariant(lineage):
    s = sample_coefficients(VarianceProfile.constant(), truncation_order(10), lineage)
    rng = np.random.default_rng(0)
    for _ in range(10):
        R = rng.uniform(1, 3)
        a = rng.uniform(0, 2 * np.pi)
        arc = Arc(R, a, a + rng.uniform(0.2, 2.0))
        w = arc.midpoint
        t = translate_sample(s, w, r_out=2 * R)
        assert arc_delta(t, arc.shifted(w)) == pytest.approx(arc_delta(s, arc), abs=1e-6)


def test_sample_counts_matches_single(lineage):
    p = VarianceProfile.constant()
    c = sample_counts(p, 2.0, lineage, [4, 9])
    for j, i in enumerate([4, 9]):
        s = sample_coefficients(p, truncation_order(2.0), lineage.child(i))
        assert c[j] == count_zeros_winding(s, 2.0).count


def test_identically_zero():
    with pytest.raises(RootFindingError):
        find_roots(SeriesSample.exact_series([0.0, 0.0]))


def test_degree_bound():
    s = SeriesSample.exact_series(np.ones(402))
    with pytest.raises(ValueError):
        count_zeros_roots(s, 1.0)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
def test_backends_agree(lineage):
    pure = kernels.get_backend("pure")
    fast = kernels.get_backend("cython")
    s = _gef(lineage, 4.0)
    z = 3.9 * np.exp(1j * np.linspace(0, 6.2, 200))
    a = pure.series_eval(s.coefficients, z, 7.6)
    b = fast.series_eval(s.coefficients, z, 7.6)
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-12
    for i in range(30):
        s = _gef(lineage.child(i), 4.0)
        assert count_zeros_winding(s, 4.0, backend=pure).count == \
            count_zeros_winding(s, 4.0, backend=fast).count
        assert count_zeros_roots(s, 4.0, backend=pure).count == \
            count_zeros_roots(s, 4.0, backend=fast).count
