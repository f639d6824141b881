import json
import math

import numpy as np
import pytest
from scipy import stats

from gefzeros.gaussian_core import (STREAM_AUX, ProfileKind, SeedLineage, VarianceProfile,
                                    coefficient_batch, complex_normals, profile_array,
                                    profile_value, sample_coefficients, uniforms)


def test_constant_profile_is_one():
    assert profile_value(VarianceProfile.constant(), 7) == 1.0


def test_banded_profile_values():
    p = VarianceProfile.jlm(10, 0.75)
    lo, hi = p.j_minus
    assert profile_value(p, lo) == pytest.approx(math.sqrt(1 + 10 ** -0.25))
    # direct evaluation: sqrt(1.56234) = 1.24993
    assert profile_value(p, lo) == pytest.approx(1.24993, abs=1e-5)
    lo2, _ = p.j_plus
    assert profile_value(p, lo2) == pytest.approx(math.sqrt(1 - 10 ** -0.25))
    assert profile_value(p, 0) == 1.0
    assert profile_value(p, hi + 1) == 1.0


def test_banded_index_sets():
    for R in (2, 2.5, 4, 7.3, 16):
        p = VarianceProfile.jlm(R, 0.75)
        N = math.floor(R)
        (a, b), (c, d) = p.j_minus, p.j_plus
        assert b - a + 1 == N and d - c + 1 == N
        assert R * R - 2 * R < a and R * R + R < c
        # exact containment for integer R; otherwise the last index may pass by < 1
        slack = 1e-9 if float(R).is_integer() else 1.0
        assert b <= R * R - R + slack and d <= R * R + 2 * R + slack
        a2 = profile_array(p, d + 3) ** 2
        assert set(np.round(a2, 12)) <= {round(1 - R ** -0.25, 12), round(1 + R ** -0.25, 12), 1.0}


def test_banded_preconditions():
    with pytest.raises(ValueError):
        VarianceProfile.jlm(1.5, 0.75)
    with pytest.raises(ValueError):
        VarianceProfile.jlm(4, 1.0)


def test_table_profile_out_of_range():
    p = VarianceProfile.table([1.0, 0.5])
    assert profile_value(p, 1) == 0.5
    with pytest.raises(IndexError, match="index beyond table"):
        profile_value(p, 2)


def test_profile_json_roundtrip():
    for p in (VarianceProfile.constant(), VarianceProfile.jlm(5, 0.6),
              VarianceProfile.table([1, 2, 0])):
        q = VarianceProfile.from_json(p.to_json())
        assert q == p
    d = json.loads(VarianceProfile.jlm(4, 0.75).to_json())
    assert set(d) == {"kind", "R", "alpha", "j_minus", "j_plus"}


def test_same_lineage_same_bits(lineage):
    a = sample_coefficients(VarianceProfile.constant(), 80, lineage).coefficients
    b = sample_coefficients(VarianceProfile.constant(), 80, lineage).coefficients
    assert np.array_equal(a.view(np.uint64), b.view(np.uint64))


def test_streams_differ(lineage):
    a = complex_normals(lineage.child(1), 10)
    b = complex_normals(lineage.child(2), 10)
    c = complex_normals(lineage.child(1, STREAM_AUX), 10)
    assert not np.allclose(a, b) and not np.allclose(a, c)


def test_prefix_property(lineage):
    # a longer draw extends a shorter one
    a = complex_normals(lineage, 10)
    b = complex_normals(lineage, 30)
    assert np.array_equal(a, b[:10])


def test_coefficient_batch_matches_single(lineage):
    p = VarianceProfile.jlm(4, 0.75)
    rows = coefficient_batch(p, 80, lineage, [0, 3, 7])
    for j, i in enumerate([0, 3, 7]):
        one = sample_coefficients(p, 80, lineage.child(i)).coefficients
        assert np.array_equal(rows[j], one)


def test_moments_and_exponential_law(lineage):
    z = complex_normals(lineage, 100_000)
    m2 = np.abs(z) ** 2
    se = m2.std(ddof=1) / math.sqrt(z.size)
    assert abs(m2.mean() - 1) < 3 * se
    for part in (z.real, z.imag):
        v = part ** 2
        assert abs(v.mean() - 0.5) < 4 * v.std(ddof=1) / math.sqrt(v.size)
    ind = m2 >= 2
    p = ind.mean()
    assert abs(p - math.exp(-2)) < 3 * math.sqrt(p * (1 - p) / z.size)
    assert stats.kstest(m2[:10_000], "expon").pvalue > 0.01


def test_uniforms_open_left(lineage):
    u = uniforms(lineage, 1000, open_left=True)
    assert np.all((u > 0) & (u <= 1))
    assert stats.kstest(u, "uniform").pvalue > 0.01


def test_lineage_validation():
    with pytest.raises(ValueError):
        SeedLineage(1, -1)
    with pytest.raises(ValueError):
        SeedLineage(1, 0, 256)
    assert VarianceProfile.constant().kind is ProfileKind.CONSTANT_ONE
