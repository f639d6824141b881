import math

import numpy as np
import pytest

from gefzeros.almost_independence import (CovarianceMatrix, almost_independence_demo,
                                          coefficient_covariance, decorrelate,
                                          neumann_coefficients, pair_covariance_bound,
                                          random_covariance, row_sum_check)
from gefzeros.gaussian_core import SeedLineage, complex_normals


def test_same_center_orthonormal():
    w = 1.5 - 2j
    assert coefficient_covariance(w, 3, w, 3) == pytest.approx(1.0, abs=1e-8)
    assert abs(coefficient_covariance(w, 3, w, 5)) < 1e-8
    assert coefficient_covariance(0, 0, 0, 0) == pytest.approx(1.0, abs=1e-12)


def test_covariance_closed_form_degree_zero():
    # <k_{w2}, k_{w1}> for normalized reproducing kernels: exp(conj(w1) w2 - |w1|^2/2 - |w2|^2/2)
    rng = np.random.default_rng(5)
    for _ in range(20):
        w1, w2 = (complex(*rng.uniform(-4, 4, 2)) for _ in range(2))
        ref = abs(np.exp(np.conj(w1) * w2 - abs(w1) ** 2 / 2 - abs(w2) ** 2 / 2))
        assert abs(coefficient_covariance(w1, 0, w2, 0)) == pytest.approx(ref, rel=1e-9,
                                                                           abs=1e-15)
        assert ref == pytest.approx(math.exp(-abs(w1 - w2) ** 2 / 2), rel=1e-12)


def test_covariance_hermitian():
    a = coefficient_covariance(1 + 1j, 2, -0.5j, 4)
    b = coefficient_covariance(-0.5j, 4, 1 + 1j, 2)
    assert a == pytest.approx(np.conj(b), abs=1e-12)


def test_distant_covariance_bound():
    k1, k2 = 4, 9
    d = math.sqrt(k1) + math.sqrt(k2) + 4
    assert pair_covariance_bound(0, k1, d, k2) == pytest.approx(2 * math.exp(-2))
    assert abs(coefficient_covariance(0, k1, d, k2)) <= 2 * math.exp(-2)
    assert pair_covariance_bound(0, 4, 1.0, 4) is None


def test_covariance_matrix_validation():
    with pytest.raises(ValueError, match="1/3"):
        CovarianceMatrix(np.array([[1, 0.4], [0.4, 1]]))
    with pytest.raises(ValueError, match="Hermitian"):
        CovarianceMatrix(np.array([[1, 0.1j], [0.1j, 1]]))
    with pytest.raises(ValueError, match="diagonal"):
        CovarianceMatrix(np.diag([1.0, 2.0]))


def test_neumann_coefficients():
    a = neumann_coefficients(6)
    assert a[:3] == pytest.approx([1.0, 0.5, 0.375])
    x = 0.3
    assert np.sum(neumann_coefficients(80) * x ** np.arange(80)) == pytest.approx(
        (1 - x) ** -0.5)


def test_identity_decorrelation():
    dec = decorrelate(CovarianceMatrix(np.eye(4)))
    assert np.array_equal(dec.mixing, np.eye(4))
    assert np.all(dec.s == 0)


def test_two_by_two_matches_eigh():
    G = np.array([[1, 0.2], [0.2, 1]], dtype=complex)
    dec = decorrelate(CovarianceMatrix(G))
    lam, V = np.linalg.eigh(G)
    ref = (V * lam ** -0.5) @ V.conj().T
    assert np.abs(dec.mixing - ref).max() < 1e-12
    assert np.all(dec.s <= 0.2)


def test_random_decorrelation():
    rng = np.random.default_rng(11)
    for _ in range(200):
        cov = random_covariance(int(rng.integers(1, 17)), rng)
        dec = decorrelate(cov)
        M = dec.mixing
        assert np.abs(M @ cov.Gamma @ M.conj().T - np.eye(cov.n)).max() < 1e-10
        assert np.all(dec.s <= cov.delta * (1 + 1e-12) + 1e-15)
        assert np.all(dec.s <= dec.certified_bound * (1 + 1e-12) + 1e-15)


def test_whitening_by_sampling():
    rng = np.random.default_rng(3)
    cov = random_covariance(8, rng)
    dec = decorrelate(cov)
    n = 100_000
    L = np.linalg.cholesky(cov.Gamma)
    z = complex_normals(SeedLineage(9), 8 * n).reshape(n, 8)
    xi = z @ L.T
    zeta = xi @ dec.mixing.T
    emp = zeta.T @ zeta.conj() / n
    # each entry is a mean of n unit-variance products
    assert np.abs(emp - np.eye(8)).max() < 4.5 / math.sqrt(n)


def test_row_sum_check():
    rep = row_sum_check([0, 200], 2.0, 1.0)
    assert rep["hypotheses"] and rep["holds"]
    rep = row_sum_check([0, 5], 2.0, 1.0)
    assert not rep["hypotheses"]


def test_demo_single_center():
    rep = almost_independence_demo([0j], 2.0, 2.0, SeedLineage(1), A=6, n_trials=20)
    assert rep.delta_max == 0 and max(rep.sup_h) < 1e-8


def test_demo_two_centers():
    rep = almost_independence_demo([-15, 15], 2.0, 2.0, SeedLineage(2), A=6, n_trials=200)
    se = math.sqrt(max(rep.exceed_freq, 1 / 200) / 200)
    assert rep.exceed_freq <= rep.tail_bound + 3 * se
    assert rep.cov_bound_holds
    assert rep.delta_max < 1e-8
    d = rep.to_dict()
    assert d["centers"] == [[-15.0, 0.0], [15.0, 0.0]]


def test_demo_rejects_overlap():
    with pytest.raises(ValueError, match="disjoint"):
        almost_independence_demo([0, 10], 2.0, 2.0, SeedLineage(0), A=6, n_trials=1)
    with pytest.raises(ValueError, match="rho"):
        almost_independence_demo([0], 2.0, 0.5, SeedLineage(0))
