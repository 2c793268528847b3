import numpy as np
import pytest

from causal_lrps import rng as rngmod
from causal_lrps.errors import DomainError, SingularSubmatrix
from causal_lrps.matcore import (
    CovarianceEstimate,
    degree,
    entrywise_l1,
    fisher_h,
    incoherence,
    max_abs_norm,
    max_col_sum,
    max_row_sum,
    nnz_matrix,
    partial_correlation,
    sign_matrix,
    spectral_norm,
)


def rand_sym(g, p, scale=1.0):
    a = g.standard_normal((p, p)) * scale
    return (a + a.T) / 2.0


class TestNorms:
    def test_spectral_identity(self):
        assert spectral_norm(np.eye(2)) == pytest.approx(1.0)

    def test_spectral_diagonal(self):
        assert spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)

    def test_spectral_matches_dense_eig(self):
        g = rngmod.stream(1, rngmod.STREAM_TEST)
        m = rand_sym(g, 8)
        w = np.linalg.eigvalsh(m)
        assert abs(spectral_norm(m) - np.abs(w).max()) < 1e-10

    def test_max_abs(self):
        assert max_abs_norm(np.eye(2)) == 1.0
        assert max_abs_norm([[0.0, -5.0], [-5.0, 2.0]]) == 5.0

    def test_max_abs_below_spectral(self):
        g = rngmod.stream(2, rngmod.STREAM_TEST)
        for _ in range(1000):
            m = rand_sym(g, int(g.integers(2, 7)))
            assert max_abs_norm(m) <= spectral_norm(m) + 1e-12

    def test_sum_norms_identity(self):
        i3 = np.eye(3)
        assert (entrywise_l1(i3), max_col_sum(i3), max_row_sum(i3)) == (3, 1, 1)

    def test_sum_norms_hand(self):
        m = [[1.0, 2.0], [2.0, 0.0]]
        assert (entrywise_l1(m), max_col_sum(m), max_row_sum(m)) == (5, 3, 3)

    def test_holder_bound(self):
        g = rngmod.stream(3, rngmod.STREAM_TEST)
        for _ in range(1000):
            m = rand_sym(g, int(g.integers(2, 8)))
            assert spectral_norm(m) <= np.sqrt(max_col_sum(m) * max_row_sum(m)) + 1e-10

    def test_spectral_below_degree_times_maxabs(self):
        g = rngmod.stream(4, rngmod.STREAM_TEST)
        for _ in range(300):
            p = int(g.integers(2, 8))
            m = rand_sym(g, p)
            m[np.abs(m) < 0.6] = 0.0
            m = (m + m.T) / 2.0
            assert spectral_norm(m) <= degree(m) * max_abs_norm(m) + 1e-10


class TestPatterns:
    def test_sign_and_nnz(self):
        m = np.diag([0.5, -2.0])
        assert np.array_equal(sign_matrix(m), np.diag([1, -1]))
        assert np.array_equal(nnz_matrix(m), np.eye(2, dtype=int))

    def test_zero_matrix(self):
        z = np.zeros((3, 3))
        assert not sign_matrix(z).any()
        assert not nnz_matrix(z).any()

    def test_nnz_of_sign_identity(self):
        g = rngmod.stream(5, rngmod.STREAM_TEST)
        for _ in range(100):
            m = rand_sym(g, 6)
            m[np.abs(m) < 0.8] = 0.0
            m = (m + m.T) / 2.0
            assert np.array_equal(nnz_matrix(m), nnz_matrix(sign_matrix(m).astype(float)))

    def test_degree(self):
        assert degree(np.eye(4)) == 1
        dense = np.full((4, 4), 0.3) + np.eye(4)
        assert degree(dense) == 4

    def test_degree_star(self):
        # star on 5 nodes: hub adjacent to all leaves, plus the diagonal
        m = np.eye(5)
        m[0, 1:] = 1.0
        m[1:, 0] = 1.0
        assert degree(m) == 5


class TestIncoherence:
    def test_rank_one_basis_vector(self):
        e1 = np.zeros((4, 4))
        e1[0, 0] = 1.0
        assert incoherence(e1) == pytest.approx(1.0)

    def test_flat_projector(self):
        p = 4
        m = np.full((p, p), 1.0 / p)
        assert incoherence(m) == pytest.approx(0.5)

    def test_full_rank_is_one(self):
        g = rngmod.stream(6, rngmod.STREAM_TEST)
        a = g.standard_normal((5, 5))
        m = a @ a.T + np.eye(5)
        assert incoherence(m) == pytest.approx(1.0)

    def test_zero_matrix(self):
        assert incoherence(np.zeros((3, 3))) == 0.0


class TestPartialCorrelation:
    def test_identity_is_zero(self):
        cov = CovarianceEstimate(np.eye(5), 10)
        assert partial_correlation(cov, 0, 3, (1, 4)) == pytest.approx(0.0)

    def test_marginal_correlation(self):
        cov = CovarianceEstimate([[1.0, 0.5], [0.5, 1.0]], 10)
        assert partial_correlation(cov, 0, 1) == pytest.approx(0.5)

    def test_chain_vanishes_given_middle(self):
        # X1 -> X2 -> X3, unit weights and noises
        sigma = np.array([[1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [1.0, 2.0, 3.0]])
        cov = CovarianceEstimate(sigma, 10)
        rho = partial_correlation(cov, 0, 2, (1,))
        assert rho == pytest.approx(0.0, abs=1e-12)
        # regression-residual oracle: correlate residuals of 0 and 2 on 1
        g = rngmod.stream(7, rngmod.STREAM_TEST)
        x1 = g.standard_normal(200000)
        x2 = x1 + g.standard_normal(200000)
        x3 = x2 + g.standard_normal(200000)
        r0 = x1 - np.polyval(np.polyfit(x2, x1, 1), x2)
        r2 = x3 - np.polyval(np.polyfit(x2, x3, 1), x2)
        assert abs(np.corrcoef(r0, r2)[0, 1]) < 0.01

    def test_scale_free(self):
        g = rngmod.stream(8, rngmod.STREAM_TEST)
        for _ in range(50):
            a = g.standard_normal((5, 10))
            sigma = a @ a.T / 10
            d = np.diag(g.uniform(0.2, 3.0, size=5))
            cov = CovarianceEstimate(sigma, 10)
            cov2 = CovarianceEstimate(d @ sigma @ d, 10)
            r1 = partial_correlation(cov, 0, 1, (2, 3))
            r2 = partial_correlation(cov2, 0, 1, (2, 3))
            assert abs(r1 - r2) <= 1e-9

    def test_singular_submatrix(self):
        m = np.ones((3, 3)) + 1e-15 * np.eye(3)
        cov = CovarianceEstimate.__new__(CovarianceEstimate)
        object.__setattr__(cov, "matrix", m)
        object.__setattr__(cov, "sample_size", 10)
        with pytest.raises(SingularSubmatrix):
            partial_correlation(cov, 0, 1, (2,))

    def test_argument_validation(self):
        cov = CovarianceEstimate(np.eye(3), 5)
        with pytest.raises(ValueError):
            partial_correlation(cov, 1, 1)
        with pytest.raises(ValueError):
            partial_correlation(cov, 0, 1, (1,))


class TestFisherH:
    def test_zero(self):
        assert fisher_h(0.0) == 0.0

    def test_half(self):
        # direct evaluation of (-0.5 ln(1 - 0.25))^(1/2)
        assert fisher_h(0.5) == pytest.approx(0.37926380822046607, abs=1e-12)

    def test_monotone_and_even(self):
        assert fisher_h(0.3) < fisher_h(0.6) < fisher_h(0.9)
        assert fisher_h(-0.7) == fisher_h(0.7)

    def test_domain(self):
        with pytest.raises(DomainError):
            fisher_h(1.0)
        with pytest.raises(DomainError):
            fisher_h(-1.2)


class TestPerturbationLemmas:
    def test_matrix_inversion_bound(self):
        g = rngmod.stream(9, rngmod.STREAM_TEST)
        for _ in range(1000):
            r = int(g.integers(2, 13))
            a = g.standard_normal((r, r))
            a = a @ a.T + np.diag(g.uniform(0.3, 2.0, size=r))
            lam_min = np.linalg.eigvalsh(a)[0]
            e = rand_sym(g, r)
            eps = g.uniform(0.05, 0.5) * lam_min / 2
            e *= eps / max(spectral_norm(e), 1e-300)
            diff = np.linalg.inv(a + e) - np.linalg.inv(a)
            assert spectral_norm(diff) <= 2 * eps / lam_min**2 + 1e-10

    def test_two_by_two_partial_correlation_bound(self):
        g = rngmod.stream(10, rngmod.STREAM_TEST)
        for _ in range(1000):
            alpha = g.uniform(0.3, 2.0)
            d1, d2 = g.uniform(alpha, 2 * alpha, size=2)
            off = g.uniform(-1, 1) * np.sqrt(d1 * d2) * 0.9
            a = np.array([[d1, off], [off, d2]])
            eps = g.uniform(0.01, 0.5) * alpha / 2
            pert = g.uniform(-1, 1, size=(2, 2))
            pert = (pert + pert.T) / 2
            pert *= eps / max(np.abs(pert).max(), 1e-300)
            b = a + pert
            lhs = abs(a[0, 1] / np.sqrt(a[0, 0] * a[1, 1])
                      - b[0, 1] / np.sqrt(b[0, 0] * b[1, 1]))
            assert lhs <= 4 * eps / alpha + 1e-10
