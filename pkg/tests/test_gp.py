import numpy as np
import pytest

from mrsbo.gp import (
    Dataset,
    FactorizationError,
    HyperBounds,
    empty_dataset,
    fit_mle,
    gp_condition_on,
    gp_fit,
    gp_predict,
    gp_prior,
    gp_sample_joint,
    log_marginal_likelihood,
)
from mrsbo.kernels import KernelFamily, kernel_eval, matern52, rbf

from conftest import DensePosterior


def _random_fit(rng, n=5, dim=2, noise=1e-6, kernel=None):
    kernel = kernel or rbf(0.4)
    X = rng.random((n, dim))
    y = rng.standard_normal(n)
    return gp_fit(Dataset(X, y), kernel, noise), X, y


class TestFit:
    def test_noise_free_interpolation(self):
        gp = gp_fit(Dataset(np.array([[0.3]]), np.array([1.7])), rbf(0.5), 0.0)
        mean, var = gp_predict(gp, np.array([[0.3]]))
        assert mean[0] == pytest.approx(1.7, abs=1e-8)
        assert var[0] == pytest.approx(0.0, abs=1e-8)

    def test_empty_data_returns_prior(self):
        gp = gp_fit(empty_dataset(2), rbf(0.5, signal_variance=2.0), 1e-4)
        mean, var = gp_predict(gp, np.random.default_rng(0).random((7, 2)))
        assert np.all(mean == 0.0)
        assert np.allclose(var, 2.0)

    def test_training_targets_recovered(self):
        rng = np.random.default_rng(1)
        gp, X, y = _random_fit(rng, n=5, noise=1e-6)
        mean, _ = gp_predict(gp, X)
        # direct dense solve of (K + noise I) alpha = y as the oracle
        K = kernel_eval(gp.kernel, X, X) + 1e-6 * np.eye(5)
        oracle = kernel_eval(gp.kernel, X, X).T @ np.linalg.solve(K, y)
        assert np.allclose(mean, y, atol=1e-3)
        assert np.allclose(mean, oracle, atol=1e-8)

    def test_cached_factorization_matches_matrix(self):
        rng = np.random.default_rng(2)
        gp, X, _ = _random_fit(rng, n=8, noise=1e-3)
        K = kernel_eval(gp.kernel, X, X) + (1e-3 + gp.jitter) * np.eye(8)
        rel = np.linalg.norm(gp.chol @ gp.chol.T - K) / np.linalg.norm(K)
        assert rel < 1e-8

    def test_duplicate_points_noise_free_use_jitter(self):
        X = np.array([[0.5], [0.5], [0.2]])
        y = np.array([1.0, 1.0, 0.3])
        gp = gp_fit(Dataset(X, y), rbf(0.5), 0.0)
        assert gp.jitter > 0.0
        mean, _ = gp_predict(gp, X)
        assert np.allclose(mean, y, atol=1e-3)

    def test_negative_noise_rejected(self):
        with pytest.raises(ValueError):
            gp_fit(Dataset(np.array([[0.0]]), np.array([0.0])), rbf(0.5), -1.0)


class TestPredict:
    def test_prior_moments(self):
        gp = gp_prior(rbf(0.2, signal_variance=1.5), 0.0, 1)
        mean, var = gp_predict(gp, np.array([[0.4]]))
        assert mean[0] == 0.0 and var[0] == pytest.approx(1.5)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(3)
        kernel = matern52([0.3, 0.6])
        X = rng.random((3, 2))
        y = rng.standard_normal(3)
        Q = rng.random((2, 2))
        gp = gp_fit(Dataset(X, y), kernel, 1e-4)
        mean, cov = gp_predict(gp, Q, full_cov=True)
        oracle_mean, oracle_cov = DensePosterior(kernel, 1e-4, X, y).moments(Q)
        assert np.allclose(mean, oracle_mean, atol=1e-8)
        assert np.allclose(cov, oracle_cov, atol=1e-8)

    def test_full_cov_diagonal_matches_variances(self):
        rng = np.random.default_rng(4)
        gp, _, _ = _random_fit(rng, n=12, noise=1e-5)
        Q = rng.random((30, 2))
        _, var = gp_predict(gp, Q)
        _, cov = gp_predict(gp, Q, full_cov=True)
        assert np.allclose(np.diag(cov), var, atol=1e-10)

    def test_variances_within_prior_range(self):
        rng = np.random.default_rng(5)
        gp, _, _ = _random_fit(rng, n=20, noise=1e-6)
        _, var = gp_predict(gp, rng.random((100, 2)))
        assert np.all(var >= 0.0)
        assert np.all(var <= gp.kernel.signal_variance + 1e-10)

    def test_conditioning_never_increases_variance(self):
        rng = np.random.default_rng(6)
        X = rng.random((6, 1))
        y = rng.standard_normal(6)
        gp = gp_fit(Dataset(X, y), rbf(0.3), 0.0)
        Q = rng.random((50, 1))
        _, var_before = gp_predict(gp, Q)
        updated = gp_condition_on(gp, rng.random(1), 0.2)
        _, var_after = gp_predict(updated, Q)
        assert np.all(var_after <= var_before + 1e-8)


class TestSampleJoint:
    def test_prior_zero_draws_give_zero(self):
        gp = gp_prior(rbf(0.2), 0.0, 1)
        block = gp_sample_joint(
            gp, np.array([[0.5]]), 4, base_draws=np.zeros((4, 1))
        )
        assert np.allclose(block.values, 0.0)

    def test_deterministic_given_base_draws(self):
        rng = np.random.default_rng(7)
        gp, _, _ = _random_fit(rng)
        Q = rng.random((3, 2))
        Z = rng.standard_normal((6, 3))
        a = gp_sample_joint(gp, Q, 6, base_draws=Z)
        b = gp_sample_joint(gp, Q, 6, base_draws=Z)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.base_draws, Z)

    def test_moments_match_predict(self):
        rng = np.random.default_rng(8)
        gp, _, _ = _random_fit(rng, n=4, dim=1, noise=1e-4, kernel=rbf(0.5))
        Q = np.array([[0.2], [0.9]])
        mean, cov = gp_predict(gp, Q, full_cov=True)
        block = gp_sample_joint(gp, Q, 100_000, rng=rng)
        se_mean = np.sqrt(np.diag(cov) / block.n_samples)
        assert np.all(np.abs(block.values.mean(axis=0) - mean) < 3 * se_mean + 1e-12)
        emp_cov = np.cov(block.values.T)
        # variance of a covariance estimate ~ (c_ii c_jj + c_ij^2) / n
        se_cov = np.sqrt(
            (np.outer(np.diag(cov), np.diag(cov)) + cov**2) / block.n_samples
        )
        assert np.all(np.abs(emp_cov - cov) < 3 * se_cov + 1e-12)

    def test_shape_validation(self):
        gp = gp_prior(rbf(0.2), 0.0, 1)
        with pytest.raises(ValueError):
            gp_sample_joint(gp, np.array([[0.1]]), 3, base_draws=np.zeros((2, 1)))
        with pytest.raises(ValueError):
            gp_sample_joint(gp, np.array([[0.1]]), 3)


class TestLogMarginalLikelihood:
    def test_single_zero_observation_hand_value(self):
        gp = gp_fit(Dataset(np.array([[0.0]]), np.array([0.0])), rbf(1.0), 0.0)
        assert log_marginal_likelihood(gp) == pytest.approx(
            -0.9189385332046727, abs=1e-12
        )

    def test_zero_targets_drop_quadratic_term(self):
        rng = np.random.default_rng(9)
        X = rng.random((4, 2))
        gp = gp_fit(Dataset(X, np.zeros(4)), rbf(0.4), 1e-2)
        K = kernel_eval(gp.kernel, X, X) + 1e-2 * np.eye(4)
        _, logdet = np.linalg.slogdet(K)
        expected = -0.5 * logdet - 2.0 * np.log(2 * np.pi)
        assert log_marginal_likelihood(gp) == pytest.approx(expected, abs=1e-8)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(10)
        kernel = rbf(0.3)
        X = rng.random((4, 2))
        y = rng.standard_normal(4)
        gp = gp_fit(Dataset(X, y), kernel, 1e-3)
        oracle = DensePosterior(kernel, 1e-3, X, y).log_marginal_likelihood()
        assert log_marginal_likelihood(gp) == pytest.approx(oracle, abs=1e-8)

    def test_invariant_to_dataset_permutation(self):
        rng = np.random.default_rng(11)
        X = rng.random((6, 2))
        y = rng.standard_normal(6)
        perm = rng.permutation(6)
        a = gp_fit(Dataset(X, y), rbf(0.3), 1e-4)
        b = gp_fit(Dataset(X[perm], y[perm]), rbf(0.3), 1e-4)
        assert log_marginal_likelihood(a) == pytest.approx(
            log_marginal_likelihood(b), abs=1e-9
        )


class TestConditionOn:
    def test_matches_full_refit(self):
        rng = np.random.default_rng(12)
        gp, _, _ = _random_fit(rng, n=6, noise=1e-4)
        x_new, y_new = rng.random(2), 0.7
        updated = gp_condition_on(gp, x_new, y_new)
        refit = gp_fit(updated.data, gp.kernel, gp.noise_variance)
        Q = rng.random((20, 2))
        mean_u, var_u = gp_predict(updated, Q)
        mean_r, var_r = gp_predict(refit, Q)
        assert np.allclose(mean_u, mean_r, atol=1e-8)
        assert np.allclose(var_u, var_r, atol=1e-8)

    def test_degenerate_duplicate_falls_back(self):
        X = np.array([[0.4]])
        gp = gp_fit(Dataset(X, np.array([1.0])), rbf(0.5), 0.0)
        updated = gp_condition_on(gp, np.array([0.4]), 1.0)
        mean, _ = gp_predict(updated, X)
        assert mean[0] == pytest.approx(1.0, abs=1e-3)


class TestFitMLE:
    def test_recovers_generative_length_scale(self):
        hits = 0
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            kernel = rbf(0.1)
            X = rng.random((200, 1))
            K = kernel_eval(kernel, X, X) + 1e-8 * np.eye(200)
            y = np.linalg.cholesky(K) @ rng.standard_normal(200)
            fitted = fit_mle(
                Dataset(X, y),
                KernelFamily.RBF,
                HyperBounds(length_scale=(0.01, 10.0), signal_variance=(0.05, 20.0)),
                n_restarts=2,
                rng=rng,
                noise_variance=1e-6,
            )
            ratio = fitted.length_scales[0] / 0.1
            if 0.5 <= ratio <= 2.0:
                hits += 1
        assert hits >= 8

    def test_never_worse_than_start(self):
        rng = np.random.default_rng(13)
        X = rng.random((20, 1))
        y = np.sin(6 * X[:, 0])
        data = Dataset(X, y)
        truth = rbf(0.3)
        fitted = fit_mle(
            data,
            KernelFamily.RBF,
            n_restarts=0,
            rng=rng,
            noise_variance=1e-4,
            warm_start=truth,
        )
        before = log_marginal_likelihood(gp_fit(data, truth, 1e-4))
        after = log_marginal_likelihood(gp_fit(data, fitted, 1e-4))
        assert after >= before - 1e-9

    def test_single_point_does_not_crash(self):
        data = Dataset(np.array([[0.5, 0.5]]), np.array([0.3]))
        fitted = fit_mle(
            data,
            KernelFamily.MATERN52,
            n_restarts=1,
            rng=np.random.default_rng(14),
            anisotropic=True,
        )
        assert fitted.length_scales.size == 2
        assert np.all(fitted.length_scales > 0)

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError):
            fit_mle(empty_dataset(1), KernelFamily.RBF)
