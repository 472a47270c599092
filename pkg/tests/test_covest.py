import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from altest.covest import estimate_covariance, spectral_sandwich
from altest.errors import InvalidParameterError
from altest.model import Dataset, ModelSpec, make_block_sigma, make_sparse_theta, sample_dataset


def noiseless_dataset(theta, n=5, m=3, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, m, theta.size))
    y = np.einsum("nmp,p->nm", x, theta)
    return Dataset(x, y)


class TestEstimateCovariance:
    def test_perfect_fit_gives_conditioned_identity(self):
        theta = np.array([1.0, -2.0, 0.0])
        data = noiseless_dataset(theta)
        est = estimate_covariance(data, theta)
        assert est.regularized
        assert est.epsilon_added == pytest.approx(1e-8)
        np.testing.assert_allclose(est.sigma_hat, 1e-8 * np.eye(data.m), atol=1e-20)

    def test_single_residual_is_ridged_rank_one(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((1, 3, 2))
        y = rng.standard_normal((1, 3))
        data = Dataset(x, y)
        theta = np.zeros(2)
        est = estimate_covariance(data, theta)
        r = y[0]
        outer = np.outer(r, r)
        assert est.regularized
        np.testing.assert_allclose(
            est.sigma_hat, outer + est.epsilon_added * np.eye(3), atol=1e-12
        )
        # conditioned minimum sits at the floor 1e-8 * max(1, lambda_max)
        assert est.min_eig >= 1e-8 * (1 - 1e-9)
        assert np.linalg.eigvalsh(est.sigma_hat)[0] == pytest.approx(est.min_eig, rel=1e-6)

    def test_integer_residuals_match_hand_computation(self):
        x = np.zeros((2, 2, 1))
        y = np.array([[1.0, 2.0], [3.0, -1.0]])
        est = estimate_covariance(Dataset(x, y), np.zeros(1))
        expected = (np.outer(y[0], y[0]) + np.outer(y[1], y[1])) / 2.0
        assert not est.regularized or est.epsilon_added < 1e-6
        np.testing.assert_allclose(
            est.sigma_hat - est.epsilon_added * np.eye(2), expected, atol=1e-12
        )

    def test_large_sample_recovers_truth(self):
        spec = ModelSpec(
            4, 2, make_sparse_theta(4, 2), make_block_sigma(2, 0.8), seed=3
        )
        data = sample_dataset(spec, 100_000, stream=0)
        est = estimate_covariance(data, spec.theta_star)
        assert not est.regularized
        assert np.max(np.abs(est.sigma_hat - spec.sigma_star)) < 0.02

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((7, 2, 3))
        y = rng.standard_normal((7, 2))
        theta = rng.standard_normal(3)
        perm = rng.permutation(7)
        a = estimate_covariance(Dataset(x, y), theta)
        b = estimate_covariance(Dataset(x[perm], y[perm]), theta)
        np.testing.assert_allclose(a.sigma_hat, b.sigma_hat, atol=1e-12)

    def test_output_always_invertible(self):
        rng = np.random.default_rng(7)
        for k in range(10):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(2, 6))  # m > n makes the raw estimate singular
            data = Dataset(rng.standard_normal((n, m, 2)), rng.standard_normal((n, m)))
            est = estimate_covariance(data, np.zeros(2))
            w = np.linalg.eigvalsh(est.sigma_hat)
            assert w[0] > 0
            np.linalg.inv(est.sigma_hat)

    def test_rejects_wrong_theta_length(self):
        data = noiseless_dataset(np.ones(3))
        with pytest.raises(InvalidParameterError):
            estimate_covariance(data, np.zeros(4))


class TestSpectralSandwich:
    def test_identity_when_equal(self):
        sigma = make_block_sigma(4, 0.6)
        lo, hi = spectral_sandwich(sigma, sigma)
        assert lo == pytest.approx(1.0, abs=1e-12)
        assert hi == pytest.approx(1.0, abs=1e-12)

    def test_scaling(self):
        sigma = make_block_sigma(2, 0.3)
        lo, hi = spectral_sandwich(2.0 * sigma, sigma)
        assert lo == pytest.approx(2.0, abs=1e-12)
        assert hi == pytest.approx(2.0, abs=1e-12)

    def test_rejects_singular_truth(self):
        with pytest.raises(InvalidParameterError):
            spectral_sandwich(np.eye(2), np.zeros((2, 2)))

    def test_estimate_concentrates_at_moderate_sample_size(self):
        # reduced-trial version of the acceptance check: both extreme
        # eigenvalues within 1 +- 3 sqrt(m/n) in nearly all trials
        m, n, trials = 4, 2000, 20
        band = 3.0 * np.sqrt(m / n)
        spec = ModelSpec(3, m, make_sparse_theta(3, 2), make_block_sigma(m, 0.8), seed=11)
        hits = 0
        for trial in range(trials):
            data = sample_dataset(spec, n, stream=(99, trial))
            est = estimate_covariance(data, spec.theta_star)
            lo, hi = spectral_sandwich(est.sigma_hat, spec.sigma_star)
            if 1 - band <= lo and hi <= 1 + band:
                hits += 1
        assert hits >= trials - 1

    @given(st.integers(0, 500))
    @settings(max_examples=20, deadline=None)
    def test_sandwich_brackets_ratio(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 5))
        a = rng.standard_normal((m, m))
        sigma_hat = a @ a.T + 0.1 * np.eye(m)
        b = rng.standard_normal((m, m))
        sigma_star = b @ b.T + 0.1 * np.eye(m)
        lo, hi = spectral_sandwich(sigma_hat, sigma_star)
        assert 0 < lo <= hi
        # sandwich eigenvalues bound the generalized Rayleigh quotient
        v = rng.standard_normal(m)
        ratio = (v @ sigma_hat @ v) / (v @ sigma_star @ v)
        assert lo - 1e-10 <= ratio <= hi + 1e-10
