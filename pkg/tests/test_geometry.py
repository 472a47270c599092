import math

import numpy as np
import pytest

from altest.errors import BoundDivergenceError, InvalidParameterError
from altest.geometry import (
    bound_values,
    geometry_report,
    restricted_norm_compat,
    width_descent_cone,
    width_l1_ball,
    xi_factor,
    xi_minimizer_check,
)
from altest.model import ModelSpec, make_block_sigma, make_sparse_theta
from altest.rng import stream_rng
from oracles import discretized_cone_projection_sq, max_abs_gaussian_mean


class TestXiFactor:
    @pytest.mark.parametrize("m", [2, 4, 10])
    def test_identity_gives_inverse_sqrt_m(self, m):
        sigma_star = make_block_sigma(m, 0.8)
        assert abs(xi_factor(np.eye(m), sigma_star) - 1 / math.sqrt(m)) < 1e-12

    def test_truth_gives_inverse_sqrt_trace(self):
        sigma_star = make_block_sigma(2, 0.8)
        # 2x2 block inverse has trace 2 / (1 - rho^2)
        expected = 1 / math.sqrt(2 / 0.36)
        assert abs(xi_factor(sigma_star, sigma_star) - expected) < 1e-12
        assert expected == pytest.approx(0.4243, abs=5e-5)

    def test_truth_matches_independent_trace_of_inverse(self):
        for m, rho in [(2, 0.8), (4, 0.5), (6, -0.3)]:
            sigma_star = make_block_sigma(m, rho)
            direct = 1 / math.sqrt(np.trace(np.linalg.inv(sigma_star)))
            assert abs(xi_factor(sigma_star, sigma_star) - direct) < 1e-12

    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    def test_scale_invariance_along_ray(self, c):
        sigma_star = make_block_sigma(4, 0.8)
        base = xi_factor(sigma_star, sigma_star)
        assert abs(xi_factor(c * sigma_star, sigma_star) - base) < 1e-12

    def test_rejects_singular_sigma(self):
        with pytest.raises(InvalidParameterError):
            xi_factor(np.zeros((2, 2)), np.eye(2))

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(InvalidParameterError):
            xi_factor(np.eye(2), np.eye(3))


class TestXiMinimizerCheck:
    def test_identity_truth(self):
        ok, worst = xi_minimizer_check(np.eye(3), 100, stream_rng(0, 1))
        assert ok and worst <= 1e-12

    def test_block_truth(self):
        ok, worst = xi_minimizer_check(make_block_sigma(2, 0.8), 1000, stream_rng(0, 2))
        assert ok

    def test_zero_trials_vacuous(self):
        ok, worst = xi_minimizer_check(np.eye(2), 0, stream_rng(0, 3))
        assert ok and worst == 0.0


class TestWidthL1Ball:
    def test_p1_half_normal_mean(self):
        est = width_l1_ball(1, 100_000, stream_rng(1, 0))
        assert abs(est.value - math.sqrt(2 / math.pi)) <= 3 * est.se

    def test_se_scales_with_samples(self):
        small = width_l1_ball(10, 20_000, stream_rng(1, 1))
        large = width_l1_ball(10, 80_000, stream_rng(1, 2))
        assert large.se == pytest.approx(small.se / 2, rel=0.2)

    def test_p500_matches_quadrature_oracle(self):
        est = width_l1_ball(500, 100_000, stream_rng(1, 3))
        oracle = max_abs_gaussian_mean(500)
        assert 3.2 <= est.value <= 3.7
        assert abs(est.value - oracle) <= 4 * est.se

    def test_rejects_tiny_sample_count(self):
        with pytest.raises(InvalidParameterError):
            width_l1_ball(5, 1, stream_rng(1, 4))


class TestWidthDescentCone:
    def test_fully_dense_leaves_one_fixed_direction(self):
        p = 40
        theta = np.ones(p)
        est = width_descent_cone(theta, 40_000, stream_rng(2, 0))
        # polar is the ray through sign(theta): squared projection averages
        # p - 1/2, so the estimate sits between sqrt(p-1) and sqrt(p)
        assert math.sqrt(p - 1) * 0.99 <= est.value <= math.sqrt(p)

    def test_p2_matches_discretized_projection_oracle(self):
        theta = np.array([1.0, 0.0])
        est = width_descent_cone(theta, 40_000, stream_rng(2, 1))
        g = stream_rng(2, 99).standard_normal((40_000, 2))
        oracle = math.sqrt(np.mean(discretized_cone_projection_sq(theta, g)))
        assert abs(est.value - oracle) / oracle < 0.05

    def test_scale_invariance_is_exact(self):
        theta = make_sparse_theta(30, 6)
        a = width_descent_cone(theta, 5_000, stream_rng(2, 2))
        b = width_descent_cone(3.0 * theta, 5_000, stream_rng(2, 2))
        assert a.value == b.value

    def test_sparse_order_of_magnitude(self):
        # s-sparse cones have squared width on the order of s log p
        p, s = 100, 4
        est = width_descent_cone(make_sparse_theta(p, s), 20_000, stream_rng(2, 3))
        assert est.value**2 < 6 * s * math.log(p)
        assert est.value**2 > s

    def test_rejects_zero_vector(self):
        with pytest.raises(InvalidParameterError):
            width_descent_cone(np.zeros(4), 100, stream_rng(2, 4))


class TestRestrictedNormCompat:
    def test_analytic_bound_is_two_sqrt_s(self):
        est = restricted_norm_compat(make_sparse_theta(100, 20), 1_000, stream_rng(3, 0))
        assert est.analytic == pytest.approx(2 * math.sqrt(20))
        assert est.analytic == pytest.approx(8.944, abs=5e-4)

    def test_one_dimensional_ratio_is_one(self):
        est = restricted_norm_compat(np.array([2.0]), 1_000, stream_rng(3, 1))
        assert est.analytic == pytest.approx(2.0)
        assert est.sampled_lower == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("s", [1, 5, 20])
    def test_sampled_lower_never_exceeds_bound(self, s):
        theta = np.zeros(60)
        theta[:s] = 1.0
        est = restricted_norm_compat(theta, 10_000, stream_rng(3, s))
        assert est.sampled_lower <= est.analytic + 1e-12
        assert est.sampled_lower > 0


class TestBoundValues:
    @staticmethod
    def spec(p=2, s=1, m=4, seed=0):
        theta = np.zeros(p)
        theta[:s] = 1.0
        return ModelSpec(p, m, theta, np.eye(m), seed=seed)

    def test_hand_computed_instance(self):
        spec = self.spec()
        n = 10**6
        wb = 1.1283  # E max(|g1|, |g2|) = 2/sqrt(pi)
        e_orc, e_min = bound_values(spec, n, width_ball_value=wb)
        expected_orc = 0.5 * 2.0 * wb / 1000.0  # xi* = 1/2, psi = 2 sqrt(1)
        assert e_orc == pytest.approx(expected_orc, rel=1e-12)
        expected_min = e_orc * (1 + 2 * (4 / n) ** 0.25) / (1 - 2 * e_orc)
        assert e_min == pytest.approx(expected_min, rel=1e-12)
        assert e_min == pytest.approx(e_orc, rel=0.1)

    def test_large_n_limit_ratio_one(self):
        spec = self.spec()
        ratios = []
        for n in (10**6, 10**10, 10**14):
            e_orc, e_min = bound_values(spec, n, width_ball_value=1.1283)
            ratios.append(e_min / e_orc)
        assert ratios[0] > ratios[1] > ratios[2]
        assert ratios[-1] == pytest.approx(1.0, abs=1e-3)

    def test_divergence_error(self):
        spec = self.spec()
        # small n makes e_orc >= 0.5 sqrt(lambda_min/mu_max) = 0.5
        with pytest.raises(BoundDivergenceError):
            bound_values(spec, 4, width_ball_value=1.1283)

    def test_monotone_in_n_and_sparsity(self):
        wb = 2.0
        orc_by_n = [
            bound_values(self.spec(), n, width_ball_value=wb)[0]
            for n in (10**4, 10**5, 10**6)
        ]
        assert orc_by_n[0] > orc_by_n[1] > orc_by_n[2]
        orc_by_s = [
            bound_values(self.spec(p=50, s=s), 10**6, width_ball_value=wb)[0]
            for s in (1, 4, 16)
        ]
        assert orc_by_s[0] < orc_by_s[1] < orc_by_s[2]


class TestGeometryReport:
    def test_report_fields_consistent(self):
        spec = ModelSpec(
            30, 4, make_sparse_theta(30, 4), make_block_sigma(4, 0.8), seed=0
        )
        rep = geometry_report(spec, None, 10**6, 20_000, stream_rng(4, 0))
        assert rep.xi_star <= rep.xi_sigma + 1e-9
        assert rep.width_ball.value > 0 and rep.width_cone.value > 0
        assert rep.psi.sampled_lower <= rep.psi.analytic
        assert rep.e_orc <= rep.e_min

    def test_report_survives_divergent_floor(self):
        spec = ModelSpec(
            30, 4, make_sparse_theta(30, 4), make_block_sigma(4, 0.8), seed=0
        )
        rep = geometry_report(spec, None, 10, 5_000, stream_rng(4, 1))
        assert math.isinf(rep.e_min)
        assert rep.e_orc > 0
