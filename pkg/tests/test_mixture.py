import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmdiff import (
    density,
    log_density,
    responsibilities,
    sample,
    score,
    score_jacobian,
    validate_spec,
)
from gmdiff.errors import (
    DimensionMismatch,
    EmptyMixture,
    NonSymmetricCovariance,
    NotPositiveDefinite,
    WeightsDoNotSumToOne,
)
from gmdiff.verify import fd_gradient, fd_jacobian

from conftest import make_random_spec, naive_density

INV_SQRT_2PI = 0.3989422804014327


class TestValidateSpec:
    def test_single_standard_normal(self):
        spec = validate_spec([(1.0, [0.0], [[1.0]])])
        assert spec.k == 1
        assert spec.dim == 1

    def test_weights_must_sum_to_one(self):
        with pytest.raises(WeightsDoNotSumToOne):
            validate_spec([(0.6, [0.0], [[1.0]]), (0.6, [1.0], [[1.0]])])

    def test_indefinite_covariance_rejected(self):
        # eigenvalues of [[1,2],[2,1]] are 3 and -1
        with pytest.raises(NotPositiveDefinite):
            validate_spec([(1.0, [0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])])

    def test_singular_covariance_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            validate_spec([(1.0, [0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]])])

    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(NonSymmetricCovariance):
            validate_spec([(1.0, [0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])])

    def test_empty_mixture_rejected(self):
        with pytest.raises(EmptyMixture):
            validate_spec([])

    def test_mismatched_dims_rejected(self):
        with pytest.raises(DimensionMismatch):
            validate_spec([(0.5, [0.0], [[1.0]]), (0.5, [0.0, 0.0], np.eye(2))])

    def test_file_format_mapping(self):
        spec = validate_spec({
            "dim": 2,
            "components": [
                {"weight": 1.0, "mean": [1.0, -1.0], "cov": [[2.0, 0.0], [0.0, 0.5]]}
            ],
        })
        assert spec.dim == 2
        np.testing.assert_allclose(spec.means[0], [1.0, -1.0])

    def test_caches_reproduce_covariance(self):
        spec = make_random_spec(3, 4, seed=99)
        for chol, cov in zip(spec.chols, spec.covs):
            np.testing.assert_allclose(chol @ chol.T, cov, atol=1e-10)


class TestDensity:
    def test_standard_normal_at_zero(self, std1d):
        assert density(std1d, [0.0]) == pytest.approx(INV_SQRT_2PI, rel=1e-12)

    def test_far_component_negligible(self):
        spec = validate_spec([(0.5, [0.0], [[1.0]]), (0.5, [10.0], [[1.0]])])
        assert density(spec, [0.0]) == pytest.approx(0.5 * INV_SQRT_2PI, rel=1e-10)

    def test_matches_naive_oracle_2d(self):
        weights = [0.3, 0.7]
        means = [[1.0, -0.5], [-1.5, 2.0]]
        covs = [[[1.2, 0.3], [0.3, 0.8]], [[0.6, -0.1], [-0.1, 1.5]]]
        spec = validate_spec(list(zip(weights, means, covs)))
        x = np.array([0.4, 0.9])
        assert density(spec, x) == pytest.approx(
            naive_density(weights, means, covs, x), rel=1e-12)

    def test_dimension_mismatch(self, std2d):
        with pytest.raises(DimensionMismatch):
            density(std2d, [0.0])

    def test_batch_matches_pointwise(self):
        spec = make_random_spec(2, 3, seed=5)
        pts = np.random.default_rng(0).normal(size=(7, 2))
        batch = density(spec, pts)
        singles = [density(spec, p) for p in pts]
        np.testing.assert_allclose(batch, singles, rtol=1e-13)


class TestLogDensity:
    def test_standard_normal_at_zero(self, std1d):
        assert log_density(std1d, [0.0]) == pytest.approx(-0.9189385332046727, abs=1e-12)

    def test_consistent_with_density(self):
        spec = make_random_spec(2, 3, seed=17)
        pts = np.random.default_rng(1).normal(size=(20, 2))
        np.testing.assert_allclose(
            np.exp(log_density(spec, pts)), density(spec, pts), rtol=1e-12)

    def test_well_separated_components_survive(self):
        # naive per-component products underflow at 60 sigma; the log-sum-exp
        # value was pinned with a 60-digit arbitrary-precision evaluation
        spec = validate_spec([(0.5, [0.0], [[1.0]]), (0.5, [60.0], [[1.0]])])
        assert log_density(spec, [0.0]) == pytest.approx(-1.612085713764618, abs=1e-12)
        assert math.isfinite(log_density(spec, [30.0]))


class TestResponsibilities:
    def test_single_component_is_one(self, std1d):
        assert responsibilities(std1d, [0.3]).values == pytest.approx([1.0])

    def test_symmetric_point_splits_evenly(self):
        spec = validate_spec([(0.5, [-1.0], [[1.0]]), (0.5, [1.0], [[1.0]])])
        np.testing.assert_allclose(responsibilities(spec, [0.0]).values, [0.5, 0.5],
                                   atol=1e-14)

    def test_asymmetric_point_frozen_oracle(self):
        # arbitrary-precision ratio for w=(0.3,0.7), mu=(-1,2), var=(0.5,2), x=0.4
        spec = validate_spec([(0.3, [-1.0], [[0.5]]), (0.7, [2.0], [[2.0]])])
        np.testing.assert_allclose(
            responsibilities(spec, [0.4]).values,
            [0.18631255069389366, 0.8136874493061064], rtol=1e-12)

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 4))
        k = int(rng.integers(1, 6))
        spec = make_random_spec(d, k, seed=seed)
        x = rng.normal(size=d, scale=3.0)
        vals = responsibilities(spec, x).values
        assert abs(vals.sum() - 1.0) <= 1e-12
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


class TestScore:
    def test_identity_gaussian(self, std2d):
        np.testing.assert_allclose(score(std2d, [1.0, 2.0]), [-1.0, -2.0], atol=1e-14)

    def test_scalar_variance(self):
        spec = validate_spec([(1.0, [0.0], [[4.0]])])
        assert score(spec, [2.0]) == pytest.approx([-0.5])

    def test_symmetric_mixture_vanishes_at_center(self):
        spec = validate_spec([(0.5, [-1.0], [[1.0]]), (0.5, [1.0], [[1.0]])])
        assert abs(score(spec, [0.0])[0]) <= 1e-12

    def test_matches_finite_difference(self):
        spec = make_random_spec(2, 3, seed=3)
        x = np.array([0.7, -0.4])
        fd = fd_gradient(lambda z: log_density(spec, z), x)
        np.testing.assert_allclose(score(spec, x), fd, rtol=1e-5, atol=1e-8)

    def test_single_component_closed_form_exact(self):
        spec = make_random_spec(3, 1, seed=8)
        x = np.array([0.5, -1.0, 2.0])
        expected = -spec.inv_covs[0] @ (x - spec.means[0])
        np.testing.assert_allclose(score(spec, x), expected, rtol=1e-15)


class TestScoreJacobian:
    def test_identity_gaussian(self, std2d):
        np.testing.assert_allclose(score_jacobian(std2d, [3.0, -1.0]), -np.eye(2),
                                   atol=1e-14)

    def test_diagonal_gaussian(self):
        spec = validate_spec([(1.0, [0.0, 0.0], [[4.0, 0.0], [0.0, 1.0]])])
        np.testing.assert_allclose(score_jacobian(spec, [5.0, 5.0]),
                                   np.diag([-0.25, -1.0]), atol=1e-14)

    def test_matches_finite_difference(self):
        spec = make_random_spec(2, 4, seed=21)
        x = np.array([-0.3, 1.1])
        fd = fd_jacobian(lambda z: score(spec, z), x)
        np.testing.assert_allclose(score_jacobian(spec, x), fd, rtol=1e-4, atol=1e-7)

    def test_symmetric(self):
        spec = make_random_spec(3, 3, seed=33)
        h = score_jacobian(spec, np.array([0.2, -0.8, 1.4]))
        np.testing.assert_allclose(h, h.T, atol=1e-13)


class TestSample:
    def test_mean_within_clt_band(self, std2d):
        n = 100000
        batch = sample(std2d, n, seed=42)
        assert np.all(np.abs(batch.points.mean(axis=0)) <= 4.0 / math.sqrt(n))

    def test_deterministic_given_seed(self, anchor):
        a = sample(anchor, 500, seed=7)
        b = sample(anchor, 500, seed=7)
        np.testing.assert_array_equal(a.points, b.points)

    def test_component_frequencies_binomial(self):
        spec = validate_spec([(0.2, [-5.0], [[0.01]]), (0.8, [5.0], [[0.01]])])
        n = 50000
        batch = sample(spec, n, seed=11)
        frac_low = float(np.mean(batch.points[:, 0] < 0.0))
        se = math.sqrt(0.2 * 0.8 / n)
        assert abs(frac_low - 0.2) <= 4.0 * se

    def test_rejects_nonpositive_n(self, std1d):
        with pytest.raises(ValueError):
            sample(std1d, 0, seed=1)
