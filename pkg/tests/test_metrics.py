import math

import numpy as np
import pytest
from scipy.stats import norm

from gmdiff import (
    ConditionParams,
    HistogramGrid,
    default_histogram_grid,
    jacobian_spectral_probe,
    kl_histogram,
    kl_mc,
    moment_diagnostics,
    sample,
    standard_normal_spec,
    tv_histogram,
    validate_spec,
)
from gmdiff.errors import DimensionMismatch, DimensionTooHigh, NoPointsInRegion
from gmdiff.metrics import (
    SampleBatch,
    fit_loglog_slope,
    reference_cell_masses,
    spectral_norms,
)
from gmdiff.mixture import score_jacobian

from conftest import make_random_spec


class TestHistogramGrid:
    def test_rejects_high_dimension(self):
        with pytest.raises(DimensionTooHigh):
            HistogramGrid(lo=np.zeros(4), hi=np.ones(4), bins=np.full(4, 10))

    def test_rejects_few_bins(self):
        with pytest.raises(ValueError):
            HistogramGrid(lo=[0.0], hi=[1.0], bins=[5])

    def test_default_grid_covers_components(self, anchor):
        g = default_histogram_grid(anchor)
        assert g.lo[0] < -2.0 and g.hi[0] > 2.0

    def test_reference_masses_sum_to_one_inside(self, anchor):
        g = default_histogram_grid(anchor, bins=200)
        masses, outside = reference_cell_masses(anchor, g)
        assert masses.sum() + outside == pytest.approx(1.0, abs=1e-6)
        assert outside < 1e-6


class TestTvHistogram:
    def test_identical_sample_sets_are_zero(self, anchor):
        batch = sample(anchor, 2000, seed=1)
        grid = default_histogram_grid(anchor)
        assert tv_histogram(batch, batch, grid) == 0.0

    def test_disjoint_supports_are_one(self):
        grid = HistogramGrid(lo=[-10.0], hi=[10.0], bins=[20])
        a = SampleBatch(points=np.full((100, 1), -5.0), meta={})
        b = SampleBatch(points=np.full((100, 1), 5.0), meta={})
        assert tv_histogram(a, b, grid) == 1.0

    def test_symmetric_in_sample_arguments(self, anchor):
        grid = default_histogram_grid(anchor)
        a = sample(anchor, 3000, seed=2)
        b = sample(anchor, 4000, seed=3)
        assert tv_histogram(a, b, grid) == pytest.approx(tv_histogram(b, a, grid))

    def test_shifted_normal_pair_matches_quadrature_oracle(self):
        # exact TV between N(0,1) and N(1,1) is 2 Phi(1/2) - 1: the densities
        # cross at x = 1/2 and the gap integrates to the two tail differences
        exact = 2.0 * norm.cdf(0.5) - 1.0
        p = standard_normal_spec(1)
        q = validate_spec([(1.0, [1.0], [[1.0]])])
        grid = HistogramGrid(lo=[-6.0], hi=[7.0], bins=[200])
        batch = sample(p, 1_000_000, seed=4)
        tv = tv_histogram(batch, q, grid)
        # measured TV(samples of p, q) >= TV(p, q); binning + MC add ~0.01
        assert tv == pytest.approx(exact, abs=0.01)

    def test_bounded_and_dimension_checked(self, anchor):
        grid = default_histogram_grid(anchor)
        batch = sample(anchor, 1000, seed=5)
        assert 0.0 <= tv_histogram(batch, anchor, grid) <= 1.0
        with pytest.raises(DimensionMismatch):
            tv_histogram(SampleBatch(points=np.zeros((10, 2))), anchor, grid)


class TestKlMc:
    def test_identical_specs_near_zero(self, anchor):
        est = kl_mc(anchor, anchor, 10000, seed=6)
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_mean_shift_closed_form(self):
        p = validate_spec([(1.0, [1.0, 2.0], np.eye(2))])
        q = standard_normal_spec(2)
        est = kl_mc(p, q, 200000, seed=7)
        assert abs(est.value - 2.5) <= 4.0 * est.stderr

    def test_mixture_vs_normal_matches_quadrature(self, anchor):
        # adaptive quadrature of p log(p/q) is the independent oracle
        from scipy.integrate import quad
        from gmdiff.mixture import log_density

        q = standard_normal_spec(1)

        def integrand(x):
            lp = log_density(anchor, [x])
            lq = log_density(q, [x])
            return math.exp(lp) * (lp - lq)

        oracle, err = quad(integrand, -8.0, 8.0, limit=200)
        est = kl_mc(anchor, q, 400000, seed=8)
        assert abs(est.value - oracle) <= 4.0 * est.stderr + err

    def test_nonnegative_within_noise(self):
        p = make_random_spec(2, 2, seed=51)
        q = make_random_spec(2, 3, seed=52)
        est = kl_mc(p, q, 50000, seed=9)
        assert est.value >= -4.0 * est.stderr


class TestKlHistogram:
    def test_self_sampling_bias_small(self, anchor):
        grid = default_histogram_grid(anchor, bins=200)
        batch = sample(anchor, 1_000_000, seed=10)
        res = kl_histogram(batch, anchor, grid)
        assert res.value <= 0.01
        assert res.clamped_cells == 0

    def test_concentrated_samples_positive(self):
        ref = standard_normal_spec(1)
        grid = HistogramGrid(lo=[-5.0], hi=[5.0], bins=[50])
        batch = SampleBatch(points=np.full((1000, 1), 0.05), meta={})
        res = kl_histogram(batch, ref, grid)
        assert res.value > 0.0

    def test_support_mismatch_clamps_and_stays_finite(self):
        ref = standard_normal_spec(1)
        grid = HistogramGrid(lo=[-40.0], hi=[40.0], bins=[80])
        batch = SampleBatch(points=np.full((100, 1), 35.0), meta={})
        res = kl_histogram(batch, ref, grid)
        assert math.isfinite(res.value)
        assert res.clamped_cells >= 1

    def test_halving_sample_size_does_not_shrink_self_distance(self, anchor):
        grid = default_histogram_grid(anchor, bins=100)
        small = kl_histogram(sample(anchor, 20000, seed=11), anchor, grid)
        large = kl_histogram(sample(anchor, 40000, seed=12), anchor, grid)
        assert large.value <= small.value + 2.0 * small.stderr


class TestMomentDiagnostics:
    def test_reference_samples_calibrated(self):
        spec = make_random_spec(2, 3, seed=61)
        batch = sample(spec, 100000, seed=13)
        assert moment_diagnostics(batch, spec).max_abs_z <= 4.0

    def test_second_moment_of_standard_normal(self):
        spec = standard_normal_spec(3)
        batch = sample(spec, 50000, seed=14)
        diag = moment_diagnostics(batch, spec)
        se = 4.0 * math.sqrt(2.0 * 3.0 / 50000)  # loose CLT band for E|x|^2
        assert diag.second_moment == pytest.approx(3.0, abs=4.0 * se)

    def test_shifted_batch_flags_mismatch(self):
        spec = standard_normal_spec(2)
        pts = sample(spec, 20000, seed=15).points.copy()
        pts[:, 0] += 1.0
        diag = moment_diagnostics(SampleBatch(points=pts), spec)
        assert abs(diag.mean_z[0]) > 4.0


class TestSpectralProbe:
    def test_standard_normal_norms_are_one(self, std2d):
        params = ConditionParams(R=8.0, beta=0.01, gamma=1e-6)
        batch = sample(std2d, 2000, seed=16)
        probe = jacobian_spectral_probe(std2d, batch, params, 1.0)
        assert probe.max_norm == pytest.approx(1.0, abs=1e-10)
        assert probe.n_passing > 1500

    def test_diagonal_covariance_norm(self):
        spec = validate_spec([(1.0, [0.0, 0.0], [[4.0, 0.0], [0.0, 1.0]])])
        params = ConditionParams(R=20.0, beta=0.01, gamma=1e-9)
        batch = sample(spec, 500, seed=17)
        probe = jacobian_spectral_probe(spec, batch, params, 1.0)
        assert probe.max_norm == pytest.approx(1.0, abs=1e-10)

    def test_power_iteration_matches_dense_eigendecomposition(self):
        spec = make_random_spec(2, 5, seed=71)
        pts = sample(spec, 50, seed=18).points
        hess = score_jacobian(spec, pts)
        pi_norms = spectral_norms(hess)
        dense = np.array([np.max(np.abs(np.linalg.eigvalsh(h))) for h in hess])
        np.testing.assert_allclose(pi_norms, dense, atol=1e-8)

    def test_no_points_in_region(self, std1d):
        params = ConditionParams(R=1.0, beta=0.0999, gamma=0.0999)
        batch = SampleBatch(points=np.full((100, 1), 50.0), meta={})
        with pytest.raises(NoPointsInRegion):
            jacobian_spectral_probe(std1d, batch, params, 1.0)


class TestSlopeFit:
    def test_exact_power_law(self):
        xs = [64.0, 128.0, 256.0, 512.0]
        ys = [10.0 / x for x in xs]
        slope, hw = fit_loglog_slope(xs, ys)
        assert slope == pytest.approx(-1.0, abs=1e-12)
        assert hw == pytest.approx(0.0, abs=1e-10)

    def test_constant_metric_slope_zero(self):
        xs = [1.0, 2.0, 4.0, 8.0, 16.0]
        ys = [3.0, 3.01, 2.99, 3.0, 3.005]
        slope, hw = fit_loglog_slope(xs, ys)
        assert abs(slope) <= hw + 1e-3

    def test_needs_four_points(self):
        with pytest.raises(ValueError):
            fit_loglog_slope([1.0, 2.0, 3.0], [1.0, 1.0, 1.0])
