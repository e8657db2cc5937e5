"""Named verification suites: score gradients, Lipschitz bound, mixture
pushforward, and solver sanity. Each check returns a measured value, its
threshold, and a pass flag, so the CLI can emit a machine-readable report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import calibrate_region, lipschitz_constant, spectral_summary
from .forward import marginal_at, ou_coefficients
from .metrics import (
    default_histogram_grid,
    jacobian_spectral_probe,
    moment_diagnostics,
    tv_histogram,
)
from .mixture import (
    GmmSpec,
    log_density,
    responsibilities,
    sample,
    sample_array,
    score,
    score_jacobian,
)
from .schedules import uniform_grid
from .solvers import make_score_model, run_sampler

FD_STEP = 1e-5
SCORE_TOL = 1e-5
JACOBIAN_TOL = 1e-4


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {"check": self.name, "measured": self.measured,
                "threshold": self.threshold, "passed": self.passed}


def fd_gradient(func, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central finite difference of a scalar function of a d-vector."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = step
        grad[j] = (func(x + e) - func(x - e)) / (2.0 * step)
    return grad


def fd_jacobian(func, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central finite difference of a vector function of a d-vector."""
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    cols = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        cols.append((func(x + e) - func(x - e)) / (2.0 * step))
    return np.stack(cols, axis=1)


def _rel_err(approx: np.ndarray, exact: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(exact)), 1.0)
    return float(np.linalg.norm(approx - exact)) / scale


def score_suite(spec: GmmSpec, n_points: int = 40, seed: int = 7) -> list[CheckResult]:
    """Finite-difference gradient/Hessian checks plus responsibility sums at
    points drawn from the spec itself."""
    rng = np.random.default_rng(seed)
    pts = sample_array(spec, n_points, rng)
    worst_score = 0.0
    worst_jac = 0.0
    worst_resp = 0.0
    for x in pts:
        fd_s = fd_gradient(lambda z: log_density(spec, z), x)
        worst_score = max(worst_score, _rel_err(fd_s, score(spec, x)))
        fd_h = fd_jacobian(lambda z: score(spec, z), x)
        worst_jac = max(worst_jac, _rel_err(fd_h, score_jacobian(spec, x)))
        worst_resp = max(worst_resp,
                         abs(float(responsibilities(spec, x).values.sum()) - 1.0))
    return [
        CheckResult("score_vs_finite_difference", worst_score, SCORE_TOL,
                    worst_score <= SCORE_TOL),
        CheckResult("jacobian_vs_finite_difference", worst_jac, JACOBIAN_TOL,
                    worst_jac <= JACOBIAN_TOL),
        CheckResult("responsibilities_sum_to_one", worst_resp, 1e-12,
                    worst_resp <= 1e-12),
    ]


def lipschitz_suite_checks(spec: GmmSpec, times=(0.0, 0.5, 2.0),
                           n_points: int = 10000, seed: int = 11) -> list[CheckResult]:
    """At each time: calibrate the region, probe the score Jacobian over
    region-passing samples, and require max spectral norm <= closed-form L."""
    results = []
    for t in times:
        spec_t = marginal_at(spec, t)
        a_t = ou_coefficients(t).a
        batch = sample(spec_t, n_points, seed)
        params = calibrate_region(spec_t, a_t, batch)
        probe_batch = sample(spec_t, n_points, seed + 1)
        probe = jacobian_spectral_probe(spec_t, probe_batch, params, a_t)
        L = lipschitz_constant(spectral_summary(spec_t), params, spec.dim).value
        results.append(CheckResult(
            f"jacobian_norm_below_L_at_t={t}", probe.max_norm, L,
            probe.max_norm <= L))
    return results


def mixture_suite(spec: GmmSpec, t: float = 1.5, n: int = 100000,
                  seed: int = 13) -> list[CheckResult]:
    """Forward Monte Carlo a_t x0 + b_t z against the closed-form marginal:
    moment z-scores within 4, and (d = 1) histogram TV below 0.02."""
    coeff = ou_coefficients(t)
    rng = np.random.default_rng(seed)
    x0 = sample_array(spec, n, rng)
    z = rng.standard_normal(x0.shape)
    pushed = coeff.a * x0 + coeff.b * z
    target = marginal_at(spec, t)
    diag = moment_diagnostics(pushed, target)
    results = [CheckResult(f"forward_mc_moments_at_t={t}", diag.max_abs_z, 4.0,
                           diag.max_abs_z <= 4.0)]
    if spec.dim == 1:
        grid = default_histogram_grid(target, bins=100)
        tv = tv_histogram(pushed, target, grid)
        results.append(CheckResult(f"forward_mc_tv_at_t={t}", tv, 0.02, tv <= 0.02))
    return results


def solver_suite(spec: GmmSpec, T: float = 6.0, N: int = 512, n: int = 20000,
                 seed: int = 17) -> list[CheckResult]:
    """Run the exponential-integrator sampler with the exact score and check
    the output against the target moments (and 1D histogram TV)."""
    model = make_score_model(spec)
    grid = uniform_grid(T, N)
    batch = run_sampler(model, grid, "ei", n, seed)
    diag = moment_diagnostics(batch, spec)
    # discretization bias plus Monte Carlo noise; looser than the pure MC gate
    results = [CheckResult("solver_moments", diag.max_abs_z, 6.0,
                           diag.max_abs_z <= 6.0)]
    if spec.dim == 1:
        grid_h = default_histogram_grid(spec, bins=100)
        tv = tv_histogram(batch, spec, grid_h)
        results.append(CheckResult("solver_tv", tv, 0.05, tv <= 0.05))
    return results


SUITES = {
    "score": score_suite,
    "lipschitz": lipschitz_suite_checks,
    "mixture": mixture_suite,
    "solver": solver_suite,
}


def run_suite(name: str, spec: GmmSpec, **kwargs) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](spec, **kwargs)
