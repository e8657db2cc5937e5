"""Smoothness quantities of a mixture: score Lipschitz constant, second
moment, exact and upper-bound KL divergences, and condition-region checks.

The Lipschitz constant is the closed form

    L = 1/s_min + (2 R^2)/(g^2 s_min^2)
        * (1/((2 pi)^d D) + 1/((2 pi)^{d/2} sqrt(D))) * exp(-b^2/(2 s_max))

with s_min/s_max the eigenvalue extremes over component covariances, D the
smallest component determinant, and (R, b, g) the region parameters. The
(2 pi)^{-d} factor underflows in double precision near d ~ 250, so the
second term is assembled in log space and L is reported together with its
natural log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    ParamsOutOfRange,
    TooFewSamples,
)
from .mixture import GmmSpec, density
from .samples import SampleBatch

_BETA_GAMMA_CAP = 0.0999  # keeps beta, gamma strictly below the 0.1 range limit


@dataclass(frozen=True)
class ConditionParams:
    """Region parameters: radius band [beta, R] around every scaled mean plus
    a density floor gamma. Ranges: R >= 1, 0 < beta < 0.1, 0 < gamma < 0.1."""

    R: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not (self.R >= 1.0):
            raise ParamsOutOfRange(f"R must be >= 1, got {self.R!r}")
        if not (0.0 < self.beta < 0.1):
            raise ParamsOutOfRange(f"beta must be in (0, 0.1), got {self.beta!r}")
        if not (0.0 < self.gamma < 0.1):
            raise ParamsOutOfRange(f"gamma must be in (0, 0.1), got {self.gamma!r}")


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalue and determinant extremes over the component covariances,
    plus the largest squared mean norm."""

    sigma_min: float
    sigma_max: float
    det_min: float
    mu_max: float


class LipschitzResult(NamedTuple):
    value: float
    log_value: float


class SecondMoment(NamedTuple):
    m2: float
    M2: float
    component_max: float


class KlUpperBound(NamedTuple):
    bound: float
    convexity_bound: float


def spectral_summary(spec: GmmSpec) -> SpectralSummary:
    """Eigen-extrema, determinant minimum, and mean-norm maximum over components."""
    eigs = np.linalg.eigvalsh(spec.covs)         # (k, d), ascending
    return SpectralSummary(
        sigma_min=float(eigs[:, 0].min()),
        sigma_max=float(eigs[:, -1].max()),
        det_min=float(np.exp(spec.log_dets.min())),
        mu_max=float(max(np.sum(spec.means ** 2, axis=1))),
    )


def lipschitz_constant(summary: SpectralSummary, params: ConditionParams,
                       d: int) -> LipschitzResult:
    """Closed-form score Lipschitz constant for the summarized mixture.

    Assembled in log space; returns both the value and its natural log
    (the value itself can underflow toward 1/sigma_min for large d).
    """
    s_min, s_max = summary.sigma_min, summary.sigma_max
    log_det_min = math.log(summary.det_min)
    log2pi = math.log(2.0 * math.pi)
    # the two (2 pi)-power terms, combined with logaddexp
    term_full = -d * log2pi - log_det_min
    term_half = -0.5 * d * log2pi - 0.5 * log_det_min
    log_pair = np.logaddexp(term_full, term_half)
    log_second = (math.log(2.0) + 2.0 * math.log(params.R)
                  - 2.0 * math.log(params.gamma) - 2.0 * math.log(s_min)
                  + log_pair - params.beta ** 2 / (2.0 * s_max))
    log_first = -math.log(s_min)
    log_value = float(np.logaddexp(log_first, log_second))
    value = math.exp(log_first) + math.exp(log_second)
    return LipschitzResult(value=value, log_value=log_value)


def second_moment(spec: GmmSpec) -> SecondMoment:
    """M2 = sum_i alpha_i (|mu_i|^2 + tr Sigma_i); m2 = sqrt(M2).

    Also reports the per-component maximum, which M2 never exceeds.
    """
    per = np.sum(spec.means ** 2, axis=1) + np.trace(spec.covs, axis1=1, axis2=2)
    M2 = float(spec.weights @ per)
    comp_max = float(per.max())
    assert M2 <= comp_max + 1e-12 * abs(comp_max)
    return SecondMoment(m2=math.sqrt(M2), M2=M2, component_max=comp_max)


def kl_gaussian_exact(mu1, cov1, mu2, cov2) -> float:
    """Exact KL between two Gaussians:

    -1/2 log(det S1/det S2) + 1/2 tr(S2^{-1} S1)
    + 1/2 (m1-m2)^T S2^{-1} (m1-m2) - d/2
    """
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    mu2 = np.atleast_1d(np.asarray(mu2, dtype=float))
    cov1 = np.atleast_2d(np.asarray(cov1, dtype=float))
    cov2 = np.atleast_2d(np.asarray(cov2, dtype=float))
    d = mu1.shape[0]
    if mu2.shape != (d,) or cov1.shape != (d, d) or cov2.shape != (d, d):
        raise DimensionMismatch("all inputs must share one dimension d")
    try:
        chol1 = np.linalg.cholesky(cov1)
        chol2 = np.linalg.cholesky(cov2)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("both covariances must be positive definite") from None
    logdet1 = 2.0 * np.sum(np.log(np.diag(chol1)))
    logdet2 = 2.0 * np.sum(np.log(np.diag(chol2)))
    prec2 = np.linalg.solve(cov2, np.eye(d))
    diff = mu1 - mu2
    kl = 0.5 * (-(logdet1 - logdet2) + np.trace(prec2 @ cov1)
                + diff @ prec2 @ diff - d)
    return float(max(kl, 0.0))


def kl_to_standard_upper(spec: GmmSpec) -> KlUpperBound:
    """Closed-form upper bound on KL(mixture || standard normal):

    1/2 (-log det_min + d sigma_max + mu_max - d).

    Also returns the tighter mixture-convexity bound
    sum_i alpha_i KL(component_i || standard normal), which the closed form
    always dominates.
    """
    summ = spectral_summary(spec)
    d = spec.dim
    bound = 0.5 * (-math.log(summ.det_min) + d * summ.sigma_max + summ.mu_max - d)
    eye = np.eye(d)
    zero = np.zeros(d)
    convexity = float(sum(
        w * kl_gaussian_exact(m, c, zero, eye)
        for w, m, c in zip(spec.weights, spec.means, spec.covs)))
    return KlUpperBound(bound=float(bound), convexity_bound=convexity)


@dataclass(frozen=True)
class RegionCheck:
    """Outcome of a condition-region membership test.

    ``failures`` lists (clause, component_index) pairs; component_index is
    None for the density clause.
    """

    ok: bool
    failures: tuple = ()


def region_check(spec_t: GmmSpec, a_t: float, x, params: ConditionParams) -> RegionCheck:
    """True iff beta <= |x - a_t mu_i| <= R for every component i and
    density(x) >= gamma. On failure, reports which clause broke and where."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec_t.dim,):
        raise DimensionMismatch(f"point has shape {x.shape}, expected ({spec_t.dim},)")
    failures = []
    dists = np.linalg.norm(x[None, :] - a_t * spec_t.means, axis=1)
    for i, r in enumerate(dists):
        if r < params.beta:
            failures.append(("below_beta", i))
        elif r > params.R:
            failures.append(("above_R", i))
    if density(spec_t, x) < params.gamma:
        failures.append(("density_below_gamma", None))
    return RegionCheck(ok=not failures, failures=tuple(failures))


def region_mask(spec_t: GmmSpec, a_t: float, points: np.ndarray,
                params: ConditionParams) -> np.ndarray:
    """Vectorized region membership for an (n, d) array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != spec_t.dim:
        raise DimensionMismatch(f"points have shape {pts.shape}, expected (*, {spec_t.dim})")
    dists = np.linalg.norm(pts[:, None, :] - a_t * spec_t.means[None, :, :], axis=2)
    ok = (dists >= params.beta).all(axis=1) & (dists <= params.R).all(axis=1)
    ok &= density(spec_t, pts) >= params.gamma
    return ok


def calibrate_region(spec_t: GmmSpec, a_t: float, samples: SampleBatch) -> ConditionParams:
    """Pick (R, beta, gamma) from sample percentiles so that the bulk of the
    mass satisfies the region clauses:

    R     = 99th percentile of max_i |x - a_t mu_i|, clamped >= 1;
    beta  = 1st percentile of min_i |x - a_t mu_i|, capped below 0.1;
    gamma = 1st percentile of the density, capped below 0.1.
    """
    pts = samples.points
    if pts.shape[0] < 1000:
        raise TooFewSamples(f"need >= 1000 samples to calibrate, got {pts.shape[0]}")
    if pts.shape[1] != spec_t.dim:
        raise DimensionMismatch(f"samples have dim {pts.shape[1]}, expected {spec_t.dim}")
    dists = np.linalg.norm(pts[:, None, :] - a_t * spec_t.means[None, :, :], axis=2)
    R = max(1.0, float(np.percentile(dists.max(axis=1), 99.0)))
    beta = min(float(np.percentile(dists.min(axis=1), 1.0)), _BETA_GAMMA_CAP)
    if beta <= 0.0:
        beta = 1e-6
    gamma = min(float(np.percentile(density(spec_t, pts), 1.0)), _BETA_GAMMA_CAP)
    if gamma <= 0.0:
        gamma = 1e-300
    return ConditionParams(R=R, beta=beta, gamma=gamma)


@dataclass(frozen=True)
class BoundReport:
    """All smoothness quantities for one time slice, ready to serialize."""

    t: float
    L: float
    log_L: float
    m2: float
    M2: float
    kl_upper: float
    summary: SpectralSummary
    params: ConditionParams

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "L": self.L,
            "log_L": self.log_L,
            "m2": self.m2,
            "M2": self.M2,
            "kl_upper": self.kl_upper,
            "sigma_min": self.summary.sigma_min,
            "sigma_max": self.summary.sigma_max,
            "det_min": self.summary.det_min,
            "mu_max": self.summary.mu_max,
            "R": self.params.R,
            "beta": self.params.beta,
            "gamma": self.params.gamma,
        }


def bound_report(spec0: GmmSpec, t: float, params: ConditionParams | None = None,
                 calibration_samples: int = 20000, seed: int = 0) -> BoundReport:
    """Assemble the full report at time t, calibrating (R, beta, gamma) from
    fresh forward samples when not supplied."""
    from .forward import marginal_at, ou_coefficients
    from .mixture import sample

    spec_t = marginal_at(spec0, t)
    a_t = ou_coefficients(t).a
    if params is None:
        params = calibrate_region(spec_t, a_t, sample(spec_t, calibration_samples, seed))
    summ = spectral_summary(spec_t)
    lip = lipschitz_constant(summ, params, spec0.dim)
    mom = second_moment(spec0)
    kl = kl_to_standard_upper(spec0)
    return BoundReport(t=t, L=lip.value, log_L=lip.log_value,
                       m2=mom.m2, M2=mom.M2, kl_upper=kl.bound,
                       summary=summ, params=params)
