"""Closed-form forward noising marginals and affine pushforwards of mixtures.

Only the mean-reverting unit-diffusion parameterization (drift -x,
diffusion sqrt(2)) is implemented: scale a(t) = e^{-t}, noise
b(t) = sqrt(1 - e^{-2t}), so a^2 + b^2 = 1 and the standard normal is
stationary. A mixture pushed through x -> a x + b z stays a mixture with
the same weights, means a*mu_i, and covariances a^2 Sigma_i + b^2 I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeTime, ZeroScale
from .mixture import GmmSpec


@dataclass(frozen=True)
class OuCoefficients:
    """Scale/noise pair (a, b) of the forward process at time t; a^2 + b^2 = 1."""

    a: float
    b: float
    t: float


def ou_coefficients(t: float) -> OuCoefficients:
    """(e^{-t}, sqrt(1 - e^{-2t})) for t >= 0.

    b uses expm1 so that b ~ sqrt(2t) keeps full precision for small t.
    """
    if not math.isfinite(t) or t < 0.0:
        raise NegativeTime(f"time must be finite and >= 0, got {t!r}")
    a = math.exp(-t)
    b = math.sqrt(-math.expm1(-2.0 * t))
    return OuCoefficients(a=a, b=b, t=t)


def affine_push(spec: GmmSpec, a: float, b: float) -> GmmSpec:
    """Pushforward of the mixture under x -> a x + b z, z standard normal.

    Same weights; means scale by a; covariances become a^2 Sigma_i + b^2 I,
    which stay symmetric positive definite for a != 0, so the caches are
    rebuilt directly with batched factorizations (this sits on the sampler's
    per-step path).
    """
    if a == 0.0:
        raise ZeroScale("scale factor a must be nonzero")
    if b < 0.0:
        raise ValueError(f"noise scale b must be >= 0, got {b!r}")
    if a == 1.0 and b == 0.0:
        return spec
    d = spec.dim
    eye = np.eye(d)
    new_covs = (a * a) * spec.covs + (b * b) * eye
    chols = np.linalg.cholesky(new_covs)
    inv_covs = np.linalg.solve(new_covs, np.broadcast_to(eye, new_covs.shape).copy())
    inv_covs = 0.5 * (inv_covs + np.swapaxes(inv_covs, -1, -2))
    log_dets = 2.0 * np.sum(np.log(np.diagonal(chols, axis1=1, axis2=2)), axis=1)
    return GmmSpec(dim=d, weights=spec.weights, means=a * spec.means,
                   covs=new_covs, chols=chols, inv_covs=inv_covs,
                   log_dets=log_dets)


def marginal_at(spec0: GmmSpec, t: float) -> GmmSpec:
    """The forward marginal at time t: affine_push with the closed-form (a_t, b_t)."""
    coeff = ou_coefficients(t)
    if coeff.t == 0.0:
        return spec0
    return affine_push(spec0, coeff.a, coeff.b)
