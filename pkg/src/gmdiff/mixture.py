"""Exact density, score, score Jacobian, and sampling for Gaussian mixtures.

All per-component quantities are computed in log space and combined with
log-sum-exp, so well-separated components (60 sigma and beyond) never
underflow intermediate products. Covariances are factorized once by
Cholesky at validation time; singular (PSD-but-rank-deficient) matrices
are rejected rather than regularized.

Every pointwise operation accepts either a single point of shape (d,)
or a batch of shape (n, d) and vectorizes over the batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DimensionMismatch,
    EmptyMixture,
    NonSymmetricCovariance,
    NotPositiveDefinite,
    WeightsDoNotSumToOne,
)
from .samples import SampleBatch

_SYM_TOL = 1e-10
_WEIGHT_TOL = 1e-10
_CHOL_TOL = 1e-10


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture component: weight in (0,1), mean in R^d, SPD covariance."""

    weight: float
    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True)
class GmmSpec:
    """A validated k-component Gaussian mixture in dimension d.

    Stacked parameter arrays plus cached Cholesky factors, precisions and
    log-determinants. Construct through :func:`validate_spec`; the caches
    are trusted everywhere downstream.
    """

    dim: int
    weights: np.ndarray     # (k,)
    means: np.ndarray       # (k, d)
    covs: np.ndarray        # (k, d, d)
    chols: np.ndarray       # (k, d, d), lower triangular
    inv_covs: np.ndarray    # (k, d, d)
    log_dets: np.ndarray    # (k,)

    @property
    def k(self) -> int:
        return len(self.weights)

    @cached_property
    def log_norms(self) -> np.ndarray:
        """log alpha_i - (d/2) log(2 pi) - (1/2) log det Sigma_i, per component."""
        return (np.log(self.weights)
                - 0.5 * self.dim * np.log(2.0 * np.pi)
                - 0.5 * self.log_dets)

    @property
    def components(self) -> tuple[GaussianComponent, ...]:
        return tuple(
            GaussianComponent(float(w), m.copy(), c.copy())
            for w, m, c in zip(self.weights, self.means, self.covs)
        )

    @property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "components": [
                {"weight": float(w), "mean": [float(v) for v in m],
                 "cov": [[float(v) for v in row] for row in c]}
                for w, m, c in zip(self.weights, self.means, self.covs)
            ],
        }


def validate_spec(raw) -> GmmSpec:
    """Validate proposed mixture parameters and build the cached spec.

    Accepts either a mapping with keys ``dim`` and ``components`` (the
    on-disk format, each component ``{weight, mean, cov}``) or an iterable
    of ``(weight, mean, cov)`` triples with the dimension inferred.

    Raises EmptyMixture, DimensionMismatch, NonSymmetricCovariance,
    NotPositiveDefinite or WeightsDoNotSumToOne on bad input.
    """
    if isinstance(raw, GmmSpec):
        return raw
    if isinstance(raw, Mapping):
        comps = raw.get("components", [])
        triples = [(c["weight"], c["mean"], c["cov"]) for c in comps]
        declared_dim = raw.get("dim")
    else:
        triples = []
        for item in raw:
            if isinstance(item, GaussianComponent):
                triples.append((item.weight, item.mean, item.cov))
            else:
                triples.append(tuple(item))
        declared_dim = None

    if len(triples) == 0:
        raise EmptyMixture("mixture must have at least one component")

    weights = np.array([float(w) for w, _, _ in triples])
    means = [np.atleast_1d(np.asarray(m, dtype=float)) for _, m, _ in triples]
    covs = [np.atleast_2d(np.asarray(c, dtype=float)) for _, _, c in triples]

    d = means[0].shape[0]
    if declared_dim is not None and int(declared_dim) != d:
        raise DimensionMismatch(
            f"declared dim {declared_dim} but component 0 mean has length {d}")
    for i, (m, c) in enumerate(zip(means, covs)):
        if m.shape != (d,):
            raise DimensionMismatch(f"component {i}: mean has shape {m.shape}, expected ({d},)")
        if c.shape != (d, d):
            raise DimensionMismatch(f"component {i}: cov has shape {c.shape}, expected ({d},{d})")

    if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
        raise WeightsDoNotSumToOne(f"weights sum to {weights.sum()!r}, expected 1")
    if np.any(weights <= 0.0) or np.any(weights >= 1.0 + _WEIGHT_TOL):
        # k=1 legitimately has weight exactly 1
        if not (len(weights) == 1 and abs(weights[0] - 1.0) <= _WEIGHT_TOL):
            raise WeightsDoNotSumToOne(f"each weight must lie in (0,1], got {weights!r}")

    chols = np.empty((len(triples), d, d))
    inv_covs = np.empty_like(chols)
    log_dets = np.empty(len(triples))
    eye = np.eye(d)
    for i, c in enumerate(covs):
        if np.max(np.abs(c - c.T)) > _SYM_TOL:
            raise NonSymmetricCovariance(f"component {i}: covariance is not symmetric")
        c = 0.5 * (c + c.T)
        covs[i] = c
        try:
            chol = np.linalg.cholesky(c)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(
                f"component {i}: covariance is not positive definite") from None
        if np.max(np.abs(chol @ chol.T - c)) > _CHOL_TOL:
            raise NotPositiveDefinite(
                f"component {i}: Cholesky factor does not reproduce the covariance")
        chols[i] = chol
        inv_covs[i] = np.linalg.solve(c, eye)
        inv_covs[i] = 0.5 * (inv_covs[i] + inv_covs[i].T)
        log_dets[i] = 2.0 * np.sum(np.log(np.diag(chol)))

    return GmmSpec(
        dim=d,
        weights=weights,
        means=np.stack(means),
        covs=np.stack(covs),
        chols=chols,
        inv_covs=inv_covs,
        log_dets=log_dets,
    )


@dataclass(frozen=True)
class Responsibilities:
    """Per-component posterior weights at a point; each in [0,1], summing to 1."""

    values: np.ndarray


def _check_points(spec: GmmSpec, x) -> tuple[np.ndarray, bool]:
    """Coerce x to a (n, d) float array; return it and whether input was 1-D."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.dim:
        raise DimensionMismatch(
            f"points have shape {np.asarray(x).shape}, expected (*, {spec.dim})")
    return x, single


def _component_log_pdfs(spec: GmmSpec, x: np.ndarray,
                        pulls_out: np.ndarray | None = None) -> np.ndarray:
    """log of alpha_i * N(x; mu_i, Sigma_i) for each component, shape (n, k).

    The quadratic form reuses the precision product h = Sigma_i^{-1}(x - mu_i)
    that the score needs; pass pulls_out of shape (n, k, d) to also collect
    -h per component.
    """
    n = x.shape[0]
    out = np.empty((n, spec.k))
    for i in range(spec.k):
        diff = x - spec.means[i]
        h = diff @ spec.inv_covs[i]
        if pulls_out is not None:
            np.negative(h, out=pulls_out[:, i, :])
        quad = np.einsum("nd,nd->n", diff, h)
        out[:, i] = spec.log_norms[i] - 0.5 * quad
    return out


def log_density(spec: GmmSpec, x) -> float | np.ndarray:
    """log p(x) via log-sum-exp over per-component log terms."""
    pts, single = _check_points(spec, x)
    lse = logsumexp(_component_log_pdfs(spec, pts), axis=1)
    return float(lse[0]) if single else lse


def density(spec: GmmSpec, x) -> float | np.ndarray:
    """p(x) = sum_i alpha_i N(x; mu_i, Sigma_i)."""
    out = np.exp(log_density(spec, x))
    return out


def responsibilities(spec: GmmSpec, x) -> Responsibilities:
    """Posterior component weights f_i(x) = alpha_i N_i(x) / sum_j alpha_j N_j(x)."""
    pts, single = _check_points(spec, x)
    f = _responsibility_matrix(spec, pts)
    return Responsibilities(values=f[0] if single else f)


def _responsibility_matrix(spec: GmmSpec, pts: np.ndarray) -> np.ndarray:
    logs = _component_log_pdfs(spec, pts)
    logs -= logs.max(axis=1, keepdims=True)
    w = np.exp(logs)
    return w / w.sum(axis=1, keepdims=True)


def score(spec: GmmSpec, x) -> np.ndarray:
    """Gradient of log p: sum_i f_i(x) * (-Sigma_i^{-1} (x - mu_i)).

    Reduces exactly to -Sigma^{-1}(x - mu) when k = 1.
    """
    pts, single = _check_points(spec, x)
    s = _score_matrix(spec, pts)
    return s[0] if single else s


def _component_pulls(spec: GmmSpec, pts: np.ndarray) -> np.ndarray:
    """g_i(x) = -Sigma_i^{-1}(x - mu_i), shape (n, k, d)."""
    out = np.empty((pts.shape[0], spec.k, spec.dim))
    for i in range(spec.k):
        np.matmul(spec.means[i] - pts, spec.inv_covs[i], out=out[:, i, :])
    return out


def _score_matrix(spec: GmmSpec, pts: np.ndarray) -> np.ndarray:
    if spec.k == 1:
        return (spec.means[0] - pts) @ spec.inv_covs[0]
    if spec.dim == 1:
        return _score_matrix_1d(spec, pts)
    pulls = np.empty((pts.shape[0], spec.k, spec.dim))
    logs = _component_log_pdfs(spec, pts, pulls_out=pulls)
    logs -= logs.max(axis=1, keepdims=True)
    np.exp(logs, out=logs)
    s = np.einsum("nk,nkd->nd", logs, pulls)
    s /= logs.sum(axis=1)[:, None]
    return s


def _score_matrix_1d(spec: GmmSpec, pts: np.ndarray) -> np.ndarray:
    """Scalar-covariance fast path: pure broadcasting, no per-component BLAS."""
    diff = pts - spec.means[:, 0]              # (n, k) via broadcast
    h = diff * spec.inv_covs[:, 0, 0]
    logs = spec.log_norms - 0.5 * (diff * h)
    logs -= logs.max(axis=1, keepdims=True)
    np.exp(logs, out=logs)
    s = -(logs * h).sum(axis=1) / logs.sum(axis=1)
    return s[:, None]


def score_jacobian(spec: GmmSpec, x) -> np.ndarray:
    """Hessian of log p, a symmetric d x d matrix (per point for batches).

    Uses H = sum_i f_i (g_i g_i^T - Sigma_i^{-1}) - s s^T where
    g_i = -Sigma_i^{-1}(x - mu_i) and s is the score. Equals -Sigma^{-1}
    exactly when k = 1.
    """
    pts, single = _check_points(spec, x)
    if spec.k == 1:
        out = np.broadcast_to(-spec.inv_covs[0], (pts.shape[0],) + spec.inv_covs[0].shape).copy()
        return out[0] if single else out
    f = _responsibility_matrix(spec, pts)                       # (n, k)
    g = _component_pulls(spec, pts)                             # (n, k, d)
    s = np.einsum("nk,nkd->nd", f, g)                           # (n, d)
    outer = np.einsum("nk,nkd,nke->nde", f, g, g)               # sum_i f_i g g^T
    prec = np.einsum("nk,kde->nde", f, spec.inv_covs)           # sum_i f_i Sigma_i^{-1}
    hess = outer - prec - np.einsum("nd,ne->nde", s, s)
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    return hess[0] if single else hess


def sample(spec: GmmSpec, n: int, seed: int) -> SampleBatch:
    """Draw n i.i.d. points: component by weight, then mu_i + chol_i @ xi.

    Deterministic given the seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    pts = sample_array(spec, n, rng)
    meta = {"seed": int(seed), "solver": "direct-gmm", "grid": "none",
            "T": 0.0, "delta": 0.0, "n": int(n)}
    return SampleBatch(points=pts, meta=meta)


def sample_array(spec: GmmSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Raw (n, d) mixture draws using the caller's generator."""
    idx = rng.choice(spec.k, size=n, p=spec.weights)
    xi = rng.standard_normal((n, spec.dim))
    pts = np.empty((n, spec.dim))
    for i in range(spec.k):
        mask = idx == i
        if np.any(mask):
            pts[mask] = spec.means[i] + xi[mask] @ spec.chols[i].T
    return pts


def mixture_mean(spec: GmmSpec) -> np.ndarray:
    """Overall mean sum_i alpha_i mu_i."""
    return spec.weights @ spec.means


def mixture_cov(spec: GmmSpec) -> np.ndarray:
    """Overall covariance sum_i alpha_i (Sigma_i + mu_i mu_i^T) - m m^T."""
    m = mixture_mean(spec)
    second = np.einsum("k,kde->de", spec.weights, spec.covs)
    second += np.einsum("k,kd,ke->de", spec.weights, spec.means, spec.means)
    return second - np.outer(m, m)
