"""Empirical distances and diagnostics: histogram TV/KL, Monte-Carlo KL,
moment checks, a Jacobian spectral probe, and convergence sweeps.

Histogram estimators are limited to d <= 3; density references are
integrated per cell with a 4-point midpoint rule per axis (peaked
components bias a center-value rule noticeably at a few hundred bins).
Mass falling outside the grid is accounted as one extra cell.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .bounds import ConditionParams, region_mask
from .errors import (
    DimensionMismatch,
    DimensionTooHigh,
    EmptyBatch,
    NoPointsInRegion,
)
from .forward import marginal_at
from .mixture import (
    GmmSpec,
    density,
    log_density,
    mixture_cov,
    mixture_mean,
    sample_array,
    score_jacobian,
)
from .samples import SampleBatch
from .schedules import uniform_grid
from .solvers import make_score_model, run_sampler

_REF_CLAMP = 1e-12
_MIDPOINTS_PER_AXIS = 4


@dataclass(frozen=True)
class HistogramGrid:
    """Axis-aligned binning of a box in dimension d <= 3."""

    lo: np.ndarray
    hi: np.ndarray
    bins: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        bins = np.atleast_1d(np.asarray(self.bins, dtype=int))
        if not (lo.shape == hi.shape == bins.shape):
            raise DimensionMismatch("lo, hi and bins must have matching shapes")
        if lo.shape[0] > 3:
            raise DimensionTooHigh("histogram grids support at most 3 dimensions")
        if np.any(hi <= lo):
            raise ValueError("each axis needs lo < hi")
        if np.any(bins < 10):
            raise ValueError("need at least 10 bins per axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "bins", bins)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def edges(self) -> list[np.ndarray]:
        return [np.linspace(self.lo[a], self.hi[a], self.bins[a] + 1)
                for a in range(self.dim)]

    @property
    def cell_volume(self) -> float:
        return float(np.prod((self.hi - self.lo) / self.bins))


def default_histogram_grid(spec: GmmSpec, bins: int = 200,
                           n_sigmas: float = 6.0) -> HistogramGrid:
    """A grid covering every component mean plus n_sigmas marginal deviations."""
    if spec.dim > 3:
        raise DimensionTooHigh("histogram grids support at most 3 dimensions")
    sd = np.sqrt(np.diagonal(spec.covs, axis1=1, axis2=2))   # (k, d)
    lo = (spec.means - n_sigmas * sd).min(axis=0)
    hi = (spec.means + n_sigmas * sd).max(axis=0)
    return HistogramGrid(lo=lo, hi=hi, bins=np.full(spec.dim, bins))


class Estimate(NamedTuple):
    value: float
    stderr: float


class KlHistogramResult(NamedTuple):
    value: float
    stderr: float
    clamped_cells: int


class SpectralProbeResult(NamedTuple):
    max_norm: float
    argmax_point: np.ndarray
    n_passing: int


def _batch_points(samples) -> np.ndarray:
    if isinstance(samples, SampleBatch):
        return samples.points
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if pts.size == 0:
        raise EmptyBatch("no sample points given")
    return pts


def _sample_cell_masses(pts: np.ndarray, grid: HistogramGrid) -> tuple[np.ndarray, float]:
    """Normalized histogram over grid cells plus the out-of-grid fraction."""
    if pts.shape[1] != grid.dim:
        raise DimensionMismatch(
            f"samples have dim {pts.shape[1]}, grid has dim {grid.dim}")
    hist, _ = np.histogramdd(pts, bins=grid.edges)
    n = pts.shape[0]
    masses = hist / n
    return masses, float(1.0 - masses.sum())


def reference_cell_masses(spec: GmmSpec, grid: HistogramGrid) -> tuple[np.ndarray, float]:
    """Per-cell probability mass of the mixture, by midpoint quadrature with
    4 sub-points per axis, plus the mass outside the grid."""
    if spec.dim != grid.dim:
        raise DimensionMismatch(f"spec dim {spec.dim} != grid dim {grid.dim}")
    m = _MIDPOINTS_PER_AXIS
    axes = []
    for a in range(grid.dim):
        width = (grid.hi[a] - grid.lo[a]) / grid.bins[a]
        offsets = (np.arange(m) + 0.5) / m * width
        starts = grid.lo[a] + np.arange(grid.bins[a]) * width
        axes.append((starts[:, None] + offsets[None, :]).ravel())
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    dens = np.asarray(density(spec, pts))
    fine_shape = []
    for a in range(grid.dim):
        fine_shape.extend([int(grid.bins[a]), m])
    dens = dens.reshape(fine_shape)
    # average the m sub-points on every axis
    for a in reversed(range(grid.dim)):
        dens = dens.mean(axis=2 * a + 1)
    masses = dens * grid.cell_volume
    return masses, float(max(0.0, 1.0 - masses.sum()))


def _resolve_reference(reference, grid: HistogramGrid) -> tuple[np.ndarray, float]:
    if isinstance(reference, GmmSpec):
        return reference_cell_masses(reference, grid)
    return _sample_cell_masses(_batch_points(reference), grid)


def _multinomial_se(weights: np.ndarray, cell_values: np.ndarray, n: int) -> float:
    """Delta-method standard error of sum_c weights_c * value_c for
    multinomial cell weights estimated from n draws."""
    mean = float((weights * cell_values).sum())
    second = float((weights * cell_values ** 2).sum())
    var = max(0.0, second - mean ** 2) / n
    return math.sqrt(var)


def tv_histogram(samples, reference, grid: HistogramGrid) -> float:
    """Total-variation estimate 0.5 * sum |p_hat - p_ref| over cells, with
    out-of-grid mass treated as one extra cell. Symmetric when both sides
    are sample batches; always in [0, 1]."""
    p_hat, p_hat_out = _sample_cell_masses(_batch_points(samples), grid)
    p_ref, p_ref_out = _resolve_reference(reference, grid)
    tv = 0.5 * (np.abs(p_hat - p_ref).sum() + abs(p_hat_out - p_ref_out))
    return float(min(1.0, tv))


def kl_histogram(samples, reference: GmmSpec, grid: HistogramGrid) -> KlHistogramResult:
    """Binned KL estimate sum p_hat log(p_hat / p_ref) over occupied cells.

    Reference cells with mass below 1e-12 are clamped to 1e-12 and counted,
    keeping the estimate finite and auditable on support mismatch.
    """
    pts = _batch_points(samples)
    p_hat, _ = _sample_cell_masses(pts, grid)
    p_ref, _ = _resolve_reference(reference, grid)
    occupied = p_hat > 0.0
    ref = p_ref[occupied]
    clamped = int(np.count_nonzero(ref < _REF_CLAMP))
    ref = np.maximum(ref, _REF_CLAMP)
    hat = p_hat[occupied]
    logs = np.log(hat / ref)
    value = float((hat * logs).sum())
    flat_vals = np.zeros(p_hat.size)
    flat_vals[occupied.ravel()] = logs + 1.0
    se = _multinomial_se(p_hat.ravel(), flat_vals, pts.shape[0])
    return KlHistogramResult(value=value, stderr=se, clamped_cells=clamped)


def kl_mc(p: GmmSpec, q: GmmSpec, n: int, seed: int) -> Estimate:
    """Monte-Carlo KL(p || q): mean of log p - log q over n draws from p,
    with its standard error."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimension mismatch: {p.dim} vs {q.dim}")
    rng = np.random.default_rng(seed)
    x = sample_array(p, n, rng)
    vals = np.asarray(log_density(p, x)) - np.asarray(log_density(q, x))
    return Estimate(value=float(vals.mean()),
                    stderr=float(vals.std(ddof=1) / math.sqrt(n)))


@dataclass(frozen=True)
class MomentDiagnostics:
    """Empirical first/second moments with z-scores against the reference."""

    mean: np.ndarray
    cov: np.ndarray
    second_moment: float
    mean_z: np.ndarray
    cov_z: np.ndarray
    second_moment_z: float

    @property
    def max_abs_z(self) -> float:
        return float(max(np.abs(self.mean_z).max(),
                         np.abs(self.cov_z).max(),
                         abs(self.second_moment_z)))


def moment_diagnostics(samples, reference: GmmSpec) -> MomentDiagnostics:
    """Compare sample mean, covariance and E|x|^2 against the mixture's
    analytic values, reporting per-entry z-scores."""
    pts = _batch_points(samples)
    n = pts.shape[0]
    if pts.shape[1] != reference.dim:
        raise DimensionMismatch(
            f"samples have dim {pts.shape[1]}, reference has dim {reference.dim}")
    emp_mean = pts.mean(axis=0)
    centered = pts - emp_mean
    emp_cov = centered.T @ centered / (n - 1)
    sq = np.sum(pts ** 2, axis=1)
    emp_m2 = float(sq.mean())

    ref_mean = mixture_mean(reference)
    ref_cov = mixture_cov(reference)
    ref_m2 = float(reference.weights @ (
        np.sum(reference.means ** 2, axis=1)
        + np.trace(reference.covs, axis1=1, axis2=2)))

    mean_se = pts.std(axis=0, ddof=1) / math.sqrt(n)
    mean_z = (emp_mean - ref_mean) / mean_se
    ref_centered = pts - ref_mean
    prod = ref_centered[:, :, None] * ref_centered[:, None, :]
    cov_se = prod.std(axis=0, ddof=1) / math.sqrt(n)
    cov_z = (emp_cov - ref_cov) / cov_se
    m2_se = sq.std(ddof=1) / math.sqrt(n)
    m2_z = (emp_m2 - ref_m2) / m2_se
    return MomentDiagnostics(mean=emp_mean, cov=emp_cov, second_moment=emp_m2,
                             mean_z=mean_z, cov_z=cov_z, second_moment_z=float(m2_z))


def spectral_norms(matrices: np.ndarray, iterations: int = 100,
                   tol: float = 1e-10, seed: int = 0) -> np.ndarray:
    """Dominant |eigenvalue| of each symmetric matrix by power iteration."""
    mats = np.asarray(matrices, dtype=float)
    if mats.ndim == 2:
        mats = mats[None]
    n, d, _ = mats.shape
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    lam = np.zeros(n)
    for _ in range(iterations):
        w = np.einsum("nij,nj->ni", mats, v)
        new_lam = np.linalg.norm(w, axis=1)
        nonzero = new_lam > 0.0
        v[nonzero] = w[nonzero] / new_lam[nonzero, None]
        if np.max(np.abs(new_lam - lam)) <= tol * max(1.0, new_lam.max()):
            lam = new_lam
            break
        lam = new_lam
    return lam


def jacobian_spectral_probe(spec_t: GmmSpec, points, params: ConditionParams,
                            a_t: float) -> SpectralProbeResult:
    """Max spectral norm of the score Jacobian over region-passing points.

    Raises NoPointsInRegion when no probe point satisfies the region
    clauses for the given parameters.
    """
    pts = _batch_points(points)
    mask = region_mask(spec_t, a_t, pts, params)
    passing = pts[mask]
    if passing.shape[0] == 0:
        raise NoPointsInRegion("no probe points satisfy the region clauses")
    hess = score_jacobian(spec_t, passing)
    norms = spectral_norms(hess)
    idx = int(np.argmax(norms))
    return SpectralProbeResult(max_norm=float(norms[idx]),
                               argmax_point=passing[idx].copy(),
                               n_passing=int(passing.shape[0]))


class SweepRow(NamedTuple):
    axis_value: float
    metric: str
    value: float
    stderr: float


@dataclass(frozen=True)
class SweepResult:
    """Per-configuration metric values plus the fitted log-log slope."""

    rows: tuple[SweepRow, ...]
    slope: float
    slope_half_width: float

    def to_rows(self) -> list[dict]:
        return [row._asdict() for row in self.rows]


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """OLS slope of log y on log x with a 2-sigma half-width from residuals."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 4:
        raise ValueError("slope fit needs at least 4 points")
    if np.any(ys <= 0.0) or np.any(xs <= 0.0):
        raise ValueError("log-log fit needs positive values")
    lx, ly = np.log(xs), np.log(ys)
    lx_c = lx - lx.mean()
    slope = float((lx_c @ (ly - ly.mean())) / (lx_c @ lx_c))
    intercept = ly.mean() - slope * lx.mean()
    resid = ly - (intercept + slope * lx)
    dof = len(xs) - 2
    sigma2 = float(resid @ resid) / dof
    se = math.sqrt(sigma2 / float(lx_c @ lx_c))
    return slope, 2.0 * se


def convergence_sweep(spec0: GmmSpec, scheme: str, axis: str,
                      values: Sequence[float], metric: str, n: int, seed: int,
                      T: float = 8.0, delta: float = 0.0,
                      fixed_N: int = 8192, fixed_epsilon0: float = 0.0,
                      hist_grid: HistogramGrid | None = None,
                      threads: int = 1) -> SweepResult:
    """Run the sampler across a parameter axis and fit the log-log trend.

    axis "N" sweeps the uniform grid resolution at fixed score error;
    axis "epsilon0" sweeps the score perturbation at fixed N. The metric is
    evaluated against the marginal at time delta (the target the sampler is
    actually aiming for).
    """
    if axis not in ("N", "epsilon0"):
        raise ValueError(f"axis must be 'N' or 'epsilon0', got {axis!r}")
    if metric not in ("kl_histogram", "tv_histogram"):
        raise ValueError(f"metric must be 'kl_histogram' or 'tv_histogram', got {metric!r}")
    if len(values) < 4:
        raise ValueError("sweep needs at least 4 values")
    reference = spec0 if delta == 0.0 else marginal_at(spec0, delta)
    grid = hist_grid if hist_grid is not None else default_histogram_grid(reference)
    children = np.random.SeedSequence(seed).spawn(len(values))

    def run_one(idx: int) -> SweepRow:
        value = values[idx]
        run_seed = int(children[idx].generate_state(1)[0])
        if axis == "N":
            model = make_score_model(spec0, "perturbed" if fixed_epsilon0 > 0 else "exact",
                                     fixed_epsilon0, seed=seed)
            tgrid = uniform_grid(T, int(value), delta)
        else:
            model = make_score_model(spec0, "perturbed", float(value), seed=seed)
            tgrid = uniform_grid(T, fixed_N, delta)
        batch = run_sampler(model, tgrid, scheme, n, run_seed)
        if metric == "kl_histogram":
            res = kl_histogram(batch, reference, grid)
            return SweepRow(float(value), metric, res.value, res.stderr)
        tv = tv_histogram(batch, reference, grid)
        return SweepRow(float(value), metric, tv, 0.0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_one, range(len(values))))
    else:
        rows = [run_one(i) for i in range(len(values))]
    slope, half_width = fit_loglog_slope([r.axis_value for r in rows],
                                         [max(r.value, 1e-300) for r in rows])
    return SweepResult(rows=tuple(rows), slope=slope, slope_half_width=half_width)
