"""Brute-force grid evaluation of scalar filtering problems.

For scalar state and measurement, the joint density p(x, y) =
p(y | x) p(x) can be tabulated on a rectangular grid and every quantity
of interest (conditionals, moments, KL divergences) reduced to cell
sums. That is slow and memory-hungry but assumption-free, which makes
it the reference the sampled filters are validated against.

All grids are cell-centered: a :class:`Grid1D` with n cells over
[lo, hi] places values at lo + (i + 1/2) * spacing, and integrals are
midpoint sums, sum(f(values)) * spacing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._linalg import NumericsError, gaussian_log_pdf, gaussian_pdf, symmetrize
from .filters import FeatureFunction, FgfPosteriorParams, JointMoments, _evaluate_feature
from .models import GaussianBelief, StateSpaceModel

__all__ = [
    "Grid1D",
    "GridDensity2D",
    "GridCoverageWarning",
    "default_grids",
    "joint_density_grid",
    "conditional_slice",
    "conditional_mean_curve",
    "grid_joint_moments",
    "kl_conditional",
    "gaussian_moment_oracle",
]

# Warn when the unnormalized grid integral of likelihood * prior falls
# this far from 1: mass is escaping the grid or cells are too coarse.
COVERAGE_TOL = 1e-3


class GridCoverageWarning(UserWarning):
    """The grid fails to capture the joint density to the advertised tolerance."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid over [lo, hi] with n cells."""

    lo: float
    hi: float
    n: int
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.lo >= self.hi:
            raise ValueError(f"need finite lo < hi, got [{self.lo}, {self.hi}]")
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError(f"need at least 2 cells, got {self.n!r}")
        values = self.lo + (np.arange(self.n) + 0.5) * self.spacing
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / self.n


@dataclass(frozen=True)
class GridDensity2D:
    """Joint density over an (x, y) grid, normalized to unit mass.

    ``mass[i, j]`` is the density at (x_grid.values[i],
    y_grid.values[j]); sum(mass) * cell_area == 1 within 1e-6.
    """

    x_grid: Grid1D
    y_grid: Grid1D
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.shape != (self.x_grid.n, self.y_grid.n):
            raise ValueError(
                f"mass shape {mass.shape} does not match grid "
                f"({self.x_grid.n}, {self.y_grid.n})"
            )
        if not np.all(np.isfinite(mass)):
            raise NumericsError("grid density contains non-finite values")
        if np.any(mass < 0.0):
            raise ValueError("grid density contains negative values")
        total = float(mass.sum()) * self.cell_area
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"grid density integrates to {total!r}, expected 1")
        mass = mass.copy()
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @property
    def cell_area(self) -> float:
        return self.x_grid.spacing * self.y_grid.spacing


def default_grids(
    model: StateSpaceModel,
    belief: GaussianBelief,
    n: int = 2001,
    span: float = 6.0,
    seed: int = 0,
    samples: int = 100_000,
) -> tuple[Grid1D, Grid1D]:
    """Pick grids covering ``span`` standard deviations on both axes.

    The x grid comes straight from the belief; the y grid from seeded
    Monte Carlo moments of the measurement under it.
    """
    _require_scalar(model)
    mu = float(belief.mean[0])
    sd = float(np.sqrt(belief.cov[0, 0]))
    if sd <= 0.0:
        raise ValueError("belief must have positive variance")
    x_grid = Grid1D(mu - span * sd, mu + span * sd, n)
    rng = np.random.default_rng(seed)
    xs = mu + sd * rng.standard_normal((samples, 1))
    ws = rng.standard_normal((samples, model.obs_noise_dim))
    ys = np.asarray(model.observe(xs, ws), dtype=float)[:, 0]
    spread = float(ys.std())
    if spread <= 0.0:
        raise ValueError("measurement spread is zero, no sensible y grid")
    center = float(ys.mean())
    y_grid = Grid1D(center - span * spread, center + span * spread, n)
    return x_grid, y_grid


def _require_scalar(model: StateSpaceModel) -> None:
    if model.state_dim != 1 or model.meas_dim != 1:
        raise ValueError(
            "grid evaluation supports scalar state and measurement only, "
            f"got state_dim={model.state_dim}, meas_dim={model.meas_dim}"
        )


def joint_density_grid(
    model: StateSpaceModel,
    prior: GaussianBelief,
    x_grid: Grid1D,
    y_grid: Grid1D,
) -> GridDensity2D:
    """Tabulate p(x, y) = p(y | x) p(x) on the grid and normalize.

    Warns with :class:`GridCoverageWarning` when the unnormalized mass
    deviates from 1 by more than 1e-3, which signals truncated prior or
    likelihood mass (or cells too coarse to resolve the density).
    """
    _require_scalar(model)
    if model.likelihood is None:
        raise ValueError("model has no likelihood; the grid oracle needs one")
    if prior.state_dim != 1:
        raise ValueError("prior must be scalar")
    x = x_grid.values
    y = y_grid.values
    prior_pdf = gaussian_pdf(x, float(prior.mean[0]), float(prior.cov[0, 0]))
    like = np.asarray(model.likelihood(y[None, :], x[:, None]), dtype=float)
    if like.shape != (x_grid.n, y_grid.n):
        raise ValueError(
            f"likelihood returned shape {like.shape}, expected {(x_grid.n, y_grid.n)}"
        )
    if not np.all(np.isfinite(like)):
        raise NumericsError("likelihood produced non-finite values on the grid")
    if np.any(like < 0.0):
        raise ValueError("likelihood produced negative values on the grid")
    mass = like * prior_pdf[:, None]
    total = float(mass.sum()) * x_grid.spacing * y_grid.spacing
    if total <= 0.0:
        raise NumericsError("joint density is identically zero on the grid")
    if abs(total - 1.0) > COVERAGE_TOL:
        warnings.warn(
            f"grid captures mass {total:.6f} instead of 1; widen the grids "
            "or refine the cells",
            GridCoverageWarning,
            stacklevel=2,
        )
    return GridDensity2D(x_grid=x_grid, y_grid=y_grid, mass=mass / total)


def conditional_slice(density: GridDensity2D, y: float) -> np.ndarray:
    """Exact conditional p(x | y) at the grid column nearest to ``y``.

    Returns a density over ``density.x_grid`` (sums to 1 after
    multiplying by the x spacing).
    """
    y = float(y)
    if y < density.y_grid.lo or y > density.y_grid.hi:
        raise ValueError(
            f"y={y} lies outside the grid [{density.y_grid.lo}, {density.y_grid.hi}]"
        )
    j = int(np.argmin(np.abs(density.y_grid.values - y)))
    column = density.mass[:, j]
    norm = float(column.sum()) * density.x_grid.spacing
    if norm <= 0.0:
        raise NumericsError(
            f"conditional at y={y} has zero mass at this grid resolution"
        )
    return column / norm


def conditional_mean_curve(density: GridDensity2D) -> np.ndarray:
    """E[x | y] for every y column; NaN where a column carries no mass."""
    weights = density.mass.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = (density.x_grid.values @ density.mass) / weights
    return np.where(weights > 0.0, means, np.nan)


def grid_joint_moments(density: GridDensity2D, feature: FeatureFunction) -> JointMoments:
    """Exact (up to the grid) joint moments of state and features.

    Feature values depend only on y, so all sums collapse onto the
    marginal column weights; no per-cell feature array is built.
    """
    x = density.x_grid.values
    y = density.y_grid.values
    cell_w = density.mass * density.cell_area
    wx = cell_w.sum(axis=1)
    wy = cell_w.sum(axis=0)
    phis = _evaluate_feature(feature, y[:, None])
    mu_x = np.array([float(x @ wx)])
    mu_f = wy @ phis
    xc = x - mu_x[0]
    fc = phis - mu_f
    s_xx = np.array([[float((xc * xc) @ wx)]])
    s_ff = symmetrize((fc * wy[:, None]).T @ fc)
    s_xf = ((xc @ cell_w) @ fc)[None, :]
    return JointMoments(mu_x=mu_x, mu_f=mu_f, s_xx=s_xx, s_ff=s_ff, s_xf=s_xf)


def kl_conditional(
    density: GridDensity2D,
    params: FgfPosteriorParams,
    feature: FeatureFunction,
) -> float:
    """Average KL divergence from the fitted conditional to the exact one.

    Evaluates the cell sum

        sum_ij mass_ij * (log mass_ij - log q(x_i | y_j)) * cell_area

    which equals E_y[ KL(p(.|y) || q(.|y)) ] plus a constant that does
    not depend on the fitted parameters, so only differences between
    feature choices are meaningful. Cells with zero mass contribute
    nothing. q is evaluated in log space so tail underflow cannot
    produce infinities.
    """
    if params.state_dim != 1:
        raise ValueError("KL objective supports scalar state only")
    x = density.x_grid.values
    y = density.y_grid.values
    phis = _evaluate_feature(feature, y[:, None])
    if phis.shape[1] != params.feature_dim:
        raise ValueError(
            f"feature dimension {phis.shape[1]} does not match fitted "
            f"parameters ({params.feature_dim})"
        )
    means = phis @ params.gamma[0]
    var = float(params.sigma[0, 0])
    if var <= 0.0:
        raise NumericsError("fitted conditional has nonpositive variance")
    log_q = gaussian_log_pdf(x[:, None], means[None, :], var)
    mass = density.mass
    live = mass > 0.0
    contrib = mass[live] * (np.log(mass[live]) - log_q[live])
    return float(contrib.sum()) * density.cell_area


def gaussian_moment_oracle(mean: float, var: float, k: int) -> float:
    """Raw moment E[z^k] of z ~ N(mean, var) by the Stein recursion.

    m_k = mean * m_{k-1} + (k - 1) * var * m_{k-2}, supported for
    k <= 8; anything higher is outside this oracle's tested range.
    """
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k!r}")
    if k > 8:
        raise ValueError(f"moment order {k} exceeds the supported maximum 8")
    if not (np.isfinite(mean) and np.isfinite(var)) or var < 0.0:
        raise ValueError(f"need finite mean and nonnegative var, got {mean}, {var}")
    prev, cur = 1.0, float(mean)
    if k == 0:
        return prev
    for j in range(2, k + 1):
        prev, cur = cur, float(mean) * cur + (j - 1) * float(var) * prev
    return cur
