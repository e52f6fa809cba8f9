"""Gaussian filtering with feature-based measurement updates.

The update step fits the conditional state distribution as

    q(x | y) = N(x | Gamma phi(y), Sigma)

where phi is a feature map of the measurement whose first output entry
is the constant 1. Gamma and Sigma come from the joint second moments
of state and features under the predicted belief:

    Gamma = E[x phi(y)^T] E[phi(y) phi(y)^T]^{-1}
    Sigma = E[(x - Gamma phi(y)) (x - Gamma phi(y))^T]

With the affine feature phi(y) = (1, y) this reproduces the classical
moment-matched Gaussian filter update exactly, so the plain filter is
just the affine special case rather than a separate code path. Richer
features let the posterior mean respond nonlinearly to y, which is what
extracts information from measurements whose correlation with the state
is purely higher-order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._linalg import (
    NumericsError,
    PSD_REL_TOL,
    _TINY,
    _cho_solve_jittered,
    ensure_psd,
    solve_psd,
    symmetrize,
)
from .models import GaussianBelief, StateSpaceModel
from .quadrature import ExpectationEngine, _draw_points

__all__ = [
    "FeatureFunction",
    "JointMoments",
    "FgfPosteriorParams",
    "make_affine_feature",
    "make_monomial_feature",
    "standardize_feature",
    "register_feature",
    "get_feature",
    "predict",
    "joint_moments",
    "gf_update",
    "fgf_solve",
    "fgf_update",
    "run_filter",
]


@dataclass(frozen=True)
class FeatureFunction:
    """Measurement feature map phi with a constant leading entry.

    ``map`` takes arrays of shape (..., meas_dim) to (..., out_dim) and
    must put the constant 1 in the first output entry; the moment code
    checks that on every evaluation. ``out_dim`` includes the constant,
    so it is at least 2.
    """

    name: str
    out_dim: int
    map: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if not self.name:
            raise ValueError("feature needs a nonempty name")
        if not isinstance(self.out_dim, (int, np.integer)) or self.out_dim < 2:
            raise ValueError(
                f"out_dim must be at least 2 (constant plus payload), got {self.out_dim!r}"
            )
        if not callable(self.map):
            raise ValueError("map must be callable")


def make_affine_feature(meas_dim: int) -> FeatureFunction:
    """phi(y) = (1, y); the feature under which the FGF is the plain GF."""
    return make_monomial_feature(meas_dim, 1)


def make_monomial_feature(meas_dim: int, order: int) -> FeatureFunction:
    """Componentwise monomials up to ``order``: (1, y, y^2, ..., y^order).

    Output layout is the constant, then all components of y, then all
    components of y^2, and so on; out_dim = 1 + meas_dim * order.
    """
    if not isinstance(meas_dim, (int, np.integer)) or meas_dim < 1:
        raise ValueError(f"meas_dim must be a positive integer, got {meas_dim!r}")
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ValueError(f"order must be a positive integer, got {order!r}")
    out_dim = 1 + meas_dim * order

    def mapper(y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != meas_dim:
            raise ValueError(
                f"feature expects measurement dimension {meas_dim}, got {y.shape[-1]}"
            )
        out = np.empty(y.shape[:-1] + (out_dim,))
        out[..., 0] = 1.0
        out[..., 1 : 1 + meas_dim] = y
        for k in range(1, order):
            lo = 1 + k * meas_dim
            out[..., lo : lo + meas_dim] = out[..., lo - meas_dim : lo] * y
        return out

    name = "affine" if order == 1 else f"monomial{order}"
    return FeatureFunction(name=name, out_dim=out_dim, map=mapper)


def standardize_feature(base: FeatureFunction, shift, scale) -> FeatureFunction:
    """Apply ``base`` to the rescaled measurement (y - shift) / scale.

    For monomial features this spans the same function space as the raw
    feature, so the fitted posterior is unchanged in exact arithmetic;
    what changes is the conditioning of the feature Gram matrix.
    """
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    scale = np.atleast_1d(np.asarray(scale, dtype=float))
    if np.any(scale <= 0.0) or not np.all(np.isfinite(scale)):
        raise ValueError("scale must be positive and finite")

    def mapper(y):
        return base.map((np.asarray(y, dtype=float) - shift) / scale)

    return FeatureFunction(
        name=f"{base.name}_standardized", out_dim=base.out_dim, map=mapper
    )


_FEATURE_REGISTRY: dict[str, FeatureFunction] = {}


def register_feature(feature: FeatureFunction, overwrite: bool = False) -> None:
    """Register a feature under its name for config-driven lookup."""
    if feature.name in _FEATURE_REGISTRY and not overwrite:
        raise ValueError(f"feature {feature.name!r} is already registered")
    _FEATURE_REGISTRY[feature.name] = feature


def get_feature(name: str) -> FeatureFunction:
    try:
        return _FEATURE_REGISTRY[name]
    except KeyError:
        raise ValueError(f"no feature registered under {name!r}") from None


@dataclass(frozen=True)
class JointMoments:
    """First and second moments of (state, feature) under one belief.

    ``mu_x``/``mu_f`` are the means, ``s_xx``/``s_ff`` the central
    covariances, ``s_xf`` the cross covariance; all central, raw moments
    are reconstructed where needed. Arrays are stored read-only.
    """

    mu_x: np.ndarray
    mu_f: np.ndarray
    s_xx: np.ndarray
    s_ff: np.ndarray
    s_xf: np.ndarray

    def __post_init__(self):
        mu_x = np.atleast_1d(np.asarray(self.mu_x, dtype=float))
        mu_f = np.atleast_1d(np.asarray(self.mu_f, dtype=float))
        s_xx = np.atleast_2d(np.asarray(self.s_xx, dtype=float))
        s_ff = np.atleast_2d(np.asarray(self.s_ff, dtype=float))
        s_xf = np.atleast_2d(np.asarray(self.s_xf, dtype=float))
        dx, k = mu_x.shape[0], mu_f.shape[0]
        if s_xx.shape != (dx, dx) or s_ff.shape != (k, k) or s_xf.shape != (dx, k):
            raise ValueError(
                "inconsistent moment shapes: "
                f"mu_x {mu_x.shape}, mu_f {mu_f.shape}, s_xx {s_xx.shape}, "
                f"s_ff {s_ff.shape}, s_xf {s_xf.shape}"
            )
        # One combined finite screen: any NaN or infinity survives sums.
        total = mu_x.sum() + mu_f.sum() + s_xx.sum() + s_ff.sum() + s_xf.sum()
        if not np.isfinite(total):
            raise NumericsError("joint moments contain non-finite values")
        for label, mat in (("s_xx", s_xx), ("s_ff", s_ff)):
            if mat.shape[0] == 1:
                if mat[0, 0] < 0.0:
                    raise NumericsError(f"{label} has negative variance {mat[0, 0]!r}")
                continue
            eigs = np.linalg.eigvalsh(symmetrize(mat))
            bound = PSD_REL_TOL * max(abs(eigs[0]), abs(eigs[-1]), _TINY)
            if eigs[0] < -bound:
                raise NumericsError(
                    f"{label} has eigenvalue {eigs[0]!r}, negative beyond tolerance"
                )
        for name, arr in (
            ("mu_x", mu_x),
            ("mu_f", mu_f),
            ("s_xx", s_xx),
            ("s_ff", s_ff),
            ("s_xf", s_xf),
        ):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def state_dim(self) -> int:
        return self.mu_x.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.mu_f.shape[0]

    @classmethod
    def _trusted(cls, mu_x, mu_f, s_xx, s_ff, s_xf):
        # Producer-only fast path: the caller owns freshly computed float
        # arrays with consistent shapes, so only the finite screen that
        # guards against accumulation overflow is kept. User-supplied
        # moments must go through the normal constructor.
        total = mu_x.sum() + mu_f.sum() + s_xx.sum() + s_ff.sum() + s_xf.sum()
        if not np.isfinite(total):
            raise NumericsError("joint moments contain non-finite values")
        self = object.__new__(cls)
        for name, arr in (
            ("mu_x", mu_x),
            ("mu_f", mu_f),
            ("s_xx", s_xx),
            ("s_ff", s_ff),
            ("s_xf", s_xf),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        return self


@dataclass(frozen=True)
class FgfPosteriorParams:
    """Fitted conditional q(x|y) = N(x | gamma phi(y), sigma)."""

    gamma: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        gamma = np.atleast_2d(np.asarray(self.gamma, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if not np.all(np.isfinite(gamma)):
            raise NumericsError("gamma contains non-finite values")
        if sigma.shape != (gamma.shape[0], gamma.shape[0]):
            raise ValueError(
                f"sigma shape {sigma.shape} does not match gamma rows {gamma.shape[0]}"
            )
        # Reuse the belief validation for sigma (finite, symmetric, PSD).
        checked = GaussianBelief(np.zeros(gamma.shape[0]), sigma)
        sigma = checked.cov
        gamma = gamma.copy()
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "sigma", sigma)

    @property
    def state_dim(self) -> int:
        return self.gamma.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.gamma.shape[1]

    @classmethod
    def _trusted(cls, gamma, sigma):
        # Producer-only fast path, same contract as JointMoments._trusted;
        # sigma must already be symmetric PSD (fgf_solve enforces it).
        if not np.isfinite(gamma.sum()):
            raise NumericsError("gamma contains non-finite values")
        self = object.__new__(cls)
        gamma.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "sigma", sigma)
        return self


def _all_finite(arr: np.ndarray) -> bool:
    # Cheap screen for large arrays: the sum is NaN or infinite whenever
    # any entry is (inf - inf gives NaN, so mixed signs cannot hide).
    return bool(np.isfinite(arr.sum()))


def _evaluate_feature(feature: FeatureFunction, ys: np.ndarray) -> np.ndarray:
    phis = np.asarray(feature.map(ys), dtype=float)
    expected = ys.shape[:-1] + (feature.out_dim,)
    if phis.shape != expected:
        raise ValueError(
            f"feature {feature.name!r} returned shape {phis.shape}, expected {expected}"
        )
    if not _all_finite(phis):
        raise NumericsError(f"feature {feature.name!r} produced non-finite values")
    const = phis[..., 0]
    if not (const.min() >= 1.0 - 1e-9 and const.max() <= 1.0 + 1e-9):
        raise ValueError(
            f"feature {feature.name!r} must keep its first output entry "
            "at the constant 1"
        )
    return phis


def _batch_eval(fn, states, noises, out_dim, what):
    out = np.asarray(fn(states, noises), dtype=float)
    expected = (states.shape[0], out_dim)
    if out.shape != expected:
        raise ValueError(f"{what} returned shape {out.shape}, expected {expected}")
    if not _all_finite(out):
        bad = int(np.argwhere(~np.isfinite(out))[0, 0])
        raise NumericsError(
            f"{what} produced a non-finite value at sample {bad}: "
            f"state={states[bad]}, noise={noises[bad]}"
        )
    return out


def predict(
    belief: GaussianBelief,
    model: StateSpaceModel,
    engine: ExpectationEngine,
) -> GaussianBelief:
    """Moment-matched one-step prediction through the process map.

    Pushes the engine's point set through ``model.process`` and returns
    the Gaussian with the matched mean and covariance.
    """
    states, noises, weights, uniform = _draw_points(
        engine, belief, model.process_noise_dim
    )
    prop = _batch_eval(model.process, states, noises, model.state_dim, "process map")
    mean = weights @ prop
    centered = prop - mean
    if uniform:
        cov = symmetrize(centered.T @ centered) / len(weights)
    else:
        cov = symmetrize((centered * weights[:, None]).T @ centered)
    return GaussianBelief(mean, cov)


def joint_moments(
    belief: GaussianBelief,
    model: StateSpaceModel,
    feature: FeatureFunction,
    engine: ExpectationEngine,
) -> JointMoments:
    """Joint moments of state and measurement features under ``belief``.

    One engine pass: sample (x, w), push through ``model.observe``,
    evaluate the feature on the measurements, and accumulate means and
    central (co)variances.
    """
    states, noises, weights, uniform = _draw_points(
        engine, belief, model.obs_noise_dim
    )
    ys = _batch_eval(model.observe, states, noises, model.meas_dim, "observation map")
    phis = _evaluate_feature(feature, ys)
    # The validated constant first entry has known moments (mean 1, no
    # covariance), so it is dropped from the sample block: one stacked
    # GEMM covers every remaining block of the joint covariance.
    z = np.concatenate([states, phis[:, 1:]], axis=1)
    mu = weights @ z
    zc = z - mu
    if uniform:
        cov = (zc.T @ zc) / len(weights)
    else:
        cov = (zc * weights[:, None]).T @ zc
    dx = states.shape[1]
    k = phis.shape[1]
    mu_f = np.empty(k)
    mu_f[0] = 1.0
    mu_f[1:] = mu[dx:]
    s_ff = np.zeros((k, k))
    s_ff[1:, 1:] = symmetrize(cov[dx:, dx:])
    s_xf = np.zeros((dx, k))
    s_xf[:, 1:] = cov[:dx, dx:]
    return JointMoments._trusted(
        mu_x=mu[:dx].copy(),
        mu_f=mu_f,
        s_xx=symmetrize(cov[:dx, :dx]),
        s_ff=s_ff,
        s_xf=s_xf,
    )


def _require_affine(moments: JointMoments) -> None:
    tol = 1e-8 * (1.0 + float(np.max(np.abs(moments.s_ff))))
    if abs(moments.mu_f[0] - 1.0) > 1e-6 or np.max(np.abs(moments.s_ff[0])) > tol:
        raise ValueError(
            "moments do not have affine-feature structure "
            "(constant first entry with zero variance)"
        )


def gf_update(moments: JointMoments, y) -> GaussianBelief:
    """Classical Gaussian-filter update by conditioning the joint Gaussian.

    ``moments`` must come from the affine feature (1, y); the leading
    constant entry is stripped and the remaining block conditioned on
    the observed measurement.
    """
    _require_affine(moments)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    dy = moments.feature_dim - 1
    if y.shape != (dy,):
        raise ValueError(f"measurement shape {y.shape} does not match ({dy},)")
    if not np.all(np.isfinite(y)):
        raise ValueError("measurement must be finite")
    mu_y = moments.mu_f[1:]
    s_yy = moments.s_ff[1:, 1:]
    s_xy = moments.s_xf[:, 1:]
    try:
        gain = solve_psd(s_yy, s_xy.T).T
    except NumericsError as err:
        raise NumericsError(
            f"measurement conditioning failed, predicted measurement "
            f"covariance is singular: {err}"
        ) from err
    mean = moments.mu_x + gain @ (y - mu_y)
    dx = moments.state_dim
    scale = max(float(np.trace(moments.s_xx)) / dx, _TINY)
    cov = ensure_psd(moments.s_xx - gain @ s_xy.T, scale=scale)
    return GaussianBelief(mean, cov)


def fgf_solve(moments: JointMoments) -> FgfPosteriorParams:
    """Fit gamma and sigma of the feature-conditional posterior.

    Solves E[phi phi^T] gamma^T = E[phi x^T] in the raw (non-central)
    moments reconstructed from ``moments``, then evaluates the residual
    covariance through its full quadratic form, which stays PSD even
    when the Gram solve needed jitter.
    """
    e_ff = moments.s_ff + np.outer(moments.mu_f, moments.mu_f)
    e_xf = moments.s_xf + np.outer(moments.mu_x, moments.mu_f)
    e_xx = moments.s_xx + np.outer(moments.mu_x, moments.mu_x)
    try:
        # e_ff is exactly symmetric by construction and any non-finite
        # propagation lands in the residual screen below, so the public
        # solve_psd guards can be skipped in this per-step call.
        gamma = _cho_solve_jittered(e_ff, e_xf.T).T
    except NumericsError as err:
        raise NumericsError(
            "feature Gram matrix is rank deficient beyond the jitter "
            "budget; reduce the feature order or standardize the "
            f"feature inputs ({err})"
        ) from err
    cross = gamma @ e_xf.T
    resid = e_xx - cross - cross.T + gamma @ e_ff @ gamma.T
    dx = moments.state_dim
    scale = max(float(np.trace(e_xx)) / dx, _TINY)
    sigma = ensure_psd(resid, scale=scale)
    return FgfPosteriorParams._trusted(gamma, sigma)


def fgf_update(
    params: FgfPosteriorParams,
    feature: FeatureFunction,
    y,
) -> GaussianBelief:
    """Evaluate the fitted conditional at an observed measurement."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if not np.all(np.isfinite(y)):
        raise ValueError("measurement must be finite")
    phi = _evaluate_feature(feature, y[None, :])[0]
    if phi.shape[0] != params.feature_dim:
        raise ValueError(
            f"feature dimension {phi.shape[0]} does not match fitted "
            f"parameters ({params.feature_dim})"
        )
    return GaussianBelief(params.gamma @ phi, params.sigma)


def _measurement_scale(
    belief: GaussianBelief,
    model: StateSpaceModel,
    engine: ExpectationEngine,
) -> tuple[np.ndarray, np.ndarray]:
    # Light pass for the predicted measurement mean and spread, used to
    # standardize feature inputs.
    states, noises, weights, _ = _draw_points(engine, belief, model.obs_noise_dim)
    ys = _batch_eval(model.observe, states, noises, model.meas_dim, "observation map")
    mu = weights @ ys
    var = weights @ (ys - mu) ** 2
    floor = 1e-12 * (1.0 + np.abs(mu))
    return mu, np.sqrt(np.maximum(var, floor**2))


def run_filter(
    model: StateSpaceModel,
    prior: GaussianBelief,
    feature: FeatureFunction,
    engine: ExpectationEngine,
    measurements: Sequence | np.ndarray,
    standardize: bool = False,
) -> list[GaussianBelief]:
    """Run predict/update over a measurement sequence.

    Parameters
    ----------
    measurements : array_like, shape (steps, meas_dim) or (steps,)
        The 1-D form is accepted for scalar-measurement models. An
        empty sequence yields an empty posterior list.
    standardize : bool
        Rescale feature inputs per step by the predicted measurement
        mean and spread. Posterior-neutral for monomial features but
        much better conditioned at high orders; affine features are
        exactly invariant to it, so it is skipped for them.

    Returns
    -------
    list of GaussianBelief, one posterior per measurement.

    Raises
    ------
    NumericsError
        On numerical breakdown; the message and ``step`` attribute
        report the zero-based step that failed.
    """
    ys = np.asarray(measurements, dtype=float)
    if ys.size == 0:
        return []
    if ys.ndim == 1 and model.meas_dim == 1:
        ys = ys[:, None]
    if ys.ndim != 2 or ys.shape[1] != model.meas_dim:
        raise ValueError(
            f"measurements shape {ys.shape} does not match "
            f"(steps, {model.meas_dim})"
        )
    if not np.all(np.isfinite(ys)):
        raise ValueError("measurements must be finite")
    rescale = standardize and feature.out_dim > model.meas_dim + 1
    posteriors: list[GaussianBelief] = []
    belief = prior
    for t in range(ys.shape[0]):
        try:
            belief = predict(belief, model, engine)
            step_feature = feature
            if rescale:
                shift, scale = _measurement_scale(belief, model, engine)
                step_feature = standardize_feature(feature, shift, scale)
            moments = joint_moments(belief, model, step_feature, engine)
            params = fgf_solve(moments)
            belief = fgf_update(params, step_feature, ys[t])
        except NumericsError as err:
            raise NumericsError(f"filter failed at step {t}: {err}", step=t) from err
        posteriors.append(belief)
    return posteriors
