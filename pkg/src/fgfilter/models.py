"""Nonlinear state-space models, Gaussian beliefs, and trajectory simulation.

A model is a pair of stationary maps

    x_t = g(x_{t-1}, v_t)        process, v_t ~ N(0, I)
    y_t = h(x_t, w_t)            observation, w_t ~ N(0, I)

with all noise standard normal by convention; any scaling or coloring
belongs inside ``g`` and ``h``. Both maps must accept arrays whose
leading axes broadcast: filtering evaluates them on whole batches of
sampled states at once, simulation on single vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._linalg import (
    NumericsError,
    PSD_REL_TOL,
    _TINY,
    gaussian_pdf,
    symmetrize,
)

__all__ = [
    "StateSpaceModel",
    "GaussianBelief",
    "make_noise_magnitude_model",
    "make_heaviside_model",
    "simulate",
]


@dataclass(frozen=True)
class StateSpaceModel:
    """Stationary nonlinear state-space model with standard-normal noise.

    Parameters
    ----------
    state_dim, meas_dim : int
        Dimensions of the state and measurement vectors.
    process_noise_dim, obs_noise_dim : int
        Dimensions of the process and observation noise vectors,
        independent of the state and measurement dimensions.
    process, observe : callable
        ``process(x, v)`` and ``observe(x, w)``; must broadcast over a
        leading sample axis.
    likelihood : callable, optional
        ``likelihood(y, x)`` returning the observation density
        pointwise, broadcasting over both arguments. Only needed by the
        grid oracle; filtering never evaluates it.
    name : str
        Identifier used in reports and output file names.
    """

    state_dim: int
    meas_dim: int
    process_noise_dim: int
    obs_noise_dim: int
    process: Callable[[np.ndarray, np.ndarray], np.ndarray]
    observe: Callable[[np.ndarray, np.ndarray], np.ndarray]
    likelihood: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    name: str = ""

    def __post_init__(self):
        for label in ("state_dim", "meas_dim", "process_noise_dim", "obs_noise_dim"):
            value = getattr(self, label)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{label} must be a positive integer, got {value!r}")
        if not callable(self.process) or not callable(self.observe):
            raise ValueError("process and observe must be callable")
        if self.likelihood is not None and not callable(self.likelihood):
            raise ValueError("likelihood must be callable when given")


@dataclass(frozen=True)
class GaussianBelief:
    """Multivariate normal belief over the state.

    The covariance is stored symmetrized and both arrays are made
    read-only, so beliefs can be shared across threads freely. The
    covariance must be finite, symmetric within roundoff, and PSD up to
    a small negative eigenvalue floor.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.shape == (1,) and cov.shape == (1, 1):
            # Scalar fast path; the filter loop builds beliefs per step.
            m0, c0 = float(mean[0]), float(cov[0, 0])
            if not (math.isfinite(m0) and math.isfinite(c0)):
                raise NumericsError("belief has non-finite mean or covariance")
            if c0 < 0.0:
                raise NumericsError(f"negative variance {c0!r}")
            mean = np.array([m0])
            cov = np.array([[c0]])
        else:
            mean = np.atleast_1d(mean)
            cov = np.atleast_2d(cov)
            if mean.ndim != 1:
                raise ValueError(f"mean must be a vector, got shape {mean.shape}")
            d = mean.shape[0]
            if cov.shape != (d, d):
                raise ValueError(
                    f"covariance shape {cov.shape} does not match state dimension {d}"
                )
            if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
                raise NumericsError("belief has non-finite mean or covariance")
            if d == 1:
                if cov[0, 0] < 0.0:
                    raise NumericsError(f"negative variance {cov[0, 0]!r}")
                cov = cov.copy()
            else:
                gap = float(np.max(np.abs(cov - cov.T)))
                if gap > PSD_REL_TOL * (float(np.max(np.abs(cov))) + _TINY):
                    raise ValueError(f"covariance is asymmetric (max gap {gap!r})")
                cov = symmetrize(cov)
                eigs = np.linalg.eigvalsh(cov)
                bound = PSD_REL_TOL * max(abs(eigs[0]), abs(eigs[-1]), _TINY)
                if eigs[0] < -bound:
                    raise NumericsError(
                        f"covariance has eigenvalue {eigs[0]!r}, negative beyond tolerance"
                    )
            mean = mean.copy()
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def state_dim(self) -> int:
        return self.mean.shape[0]

    @property
    def std(self) -> np.ndarray:
        """Marginal standard deviations, sqrt of the covariance diagonal."""
        return np.sqrt(np.clip(np.diagonal(self.cov), 0.0, None))


def make_noise_magnitude_model(
    prior_mean: float = 5.0,
    prior_var: float = 1.0,
    noise_scale: float = 0.1,
) -> tuple[StateSpaceModel, GaussianBelief]:
    """Scalar model of a slowly drifting sensor noise magnitude.

    The state M is the magnitude itself and performs a random walk,
    while the measurement is pure noise scaled by it:

        M_t = M_{t-1} + noise_scale * v_t
        y_t = M_t * w_t

    so y carries information about M only through its spread, never its
    sign. A filter that correlates the state with y alone sees nothing;
    correlating with y^2 does.
    """

    def process(m, v):
        return m + noise_scale * v

    def observe(m, w):
        return m * w

    def likelihood(y, m):
        y = np.asarray(y, dtype=float)
        m = np.asarray(m, dtype=float)
        var = m * m
        # At m == 0 the observation is a point mass at y == 0; as a
        # density on the grid that contributes nothing.
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = gaussian_pdf(y, 0.0, var)
        return np.where(var > 0.0, dens, 0.0)

    model = StateSpaceModel(
        state_dim=1,
        meas_dim=1,
        process_noise_dim=1,
        obs_noise_dim=1,
        process=process,
        observe=observe,
        likelihood=likelihood,
        name="noise_magnitude",
    )
    prior = GaussianBelief(np.array([prior_mean]), np.array([[prior_var]]))
    return model, prior


def make_heaviside_model(
    prior_mean: float = 0.0,
    prior_var: float = 5.0,
    step_height: float = 50.0,
) -> tuple[StateSpaceModel, GaussianBelief]:
    """Scalar random walk observed through a hard step discontinuity.

        x_t = x_{t-1} + v_t
        y_t = x_t + w_t + step_height * H(x_t),   H(x) = 1 for x >= 0

    Far from the step the measurement is linear in the state; near it a
    single measurement can pin the state's sign.
    """

    def _step(x):
        # H(0) = 1 by convention.
        return np.where(np.asarray(x, dtype=float) >= 0.0, 1.0, 0.0)

    def process(x, v):
        return x + v

    def observe(x, w):
        return x + w + step_height * _step(x)

    def likelihood(y, x):
        x = np.asarray(x, dtype=float)
        return gaussian_pdf(np.asarray(y, dtype=float) - x - step_height * _step(x))

    model = StateSpaceModel(
        state_dim=1,
        meas_dim=1,
        process_noise_dim=1,
        obs_noise_dim=1,
        process=process,
        observe=observe,
        likelihood=likelihood,
        name="heaviside",
    )
    prior = GaussianBelief(np.array([prior_mean]), np.array([[prior_var]]))
    return model, prior


def simulate(
    model: StateSpaceModel,
    init_state,
    steps: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Roll the model forward and return sampled states and measurements.

    Parameters
    ----------
    init_state : array_like
        State x_0. It seeds the recursion and is not part of the output.
    steps : int
        Number of transitions; must be at least 1.
    seed : int
        Seeds a fresh ``numpy.random.default_rng`` (PCG64); identical
        seeds reproduce the trajectory bit for bit.

    Returns
    -------
    states : ndarray, shape (steps, state_dim)
    measurements : ndarray, shape (steps, meas_dim)

    Raises
    ------
    NumericsError
        If the model produces a non-finite state or measurement; the
        message and ``step`` attribute identify the failing step.
    """
    if steps < 1:
        raise ValueError(f"steps must be at least 1, got {steps}")
    x = np.asarray(init_state, dtype=float).reshape(model.state_dim)
    rng = np.random.default_rng(seed)
    process_noise = rng.standard_normal((steps, model.process_noise_dim))
    obs_noise = rng.standard_normal((steps, model.obs_noise_dim))
    states = np.empty((steps, model.state_dim))
    measurements = np.empty((steps, model.meas_dim))
    for t in range(steps):
        x = np.asarray(model.process(x, process_noise[t]), dtype=float).reshape(
            model.state_dim
        )
        if not np.all(np.isfinite(x)):
            raise NumericsError(f"non-finite state at step {t}", step=t)
        y = np.asarray(model.observe(x, obs_noise[t]), dtype=float).reshape(
            model.meas_dim
        )
        if not np.all(np.isfinite(y)):
            raise NumericsError(f"non-finite measurement at step {t}", step=t)
        states[t] = x
        measurements[t] = y
    return states, measurements
