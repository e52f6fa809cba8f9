"""Numerical expectation engines.

Everything the filters need reduces to expectations of the form

    E[ f(x, u) ],   x ~ N(mean, cov),  u ~ N(0, I_noise_dim)

with x and u independent. An :class:`ExpectationEngine` realizes such
an expectation as a weighted point set over the augmented (x, u) space;
two families are provided, plain Monte Carlo and augmented-state sigma
points. Engines are pure values: the same engine applied to the same
belief always produces the same point set, so every estimate is
reproducible from the engine configuration alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._linalg import NumericsError, sqrt_psd
from .models import GaussianBelief

__all__ = [
    "ExpectationEngine",
    "monte_carlo",
    "sigma_point",
    "sample_points",
    "expect",
    "expected_likelihood_weight",
]

ENGINE_KINDS = ("monte_carlo", "sigma_point")

# Draw tables at or below this many entries are cached and shared
# (read-only); larger ones are regenerated per call to bound memory.
_TABLE_CACHE_LIMIT = 200_000


@dataclass(frozen=True)
class ExpectationEngine:
    """Configuration of a numerical expectation scheme.

    Parameters
    ----------
    kind : str
        ``"monte_carlo"`` or ``"sigma_point"``.
    sample_count : int
        Number of Monte Carlo samples; ignored by sigma points.
    kappa : float
        Sigma-point spread. The point set covers the augmented
        dimension d = state_dim + noise_dim with 2d + 1 points scaled
        by sqrt(d + kappa); kappa must exceed -d. Ignored by Monte
        Carlo.
    seed : int
        Seed of the Monte Carlo draw stream; ignored by sigma points.
    """

    kind: str
    sample_count: int = 10_000
    kappa: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ENGINE_KINDS:
            raise ValueError(
                f"engine kind must be one of {ENGINE_KINDS}, got {self.kind!r}"
            )
        if self.kind == "monte_carlo" and self.sample_count < 2:
            raise ValueError(
                f"sample_count must be at least 2, got {self.sample_count}"
            )
        if not np.isfinite(self.kappa):
            raise ValueError("kappa must be finite")


def monte_carlo(sample_count: int = 10_000, seed: int = 0) -> ExpectationEngine:
    """Monte Carlo engine; estimator error decays like 1/sqrt(sample_count)."""
    return ExpectationEngine("monte_carlo", sample_count=sample_count, seed=seed)


def sigma_point(kappa: float = 0.0) -> ExpectationEngine:
    """Deterministic sigma-point engine, exact for polynomials of total degree <= 2."""
    return ExpectationEngine("sigma_point", kappa=kappa)


@lru_cache(maxsize=8)
def _cached_table(seed: int, n: int, dim: int) -> np.ndarray:
    table = np.random.default_rng(seed).standard_normal((n, dim))
    table.setflags(write=False)
    return table


def _standard_normal_table(seed: int, n: int, dim: int) -> np.ndarray:
    if n * dim <= _TABLE_CACHE_LIMIT:
        return _cached_table(seed, n, dim)
    return np.random.default_rng(seed).standard_normal((n, dim))


@lru_cache(maxsize=8)
def _uniform_weights(n: int) -> np.ndarray:
    weights = np.full(n, 1.0 / n)
    weights.setflags(write=False)
    return weights


def _draw_points(
    engine: ExpectationEngine,
    belief: GaussianBelief,
    noise_dim: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    # Shared by sample_points and the moment routines; the extra flag
    # tells callers the weights are uniform so they can use plain
    # instead of weighted accumulations.
    if not isinstance(noise_dim, (int, np.integer)) or noise_dim < 0:
        raise ValueError(f"noise_dim must be a nonnegative integer, got {noise_dim!r}")
    dx = belief.state_dim

    if engine.kind == "monte_carlo":
        n = engine.sample_count
        table = _standard_normal_table(engine.seed, n, dx + noise_dim)
        root = sqrt_psd(belief.cov)
        states = belief.mean + table[:, :dx] @ root.T
        noises = table[:, dx:]
        return states, noises, _uniform_weights(n), True

    d = dx + noise_dim
    if d + engine.kappa <= 0.0:
        raise ValueError(
            f"sigma-point spread kappa={engine.kappa} must exceed -{d} here"
        )
    scale = np.sqrt(d + engine.kappa)
    root = sqrt_psd(belief.cov)
    n = 2 * d + 1
    states = np.tile(belief.mean, (n, 1))
    noises = np.zeros((n, noise_dim))
    states[1 : 1 + dx] += scale * root.T
    states[1 + dx : 1 + 2 * dx] -= scale * root.T
    if noise_dim:
        block = noises[1 + 2 * dx : 1 + 2 * dx + noise_dim]
        np.fill_diagonal(block, scale)
        np.fill_diagonal(noises[1 + 2 * dx + noise_dim :], -scale)
    weights = np.full(n, 0.5 / (d + engine.kappa))
    weights[0] = engine.kappa / (d + engine.kappa)
    return states, noises, weights, False


def sample_points(
    engine: ExpectationEngine,
    belief: GaussianBelief,
    noise_dim: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Realize the engine's weighted point set for (belief x noise).

    Returns
    -------
    states : ndarray, shape (n_points, state_dim)
    noises : ndarray, shape (n_points, noise_dim)
    weights : ndarray, shape (n_points,)
        Weights summing to 1. Monte Carlo weights are uniform (and
        shared read-only between calls). Sigma points come ordered
        center first, then the +/- state columns, then the +/- noise
        axes; with kappa = 0 the center weight is 0.
    """
    states, noises, weights, _ = _draw_points(engine, belief, noise_dim)
    return states, noises, weights


def expect(engine, belief, noise_dim, f) -> np.ndarray:
    """Approximate E[f(x, u)] for x ~ belief and u ~ N(0, I_noise_dim).

    ``f`` is evaluated once on the whole point set: it receives arrays
    of shape (n_points, state_dim) and (n_points, noise_dim) and must
    return an array of shape (n_points,) or (n_points, k), broadcasting
    over the leading sample axis.

    Returns the weighted average as a 1-D array of length k.

    Raises
    ------
    NumericsError
        If ``f`` produces a non-finite value; the message pins down the
        offending sample.
    """
    states, noises, weights = sample_points(engine, belief, noise_dim)
    values = np.asarray(f(states, noises), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2 or values.shape[0] != states.shape[0]:
        raise ValueError(
            f"integrand returned shape {values.shape}, expected "
            f"({states.shape[0]}, k)"
        )
    if not np.all(np.isfinite(values)):
        bad = int(np.argwhere(~np.isfinite(values))[0, 0])
        raise NumericsError(
            f"integrand returned a non-finite value at sample {bad}: "
            f"state={states[bad]}, noise={noises[bad]}"
        )
    return weights @ values


def expected_likelihood_weight(dim: int, engine: ExpectationEngine) -> float:
    """Estimate the mean importance weight E[p(y|x)] in dimension ``dim``.

    The prior is N(0, I), the likelihood N(y | x, I), and (x, y) are
    drawn jointly from the model, so the integrand reduces to the
    density of the observation noise at its own draw. The exact value
    is (2 sqrt(pi))**(-dim), which shrinks geometrically with dim; the
    estimator stays unbiased but its relative error grows, which is the
    usual particle-weight degeneracy in miniature.
    """
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim!r}")
    belief = GaussianBelief(np.zeros(dim), np.eye(dim))
    norm = (2.0 * np.pi) ** (-dim / 2.0)

    def weight(states, noises):
        return norm * np.exp(-0.5 * np.einsum("ij,ij->i", noises, noises))

    return float(expect(engine, belief, dim, weight)[0])
