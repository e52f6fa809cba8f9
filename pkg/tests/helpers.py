"""Shared test utilities: linear-Gaussian models and a closed-form Kalman filter.

The Kalman recursions here are written straight from the textbook
equations and share no code with the package's moment-based update, so
agreement between the two is evidence, not tautology.
"""

import numpy as np

from fgfilter import JointMoments, StateSpaceModel
from fgfilter._linalg import gaussian_pdf


def random_spd(rng, n, scale=1.0):
    """Random symmetric positive definite matrix, eigenvalues in [0.1, 0.1 + scale]."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = 0.1 + scale * rng.uniform(size=n)
    return (q * eigs) @ q.T


def random_affine_moments(rng, dx, dy):
    """Joint moments of a random Gaussian (x, y) under the affine feature (1, y)."""
    joint = random_spd(rng, dx + dy)
    mu = rng.standard_normal(dx + dy)
    s_ff = np.zeros((dy + 1, dy + 1))
    s_ff[1:, 1:] = joint[dx:, dx:]
    s_xf = np.zeros((dx, dy + 1))
    s_xf[:, 1:] = joint[:dx, dx:]
    return JointMoments(
        mu_x=mu[:dx],
        mu_f=np.concatenate([[1.0], mu[dx:]]),
        s_xx=joint[:dx, :dx],
        s_ff=s_ff,
        s_xf=s_xf,
    )


def random_linear_system(rng, dx, dy):
    """Random stable linear-Gaussian system as a dict of matrices."""
    a = rng.standard_normal((dx, dx))
    a *= 0.7 / max(abs(np.linalg.eigvals(a)))
    c = rng.standard_normal((dy, dx))
    return {
        "a": a,
        "b": rng.standard_normal(dx),
        "q": random_spd(rng, dx, scale=0.3),
        "c": c,
        "d": rng.standard_normal(dy),
        "r": random_spd(rng, dy, scale=0.5),
    }


def linear_ssm(sys, name="linear"):
    """Wrap a matrix dict from random_linear_system as a StateSpaceModel.

    Noise enters through Cholesky factors, so process noise dimension
    equals the state dimension and observation noise dimension the
    measurement dimension. Scalar systems also get the closed-form
    likelihood the grid oracle needs.
    """
    a, b, c, d = sys["a"], sys["b"], sys["c"], sys["d"]
    chol_q = np.linalg.cholesky(sys["q"])
    chol_r = np.linalg.cholesky(sys["r"])
    dx, dy = a.shape[0], c.shape[0]

    def process(x, v):
        return x @ a.T + b + v @ chol_q.T

    def observe(x, w):
        return x @ c.T + d + w @ chol_r.T

    likelihood = None
    if dx == 1 and dy == 1:
        c00, d0 = float(c[0, 0]), float(d[0])
        r00 = float(sys["r"][0, 0])

        def likelihood(y, x):
            return gaussian_pdf(np.asarray(y, float) - c00 * np.asarray(x, float) - d0,
                                0.0, r00)

    return StateSpaceModel(
        state_dim=dx,
        meas_dim=dy,
        process_noise_dim=dx,
        obs_noise_dim=dy,
        process=process,
        observe=observe,
        likelihood=likelihood,
        name=name,
    )


def kalman_filter(sys, mean, cov, measurements):
    """Exact linear Kalman filter; returns [(mean, cov)] per measurement."""
    a, b, q = sys["a"], sys["b"], sys["q"]
    c, d, r = sys["c"], sys["d"], sys["r"]
    mean = np.asarray(mean, float).copy()
    cov = np.asarray(cov, float).copy()
    out = []
    for y in np.atleast_2d(np.asarray(measurements, float)):
        mean = a @ mean + b
        cov = a @ cov @ a.T + q
        s = c @ cov @ c.T + r
        gain = np.linalg.solve(s, c @ cov).T
        mean = mean + gain @ (y - c @ mean - d)
        cov = cov - gain @ s @ gain.T
        cov = 0.5 * (cov + cov.T)
        out.append((mean.copy(), cov.copy()))
    return out
