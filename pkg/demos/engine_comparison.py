"""Why the experiments default to Monte Carlo expectations.

Sigma points place 2d+1 deterministic points so that no point displaces
the state and the observation noise at the same time. For the noise
magnitude model that symmetry makes every state/feature cross moment
vanish exactly, at any monomial order, so the filter never updates.
Monte Carlo draws break the symmetry and see the coupling.

Run:  python demos/engine_comparison.py
"""

import numpy as np

from fgfilter import (
    joint_moments,
    make_monomial_feature,
    make_noise_magnitude_model,
    monte_carlo,
    run_noise_experiment,
    sigma_point,
)


def main():
    model, prior = make_noise_magnitude_model()
    quad = make_monomial_feature(1, 2)

    print("cross moments cov(M, [1, y, y^2]) at the prior:")
    for label, engine in (
        ("sigma points", sigma_point()),
        ("monte carlo 10^5", monte_carlo(100_000, seed=0)),
    ):
        mom = joint_moments(prior, model, quad, engine)
        entries = "  ".join(f"{v:9.5f}" for v in mom.s_xf[0])
        print(f"  {label:17s} {entries}")
    print()
    print("cov(M, y^2) is the signal. Sigma points return exactly zero,")
    print("so the quadratic filter they drive is as blind as the plain one:")
    print()

    for label, engine in (
        ("sigma points", sigma_point()),
        ("monte carlo", None),
    ):
        # seed 7 drifts well away from the prior, so staying pinned is costly
        rep = run_noise_experiment(steps=300, seed=7, engine=engine, orders=(2,))
        drift = float(np.max(np.abs(rep.means[2] - 5.0)))
        print(
            f"  {label:13s} quadratic rmse {rep.rmse[2]:.4f}"
            f"   max |mean - prior| {drift:.4f}"
        )


if __name__ == "__main__":
    main()
