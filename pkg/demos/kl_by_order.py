"""Score feature orders by the grid divergence objective.

The grid oracle evaluates, up to a constant that does not depend on the
fit, the average divergence between the exact conditional p(x | y) and
the fitted Gaussian family. Lower is better. Richer features can only
help, and the score shows where the payoff actually lands: order 2 for
the noise magnitude model, order 3 for the heaviside model.

Run:  python demos/kl_by_order.py
"""

from fgfilter import (
    default_grids,
    fgf_solve,
    grid_joint_moments,
    joint_density_grid,
    kl_conditional,
    make_heaviside_model,
    make_monomial_feature,
    make_noise_magnitude_model,
)


def main():
    for maker in (make_noise_magnitude_model, make_heaviside_model):
        model, prior = maker()
        x_grid, y_grid = default_grids(model, prior, n=601, seed=0)
        joint = joint_density_grid(model, prior, x_grid, y_grid)
        print(f"{model.name}:")
        previous = None
        for order in (1, 2, 3):
            feature = make_monomial_feature(1, order)
            params = fgf_solve(grid_joint_moments(joint, feature))
            score = kl_conditional(joint, params, feature)
            note = ""
            if previous is not None and previous - score > 1e-3:
                note = "  <- payoff"
            print(f"  order {order}: {score:.6f}{note}")
            previous = score
        print()


if __name__ == "__main__":
    main()
