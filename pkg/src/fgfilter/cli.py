"""Command-line entry points.

Three subcommands:

    fgfilter simulate --model noise_magnitude --steps 1000 --seed 0
        Run the tracking experiment; writes report_<model>_<order>.csv
        per requested order plus summary.csv.

    fgfilter density --model noise_magnitude --y-range -20,20
        Tabulate the exact joint density on a grid alongside the GF and
        FGF conditional-mean curves; writes density_<model>.csv.

    fgfilter kl --model heaviside --orders 1,2,3
        Score feature orders by the grid KL objective; writes
        kl_<model>.csv.

Exit codes: 0 on success, 1 on usage or configuration errors, 2 on
numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from ._linalg import NumericsError
from .config import (
    MODEL_NAMES,
    engine_from_config,
    load_config,
    model_from_config,
    parse_bool,
    parse_orders,
)
from .experiments import (
    run_experiment_batch,
    write_report_csv,
    write_summary_csv,
)
from .filters import fgf_solve, make_affine_feature, make_monomial_feature
from .gridoracle import (
    Grid1D,
    default_grids,
    grid_joint_moments,
    joint_density_grid,
    kl_conditional,
)

__all__ = ["cli_main", "main"]

# Per-model defaults: the feature order that makes the measurement
# informative, and whether runs standardize feature inputs.
_DEFAULT_ORDER = {"noise_magnitude": 2, "heaviside": 3}
_DEFAULT_STANDARDIZE = {"noise_magnitude": False, "heaviside": True}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fgfilter",
        description="Gaussian and feature-Gaussian filtering experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", choices=MODEL_NAMES, help="built-in model name")
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--seed", type=int, help="base random seed")
        p.add_argument("--out", help="output directory (created if missing)")

    p_sim = sub.add_parser("simulate", help="run the tracking experiment")
    common(p_sim)
    p_sim.add_argument("--steps", type=int, help="trajectory length")
    p_sim.add_argument("--orders", help="comma-separated feature orders, e.g. 1,2")
    p_sim.add_argument("--seeds", type=int, help="number of consecutive seeds")

    p_den = sub.add_parser("density", help="tabulate the exact joint density")
    common(p_den)
    p_den.add_argument("--order", type=int, help="feature order for the FGF curve")
    p_den.add_argument("--grid-n", type=int, default=201, help="cells per axis")
    p_den.add_argument("--span", type=float, default=6.0, help="grid half-width in stds")
    p_den.add_argument("--x-range", help="explicit x grid as lo,hi")
    p_den.add_argument("--y-range", help="explicit y grid as lo,hi")

    p_kl = sub.add_parser("kl", help="score feature orders by grid KL")
    common(p_kl)
    p_kl.add_argument("--orders", help="comma-separated feature orders")
    p_kl.add_argument("--grid-n", type=int, default=2001, help="cells per axis")
    p_kl.add_argument("--span", type=float, default=6.0, help="grid half-width in stds")

    return parser


def _parse_range(raw: str, label: str) -> tuple[float, float]:
    parts = raw.split(",")
    if len(parts) != 2:
        raise ValueError(f"{label} must be 'lo,hi', got {raw!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as err:
        raise ValueError(f"{label} must be numeric 'lo,hi', got {raw!r}") from err
    return lo, hi


def _resolve(args) -> dict:
    cfg = load_config(args.config) if args.config else {}
    model, prior = model_from_config(cfg, getattr(args, "model", None))
    out_dir = Path(args.out if args.out is not None else cfg.get("run.out", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else int(cfg.get("run.seed", "0"))
    return {"cfg": cfg, "model": model, "prior": prior, "out": out_dir, "seed": seed}


def _cmd_simulate(args) -> int:
    common = _resolve(args)
    cfg, model, out_dir = common["cfg"], common["model"], common["out"]
    steps = args.steps if args.steps is not None else int(cfg.get("run.steps", "1000"))
    seeds = args.seeds if args.seeds is not None else int(cfg.get("run.seeds", "1"))
    raw_orders = args.orders or cfg.get("run.orders")
    orders = (
        parse_orders(raw_orders)
        if raw_orders
        else (_DEFAULT_ORDER[model.name],)
    )
    standardize = (
        parse_bool(cfg["feature.standardize"])
        if "feature.standardize" in cfg
        else _DEFAULT_STANDARDIZE[model.name]
    )
    model_kwargs = {}
    if "model.prior_mean" in cfg:
        model_kwargs["prior_mean"] = float(cfg["model.prior_mean"])
    if "model.prior_var" in cfg:
        model_kwargs["prior_var"] = float(cfg["model.prior_var"])
    if model.name == "noise_magnitude" and "model.noise_scale" in cfg:
        model_kwargs["noise_scale"] = float(cfg["model.noise_scale"])
    if model.name == "heaviside" and "model.step_height" in cfg:
        model_kwargs["step_height"] = float(cfg["model.step_height"])
    reports = run_experiment_batch(
        model.name,
        n_seeds=seeds,
        base_seed=common["seed"],
        steps=steps,
        engine=engine_from_config(cfg),
        orders=orders,
        standardize=standardize,
        **model_kwargs,
    )
    for order in orders:
        path = out_dir / f"report_{model.name}_{order}.csv"
        write_report_csv(reports, order, path)
        print(f"wrote {path}")
    summary_path = out_dir / "summary.csv"
    write_summary_csv(reports, summary_path)
    print(f"wrote {summary_path}")
    for order in orders:
        gf = [r.rmse[1] for r in reports]
        fgf = [r.rmse[order] for r in reports]
        wins = sum(1 for g, f in zip(gf, fgf) if f < g)
        print(
            f"order {order}: mean rmse_gf={sum(gf) / len(gf):.4f} "
            f"rmse_fgf={sum(fgf) / len(fgf):.4f} "
            f"(fgf better in {wins}/{len(reports)} seeds)"
        )
    return 0


def _grids_for(args, model, prior):
    x_range = getattr(args, "x_range", None)
    y_range = getattr(args, "y_range", None)
    auto_x, auto_y = default_grids(
        model, prior, n=args.grid_n, span=args.span, seed=args.seed or 0
    )
    x_grid = (
        Grid1D(*_parse_range(x_range, "--x-range"), args.grid_n) if x_range else auto_x
    )
    y_grid = (
        Grid1D(*_parse_range(y_range, "--y-range"), args.grid_n) if y_range else auto_y
    )
    return x_grid, y_grid


def _cmd_density(args) -> int:
    common = _resolve(args)
    cfg, model, prior, out_dir = (
        common["cfg"],
        common["model"],
        common["prior"],
        common["out"],
    )
    order = args.order
    if order is None:
        order = int(cfg.get("feature.order", _DEFAULT_ORDER[model.name]))
    x_grid, y_grid = _grids_for(args, model, prior)
    joint = joint_density_grid(model, prior, x_grid, y_grid)
    affine = make_affine_feature(model.meas_dim)
    feature = make_monomial_feature(model.meas_dim, order)
    params_gf = fgf_solve(grid_joint_moments(joint, affine))
    params_fgf = fgf_solve(grid_joint_moments(joint, feature))
    gf_means = affine.map(y_grid.values[:, None]) @ params_gf.gamma[0]
    fgf_means = feature.map(y_grid.values[:, None]) @ params_fgf.gamma[0]
    path = out_dir / f"density_{model.name}.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y", "x", "p", "q_gf", "q_fgf"])
        for j in range(y_grid.n):
            y_str = repr(float(y_grid.values[j]))
            gf_str = repr(float(gf_means[j]))
            fgf_str = repr(float(fgf_means[j]))
            for i in range(x_grid.n):
                writer.writerow(
                    [
                        y_str,
                        repr(float(x_grid.values[i])),
                        repr(float(joint.mass[i, j])),
                        gf_str,
                        fgf_str,
                    ]
                )
    print(f"wrote {path}")
    print(
        f"posterior stds: gf={float(params_gf.sigma[0, 0]) ** 0.5:.6f} "
        f"fgf(order {order})={float(params_fgf.sigma[0, 0]) ** 0.5:.6f}"
    )
    return 0


def _cmd_kl(args) -> int:
    common = _resolve(args)
    cfg, model, prior, out_dir = (
        common["cfg"],
        common["model"],
        common["prior"],
        common["out"],
    )
    raw_orders = args.orders or cfg.get("run.orders")
    orders = parse_orders(raw_orders) if raw_orders else (1, 2, 3)
    x_grid, y_grid = _grids_for(args, model, prior)
    joint = joint_density_grid(model, prior, x_grid, y_grid)
    rows = []
    for order in orders:
        feature = make_monomial_feature(model.meas_dim, order)
        params = fgf_solve(grid_joint_moments(joint, feature))
        value = kl_conditional(joint, params, feature)
        rows.append((order, value))
        print(f"order {order}: kl={value:.6f}")
    path = out_dir / f"kl_{model.name}.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "order", "kl"])
        for order, value in rows:
            writer.writerow([model.name, order, repr(value)])
    print(f"wrote {path}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "density":
            return _cmd_density(args)
        return _cmd_kl(args)
    except NumericsError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
