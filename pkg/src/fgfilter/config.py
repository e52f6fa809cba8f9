"""Plain-text run configuration.

Config files are `key = value` lines with `#` comments; keys are dotted
and grouped by prefix. Recognized keys:

    model.name          noise_magnitude | heaviside
    model.prior_mean    float
    model.prior_var     float
    model.noise_scale   float (noise_magnitude only)
    model.step_height   float (heaviside only)
    engine.kind         monte_carlo | sigma_point
    engine.samples      int
    engine.seed         int
    engine.kappa        float
    feature.kind        affine | monomial | <registered name>
    feature.order       int (monomial)
    feature.standardize true | false
    run.steps           int
    run.seed            int
    run.seeds           int (number of consecutive seeds)
    run.orders          comma-separated ints
    run.out             output directory

Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from .filters import (
    FeatureFunction,
    get_feature,
    make_affine_feature,
    make_monomial_feature,
)
from .models import (
    GaussianBelief,
    StateSpaceModel,
    make_heaviside_model,
    make_noise_magnitude_model,
)
from .quadrature import ExpectationEngine

__all__ = [
    "KNOWN_KEYS",
    "load_config",
    "parse_config_text",
    "parse_bool",
    "parse_orders",
    "model_from_config",
    "engine_from_config",
    "feature_from_config",
]

KNOWN_KEYS = frozenset(
    {
        "model.name",
        "model.prior_mean",
        "model.prior_var",
        "model.noise_scale",
        "model.step_height",
        "engine.kind",
        "engine.samples",
        "engine.seed",
        "engine.kappa",
        "feature.kind",
        "feature.order",
        "feature.standardize",
        "run.steps",
        "run.seed",
        "run.seeds",
        "run.orders",
        "run.out",
    }
)

MODEL_NAMES = ("noise_magnitude", "heaviside")


def parse_config_text(text: str) -> dict[str, str]:
    """Parse config lines into a flat string dict; last duplicate wins."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno} is not 'key = value': {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ValueError(f"unknown config key {key!r} on line {lineno}")
        if not value:
            raise ValueError(f"config key {key!r} has an empty value")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _get(cfg: dict[str, str], key: str, cast, default):
    if key not in cfg:
        return default
    raw = cfg[key]
    try:
        return cast(raw)
    except (TypeError, ValueError) as err:
        raise ValueError(f"config key {key!r} has invalid value {raw!r}") from err


def parse_bool(raw: str) -> bool:
    lowered = str(raw).lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def parse_orders(raw: str) -> tuple[int, ...]:
    """Parse a comma-separated order list such as '1,2,3'."""
    try:
        orders = tuple(int(part.strip()) for part in str(raw).split(","))
    except ValueError as err:
        raise ValueError(f"orders must be comma-separated integers, got {raw!r}") from err
    if not orders or any(o < 1 for o in orders):
        raise ValueError(f"orders must be positive integers, got {raw!r}")
    return orders


def model_from_config(
    cfg: dict[str, str], name: str | None = None
) -> tuple[StateSpaceModel, GaussianBelief]:
    """Build the named built-in model with config knobs applied."""
    name = name or cfg.get("model.name")
    if name is None:
        raise ValueError("no model selected: pass --model or set model.name")
    if name == "noise_magnitude":
        return make_noise_magnitude_model(
            prior_mean=_get(cfg, "model.prior_mean", float, 5.0),
            prior_var=_get(cfg, "model.prior_var", float, 1.0),
            noise_scale=_get(cfg, "model.noise_scale", float, 0.1),
        )
    if name == "heaviside":
        return make_heaviside_model(
            prior_mean=_get(cfg, "model.prior_mean", float, 0.0),
            prior_var=_get(cfg, "model.prior_var", float, 5.0),
            step_height=_get(cfg, "model.step_height", float, 50.0),
        )
    raise ValueError(f"unknown model {name!r}; known models: {', '.join(MODEL_NAMES)}")


def engine_from_config(cfg: dict[str, str]) -> ExpectationEngine | None:
    """Build the configured engine, or None when no engine keys are set."""
    if not any(key.startswith("engine.") for key in cfg):
        return None
    kind = cfg.get("engine.kind", "monte_carlo")
    return ExpectationEngine(
        kind=kind,
        sample_count=_get(cfg, "engine.samples", int, 10_000),
        kappa=_get(cfg, "engine.kappa", float, 0.0),
        seed=_get(cfg, "engine.seed", int, 0),
    )


def feature_from_config(
    cfg: dict[str, str], meas_dim: int, default_order: int = 2
) -> tuple[FeatureFunction, bool]:
    """Build the configured feature; returns (feature, standardize flag)."""
    kind = cfg.get("feature.kind", "monomial")
    standardize = _get(cfg, "feature.standardize", parse_bool, False)
    if kind == "affine":
        return make_affine_feature(meas_dim), standardize
    if kind == "monomial":
        order = _get(cfg, "feature.order", int, default_order)
        return make_monomial_feature(meas_dim, order), standardize
    return get_feature(kind), standardize
