"""Tests for the key = value config format and its typed accessors."""

import pytest

from fgfilter.config import (
    engine_from_config,
    feature_from_config,
    load_config,
    model_from_config,
    parse_bool,
    parse_config_text,
    parse_orders,
)


def test_parse_config_text_basics():
    cfg = parse_config_text(
        """
        # a comment
        model.name = heaviside
        run.steps = 250   # trailing comment
        run.steps = 300
        """
    )
    assert cfg == {"model.name": "heaviside", "run.steps": "300"}


def test_parse_config_text_rejects_garbage():
    with pytest.raises(ValueError, match="line 1"):
        parse_config_text("model.name heaviside")
    with pytest.raises(ValueError, match="unknown config key"):
        parse_config_text("model.nmae = heaviside")
    with pytest.raises(ValueError, match="empty value"):
        parse_config_text("run.steps =")


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("model.name = noise_magnitude\nrun.seed = 7\n")
    assert load_config(path)["run.seed"] == "7"


def test_parse_bool():
    assert parse_bool("true") and parse_bool("1") and parse_bool("YES")
    assert not parse_bool("false") and not parse_bool("0") and not parse_bool("No")
    with pytest.raises(ValueError):
        parse_bool("maybe")


def test_parse_orders():
    assert parse_orders("1,2,3") == (1, 2, 3)
    assert parse_orders(" 2 ") == (2,)
    with pytest.raises(ValueError):
        parse_orders("1,a")
    with pytest.raises(ValueError):
        parse_orders("0,1")


def test_model_from_config():
    model, prior = model_from_config({"model.name": "noise_magnitude"})
    assert model.name == "noise_magnitude"
    assert prior.mean[0] == 5.0
    model, prior = model_from_config(
        {"model.name": "heaviside", "model.prior_var": "2.0"}
    )
    assert prior.cov[0, 0] == 2.0
    # explicit name argument wins over the config
    model, _ = model_from_config({"model.name": "heaviside"}, name="noise_magnitude")
    assert model.name == "noise_magnitude"
    with pytest.raises(ValueError):
        model_from_config({})
    with pytest.raises(ValueError):
        model_from_config({}, name="pendulum")
    with pytest.raises(ValueError, match="model.prior_var"):
        model_from_config({"model.name": "heaviside", "model.prior_var": "wide"})


def test_engine_from_config():
    assert engine_from_config({}) is None
    eng = engine_from_config({"engine.kind": "monte_carlo", "engine.samples": "500"})
    assert eng.kind == "monte_carlo" and eng.sample_count == 500
    eng = engine_from_config({"engine.kind": "sigma_point", "engine.kappa": "1.5"})
    assert eng.kind == "sigma_point" and eng.kappa == 1.5
    with pytest.raises(ValueError):
        engine_from_config({"engine.kind": "quasi_random"})


def test_feature_from_config():
    feat, standardize = feature_from_config({}, meas_dim=1)
    assert feat.name == "monomial2" and not standardize
    feat, standardize = feature_from_config(
        {"feature.order": "3", "feature.standardize": "true"}, meas_dim=1
    )
    assert feat.name == "monomial3" and standardize
    feat, _ = feature_from_config({"feature.kind": "affine"}, meas_dim=2)
    assert feat.out_dim == 3
    with pytest.raises(ValueError):
        feature_from_config({"feature.kind": "fourier"}, meas_dim=1)
