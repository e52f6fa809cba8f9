"""CLI tests driven in process through cli_main(argv)."""

import numpy as np
import pytest

from fgfilter.cli import cli_main


def _read_lines(path):
    return path.read_text(encoding="utf-8").splitlines()


def _write_config(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text, encoding="utf-8")
    return path


SMALL_RUN = """
model.name = noise_magnitude
engine.kind = monte_carlo
engine.samples = 500
run.steps = 12
run.seeds = 2
"""


def test_simulate_writes_reports_and_summary(tmp_path, capsys):
    cfg = _write_config(tmp_path, SMALL_RUN)
    out = tmp_path / "out"
    rc = cli_main(["simulate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0

    report = out / "report_noise_magnitude_2.csv"
    summary = out / "summary.csv"
    assert report.is_file() and summary.is_file()

    report_lines = _read_lines(report)
    assert report_lines[0].split(",")[:2] == ["seed", "t"]
    assert len(report_lines) == 1 + 2 * 12
    # summary carries the order-1 baseline row alongside each requested order
    assert len(_read_lines(summary)) == 1 + 2 * 2

    stdout = capsys.readouterr().out
    assert "order 2:" in stdout
    assert "fgf better in" in stdout


def test_simulate_accepts_multiple_orders(tmp_path):
    cfg = _write_config(tmp_path, SMALL_RUN)
    out = tmp_path / "out"
    rc = cli_main(
        ["simulate", "--config", str(cfg), "--out", str(out), "--orders", "1,2"]
    )
    assert rc == 0
    assert (out / "report_noise_magnitude_1.csv").is_file()
    assert (out / "report_noise_magnitude_2.csv").is_file()
    assert len(_read_lines(out / "summary.csv")) == 1 + 2 * 2


def test_simulate_reruns_are_byte_identical(tmp_path):
    cfg = _write_config(tmp_path, SMALL_RUN)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli_main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append(out)
    for fname in ("report_noise_magnitude_2.csv", "summary.csv"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_density_grid_and_columns(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli_main(
        [
            "density",
            "--model",
            "noise_magnitude",
            "--out",
            str(out),
            "--grid-n",
            "61",
            "--x-range",
            "1,9",
            # = form so argparse does not read the leading minus as a flag
            "--y-range=-20,20",
        ]
    )
    assert rc == 0
    lines = _read_lines(out / "density_noise_magnitude.csv")
    assert lines[0] == "y,x,p,q_gf,q_fgf"
    assert len(lines) == 1 + 61 * 61

    cols = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    y, x, p, q_gf, q_fgf = cols.T
    assert np.all(p >= 0.0)
    cell = ((9 - 1) / 61) * ((20 - -20) / 61)
    assert abs(p.sum() * cell - 1.0) < 1e-9
    # The magnitude is uncorrelated with the raw measurement, so the
    # affine posterior mean must sit flat over all y. Its level sits a
    # little under the prior mean because the y truncation clips more
    # mass from wide-magnitude slices of the grid.
    assert np.ptp(q_gf) < 1e-6
    assert np.max(np.abs(q_gf - 5.0)) < 5e-3
    # The squared-measurement feature bends the curve away from the prior.
    assert np.ptp(q_fgf) > 0.5

    stdout = capsys.readouterr().out
    assert "posterior stds:" in stdout


def test_kl_scores_decrease_with_order(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli_main(
        [
            "kl",
            "--model",
            "noise_magnitude",
            "--out",
            str(out),
            "--grid-n",
            "301",
        ]
    )
    assert rc == 0
    stdout = capsys.readouterr().out
    for order in (1, 2, 3):
        assert f"order {order}: kl=" in stdout

    lines = _read_lines(out / "kl_noise_magnitude.csv")
    assert lines[0] == "model,order,kl"
    assert len(lines) == 4
    kls = [float(line.split(",")[2]) for line in lines[1:]]
    assert kls[0] >= kls[1] - 1e-9
    assert kls[1] >= kls[2] - 1e-9


def test_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
    assert "simulate" in capsys.readouterr().out


def test_unknown_flag_exits_one(capsys):
    assert cli_main(["simulate", "--bogus"]) == 1
    capsys.readouterr()


def test_missing_model_exits_one(capsys):
    assert cli_main(["simulate", "--steps", "5"]) == 1
    assert "no model selected" in capsys.readouterr().err


def test_missing_config_file_exits_one(tmp_path, capsys):
    rc = cli_main(["simulate", "--config", str(tmp_path / "absent.cfg")])
    assert rc == 1
    capsys.readouterr()


def test_unknown_config_key_exits_one(tmp_path, capsys):
    cfg = _write_config(tmp_path, "model.name = heaviside\nrun.bogus = 1\n")
    assert cli_main(["simulate", "--config", str(cfg)]) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_numerical_failure_exits_two(tmp_path, capsys):
    cfg = _write_config(
        tmp_path, "model.name = noise_magnitude\nmodel.prior_var = -1\n"
    )
    rc = cli_main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "numerical failure" in capsys.readouterr().err
