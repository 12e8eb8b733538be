"""Command-line surface."""

import json

import pytest

from fracrd.cli import EXIT_BLOWUP, EXIT_CONFIG, main

FISHER = """
[run]
experiment = fisher
N = 32
tau = {tau}
T = 2
output_dir = {out}

[operator]
s = 0.8
D = 0.1

[model]
r = {r}
K = 1
"""


def write(tmp_path, tau=0.1, r=0.25):
    p = tmp_path / "run.ini"
    p.write_text(FISHER.format(tau=tau, r=r, out=tmp_path / "default"))
    return p


def test_basis_info(capsys):
    assert main(["basis-info", "--n", "64"]) == 0
    out = capsys.readouterr().out
    assert "lambda_min = 0.0002316729908" in out
    assert "lambda_max = 3261.91526239" in out
    assert "condition" in out


def test_run_with_overrides(tmp_path, capsys):
    cfg = write(tmp_path)
    out = tmp_path / "elsewhere"
    assert main(["fisher", "--config", str(cfg), "--output", str(out), "--seed", "3",
                 "--threads", "1"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["parameters"]["seed"] == 3
    assert not (tmp_path / "default").exists()
    assert "front_rate" in capsys.readouterr().out


def test_hyphenated_experiment_name(tmp_path):
    p = tmp_path / "st.ini"
    p.write_text(f"[run]\nexperiment = stability_region\noutput_dir = {tmp_path}\n"
                 "[stability]\ny_values = 0\nn_angles = 16\n")
    assert main(["stability-region", "--config", str(p)]) == 0


def test_experiment_mismatch(tmp_path, capsys):
    cfg = write(tmp_path)
    assert main(["gray_scott", "--config", str(cfg)]) == EXIT_CONFIG
    assert "not 'gray_scott'" in capsys.readouterr().err


def test_bad_config_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text(FISHER.format(tau=0.1, r=0.25, out=tmp_path).replace("s = 0.8", "s = 1.7"))
    assert main(["fisher", "--config", str(p)]) == EXIT_CONFIG
    assert "line 10: s must lie in (0,1.5)" in capsys.readouterr().err


def test_blow_up_exit(tmp_path, capsys):
    # a huge growth rate with a coarse step overshoots and diverges
    cfg = write(tmp_path, tau=1.0, r=1e4)
    with pytest.warns(RuntimeWarning):
        code = main(["fisher", "--config", str(cfg)])
    assert code == EXIT_BLOWUP
    assert "t = " in capsys.readouterr().err


def test_unknown_experiment_rejected():
    with pytest.raises(SystemExit):
        main(["warp-drive", "--config", "x.ini"])
