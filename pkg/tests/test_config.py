"""Config grammar, defaults and validation messages."""

import pytest

from fracrd.config import ConfigError, RunConfig, load_config, parse_config, validate

MINIMAL = """
[run]
experiment = convergence
N = 200
d = 1
tau = 0.0625
T = 1

[operator]
s = 0.9

[model]
epsilon = 0.01
lambda = 1
"""

GRAY_SCOTT = """
# values from the pattern-formation study
[run]
experiment = gray_scott
N = 64
tau = 0.1
T = 10

[operator]
s = 0.75

[model]
Ku = 2e-5
Kv = 1e-5
F = 0.03
kappa = 0.055
"""


def test_minimal_convergence_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.experiment == "convergence"
    assert (cfg.N, cfg.d, cfg.tau, cfg.T) == (200, 1, 0.0625, 1.0)
    assert cfg.seed == RunConfig("x").seed
    assert cfg.display_window == (-10.0, 10.0)
    assert cfg.operator == {"s": 0.9}


def test_gray_scott_accepted_with_default_window():
    cfg = parse_config(GRAY_SCOTT)
    assert cfg.d == 2
    assert cfg.model["Kv"] == cfg.model["Ku"] / 2
    assert cfg.display_window == (-3.0, 3.0)


def test_s_out_of_range():
    with pytest.raises(ConfigError, match=r"s must lie in \(0,1.5\)") as info:
        parse_config(MINIMAL.replace("s = 0.9", "s = 1.7"))
    assert info.value.line == 10


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match="unknown key 'Nx'") as info:
        parse_config(MINIMAL.replace("N = 200", "Nx = 200"))
    assert info.value.line == 4


def test_type_mismatch():
    with pytest.raises(ConfigError, match="cannot parse") as info:
        parse_config(MINIMAL.replace("tau = 0.0625", "tau = fast"))
    assert info.value.line == 6


@pytest.mark.parametrize("edit,msg", [
    (("lambda = 1\n", ""), "missing required key 'lambda'"),
    (("T = 1", "T = 0.01"), "T must be at least tau"),
    (("tau = 0.0625", "tau = -1"), "tau must be positive"),
    (("experiment = convergence", "experiment = nope"), "unknown experiment"),
    (("[model]", "[modle]"), "unknown section"),
    (("d = 1", "d = 4"), "d must be 1, 2 or 3"),
    (("T = 1", "T = 1\nsnapshot_times = 0, 2"), "snapshot_times"),
    (("epsilon = 0.01", "epsilon = -0.01"), "epsilon must be positive"),
])
def test_rejections(edit, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(MINIMAL.replace(*edit))


def test_fixed_dimension_conflict():
    with pytest.raises(ConfigError, match="d = 2"):
        parse_config(GRAY_SCOTT.replace("N = 64", "N = 64\nd = 3"))


def test_duplicate_and_orphan_keys():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(MINIMAL.replace("N = 200", "N = 200\nN = 300"))
    with pytest.raises(ConfigError, match="outside"):
        parse_config("N = 3\n" + MINIMAL)


def test_riesz_operator():
    text = MINIMAL.replace("experiment = convergence", "experiment = fisher").replace(
        "[operator]\ns = 0.9", "[operator]\nkind = riesz\nalpha = 0.75, 0.85\nDvec = 0.1, 0.1").replace(
        "d = 1", "d = 2").replace("epsilon = 0.01\nlambda = 1", "r = 0.25\nK = 1")
    cfg = parse_config(text)
    assert cfg.operator["alpha"] == (0.75, 0.85)
    with pytest.raises(ConfigError, match="riesz operator needs d values"):
        parse_config(text.replace("d = 2", "d = 1"))


def test_validate_programmatic():
    cfg = parse_config(MINIMAL)
    cfg.tau = 0.0
    with pytest.raises(ConfigError):
        validate(cfg)


def test_shipped_configs_parse():
    import pathlib
    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    paths = sorted(root.rglob("*.ini"))
    assert len(paths) >= 10
    for p in paths:
        load_config(p)
