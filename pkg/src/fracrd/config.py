"""Run configuration: an INI-style ``key = value`` document with ``[section]`` headers.

Grammar
-------
Blank lines and lines starting with ``#`` or ``;`` are ignored.  Every other
line is either ``[section]`` or ``key = value`` inside a section.  Keys are
case sensitive.  Lists are comma separated.  Sections and keys:

``[run]``
    experiment, N, d, tau, T, seed, output_dir, cache_dir,
    snapshot_times (list), display_window (lo, hi), levels, mollify,
    mollify_width
``[operator]``
    kind (fractional_laplacian | riesz), s, D, alpha (list), Dvec (list)
``[model]``
    epsilon, lambda, r, K, Ku, Kv, F, kappa, mu, beta, gamma, delta
``[stability]``
    y_values (list), n_angles, rho_max
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

EXPERIMENTS = (
    "convergence",
    "fisher",
    "allen_cahn_random",
    "allen_cahn_curvature",
    "gray_scott",
    "fhn",
    "allen_cahn_3d",
    "stability_region",
    "basis_info",
)


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# section -> key -> parser
_SCHEMA = {
    "run": {
        "experiment": str,
        "N": int,
        "d": int,
        "tau": float,
        "T": float,
        "seed": int,
        "output_dir": str,
        "cache_dir": str,
        "snapshot_times": _floats,
        "display_window": _floats,
        "levels": int,
        "mollify": _bool,
        "mollify_width": float,
    },
    "operator": {
        "kind": str,
        "s": float,
        "D": float,
        "alpha": _floats,
        "Dvec": _floats,
    },
    "model": {k: float for k in ("epsilon", "lambda", "r", "K", "Ku", "Kv", "F", "kappa",
                                 "mu", "beta", "gamma", "delta")},
    "stability": {
        "y_values": _floats,
        "n_angles": int,
        "rho_max": float,
    },
}

# experiment -> (required run keys, required operator keys, required model keys, fixed d)
_REQUIRED = {
    "convergence": (("N", "tau", "T"), ("s",), ("epsilon", "lambda"), None),
    "fisher": (("N", "tau", "T"), (), ("r", "K"), None),
    "allen_cahn_random": (("N", "tau", "T"), ("s",), ("epsilon",), None),
    "allen_cahn_curvature": (("N", "tau", "T"), ("s",), ("epsilon",), 2),
    "gray_scott": (("N", "tau", "T"), ("s",), ("Ku", "F", "kappa"), 2),
    "fhn": (("N", "tau", "T"), ("s",), ("Ku", "mu", "epsilon", "beta", "gamma", "delta"), 2),
    "allen_cahn_3d": (("N", "tau", "T"), ("s",), ("epsilon",), 3),
    "stability_region": ((), (), (), None),
    "basis_info": (("N",), (), (), None),
}

_DEFAULT_WINDOWS = {
    "allen_cahn_random": (-1.0, 1.0),
    "allen_cahn_3d": (-1.0, 1.0),
    "allen_cahn_curvature": (-1.0, 1.0),
    "gray_scott": (-3.0, 3.0),
    "fhn": (-5.0, 5.0),
}


@dataclass
class RunConfig:
    experiment: str
    N: int = 64
    d: int = 1
    tau: float = 0.1
    T: float = 1.0
    seed: int = 0
    output_dir: str = "output"
    cache_dir: str | None = None
    snapshot_times: tuple[float, ...] = ()
    display_window: tuple[float, float] = (-10.0, 10.0)
    levels: int = 5
    mollify: bool = False
    mollify_width: float = 0.02
    operator: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    stability: dict = field(default_factory=dict)


def _line_numbers(text):
    """Map (section, key) -> 1-based line number, and collect lines outside any section."""
    where = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            where[(section, None)] = i
            continue
        key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
        where[(section, key)] = i
    return where


def parse_config(text: str) -> RunConfig:
    where = _line_numbers(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                   delimiters=("=",), strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line (expected 'key = value')", lineno) from None

    values = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", where.get((section, None)))
        values[section] = {}
        for key, raw in cp.items(section):
            line = where.get((section, key))
            parser = _SCHEMA[section].get(key)
            if parser is None:
                raise ConfigError(f"unknown key {key!r} in [{section}]", line)
            try:
                values[section][key] = parser(raw)
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {raw!r}", line) from None
    run = values.get("run", {})
    if "experiment" not in run:
        raise ConfigError("missing required key 'experiment' in [run]")
    cfg = RunConfig(experiment=run["experiment"])
    for k, v in run.items():
        setattr(cfg, k, v)
    cfg.operator = values.get("operator", {})
    cfg.model = values.get("model", {})
    cfg.stability = values.get("stability", {})
    if "display_window" not in run:
        cfg.display_window = _DEFAULT_WINDOWS.get(cfg.experiment, cfg.display_window)
    validate(cfg, where)
    return cfg


def _check(cond, msg, line=None):
    if not cond:
        raise ConfigError(msg, line)


def validate(cfg: RunConfig, where=None) -> None:
    where = where or {}
    ln = lambda sec, key: where.get((sec, key))  # noqa: E731
    _check(cfg.experiment in EXPERIMENTS,
           f"unknown experiment {cfg.experiment!r}; expected one of {', '.join(EXPERIMENTS)}",
           ln("run", "experiment"))
    run_req, op_req, model_req, fixed_d = _REQUIRED[cfg.experiment]
    given_run = {k for (sec, k) in where if sec == "run"} if where else set(run_req)
    for k in run_req:
        _check(k in given_run, f"missing required key {k!r} in [run]")
    for k in op_req:
        _check(k in cfg.operator, f"missing required key {k!r} in [operator]")
    for k in model_req:
        _check(k in cfg.model, f"missing required key {k!r} in [model]")
    if fixed_d is not None:
        if "d" in given_run and where:
            _check(cfg.d == fixed_d, f"{cfg.experiment} runs in d = {fixed_d}", ln("run", "d"))
        cfg.d = fixed_d
    _check(cfg.d in (1, 2, 3), "d must be 1, 2 or 3", ln("run", "d"))
    _check(cfg.N >= 1, "N must be >= 1", ln("run", "N"))
    if cfg.experiment in ("stability_region", "basis_info"):
        return
    _check(cfg.tau > 0, "tau must be positive", ln("run", "tau"))
    _check(cfg.T >= cfg.tau, "T must be at least tau", ln("run", "T"))
    _check(all(0 <= t <= cfg.T for t in cfg.snapshot_times),
           "snapshot_times must lie in [0, T]", ln("run", "snapshot_times"))
    _check(len(cfg.display_window) == 2 and cfg.display_window[0] < cfg.display_window[1],
           "display_window must be 'lo, hi' with lo < hi", ln("run", "display_window"))
    _check(cfg.levels >= 2, "levels must be >= 2", ln("run", "levels"))
    kind = cfg.operator.get("kind", "fractional_laplacian")
    _check(kind in ("fractional_laplacian", "riesz"), f"unknown operator kind {kind!r}",
           ln("operator", "kind"))
    if kind == "riesz":
        alpha = cfg.operator.get("alpha", ())
        Dvec = cfg.operator.get("Dvec", ())
        _check(len(alpha) == cfg.d and len(Dvec) == cfg.d,
               "riesz operator needs d values of alpha and Dvec", ln("operator", "alpha"))
        _check(all(0 < a < 1.5 for a in alpha), "alpha must lie in (0,1.5)", ln("operator", "alpha"))
        _check(all(v > 0 for v in Dvec), "Dvec entries must be positive", ln("operator", "Dvec"))
    elif "s" in cfg.operator:
        s = cfg.operator["s"]
        _check(0 < s < 1.5, "s must lie in (0,1.5)", ln("operator", "s"))
    elif cfg.experiment == "fisher":
        raise ConfigError("missing required key 's' in [operator]")
    if "D" in cfg.operator:
        _check(cfg.operator["D"] > 0, "D must be positive", ln("operator", "D"))
    for k, v in cfg.model.items():
        _check(math.isfinite(v), f"{k} must be finite", ln("model", k))
    for k in ("epsilon", "K", "lambda", "Ku", "Kv"):
        if k in cfg.model:
            _check(cfg.model[k] > 0, f"{k} must be positive", ln("model", k))


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
