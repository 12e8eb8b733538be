"""Experiment drivers: initial data, stepping with snapshot capture, diagnostics and artifacts."""

from __future__ import annotations

import json
import logging
import math
import time
from pathlib import Path

import numpy as np

from .basis import BasisSpec, evaluate_expansion
from .config import RunConfig
from .diagnostics import (error_norms, fit_loglinear, front_position, isosurface_extract,
                          level_set_radius, tail_exponent)
from .integrator import etdrk4_step, stability_boundary
from .io import atomic_write_text, cached_eigenbasis, write_csv, write_snapshot
from .operators import OperatorKind, OperatorSpec
from .reactions import (ManufacturedSolution, ModelKind, ModelSpec, allen_cahn_model,
                        sourced_allen_cahn_model)
from .solver import Discretization, make_stepper

log = logging.getLogger(__name__)

SPECIES_NAMES = ("u", "v")
# number of time-series records aimed for per run
N_RECORDS = 200


def _smooth_step(z, width):
    return 0.5 * (1.0 + np.tanh(z / width))


def _box(coords, bounds, mollify, width):
    out = np.ones_like(coords[0])
    for c, (lo, hi) in zip(coords, bounds):
        if mollify:
            out = out * (_smooth_step(c - lo, width) - _smooth_step(c - hi, width))
        else:
            out = out * ((c > lo) & (c < hi))
    return out


def _disc(coords, radius, mollify, width):
    r = np.sqrt(sum(c * c for c in coords))
    if mollify:
        return _smooth_step(radius - r, width)
    return (r * r < radius * radius).astype(float)


def operator_spec(cfg: RunConfig, D_default=1.0) -> OperatorSpec:
    op = cfg.operator
    if op.get("kind", "fractional_laplacian") == "riesz":
        return OperatorSpec(OperatorKind.RIESZ, alpha=tuple(op["alpha"]), Dvec=tuple(op["Dvec"]))
    return OperatorSpec(OperatorKind.FRACTIONAL_LAPLACIAN, s=op["s"], D=op.get("D", D_default))


def build_model(cfg: RunConfig) -> ModelSpec:
    m = cfg.model
    e = cfg.experiment
    if e == "convergence":
        ms = ManufacturedSolution(m["lambda"], cfg.operator["s"], m["epsilon"], cfg.d)
        return sourced_allen_cahn_model(ms)
    if e == "fisher":
        return ModelSpec(ModelKind.FISHER, {"r": m["r"], "K": m["K"]}, (operator_spec(cfg, 1.0),))
    if e in ("allen_cahn_random", "allen_cahn_3d"):
        # u_t = -eps^2 (-Delta)^s u - f(u)
        eps = m["epsilon"]
        return allen_cahn_model(eps, OperatorSpec(s=cfg.operator["s"], D=eps ** 2))
    if e == "allen_cahn_curvature":
        # u_t = -(-Delta)^s u - f(u) / eps^2
        eps = m["epsilon"]
        return allen_cahn_model(eps, OperatorSpec(s=cfg.operator["s"], D=1.0), reaction_scale=eps ** -2)
    if e == "gray_scott":
        Ku = m["Ku"]
        Kv = m.get("Kv", Ku / 2)
        s = cfg.operator["s"]
        return ModelSpec(ModelKind.GRAY_SCOTT, {"F": m["F"], "kappa": m["kappa"]},
                         (OperatorSpec(s=s, D=Ku), OperatorSpec(s=s, D=Kv)))
    if e == "fhn":
        params = {k: m[k] for k in ("mu", "epsilon", "beta", "gamma", "delta")}
        return ModelSpec(ModelKind.FITZHUGH_NAGUMO, params,
                         (OperatorSpec(s=cfg.operator["s"], D=m["Ku"]), OperatorSpec(OperatorKind.NONE)))
    raise ValueError(f"experiment {e!r} has no reaction model")


def initial_data(cfg: RunConfig, coords) -> np.ndarray:
    """Initial grid values, species on the leading axis.

    ``coords`` is the list of d coordinate arrays of the tensor grid.
    """
    e = cfg.experiment
    mol, w = cfg.mollify, cfg.mollify_width
    r2 = sum(c * c for c in coords)
    if e == "convergence":
        lam = cfg.model["lambda"]
        return np.exp(-lam ** 2 * r2)[None]
    if e == "fisher":
        return np.minimum(0.8, 10.0 * np.exp(-r2))[None]
    if e in ("allen_cahn_random", "allen_cahn_3d"):
        rng = np.random.default_rng(cfg.seed)
        return (0.5 + 0.1 * (rng.random(coords[0].shape) - 0.5))[None]
    if e == "allen_cahn_curvature":
        eps = cfg.model["epsilon"]
        return (0.5 * (1.0 - np.tanh((np.sqrt(r2) - 0.6) / (math.sqrt(2.0) * eps))))[None]
    if e == "gray_scott":
        inside = _disc(coords, 1.0, mol, w)
        return np.stack([0.5 * inside, 0.25 * inside])
    if e == "fhn":
        u0 = _box(coords, [(-1, 0), (-1, 0)], mol, w)
        v0 = 0.1 * _box(coords, [(-1, 1), (0, 1)], mol, w)
        return np.stack([u0, v0]).astype(float)
    raise ValueError(f"experiment {e!r} has no initial data")


def _discretization(cfg: RunConfig) -> Discretization:
    basis = cached_eigenbasis(cfg.N, cfg.cache_dir)
    return Discretization(BasisSpec(cfg.N, cfg.d), basis)


def _n_steps(T, tau):
    n = int(round(T / tau))
    if not math.isclose(n * tau, T, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"T = {T} is not a whole number of steps of tau = {tau}")
    return n


def _snapshot_steps(cfg, n_steps):
    return {int(round(t / cfg.tau)): t for t in cfg.snapshot_times if round(t / cfg.tau) <= n_steps}


def _write_snapshots(cfg, disc, values, t, out: Path):
    window = [tuple(cfg.display_window)] * cfg.d
    meta = dict(experiment=cfg.experiment, N=cfg.N, d=cfg.d, t=float(t),
                s=cfg.operator.get("s"), tau=cfg.tau)
    for name, v in zip(SPECIES_NAMES, values):
        write_snapshot(out / f"{name}_t{t:.6g}", v, disc.grid.x_nodes, window, dict(meta, species=name))
    if cfg.d == 3:
        mesh = isosurface_extract(values[0], disc.grid.x_nodes, 0.5, tuple(cfg.display_window))
        mesh.write_off(out / f"iso_u_t{t:.6g}.off")


def _time_loop(cfg, disc, model, out, record):
    """Step from the configured initial data to T, writing snapshots and calling ``record``."""
    values0 = initial_data(cfg, disc.coords())
    state = make_stepper(model, disc, cfg.tau, values0)
    n = _n_steps(cfg.T, cfg.tau)
    snaps = _snapshot_steps(cfg, n)
    stride = max(1, n // N_RECORDS)
    rows = []
    if 0 in snaps:
        _write_snapshots(cfg, disc, values0, 0.0, out)
    rows.append(record(0.0, values0))
    for k in range(1, n + 1):
        etdrk4_step(state)
        need_vals = k in snaps or k % stride == 0 or k == n
        if not need_vals:
            continue
        values = disc.inverse_species(state.u)
        if k in snaps:
            _write_snapshots(cfg, disc, values, state.t, out)
        rows.append(record(state.t, values))
    return state, rows


def _run_convergence(cfg, out):
    disc = _discretization(cfg)
    model = build_model(cfg)
    ms = model.manufactured
    coords = disc.coords()
    exact = ms.exact(coords, cfg.T)
    rows = []
    for j in range(cfg.levels):
        tau = cfg.tau * 2.0 ** -j
        state = make_stepper(model, disc, tau, ms.exact(coords, 0.0)[None])
        for _ in range(_n_steps(cfg.T, tau)):
            etdrk4_step(state)
        rep = error_norms(disc.inverse(state.u[0]), exact)
        rows.append((tau, rep.e_inf, rep.e_l2))
        log.info("tau=%g e_inf=%.3e e_l2=%.3e", tau, rep.e_inf, rep.e_l2)
    write_csv(out / "convergence.csv", ("tau", "e_inf", "e_l2"), rows)
    taus, einf, el2 = (np.array(c) for c in zip(*rows))
    return {
        "order_inf": float(np.polyfit(np.log(taus), np.log(einf), 1)[0]),
        "order_l2": float(np.polyfit(np.log(taus), np.log(el2), 1)[0]),
        "errors": [list(r) for r in rows],
    }


def _run_fisher(cfg, out):
    disc = _discretization(cfg)
    model = build_model(cfg)
    x = disc.grid.x_nodes
    c = cfg.N // 2

    def record(t, values):
        u = values[0]
        line = u if cfg.d == 1 else (u[:, c] if cfg.N % 2 == 0 else 0.5 * (u[:, c] + u[:, c + 1]))
        x0 = front_position(line, x)
        return (t, float("nan") if x0 is None else x0)

    state, rows = _time_loop(cfg, disc, model, out, record)
    write_csv(out / "front.csv", ("t", "x0"), rows)
    summary = {}
    t, x0 = (np.array(v) for v in zip(*rows))
    m = (t >= cfg.T / 3) & np.isfinite(x0)
    if np.count_nonzero(m) >= 3:
        rate, corr = fit_loglinear(t[m], x0[m])
        summary.update(front_rate=rate, front_logcorr=corr, fit_from=float(cfg.T / 3))
    if cfg.d == 1 and np.isfinite(x0[-1]):
        lo, hi = 3.0 * x0[-1], 8.0 * x0[-1]
        xs = np.geomspace(lo, hi, 64)
        us = evaluate_expansion(state.u[0], disc.basis, xs)
        if np.all(us > 0):
            summary["tail_exponent"] = tail_exponent(us, xs, (lo, hi))
            summary["tail_window"] = [lo, hi]
            summary["tail_reference"] = -2 * cfg.operator.get("s", float("nan")) - 1
    return summary


def _field_stats(t, values):
    row = [t]
    for v in values:
        row += [float(v.min()), float(v.max()), float(v.mean())]
    return tuple(row)


def _run_pattern(cfg, out):
    disc = _discretization(cfg)
    model = build_model(cfg)
    names = SPECIES_NAMES[:model.species]

    def record(t, values):
        row = _field_stats(t, values)
        if model.kind is ModelKind.ALLEN_CAHN:
            row += (float(np.mean(values[0] >= 0.5)),)
        return row

    state, rows = _time_loop(cfg, disc, model, out, record)
    header = ["t"] + [f"{n}_{q}" for n in names for q in ("min", "max", "mean")]
    if model.kind is ModelKind.ALLEN_CAHN:
        header.append("phase_fraction")
    write_csv(out / "series.csv", header, rows)
    final = disc.inverse_species(state.u)
    summary = {f"{n}_range": [float(v.min()), float(v.max())] for n, v in zip(names, final)}
    if cfg.d == 3:
        mesh = isosurface_extract(final[0], disc.grid.x_nodes, 0.5, tuple(cfg.display_window))
        mesh.write_off(out / "iso_u_final.off")
        summary["final_mesh_triangles"] = int(len(mesh.faces))
    return summary


def _run_curvature(cfg, out):
    disc = _discretization(cfg)
    model = build_model(cfg)
    x = disc.grid.x_nodes

    def record(t, values):
        r = level_set_radius(values[0], x, 0.5)
        return (t, r, r * r)

    _, rows = _time_loop(cfg, disc, model, out, record)
    write_csv(out / "radius.csv", ("t", "radius", "radius2"), rows)
    return curvature_summary(rows)


def curvature_summary(rows):
    """Fitted slope of radius^2 against t and the extinction time."""
    t, r, r2 = (np.array(v) for v in zip(*rows))
    summary = {}
    gone = np.nonzero(r <= 0)[0]
    if gone.size:
        i = gone[0]
        summary["extinction_time"] = float(t[i])
    r0 = r2[0]
    m = (r2 <= 0.9 * r0) & (r2 >= 0.1 * r0)
    if np.count_nonzero(m) >= 3:
        summary["area_slope"] = float(np.polyfit(t[m], r2[m], 1)[0])
    return summary


def _run_stability(cfg, out):
    st = cfg.stability
    ys = st.get("y_values", (0.0, -5.0, -20.0))
    n_angles = st.get("n_angles", 256)
    rho_max = st.get("rho_max", 60.0)
    summary = {}
    for y in ys:
        b = stability_boundary(y, n_angles, rho_max)
        p = b.points
        rows = [(th, z.real, z.imag, int(ok)) for th, z, ok in zip(b.angles, p, b.bounded)]
        write_csv(out / f"stability_y{y:g}.csv", ("theta", "x_re", "x_im", "bounded"), rows)
        summary[f"y={y:g}"] = {"area": b.area(), "unbounded_rays": int(np.count_nonzero(~b.bounded)),
                               "negative_real_crossing": float(-b.radius[n_angles // 2])
                               if n_angles % 2 == 0 else None}
    return summary


def basis_info(N: int, cache_dir=None) -> dict:
    basis = cached_eigenbasis(N, cache_dir)
    E = np.asarray(basis.E)
    return {
        "N": N,
        "lambda_min": float(basis.lam[0]),
        "lambda_max": float(basis.lam[-1]),
        "condition": float(basis.lam[-1] / basis.lam[0]),
        "orthogonality_residual": float(np.max(np.abs(E.T @ E - np.eye(N + 1)))),
    }


_DRIVERS = {
    "convergence": _run_convergence,
    "fisher": _run_fisher,
    "allen_cahn_random": _run_pattern,
    "allen_cahn_3d": _run_pattern,
    "gray_scott": _run_pattern,
    "fhn": _run_pattern,
    "allen_cahn_curvature": _run_curvature,
    "stability_region": _run_stability,
}


def run_experiment(cfg: RunConfig) -> dict:
    """Run one configured experiment, write its artifacts and return the summary record."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if cfg.experiment == "basis_info":
        diag = basis_info(cfg.N, cfg.cache_dir)
    else:
        diag = _DRIVERS[cfg.experiment](cfg, out)
    summary = {
        "experiment": cfg.experiment,
        "parameters": {
            "N": cfg.N, "d": cfg.d, "tau": cfg.tau, "T": cfg.T, "seed": cfg.seed,
            "operator": cfg.operator, "model": cfg.model,
        },
        "wall_time_s": time.perf_counter() - t0,
        "diagnostics": diag,
    }
    atomic_write_text(out / "summary.json", json.dumps(summary, indent=1, default=_jsonable))
    return summary


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


__all__ = ["run_experiment", "initial_data", "build_model", "basis_info", "curvature_summary"]
