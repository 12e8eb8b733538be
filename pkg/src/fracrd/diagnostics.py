"""Observables: error norms, fronts, tails, level-set radii and isosurfaces."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

__all__ = [
    "ErrorReport",
    "error_norms",
    "front_position",
    "tail_exponent",
    "default_tail_window",
    "level_set_radius",
    "level_set_area",
    "fit_loglinear",
    "TriangleMesh",
    "isosurface_extract",
]


@dataclass
class ErrorReport:
    e_inf: float
    e_l2: float
    params: dict = field(default_factory=dict)


def error_norms(u_num, u_exact, **params) -> ErrorReport:
    u_num = np.asarray(u_num, dtype=float)
    u_exact = np.asarray(u_exact, dtype=float)
    if u_num.shape != u_exact.shape:
        raise ValueError(f"shape mismatch: {u_num.shape} vs {u_exact.shape}")
    ninf = np.max(np.abs(u_exact))
    if ninf == 0:
        raise ZeroDivisionError("exact solution is identically zero")
    diff = u_num - u_exact
    return ErrorReport(
        e_inf=float(np.max(np.abs(diff)) / ninf),
        e_l2=float(np.linalg.norm(diff.ravel()) / np.linalg.norm(u_exact.ravel())),
        params=params,
    )


def _outer_crossing(r, u, level):
    """Outermost r where u >= level, refined linearly towards the next node; None if never."""
    above = np.nonzero(u >= level)[0]
    if above.size == 0:
        return None
    i = above[-1]
    if i == len(r) - 1:
        return float(r[i])
    frac = (u[i] - level) / (u[i] - u[i + 1])
    return float(r[i] + frac * (r[i + 1] - r[i]))


def front_position(u, x, threshold: float = 0.5):
    """Rightmost point where a 1-D profile reaches ``threshold`` (None when it never does)."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if u.ndim != 1 or u.shape != x.shape:
        raise ValueError("front_position expects a 1-D field and matching nodes")
    return _outer_crossing(x, u, threshold)


def default_tail_window(x):
    """Outer quarter of the positive nodes, minus the last 5% of them."""
    xp = np.sort(np.asarray(x)[np.asarray(x) > 0])
    n = xp.size
    return float(xp[int(0.75 * n)]), float(xp[int(0.95 * n) - 1])


def tail_exponent(u, x, window=None) -> float:
    """Least-squares slope of log u against log x over nodes with x in ``window``."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    lo, hi = default_tail_window(x) if window is None else window
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    m = (x >= lo) & (x <= hi)
    if np.count_nonzero(m) < 8:
        raise ValueError(f"only {np.count_nonzero(m)} nodes in the tail window, need 8")
    if np.any(u[m] <= 0):
        raise ValueError("field must be positive on the tail window")
    slope, _ = np.polyfit(np.log(x[m]), np.log(u[m]), 1)
    return float(slope)


def fit_loglinear(t, y):
    """Rate and Pearson correlation of log y against t."""
    t = np.asarray(t, dtype=float)
    ly = np.log(np.asarray(y, dtype=float))
    rate, _ = np.polyfit(t, ly, 1)
    return float(rate), float(np.corrcoef(t, ly)[0, 1])


def _rays(u, x):
    """Radial profiles through the origin along both axes and both diagonals."""
    n = x.size
    if n % 2:
        c = n // 2
        row, col = u[:, c], u[c, :]
        pos = np.arange(c, n)
        neg = np.arange(c, -1, -1)
    else:
        c = n // 2
        # nodes are symmetric, so the mean of the two middle lines is the
        # linear interpolant on the axis
        row = 0.5 * (u[:, c - 1] + u[:, c])
        col = 0.5 * (u[c - 1, :] + u[c, :])
        pos = np.arange(c, n)
        neg = np.arange(c - 1, -1, -1)
    # u[i, i] sits at (x_i, x_i) and u[i, n-1-i] at (x_i, -x_i)
    diag = np.diagonal(u)
    anti = np.diagonal(u[:, ::-1])
    r_diag = np.sqrt(2.0) * np.abs(x)
    out = []
    for line in (row, col):
        out.append((np.abs(x[pos]), line[pos]))
        out.append((np.abs(x[neg]), line[neg]))
    for line in (diag, anti):
        out.append((r_diag[pos], line[pos]))
        out.append((r_diag[neg], line[neg]))
    return out


def level_set_radius(u, x, level: float = 0.5) -> float:
    """Radius of the {u >= level} region: largest ray crossing, 0 if the level is never reached."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if u.ndim != 2 or u.shape != (x.size, x.size):
        raise ValueError("level_set_radius expects a square 2-D field on the tensor grid")
    best = 0.0
    for r, prof in _rays(u, x):
        c = _outer_crossing(r, prof, level)
        if c is not None:
            best = max(best, c)
    return best


def level_set_area(u, x, level: float = 0.5) -> float:
    """Area of {u >= level} by counting cells around each node (nodes split at midpoints)."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    mid = 0.5 * (x[1:] + x[:-1])
    edges = np.concatenate([[x[0] - (mid[0] - x[0])], mid, [x[-1] + (x[-1] - mid[-1])]])
    w = np.diff(edges)
    return float(np.sum(np.outer(w, w)[u >= level]))


@dataclass
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    @property
    def empty(self) -> bool:
        return len(self.faces) == 0

    def write_off(self, path) -> None:
        """Write an ASCII OFF file (vertex list then triangle index list)."""
        tmp = f"{path}.tmp"
        with open(tmp, "w") as fh:
            fh.write("OFF\n")
            fh.write(f"{len(self.vertices)} {len(self.faces)} 0\n")
            for v in self.vertices:
                fh.write(f"{v[0]:.10g} {v[1]:.10g} {v[2]:.10g}\n")
            for f in self.faces:
                fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")
        os.replace(tmp, path)


def read_off(path) -> TriangleMesh:
    with open(path) as fh:
        tokens = fh.read().split()
    if tokens[0] != "OFF":
        raise ValueError("not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = np.array(tokens[pos:pos + 4 * nf], dtype=int).reshape(nf, 4)[:, 1:]
    return TriangleMesh(verts, faces)


def isosurface_extract(u, x, level: float = 0.5, window=(-1.0, 1.0)) -> TriangleMesh:
    """Marching-cubes triangulation of {u = level} on the part of the tensor grid inside ``window``^3.

    Vertices come back in physical coordinates: the fractional node indices
    produced on the index lattice are mapped through the (non-uniform) nodes.
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if u.ndim != 3:
        raise ValueError("isosurface_extract expects a 3-D field")
    lo, hi = window
    keep = np.nonzero((x >= lo) & (x <= hi))[0]
    empty = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int))
    if keep.size < 2:
        return empty
    sub = u[np.ix_(keep, keep, keep)]
    if not (sub.min() < level < sub.max()):
        return empty
    verts, faces, _, _ = measure.marching_cubes(sub, level=level)
    xs = x[keep]
    idx = np.arange(xs.size)
    phys = np.column_stack([np.interp(verts[:, k], idx, xs) for k in range(3)])
    return TriangleMesh(phys, faces.astype(int))
