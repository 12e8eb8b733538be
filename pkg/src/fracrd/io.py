"""On-disk formats: eigenbasis cache, field snapshots and CSV series."""

from __future__ import annotations

import csv
import json
import os
import struct
from pathlib import Path

import numpy as np

from .basis import Eigenbasis, build_stiffness, eigendecompose

CACHE_MAGIC = b"FRACRDEB"
CACHE_VERSION = 1
SNAPSHOT_VERSION = 1
# magic (8 bytes) + version (uint32) + reserved (uint32)
_HEADER = struct.Struct("<8sII")


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def save_eigenbasis(basis: Eigenbasis, path) -> None:
    """16-byte header, uint64 N, lam and row-major E as little-endian float64."""
    n = basis.N + 1
    body = (_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, 0)
            + struct.pack("<Q", basis.N)
            + np.asarray(basis.lam, dtype="<f8").tobytes()
            + np.ascontiguousarray(basis.E, dtype="<f8").tobytes())
    assert len(body) == _HEADER.size + 8 + 8 * n * (n + 1)
    atomic_write_bytes(path, body)


def load_eigenbasis(path) -> Eigenbasis:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size + 8:
        raise ValueError(f"{path}: truncated eigenbasis cache")
    magic, version, _ = _HEADER.unpack_from(raw, 0)
    if magic != CACHE_MAGIC:
        raise ValueError(f"{path}: not an eigenbasis cache file")
    if version != CACHE_VERSION:
        raise ValueError(f"{path}: unsupported cache version {version}")
    (N,) = struct.unpack_from("<Q", raw, _HEADER.size)
    n = N + 1
    off = _HEADER.size + 8
    if len(raw) != off + 8 * n * (n + 1):
        raise ValueError(f"{path}: size does not match N = {N}")
    lam = np.frombuffer(raw, dtype="<f8", count=n, offset=off).astype(float)
    E = np.frombuffer(raw, dtype="<f8", count=n * n, offset=off + 8 * n).reshape(n, n).astype(float)
    return Eigenbasis(N=int(N), E=E, lam=lam)


def cached_eigenbasis(N: int, cache_dir=None) -> Eigenbasis:
    """Eigenbasis for ``N``, read from ``cache_dir`` when present and written there otherwise."""
    if cache_dir is None:
        return eigendecompose(build_stiffness(N))
    cache_dir = Path(cache_dir)
    path = cache_dir / f"eigenbasis_N{N}.bin"
    if path.exists():
        basis = load_eigenbasis(path)
        if basis.N == N:
            return basis
    basis = eigendecompose(build_stiffness(N))
    cache_dir.mkdir(parents=True, exist_ok=True)
    save_eigenbasis(basis, path)
    return basis


def window_indices(x, window):
    lo, hi = window
    return np.nonzero((x >= lo) & (x <= hi))[0]


def _snapshot_paths(stem):
    # append rather than with_suffix: stems such as "u_t0.05" contain dots
    stem = Path(stem)
    return stem.parent / (stem.name + ".bin"), stem.parent / (stem.name + ".json")


def write_snapshot(stem, values, x, window, meta: dict) -> tuple[Path, Path]:
    """Write ``stem.bin`` (row-major float64 restricted to ``window`` per axis) and ``stem.json``.

    ``window`` is a sequence of (lo, hi) pairs, one per axis.
    """
    values = np.asarray(values, dtype=float)
    idx = [window_indices(x, w) for w in window]
    sub = values[np.ix_(*idx)]
    stem = Path(stem)
    header = dict(meta)
    header.update(
        format_version=SNAPSHOT_VERSION,
        dtype="float64-le",
        order="row-major",
        shape=list(sub.shape),
        window=[list(map(float, w)) for w in window],
        axes=[x[i].tolist() for i in idx],
    )
    bin_path, json_path = _snapshot_paths(stem)
    atomic_write_bytes(bin_path, np.ascontiguousarray(sub, dtype="<f8").tobytes())
    atomic_write_text(json_path, json.dumps(header, indent=1))
    return bin_path, json_path


def read_snapshot(stem) -> tuple[np.ndarray, dict]:
    stem = Path(stem)
    bin_path, json_path = _snapshot_paths(stem)
    header = json.loads(json_path.read_text())
    data = np.fromfile(bin_path, dtype="<f8")
    shape = tuple(header["shape"])
    if data.size != int(np.prod(shape)):
        raise ValueError(f"{stem}: payload length {data.size} does not match shape {shape}")
    return data.reshape(shape), header


def write_csv(path, header, rows) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    os.replace(tmp, path)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
