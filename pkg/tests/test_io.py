"""Eigenbasis cache, snapshots and CSV output."""

import numpy as np
import pytest

from fracrd.basis import build_grid, build_stiffness, eigendecompose
from fracrd.io import (cached_eigenbasis, load_eigenbasis, read_csv, read_snapshot,
                       save_eigenbasis, window_indices, write_csv, write_snapshot)


def test_cache_round_trip_bitwise(tmp_path):
    b = eigendecompose(build_stiffness(33))
    save_eigenbasis(b, tmp_path / "b.bin")
    back = load_eigenbasis(tmp_path / "b.bin")
    assert back.N == 33
    assert back.lam.tobytes() == b.lam.tobytes()
    assert back.E.tobytes() == b.E.tobytes()
    raw = (tmp_path / "b.bin").read_bytes()
    assert raw[:8] == b"FRACRDEB" and len(raw) == 16 + 8 + 8 * 34 * 35


def test_cache_rejects_corruption(tmp_path):
    b = eigendecompose(build_stiffness(5))
    p = tmp_path / "b.bin"
    save_eigenbasis(b, p)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError, match="size"):
        load_eigenbasis(p)
    p.write_bytes(b"NOTCACHE" + bytes(40))
    with pytest.raises(ValueError, match="not an eigenbasis"):
        load_eigenbasis(p)


def test_cached_eigenbasis_reuses_file(tmp_path):
    a = cached_eigenbasis(16, tmp_path)
    path = tmp_path / "eigenbasis_N16.bin"
    assert path.exists()
    mtime = path.stat().st_mtime_ns
    b = cached_eigenbasis(16, tmp_path)
    assert path.stat().st_mtime_ns == mtime
    assert np.array_equal(a.E, b.E)


def test_window_is_a_view_not_a_resample(tmp_path):
    x = build_grid(40).x_nodes
    u = np.random.default_rng(0).standard_normal((41, 41))
    window = [(-3.0, 3.0), (-1.0, 2.0)]
    write_snapshot(tmp_path / "u_t0.25", u, x, window, {"t": 0.25})
    data, meta = read_snapshot(tmp_path / "u_t0.25")
    i, j = window_indices(x, window[0]), window_indices(x, window[1])
    np.testing.assert_array_equal(data, u[np.ix_(i, j)])
    assert meta["shape"] == list(data.shape)
    assert meta["t"] == 0.25 and meta["format_version"] == 1
    assert (tmp_path / "u_t0.25.bin").exists()


def test_snapshot_names_with_dots_do_not_collide(tmp_path):
    x = build_grid(4).x_nodes
    write_snapshot(tmp_path / "u_t0", np.zeros(5), x, [(-9, 9)], {})
    write_snapshot(tmp_path / "u_t0.05", np.ones(5), x, [(-9, 9)], {})
    assert read_snapshot(tmp_path / "u_t0")[0].sum() == 0


def test_csv_round_trip(tmp_path):
    p = tmp_path / "a.csv"
    write_csv(p, ("t", "x0"), [(0.0, 1.5), (0.1, float("nan"))])
    assert p.read_bytes().startswith(b"t,x0\r\n")
    header, rows = read_csv(p)
    assert header == ["t", "x0"]
    assert rows[0] == ["0.0", "1.5"] and rows[1][1] == "nan"
