# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Tests for the result writers.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from qcbracket._common import check_planck, format_float, get_logging_level
from qcbracket.dynamics import MeanFieldState, MixedDensity, ObservableRecord
from qcbracket.output import (
    SNAPSHOT_DIR,
    observable_header,
    read_csv,
    write_csv,
    write_json,
    write_observables,
    write_snapshots,
)
from qcbracket.spectral import Grid1D


def record(t: float) -> ObservableRecord:
    return ObservableRecord(t, 1.0, 0.1 + t, (0.25, 0.75), 1 / 3, -t, 0.0, 0.0)


def test_floats_keep_seventeen_digits() -> None:
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(-2.0) == "-2"
    assert format_float(1e-20) == "9.9999999999999995e-21"
    assert float(format_float(math.pi)) == math.pi


def test_planck_constant_must_be_positive() -> None:
    assert check_planck(2) == 2.0
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError, match="Planck"):
            check_planck(bad)


def test_logging_levels() -> None:
    assert get_logging_level(0) == 20
    assert get_logging_level(2) == 10
    assert get_logging_level(2, quiet=True) == 30


def test_observables_csv(tmp_path) -> None:
    path = write_observables(tmp_path / "run.csv", [record(0.0), record(0.5)])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(observable_header(2))
    assert lines[1].split(",")[5] == "0.33333333333333331"
    columns = read_csv(path)
    np.testing.assert_array_equal(columns["mean_x"], [0.0, -0.5])
    assert columns["pop_1"][1] == 0.75


def test_identical_runs_give_identical_bytes(tmp_path) -> None:
    rows = [[0.1 * i, math.sqrt(i)] for i in range(5)]
    first = write_csv(tmp_path / "a.csv", ["t", "v"], rows)
    second = write_csv(tmp_path / "b.csv", ["t", "v"], rows)
    assert first.read_bytes() == second.read_bytes()
    assert b"\r" not in first.read_bytes()


def test_header_only_csv(tmp_path) -> None:
    path = write_csv(tmp_path / "empty.csv", ["t"], [])
    assert read_csv(path)["t"].size == 0


def test_json_handles_numpy_and_complex(tmp_path) -> None:
    data = {"b": np.arange(2), "a": 1 + 2j, "c": np.float64(0.5)}
    path = write_json(tmp_path / "report.json", data)
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1.0, 2.0], "b": [0, 1], "c": 0.5}


def test_json_rejects_unknown_objects(tmp_path) -> None:
    with pytest.raises(TypeError):
        write_json(tmp_path / "bad.json", {"value": object()})


def test_snapshots(tmp_path) -> None:
    grid = Grid1D(8, 4.0)
    snapshots = [
        (0, 0.0, MixedDensity.gaussian([1.0], 0.0, 0.0, grid, grid)),
        (5, 0.25, MixedDensity.gaussian([1.0], 0.5, 0.0, grid, grid)),
    ]
    paths = write_snapshots(tmp_path, "lvn", snapshots)
    assert [path.name for path in paths] == ["lvn_step00000000.npz", "lvn_step00000005.npz"]
    with np.load(paths[1]) as archive:
        assert archive["rho"].shape == (1, 1, 8, 8)
        np.testing.assert_array_equal(archive["x_points"], grid.points)
        assert int(archive["step"]) == 5
    index = json.loads((tmp_path / SNAPSHOT_DIR / "lvn_index.json").read_text(encoding="utf-8"))
    assert index[1] == {"file": paths[1].name, "step": 5, "t": 0.25, "type": "MixedDensity"}


def test_meanfield_snapshot_fields(tmp_path) -> None:
    state = MeanFieldState.pure(3, 1, 0.5, -0.5)
    (path,) = write_snapshots(tmp_path, "meanfield", [(0, 0.0, state)])
    with np.load(path) as archive:
        assert set(archive.files) == {"t", "step", "c", "kc", "xc"}
        np.testing.assert_array_equal(archive["c"], state.c)


def test_no_snapshots_no_directory(tmp_path) -> None:
    assert write_snapshots(tmp_path, "mcmf", []) == []
    assert not (tmp_path / SNAPSHOT_DIR).exists()
