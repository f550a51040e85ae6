# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Writers for run results.

Observables go to CSV with a fixed number of significant digits and a '.'
decimal point, so identical runs give byte-identical files. Reports and the
effective configuration go to JSON; full states go to one ``.npz`` archive
per snapshot, listed in ``snapshots/index.json``.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from ._common import CSV_DIGITS, format_float
from .dynamics import MixedDensity

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from .dynamics import ObservableRecord

logger = logging.getLogger(__name__)

SNAPSHOT_DIR = "snapshots"
"""Subdirectory of the output directory holding state snapshots."""

SCALAR_COLUMNS = ("trace", "energy", "mean_k", "mean_x", "var_k", "var_x")
"""Scalar observables shared by every scheme, in CSV order after the time."""


def observable_header(n_states: int) -> list[str]:
    """
    Column names of an observables CSV.

    Examples
    --------
    >>> observable_header(2)
    ['t', 'trace', 'energy', 'pop_0', 'pop_1', 'mean_k', 'mean_x', 'var_k', 'var_x']
    """
    return [
        "t",
        "trace",
        "energy",
        *(f"pop_{i}" for i in range(n_states)),
        "mean_k",
        "mean_x",
        "var_k",
        "var_x",
    ]


def observable_row(record: ObservableRecord) -> list[float]:
    """The values of one record in :func:`observable_header` order."""
    return [
        record.t,
        record.trace,
        record.energy,
        *record.populations,
        record.mean_k,
        record.mean_x,
        record.var_k,
        record.var_x,
    ]


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[float]], digits: int = CSV_DIGITS
) -> Path:
    """
    Write numeric rows under a header.

    Parameters
    ----------
    path : Path
        The file to create or replace.
    header : sequence of str
        Column names.
    rows : iterable of sequences of float
        Row values, formatted with `digits` significant digits.
    digits : int, optional
        Significant digits per value.

    Returns
    -------
    Path
        The path written.
    """
    with path.open(mode="w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([format_float(v, digits) for v in row] for row in rows)
    logger.debug("wrote %s", path)
    return path


def write_observables(
    path: Path, records: Sequence[ObservableRecord], digits: int = CSV_DIGITS
) -> Path:
    """Write a time series of observables as CSV."""
    n_states = len(records[0].populations) if records else 0
    return write_csv(path, observable_header(n_states), map(observable_row, records), digits)


def read_csv(path: Path) -> dict[str, np.ndarray]:
    """Read a CSV written by :func:`write_csv` into one array per column."""
    with path.open(encoding="utf-8", newline="") as file:
        reader = csv.reader(file)
        header = next(reader)
        values = np.array([[float(v) for v in row] for row in reader], dtype=float)
    values = values.reshape(-1, len(header))
    return {name: values[:, i] for i, name in enumerate(header)}


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    msg = f"cannot serialize {type(value).__name__}"
    raise TypeError(msg)


def write_json(path: Path, data: Any) -> Path:
    """Write `data` as indented, key-sorted JSON."""
    path.write_text(
        json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8"
    )
    logger.debug("wrote %s", path)
    return path


def state_arrays(state: Any) -> dict[str, np.ndarray]:
    """
    The arrays of a propagated state, grids included for densities.
    """
    arrays = {
        item.name: np.asarray(getattr(state, item.name))
        for item in dataclasses.fields(state)
        if not item.metadata.get("static", False)
    }
    if isinstance(state, MixedDensity):
        arrays["k_points"] = state.k_grid.points
        arrays["x_points"] = state.x_grid.points
    return arrays


def write_snapshots(
    out_dir: Path, prefix: str, snapshots: Sequence[tuple[int, float, Any]]
) -> list[Path]:
    """
    Save each (step, time, state) snapshot and an index of them.

    Files are named ``<prefix>_step<step>.npz`` under ``snapshots/``; the
    index maps each file to its step and time.
    """
    if not snapshots:
        return []
    directory = out_dir / SNAPSHOT_DIR
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    index = []
    for step, t, state in snapshots:
        path = directory / f"{prefix}_step{step:08d}.npz"
        np.savez(path, t=np.float64(t), step=np.int64(step), **state_arrays(state))
        paths.append(path)
        index.append({"file": path.name, "step": step, "t": t, "type": type(state).__name__})
    write_json(directory / f"{prefix}_index.json", index)
    logger.info("wrote %d snapshots to %s", len(paths), directory)
    return paths
