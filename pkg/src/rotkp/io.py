"""Field snapshots and diagnostics tables.

A snapshot is a pair ``<base>.json`` (metadata ``nx, ny, lx, ly, time, name``)
and ``<base>.f64`` holding ``nx*ny`` little-endian float64 values, row-major
with y as the outer index.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .spectral import Grid, ScalarField


def write_snapshot(path: str | Path, field: ScalarField, time: float, name: str) -> Path:
    path = Path(path).with_suffix(".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    g = field.grid
    meta = {"nx": g.nx, "ny": g.ny, "lx": g.lx, "ly": g.ly, "time": float(time), "name": name}
    path.write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    np.ascontiguousarray(field.values, dtype="<f8").tofile(path.with_suffix(".f64"))
    return path


def read_snapshot(path: str | Path) -> tuple[ScalarField, float, str]:
    path = Path(path).with_suffix(".json")
    meta = json.loads(path.read_text())
    grid = Grid(int(meta["nx"]), int(meta["ny"]), float(meta["lx"]), float(meta["ly"]))
    raw = np.fromfile(path.with_suffix(".f64"), dtype="<f8")
    if raw.size != grid.nx * grid.ny:
        raise ValueError(f"payload of {path.with_suffix('.f64')} has {raw.size} values, expected {grid.nx * grid.ny}")
    return ScalarField(grid, raw.reshape(grid.shape)), float(meta["time"]), str(meta["name"])


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Mapping]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    return path


def read_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path: str | Path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path
