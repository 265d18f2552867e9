"""CSV emission and read-back.

Floats are written with repr (the shortest round-tripping decimal), so
identical runs produce byte-identical files.
"""

import csv
from pathlib import Path
from typing import List

import numpy as np

from .core import Grid1D, State
from .diagnostics import COLUMNS, MonitorRow, MonitorSeries


def _fmt(x: float) -> str:
    return repr(float(x))


def write_snapshot(path: "str | Path", grid: Grid1D, state: State) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "v", "m"])
        for x, v, m in zip(grid.centers, state.v, state.m):
            writer.writerow([_fmt(x), _fmt(v), _fmt(m)])


def read_snapshot(path: "str | Path"):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "v", "m"]:
            raise ValueError(f"unexpected snapshot header {header}")
        rows = [[float(cell) for cell in row] for row in reader]
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def write_monitors(path: "str | Path", series: MonitorSeries) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in series.rows:
            writer.writerow([_fmt(getattr(row, col)) for col in COLUMNS])


def read_monitors(path: "str | Path") -> List[MonitorRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected monitors header {header}")
        return [MonitorRow(*[float(cell) for cell in row]) for row in reader]
