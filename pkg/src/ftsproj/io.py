"""File formats: wide CSV datasets, long CSV plot data, JSON results.

Datasets are wide CSV, one curve per row, with an optional first row
holding the grid points (a strictly increasing uniform grid from 0 to 1).
All writers go through a temp-file-plus-rename so interrupted runs never
leave partial output behind.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .core import FtsDataset, Grid
from .errors import DataError

_GRID_TOL = 1e-9


def _parse_row(row: list[str], line: int) -> list[float]:
    out = []
    for col, cell in enumerate(row, start=1):
        text = cell.strip()
        try:
            out.append(float(text))
        except ValueError:
            raise DataError(
                f"non-numeric cell {text!r} at row {line}, column {col}"
            ) from None
    return out


def _looks_like_grid(vals: list[float]) -> bool:
    a = np.asarray(vals)
    if a.size < 2 or abs(a[0]) > _GRID_TOL or abs(a[-1] - 1.0) > _GRID_TOL:
        return False
    d = np.diff(a)
    if np.any(d <= 0):
        return False
    return bool(np.max(np.abs(d - d.mean())) <= _GRID_TOL)


def load_csv(path: str | os.PathLike) -> FtsDataset:
    """Read a wide-CSV dataset; infer the grid from the header or from [0,1]."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            raw = [row for row in csv.reader(fh) if any(cell.strip() for cell in row)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not raw:
        raise DataError(f"{path} is empty")

    rows = [_parse_row(row, line) for line, row in enumerate(raw, start=1)]
    width = len(rows[0])
    for line, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(
                f"ragged row {line}: expected {width} values, found {len(row)}"
            )

    if _looks_like_grid(rows[0]) and len(rows) > 1:
        grid = Grid(np.asarray(rows[0]))
        data = np.asarray(rows[1:])
    else:
        grid = Grid.uniform(width)
        data = np.asarray(rows)
    if data.shape[0] < 2:
        raise DataError("a dataset needs at least 2 curves")
    return FtsDataset(grid, data)


class _AtomicFile:
    """Write to <path>.tmp, promote to <path> on clean close."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.tmp = self.path.with_name(self.path.name + ".tmp")
        self.handle = None

    def __enter__(self):
        self.handle = open(self.tmp, "w", newline="", encoding="utf-8")
        return self.handle

    def __exit__(self, exc_type, exc, tb):
        self.handle.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            self.tmp.unlink(missing_ok=True)
        return False


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_dataset_csv(dataset: FtsDataset, path: str | os.PathLike) -> None:
    """Write a dataset as wide CSV with the grid points as the header row."""
    with _AtomicFile(Path(path)) as fh:
        writer = csv.writer(fh)
        writer.writerow(_fmt(t) for t in dataset.grid.points)
        for row in dataset.values:
            writer.writerow(_fmt(v) for v in row)


def write_json(obj, path: str | os.PathLike) -> None:
    with _AtomicFile(Path(path)) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def write_plot_data(rows, path: str | os.PathLike) -> None:
    """Long-format plot data: one (t, value, series) row per point."""
    with _AtomicFile(Path(path)) as fh:
        writer = csv.writer(fh)
        writer.writerow(("t", "value", "series"))
        for t, value, series in rows:
            writer.writerow((_fmt(t), _fmt(value), series))


def write_table_csv(header, rows, path: str | os.PathLike) -> None:
    """A small metrics table; None cells become empty fields."""
    with _AtomicFile(Path(path)) as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow("" if v is None else v for v in row)


def series_rows(t: np.ndarray, values: np.ndarray, label: str):
    """Helper shaping one labeled curve into long-format rows."""
    return [(float(ti), float(vi), label) for ti, vi in zip(t, values)]
