"""CSV formats: field dumps, operator triplets, (sigma, error) tables."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError, ShapeError
from .grid import Field, Grid

__all__ = ["write_field", "read_field", "field_to_csv", "write_triplets", "read_rate_points", "fmt"]


def fmt(x) -> str:
    """Round-trippable text for a float (17 significant digits)."""
    return format(float(x), ".17g")


def field_to_csv(field: Field) -> str:
    grid = field.grid
    buf = io.StringIO()
    cols = ["x", "y"][: grid.dim] + ["value"]
    buf.write(",".join(cols) + "\n")
    coords = grid.nodes.reshape(grid.size, -1)
    for c, v in zip(coords, field.values):
        buf.write(",".join([fmt(t) for t in c] + [fmt(v)]) + "\n")
    return buf.getvalue()


def write_field(field: Field, path) -> None:
    Path(path).write_text(field_to_csv(field))


def read_field(path, grid: Grid) -> Field:
    """Read a field dump and check its coordinates against ``grid``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigurationError(f"{path}: empty field file")
    header = [h.strip() for h in rows[0]]
    expected = ["x", "y"][: grid.dim] + ["value"]
    if header != expected:
        raise ConfigurationError(f"{path}: header {header} does not match {expected}")
    data = np.array([[float(t) for t in r] for r in rows[1:] if r], dtype=float)
    if data.shape[0] != grid.size:
        raise ShapeError(f"{path}: {data.shape[0]} rows for a grid of {grid.size} nodes")
    coords = grid.nodes.reshape(grid.size, -1)
    if not np.allclose(data[:, : grid.dim], coords, rtol=0, atol=1e-9 * max(grid.extent)):
        raise ShapeError(f"{path}: node coordinates do not match the grid")
    return Field(grid, data[:, -1])


def write_triplets(op, path) -> None:
    i, j, v = op.to_triplets()
    with open(path, "w") as fh:
        fh.write("i,j,value\n")
        for a, b, c in zip(i, j, v):
            fh.write(f"{a},{b},{fmt(c)}\n")


def read_rate_points(path, m=None) -> list:
    """Read ``sigma,error`` rows; a header line is optional, other columns are ignored.

    With a header containing an ``m`` column, ``m`` selects the matching rows.
    """
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for lineno, row in enumerate(reader, 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header is None and not _is_number(row[0]):
                header = [h.strip() for h in row]
                continue
            if header is not None:
                rec = dict(zip(header, row))
                if m is not None and "m" in rec and float(rec["m"]) != float(m):
                    continue
                if not rec.get("sup_error", rec.get("error", "")).strip():
                    continue
                try:
                    err_key = next(k for k in ("error", "sup_error") if k in rec)
                    points.append((float(rec["sigma"]), float(rec[err_key])))
                except (KeyError, StopIteration, ValueError) as exc:
                    raise ConfigurationError(f"{path}:{lineno}: need sigma and error columns") from exc
            else:
                points.append((float(row[0]), float(row[1])))
    return points


def _is_number(s) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True
