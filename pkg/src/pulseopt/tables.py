"""Plain-text tables: UTF-8, comma separated, one header line.

Every value is written in scientific notation with 13 significant digits
so that files are byte-identical across runs of the same build.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["write_table", "read_table", "NUMBER_FORMAT"]

NUMBER_FORMAT = "{:.12e}"


def write_table(path, columns: dict) -> Path:
    """Write equal-length columns; keys become the header (name and unit)."""
    names = list(columns)
    if not names:
        raise ValueError("no columns to write")
    data = [np.asarray(columns[k], dtype=float).ravel() for k in names]
    n = data[0].size
    if any(c.size != n for c in data):
        raise ValueError("columns must have equal length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*data):
            fh.write(",".join(NUMBER_FORMAT.format(float(v)) for v in row) + "\n")
    return path


def read_table(path) -> dict:
    """Inverse of :func:`write_table`."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    arr = np.array(body, dtype=float).reshape(len(body), len(header))
    return {name: arr[:, k] for k, name in enumerate(header)}
