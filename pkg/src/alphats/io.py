"""CSV reading and writing for reward series, matrices and traces.

Numbers are written with ``repr`` (shortest round-trip form), so rerunning
the same computation produces byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "TRACE_COLUMNS",
    "read_matrix",
    "read_series",
    "write_series",
    "write_matrix",
    "write_rows",
    "read_trace",
    "sha256_file",
    "log_returns",
    "fmt",
]

TRACE_COLUMNS = ("policy", "seed", "t", "arm", "reward", "inst_regret", "cum_regret")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _parse_cell(cell: str, row: int, col: int, path) -> float:
    text = cell.strip()
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{path}: non-numeric cell {text!r} at row {row}, column {col}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}: non-finite cell {text!r} at row {row}, column {col}")
    return value


def read_matrix(path, delimiter: str = ",", header: bool = False):
    """Parse a numeric CSV into ``(matrix, column_names)``.

    Rows and columns in error messages are 1-based file coordinates.
    Blank lines are skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    rows = []
    names: Optional[list] = None
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not raw or all(not c.strip() for c in raw):
                continue
            if header and names is None:
                names = [c.strip() for c in raw]
                width = len(names)
                continue
            if width is None:
                width = len(raw)
            elif len(raw) != width:
                raise DataError(
                    f"{path}: ragged row {lineno} has {len(raw)} cells, expected {width}"
                )
            rows.append([_parse_cell(c, lineno, j + 1, path) for j, c in enumerate(raw)])
    if not rows:
        raise DataError(f"{path}: no numeric rows")
    matrix = np.array(rows, dtype=float)
    if names is None:
        names = [f"c{j}" for j in range(matrix.shape[1])]
    return matrix, names


def read_series(path, column: Optional[int] = None, pool: bool = False, header: bool = False,
                delimiter: str = ",") -> np.ndarray:
    """One numeric series from a file: a single column, a chosen column, or all cells."""
    matrix, _ = read_matrix(path, delimiter=delimiter, header=header)
    if pool:
        return matrix.ravel()
    if column is None:
        if matrix.shape[1] != 1:
            raise DataError(
                f"{path}: {matrix.shape[1]} columns; pick one with --column or use --pool"
            )
        column = 0
    if not 0 <= column < matrix.shape[1]:
        raise DataError(f"{path}: column {column} out of range (0..{matrix.shape[1] - 1})")
    return matrix[:, column]


def log_returns(prices) -> np.ndarray:
    """Differences of log prices along the first axis."""
    p = np.asarray(prices, dtype=float)
    if p.shape[0] < 2:
        raise DataError("a price series needs at least two rows")
    if np.any(p <= 0):
        r, c = np.argwhere(p <= 0)[0] if p.ndim == 2 else (np.argmax(p <= 0), 0)
        raise DataError(f"non-positive price at row {r + 1}, column {c + 1}")
    return np.diff(np.log(p), axis=0)


def write_series(path, values) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for v in np.asarray(values, dtype=float):
            fh.write(repr(float(v)) + "\n")


def write_matrix(path, matrix, names: Optional[Sequence[str]] = None) -> None:
    m = np.asarray(matrix, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if names is not None:
            w.writerow(names)
        for row in m:
            w.writerow([repr(float(v)) for v in row])


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_trace(path):
    """Load a trace CSV into a list of dicts with typed fields."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if head is None or tuple(head) != TRACE_COLUMNS:
            raise DataError(f"{path}: header must be {','.join(TRACE_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_COLUMNS):
                raise DataError(f"{path}: row {lineno} has {len(row)} cells")
            try:
                out.append({
                    "policy": row[0],
                    "seed": int(row[1]),
                    "t": int(row[2]),
                    "arm": int(row[3]),
                    "reward": float(row[4]),
                    "inst_regret": float(row[5]),
                    "cum_regret": float(row[6]),
                })
            except ValueError as exc:
                raise DataError(f"{path}: row {lineno}: {exc}") from None
    return out
