"""Signal and report files.

Signals are CSV files with a header ``x_1, ..., x_d, re, im`` and one sample
per line.  Values are written with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import DataFileError


def save_signal(path, points, samples) -> None:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    samples = np.asarray(samples, dtype=complex)
    if len(points) != len(samples):
        raise DataFileError(f"{len(points)} points but {len(samples)} samples")
    header = [f"x_{i + 1}" for i in range(points.shape[1])] + ["re", "im"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for p, v in zip(points, samples):
            writer.writerow([repr(float(c)) for c in p] + [repr(float(v.real)), repr(float(v.imag))])


def load_signal(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``(points, samples)``; points has shape ``(n, d)``.

    A file holding only the header gives empty arrays.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFileError(f"{path}:1: empty file, expected a header") from None
        d = len(header) - 2
        expected = [f"x_{i + 1}" for i in range(d)] + ["re", "im"]
        if d < 1 or header != expected:
            raise DataFileError(f"{path}:1: header must be {','.join(expected) if d >= 1 else 'x_1,...,x_d,re,im'}")
        pts, vals = [], []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d + 2:
                raise DataFileError(f"{path}:{reader.line_num}: expected {d + 2} columns, found {len(row)}")
            try:
                nums = [float(c) for c in row]
            except ValueError as exc:
                raise DataFileError(f"{path}:{reader.line_num}: {exc}") from None
            if not all(math.isfinite(v) for v in nums):
                raise DataFileError(f"{path}:{reader.line_num}: non-finite value")
            pts.append(nums[:d])
            vals.append(complex(nums[d], nums[d + 1]))
    return np.array(pts, dtype=float).reshape(-1, d), np.array(vals, dtype=complex)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(path, columns: list[str], rows: list[dict]) -> None:
    """CSV with a fixed column order; missing entries are left blank."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
