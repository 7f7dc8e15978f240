"""Hankel and general-domain Hankel structure maps.

A :class:`StructureMap` encodes the subspace of structured ``|Xi| x |Upsilon|``
matrices whose ``(m, n)`` entry is ``a(xi_m + upsilon_n)`` for a generator ``a``
on ``Omega = Xi + Upsilon``.  Grid points are integer index vectors; physical
coordinates are obtained by multiplying with the grid spacing.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .svcalc import as_matrix


@dataclass(frozen=True, eq=False)
class StructureMap:
    xi_points: np.ndarray
    upsilon_points: np.ndarray
    omega_points: np.ndarray
    cell_index: np.ndarray
    beta: np.ndarray

    @property
    def rows(self) -> int:
        return len(self.xi_points)

    @property
    def cols(self) -> int:
        return len(self.upsilon_points)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def n_omega(self) -> int:
        return len(self.omega_points)

    @property
    def dim(self) -> int:
        return self.omega_points.shape[1]

    def omega_lookup(self) -> dict[tuple[int, ...], int]:
        """Map from a grid point (as a tuple) to its generator index."""
        return {tuple(int(v) for v in p): i for i, p in enumerate(self.omega_points)}

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "rows": self.rows,
            "cols": self.cols,
            "xi_points": self.xi_points.tolist(),
            "upsilon_points": self.upsilon_points.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StructureMap":
        return general_domain_map(doc["xi_points"], doc["upsilon_points"])

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def from_json(cls, path) -> "StructureMap":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _as_points(points, name: str) -> np.ndarray:
    arr = np.asarray(points)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InvalidInputError(f"{name} must be a non-empty list of points")
    if not np.all(np.equal(np.round(arr), arr)):
        raise InvalidInputError(f"{name} must contain integer grid indices")
    return arr.astype(np.int64)


def general_domain_map(xi, upsilon) -> StructureMap:
    """Structure map for the general-domain Hankel matrix ``(a(xi_m + upsilon_n))_{m,n}``.

    The given point orders define the row and column orderings; ``Omega`` is
    sorted lexicographically.
    """
    xi = _as_points(xi, "xi")
    upsilon = _as_points(upsilon, "upsilon")
    if xi.shape[1] != upsilon.shape[1]:
        raise InvalidInputError(f"dimension mismatch: xi has d={xi.shape[1]}, upsilon has d={upsilon.shape[1]}")
    for name, pts in (("xi", xi), ("upsilon", upsilon)):
        if len(np.unique(pts, axis=0)) != len(pts):
            raise InvalidInputError(f"{name} contains duplicate points")
    sums = (xi[:, None, :] + upsilon[None, :, :]).reshape(-1, xi.shape[1])
    omega, inverse = np.unique(sums, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(len(xi), len(upsilon))
    beta = np.bincount(inverse.ravel(), minlength=len(omega))
    for arr in (xi, upsilon, omega, inverse, beta):
        arr.setflags(write=False)
    return StructureMap(xi, upsilon, omega, inverse, beta)


def hankel_map(n_rows: int, n_cols: int) -> StructureMap:
    """Ordinary ``n_rows x n_cols`` Hankel structure, ``A[m, n] = a[m + n]``."""
    if n_rows < 1 or n_cols < 1:
        raise InvalidInputError("Hankel dimensions must be positive")
    return general_domain_map(np.arange(n_rows), np.arange(n_cols))


def lift(smap: StructureMap, a) -> np.ndarray:
    """Structured matrix generated by ``a`` (the operator Lambda)."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (smap.n_omega,):
        raise InvalidInputError(f"generator has shape {a.shape}, expected ({smap.n_omega},)")
    return a[smap.cell_index]


def adjoint_sum(smap: StructureMap, A) -> np.ndarray:
    """Sum of the entries of ``A`` over each generator cell (the adjoint of :func:`lift`)."""
    A = as_matrix(A)
    if A.shape != smap.shape:
        raise InvalidInputError(f"matrix has shape {A.shape}, structure expects {smap.shape}")
    idx = smap.cell_index.ravel()
    re = np.bincount(idx, weights=A.real.ravel(), minlength=smap.n_omega)
    im = np.bincount(idx, weights=A.imag.ravel(), minlength=smap.n_omega)
    return re + 1j * im


def generator_of(smap: StructureMap, A) -> np.ndarray:
    """Cell averages ``adjoint_sum(A) / beta``; the generator of ``project_H(A)``."""
    return adjoint_sum(smap, A) / smap.beta


def project_H(smap: StructureMap, A) -> np.ndarray:
    """Orthogonal projection onto the structured subspace."""
    return lift(smap, generator_of(smap, A))


def project_H_perp(smap: StructureMap, A) -> np.ndarray:
    A = as_matrix(A)
    return A - project_H(smap, A)


def round_half_away(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def rectangle_points(shape) -> np.ndarray:
    """All integer points of ``{0..shape_0-1} x ... x {0..shape_{d-1}-1}``, lexicographic."""
    shape = [int(s) for s in np.atleast_1d(shape)]
    if any(s < 1 for s in shape):
        raise InvalidInputError(f"rectangle shape must be positive, got {shape}")
    return np.array(list(itertools.product(*(range(s) for s in shape))), dtype=np.int64)


def build_grids(samples, spacing, xi_shape) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-grid-node set ``Upsilon`` of the samples and rectangular block ``Xi``.

    Returns ``(upsilon, xi)`` as integer index arrays; ``upsilon`` is sorted
    lexicographically with duplicates removed.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.size == 0:
        raise InvalidInputError("no samples given")
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (samples.shape[1],))
    if np.any(spacing <= 0):
        raise InvalidInputError("grid spacing must be positive")
    xi_shape = np.broadcast_to(np.asarray(xi_shape), (samples.shape[1],))
    nearest = round_half_away(samples / spacing).astype(np.int64)
    upsilon = np.unique(nearest, axis=0)
    return upsilon, rectangle_points(xi_shape)


def save_points(path, points) -> None:
    """Write integer or real points as CSV, one point per line."""
    points = np.asarray(points)
    if points.ndim == 1:
        points = points[:, None]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for p in points:
            writer.writerow([repr(v.item()) for v in p])


def load_points(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from None
    if rows and len({len(r) for r in rows}) != 1:
        raise InvalidInputError(f"{path}: rows have inconsistent dimension")
    arr = np.array(rows, dtype=float)
    if arr.size and np.all(np.equal(np.round(arr), arr)):
        return arr.astype(np.int64)
    return arr
