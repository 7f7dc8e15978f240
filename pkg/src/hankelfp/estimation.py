"""Exponential models, sampling operators and frequency extraction.

Exponents follow the natural convention ``f(x) = sum_k c_k exp(zeta_k . x)``.
Frequencies given in cycles (``exp(2 pi i nu x)``) are converted with
:func:`cycles_to_zeta` at the boundary.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, InvalidParameterError
from .structure import StructureMap, rectangle_points


class RankDeficiencyWarning(UserWarning):
    """Fewer frequencies than requested could be resolved."""


@dataclass(frozen=True)
class ExpModel:
    """``sum_k coeffs[k] * exp(zetas[k] . x)``; ``zetas`` has shape ``(K, d)``."""

    coeffs: np.ndarray
    zetas: np.ndarray

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        zetas = np.asarray(self.zetas, dtype=complex)
        if zetas.ndim == 1:
            zetas = zetas[:, None]
        if zetas.ndim != 2 or len(zetas) != len(coeffs):
            raise InvalidInputError(f"{len(coeffs)} coefficients but zetas of shape {zetas.shape}")
        if not (np.all(np.isfinite(coeffs)) and np.all(np.isfinite(zetas))):
            raise InvalidInputError("model has non-finite entries")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "zetas", zetas)

    @property
    def K(self) -> int:
        return len(self.coeffs)

    @property
    def dim(self) -> int:
        return self.zetas.shape[1]

    def to_list(self) -> list[dict]:
        return [
            {"re_c": c.real, "im_c": c.imag, "re_zeta": z.real.tolist(), "im_zeta": z.imag.tolist()}
            for c, z in zip(self.coeffs, self.zetas)
        ]

    @classmethod
    def from_list(cls, terms: list[dict]) -> "ExpModel":
        if not terms:
            raise InvalidInputError("an exponential model needs at least one term")
        coeffs = [complex(t["re_c"], t["im_c"]) for t in terms]
        zetas = [np.asarray(t["re_zeta"], float) + 1j * np.asarray(t["im_zeta"], float) for t in terms]
        return cls(np.array(coeffs), np.array(zetas))

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_list(), indent=2))

    @classmethod
    def from_json(cls, path) -> "ExpModel":
        return cls.from_list(json.loads(Path(path).read_text()))


def cycles_to_zeta(nu):
    """Exponent ``2 pi i nu`` for a frequency ``nu`` given in cycles per unit."""
    return 2j * np.pi * np.asarray(nu, dtype=complex)


def zeta_to_cycles(zeta):
    return np.asarray(zeta, dtype=complex) / (2j * np.pi)


def _as_points(points, dim: int | None = None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise InvalidInputError(f"points must be a (J, d) array, got shape {pts.shape}")
    if dim is not None and pts.shape[1] != dim:
        raise InvalidInputError(f"points have dimension {pts.shape[1]}, model has {dim}")
    return pts


def synthesize(model: ExpModel, points) -> np.ndarray:
    pts = _as_points(points, model.dim)
    return np.exp(pts @ model.zetas.T) @ model.coeffs


def add_noise(samples, snr_db: float, seed: int) -> np.ndarray:
    """Add circular complex white Gaussian noise at exactly ``snr_db``.

    The drawn realization is rescaled so that ``10 log10(|s|^2 / |n|^2)``
    equals ``snr_db``.  ``snr_db = inf`` returns a copy of the samples.
    """
    samples = np.asarray(samples, dtype=complex)
    if np.isposinf(snr_db):
        return samples.copy()
    energy = float(np.vdot(samples, samples).real)
    if energy == 0:
        raise InvalidInputError("cannot add noise at finite SNR to a zero signal")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(samples.shape) + 1j * rng.standard_normal(samples.shape)
    noise *= np.sqrt(energy / 10 ** (snr_db / 10) / float(np.vdot(noise, noise).real))
    return samples + noise


def measured_snr_db(clean, noisy) -> float:
    clean = np.asarray(clean)
    noise = np.asarray(noisy) - clean
    return 10 * np.log10(np.vdot(clean, clean).real / np.vdot(noise, noise).real)


@dataclass(frozen=True)
class SamplingOperator:
    """Dense linear map from generator values (length ``|Omega|``) to measurements."""

    matrix: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def forward(self, a) -> np.ndarray:
        return self.matrix @ a

    def adjoint(self, v) -> np.ndarray:
        return self.matrix.conj().T @ v

    @classmethod
    def diagonal(cls, weights) -> "SamplingOperator":
        return cls(np.diag(np.asarray(weights)))


_KERNEL_WIDTH = {"linear": 2, "cubic": 4}


@dataclass(frozen=True)
class InterpSpec:
    """Equally spaced node set plus sample points.

    ``nodes`` are integer grid indices; node ``n`` sits at ``origin + spacing * n``.
    The node set may be a full rectangle (see :meth:`rectangular`) or any
    subset of the lattice, e.g. the ``Omega`` points of a structure map.
    """

    nodes: np.ndarray
    spacing: np.ndarray
    X: np.ndarray
    origin: np.ndarray = field(default=None)
    kernel: str = "linear"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int64)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        d = nodes.shape[1]
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "X", _as_points(self.X, d))
        object.__setattr__(self, "spacing", np.broadcast_to(np.asarray(self.spacing, float), (d,)).copy())
        origin = np.zeros(d) if self.origin is None else self.origin
        object.__setattr__(self, "origin", np.broadcast_to(np.asarray(origin, float), (d,)).copy())
        if self.kernel not in _KERNEL_WIDTH:
            raise InvalidParameterError(f"unknown kernel {self.kernel!r}; choose from {sorted(_KERNEL_WIDTH)}")

    @classmethod
    def rectangular(cls, origin, spacing, counts, X, kernel: str = "linear") -> "InterpSpec":
        return cls(rectangle_points(counts), spacing, X, origin, kernel)

    @classmethod
    def on_structure(cls, smap: StructureMap, spacing, X, origin=None, kernel: str = "linear") -> "InterpSpec":
        return cls(smap.omega_points, spacing, X, origin, kernel)

    def node_coordinates(self) -> np.ndarray:
        return self.origin + self.nodes * self.spacing


def _lagrange_weights(t: float, width: int) -> np.ndarray:
    """Weights of the Lagrange interpolant through nodes ``0..width-1`` evaluated at ``t``."""
    nodes = np.arange(width)
    w = np.ones(width)
    for j in range(width):
        others = np.delete(nodes, j)
        w[j] = np.prod((t - others) / (j - others))
    return w


def build_interp(spec: InterpSpec) -> SamplingOperator:
    """Dense interpolation operator from node values to the sample points.

    Each row uses a tensor-product Lagrange stencil (2 nodes per axis for the
    linear kernel, 4 for cubic) and therefore sums to one.  The most centred
    stencil contained in the node set is chosen; when only one-sided stencils
    are available (ragged node sets), the nearest one is used.
    """
    width = _KERNEL_WIDTH[spec.kernel]
    lookup = {tuple(p): i for i, p in enumerate(spec.nodes.tolist())}
    lo = spec.nodes.min(axis=0)
    hi = spec.nodes.max(axis=0)
    d = spec.nodes.shape[1]
    rows = np.zeros((len(spec.X), len(spec.nodes)))
    eps = 1e-9
    for j, x in enumerate(spec.X):
        u = (x - spec.origin) / spec.spacing
        if np.any(u < lo - eps) or np.any(u > hi + eps):
            raise InvalidInputError(f"sample {j} at {x.tolist()} lies outside the node hull")
        base = np.floor(u + eps).astype(int)
        per_axis = []
        for i in range(d):
            starts = range(base[i] - width + 1, base[i] + 2)
            per_axis.append(sorted(starts, key=lambda s, i=i: (abs(u[i] - s - (width - 1) / 2), s)))
        # ranked by the worst-centred axis, then total offset
        combos = sorted(
            itertools.product(*per_axis),
            key=lambda st: (
                max(abs(u[i] - st[i] - (width - 1) / 2) for i in range(d)),
                sum(abs(u[i] - st[i] - (width - 1) / 2) for i in range(d)),
            ),
        )
        for start in combos:
            offsets = itertools.product(range(width), repeat=d)
            cells = [tuple(int(s + o) for s, o in zip(start, off)) for off in offsets]
            if all(c in lookup for c in cells):
                break
        else:
            raise InvalidInputError(f"no complete interpolation stencil around sample {j} at {x.tolist()}")
        axis_w = [_lagrange_weights(u[i] - start[i], width) for i in range(d)]
        for off, cell in zip(itertools.product(range(width), repeat=d), cells):
            rows[j, lookup[cell]] += np.prod([axis_w[i][off[i]] for i in range(d)])
    return SamplingOperator(rows)


def _hankel_rows(a: np.ndarray) -> int:
    return (len(a) + 1) // 2


def _check_count(n: int, K: int):
    if K < 1:
        raise InvalidParameterError(f"K must be positive, got {K}")
    if n < 2 * K + 1:
        raise InvalidInputError(f"need at least 2K+1 = {2 * K + 1} samples, got {n}")


def _numerical_rank(sigma: np.ndarray, tol: float = 1e-10) -> int:
    if sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma > tol * sigma[0]))


def _sorted_by_imag(z: np.ndarray) -> np.ndarray:
    return z[np.lexsort((z.real, z.imag))]


def extract_freqs_1d(a, K: int, spacing: float = 1.0) -> np.ndarray:
    """Matrix-pencil estimate of ``K`` exponents from a (denoised) 1-D generator.

    Returns exponents ``zeta`` with ``a[n] ~ sum c_k exp(zeta_k * spacing * n)``,
    sorted by imaginary part.  If the Hankel matrix of ``a`` has numerical rank
    below ``K``, only that many are returned and a
    :class:`RankDeficiencyWarning` is issued.
    """
    a = np.asarray(a, dtype=complex)
    _check_count(len(a), K)
    L = _hankel_rows(a)
    H = scipy.linalg.hankel(a[:L], a[L - 1 :])
    Y0, Y1 = H[:, :-1], H[:, 1:]
    U, s, Vh = np.linalg.svd(Y0, full_matrices=False)
    r = min(K, _numerical_rank(s))
    if r < K:
        warnings.warn(f"pencil rank {r} < K={K}; returning {r} frequencies", RankDeficiencyWarning, stacklevel=2)
    if r == 0:
        return np.zeros(0, dtype=complex)
    Z = (U[:, :r].conj().T @ Y1 @ Vh[:r].conj().T) / s[:r, None]
    nodes = np.linalg.eigvals(Z)
    return _sorted_by_imag(np.log(nodes) / spacing)


def esprit_1d(f, K: int, spacing: float = 1.0) -> np.ndarray:
    """Least-squares ESPRIT on the signal subspace of the Hankel lift of ``f``."""
    f = np.asarray(f, dtype=complex)
    _check_count(len(f), K)
    L = _hankel_rows(f)
    H = scipy.linalg.hankel(f[:L], f[L - 1 :])
    U, s, _ = np.linalg.svd(H, full_matrices=False)
    r = min(K, _numerical_rank(s))
    if r < K:
        warnings.warn(f"signal subspace rank {r} < K={K}; returning {r} frequencies", RankDeficiencyWarning, stacklevel=2)
    if r == 0:
        return np.zeros(0, dtype=complex)
    Us = U[:, :r]
    Phi = np.linalg.lstsq(Us[:-1], Us[1:], rcond=None)[0]
    nodes = np.linalg.eigvals(Phi)
    return _sorted_by_imag(np.log(nodes) / spacing)


def _shift_pairs(xi: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    lookup = {tuple(p): i for i, p in enumerate(xi.tolist())}
    src, dst = [], []
    step = np.zeros(xi.shape[1], dtype=int)
    step[axis] = 1
    for i, p in enumerate(xi.tolist()):
        j = lookup.get(tuple(np.add(p, step).tolist()))
        if j is not None:
            src.append(i)
            dst.append(j)
    return np.array(src, dtype=int), np.array(dst, dtype=int)


def extract_freqs_nd(A_star, smap: StructureMap, K: int, spacing=1.0) -> np.ndarray:
    """Per-axis shift-invariance estimate of ``K`` exponent vectors from a structured matrix.

    The rank-``K`` left singular subspace lives on the rectangular ``Xi`` grid;
    for each axis the shift operator restricted to that subspace is estimated by
    least squares, and all axes are diagonalised in the eigenvector basis of a
    fixed generic combination of them, which pairs the components.  Returns a
    ``(K, d)`` array sorted by the imaginary part of the first component.
    """
    A_star = np.asarray(A_star, dtype=complex)
    xi = smap.xi_points
    d = smap.dim
    spacing = np.broadcast_to(np.asarray(spacing, float), (d,))
    extent = xi.max(axis=0) - xi.min(axis=0) + 1
    if len(np.unique(xi, axis=0)) != int(np.prod(extent)):
        raise InvalidInputError("Xi must be a full rectangular block")
    for i, n in enumerate(extent):
        if n < 2:
            raise InvalidInputError(f"Xi has a single node along axis {i}; that component cannot be estimated")
    n_xi = int(np.prod(extent))
    # each axis leaves n_xi * (1 - 1/n) shifted rows to fit the K x K shift operator
    n_pairs = min(n_xi - n_xi // int(n) for n in extent)
    if K < 1 or K > min(n_pairs, A_star.shape[1]):
        raise InvalidParameterError(f"K={K} is too large for a Xi block of shape {tuple(extent)}")
    U, s, _ = np.linalg.svd(A_star, full_matrices=False)
    r = min(K, _numerical_rank(s))
    if r < K:
        warnings.warn(f"structured matrix rank {r} < K={K}", RankDeficiencyWarning, stacklevel=2)
    Us = U[:, :r]
    shifts = []
    for axis in range(d):
        src, dst = _shift_pairs(xi, axis)
        shifts.append(np.linalg.lstsq(Us[src], Us[dst], rcond=None)[0])
    # irrational weights keep coincident components of one axis from producing degenerate eigenvectors
    weights = np.sqrt(np.arange(2, d + 2))
    _, T = np.linalg.eig(sum(w * P for w, P in zip(weights, shifts)))
    Tinv = np.linalg.inv(T)
    nodes = np.stack([np.diag(Tinv @ P @ T) for P in shifts], axis=1)
    zetas = np.log(nodes) / spacing
    order = np.lexsort(tuple(zetas[:, i].real for i in reversed(range(d))) + (zetas[:, 0].imag,))
    return zetas[order]


@dataclass(frozen=True)
class CoeffFit:
    coeffs: np.ndarray
    residual: float
    condition: float

    @property
    def ill_conditioned(self) -> bool:
        return not self.condition <= 1e12


def fit_coeffs(zetas, X, f) -> CoeffFit:
    """Least-squares amplitudes for fixed exponents at sample points ``X``."""
    zetas = np.asarray(zetas, dtype=complex)
    if zetas.ndim == 1:
        zetas = zetas[:, None]
    pts = _as_points(X, zetas.shape[1])
    f = np.asarray(f, dtype=complex)
    if len(pts) != len(f):
        raise InvalidInputError(f"{len(pts)} points but {len(f)} samples")
    if len(pts) < len(zetas):
        raise InvalidInputError(f"need at least K={len(zetas)} samples, got {len(pts)}")
    V = np.exp(pts @ zetas.T)
    coeffs, *_ = np.linalg.lstsq(V, f, rcond=None)
    s = np.linalg.svd(V, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    return CoeffFit(coeffs, float(np.linalg.norm(V @ coeffs - f)), cond)


def table_4exp_model() -> ExpModel:
    """Four unit-modulus oscillations, ``f(x) = sum c_k exp(zeta_k x)`` on ``|x| <= 1/2``."""
    zetas = 1j * np.array([-23.141, -3.1416, 2.7183, 31.006])
    coeffs = np.array([1.0, 0.62348 + 0.78183j, -0.22252 + 0.97493j, -0.90097 + 0.43388j])
    return ExpModel(coeffs, zetas)
