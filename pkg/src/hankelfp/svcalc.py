"""Dense SVD, singular value functional calculus and the rank-envelope functionals.

Every matrix is handled as a complex ``numpy`` array; real input is embedded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, InvalidParameterError, NumericError


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a finite, non-empty complex 2-D array."""
    A = np.asarray(A)
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    A = A.astype(complex, copy=False)
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    return A


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``A = U @ diag(sigma) @ V^*`` with ``r = min(M, N)`` columns."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.conj().T


def svd(A) -> SvdFactors:
    """Thin SVD with singular values sorted nonincreasing."""
    A = as_matrix(A)
    try:
        U, s, Vh = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesvd is slower but more robust than the divide-and-conquer driver
        try:
            U, s, Vh = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"SVD did not converge for {A.shape} matrix: {exc}") from exc
    return SvdFactors(U=U, sigma=s, V=Vh.conj().T)


@dataclass(frozen=True)
class ScalarFunction:
    """A function on the nonnegative reals vanishing at zero, with its Lipschitz constant."""

    func: Callable[[np.ndarray], np.ndarray]
    lipschitz: float = np.inf
    name: str = ""

    def __post_init__(self):
        if abs(float(np.asarray(self.func(np.zeros(1)))[0])) > 0:
            raise InvalidParameterError(f"scalar function {self.name!r} must satisfy f(0) = 0")

    def __call__(self, sigma):
        return self.func(np.asarray(sigma, dtype=float))


def apply_sv_function(A, f) -> np.ndarray:
    """Apply ``f`` to the singular values of ``A``: ``U diag(f(sigma)) V^*``."""
    if not isinstance(f, ScalarFunction):
        f = ScalarFunction(f)
    factors = svd(A)
    return (factors.U * f(factors.sigma)) @ factors.V.conj().T


def _check_tau_q(tau, q):
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    if not 1 < q < np.inf:
        raise InvalidParameterError(f"q must lie in (1, inf), got {q}")


def shrink_s(sigma, tau: float, q: float):
    """``max(min(sigma, tau), sigma / q)``, elementwise.

    This is the proximal map (in the singular values) of the dual functional;
    it is 1-Lipschitz and fixes zero.
    """
    _check_tau_q(tau, q)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise InvalidInputError("singular values must be nonnegative")
    out = np.maximum(np.minimum(sigma, tau), sigma / q)
    return float(out) if out.ndim == 0 else out


def shrinkage(tau: float, q: float) -> ScalarFunction:
    """The shrinkage map as a :class:`ScalarFunction` (Lipschitz constant 1)."""
    _check_tau_q(tau, q)
    return ScalarFunction(lambda s: np.maximum(np.minimum(s, tau), s / q), 1.0, f"s_{tau:g},{q:g}")


def singular_values(A) -> np.ndarray:
    A = as_matrix(A)
    return np.linalg.svd(A, compute_uv=False)


def eval_S(A, tau: float) -> float:
    """``sum_j max(sigma_j^2 - tau^2, 0)``."""
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    s = singular_values(A)
    return float(np.sum(np.maximum(s**2 - tau**2, 0.0)))


def envelope_terms(sigma, tau: float) -> np.ndarray:
    """Per-singular-value contributions ``tau^2 - max(tau - sigma, 0)^2``."""
    return tau**2 - np.maximum(tau - np.asarray(sigma, dtype=float), 0.0) ** 2


def eval_R(A, tau: float) -> float:
    """Convex-envelope rank penalty, summed over all ``min(M, N)`` singular values."""
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    return float(np.sum(envelope_terms(singular_values(A), tau)))


def eval_objective(A, F, tau: float, q: float) -> float:
    """``R_tau(A) + q * ||A - F||_F^2``."""
    A = as_matrix(A)
    F = as_matrix(F)
    if A.shape != F.shape:
        raise InvalidInputError(f"shape mismatch: {A.shape} vs {F.shape}")
    return eval_R(A, tau) + q * float(np.linalg.norm(A - F) ** 2)


def rank_eps(A, tol: float = 1e-8) -> int:
    """Number of singular values above ``tol * sigma_1`` (0 for the zero matrix)."""
    if not tol > 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    s = singular_values(A)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))
