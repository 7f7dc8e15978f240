"""Fixed-point solvers for rank-penalised structured approximation.

The basic solver minimises ``R_tau(A) + q ||A - F||^2`` over a structured
subspace by Picard iteration of

    W -> S_s(q F + P_perp(W)),       s(sigma) = max(min(sigma, tau), sigma / q),

recovering ``A = (q F - P_H(W)) / (q - 1)`` at the fixed point.  The general
solver replaces ``F`` by ``M^*(h - M A) + A`` for a sampling operator ``M``
with ``M^* M <= I`` and iterates the pair ``(W, A)``; the weighted and
unequally-spaced solvers are its two specialisations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, InvalidParameterError, PreconditionError
from .estimation import SamplingOperator
from .structure import StructureMap, adjoint_sum, generator_of, lift, project_H
from .svcalc import as_matrix, eval_R, eval_S, singular_values, svd

log = logging.getLogger(__name__)

FIXED_TAU = "fixed-tau"
FIXED_RANK = "fixed-rank"

STRICTLY_CONVEX = "strictly-convex"
CONVEX = "convex"
NONCONVEX = "nonconvex"

# relative slack when comparing operator norms against their bounds
NORM_TOL = 1e-8
# largest sigma_1 / tau for which the Gram-matrix shrinkage is trusted
PARTIAL_RATIO = 1e4
# eigenpairs requested beyond the target rank
PARTIAL_EXTRA = 8
# stopping tolerance of the lower-rank continuation stages
STAGE_TOL = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the Picard iteration.

    In ``fixed-rank`` mode ``tau`` is recomputed every iteration from the
    ``K``-th singular value of the current ``W`` (see :func:`adapt_tau`);
    ``tau_rule`` selects ``"sigma_K/q"`` (default) or the alternative
    ``"q*sigma_K"``.  With ``continuation`` the target rank is raised
    ``1, 2, ..., K``, each stage warm-started from the previous one; this
    avoids spurious stationary points when data are missing.  Fixed-rank
    iterations touch only the singular triplets above ``tau`` when that is
    numerically safe (see :func:`_partial_shrink`).
    """

    tau: float | None = None
    q: float = 2.0
    max_iter: int = 5000
    rel_tol: float = 1e-10
    mode: str = FIXED_TAU
    K: int | None = None
    gap_tol: float = 1e-3
    tau_rule: str = "sigma_K/q"
    continuation: bool = False

    def __post_init__(self):
        if not 1 < self.q < np.inf:
            raise InvalidParameterError(f"q must lie in (1, inf), got {self.q}")
        if self.mode == FIXED_TAU:
            if self.tau is None or not self.tau > 0:
                raise InvalidParameterError(f"fixed-tau mode needs tau > 0, got {self.tau}")
        elif self.mode == FIXED_RANK:
            if self.K is None or self.K < 1:
                raise InvalidParameterError(f"fixed-rank mode needs a positive K, got {self.K}")
        else:
            raise InvalidParameterError(f"unknown mode {self.mode!r}")
        if self.tau_rule not in ("sigma_K/q", "q*sigma_K"):
            raise InvalidParameterError(f"unknown tau_rule {self.tau_rule!r}")
        if self.max_iter < 1 or not self.rel_tol > 0 or not self.gap_tol > 0:
            raise InvalidParameterError("max_iter, rel_tol and gap_tol must be positive")

    @property
    def p(self) -> float:
        """Conjugate exponent of ``q``."""
        return self.q / (self.q - 1)


@dataclass
class SolveResult:
    A_star: np.ndarray
    W_star: np.ndarray
    generator: np.ndarray
    sigma_W: np.ndarray
    sigma_A: np.ndarray
    iterations: int
    residual_history: np.ndarray
    objective_value: float
    certified: bool
    margin: float
    final_tau: float
    converged: bool
    guaranteed: bool = True
    convexity: str | None = None
    tau_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    notes: list[str] = field(default_factory=list)

    @property
    def rank(self) -> int:
        from .svcalc import rank_eps

        return rank_eps(self.A_star) if np.any(self.A_star) else 0


def certificate(W_star, tau: float, gap_tol: float) -> tuple[bool, float]:
    """Whether no singular value of ``W_star`` is within ``gap_tol * tau`` of ``tau``.

    Returns ``(flag, margin)`` with ``margin = min_j |sigma_j(W_star) - tau|``.
    When the flag holds, the convex solution also solves the rank-penalised problem.
    """
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    margin = float(np.min(np.abs(singular_values(W_star) - tau)))
    return margin > gap_tol * tau, margin


def adapt_tau(sigma_W, K: int, q: float, rule: str = "sigma_K/q") -> float:
    """Penalty level targeting ``K`` terms: ``sigma_K / q`` (or ``q * sigma_K``).

    A vanishing ``sigma_K`` is replaced by ``1e-12 * sigma_1``.
    """
    sigma_W = np.asarray(sigma_W, dtype=float)
    if not 1 <= K <= len(sigma_W):
        raise InvalidParameterError(f"K={K} out of range for {len(sigma_W)} singular values")
    sk = sigma_W[K - 1]
    if sk == 0:
        return 1e-12 * float(sigma_W[0])
    return float(sk / q) if rule == "sigma_K/q" else float(q * sk)


def _check_structured(smap: StructureMap, F: np.ndarray, name: str = "F"):
    F = as_matrix(F)
    if F.shape != smap.shape:
        raise InvalidInputError(f"{name} has shape {F.shape}, structure expects {smap.shape}")
    off = np.linalg.norm(F - project_H(smap, F))
    if off > 1e-10 * max(np.linalg.norm(F), 1.0):
        raise InvalidInputError(f"{name} is not structured (distance {off:.3e} from the subspace)")
    return F


def _shrink(Y: np.ndarray, tau: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    fac = svd(Y)
    s = np.maximum(np.minimum(fac.sigma, tau), fac.sigma / q)
    return (fac.U * s) @ fac.V.conj().T, fac.sigma


def _partial_shrink(Y: np.ndarray, tau: float, q: float, need: int):
    """Shrinkage through the singular triplets above ``tau`` only.

    ``s`` is the identity below ``tau``, so ``S_s(Y) = Y + U_k diag(s_k - sigma_k) V_k^*``
    over ``sigma_k > tau``; those triplets come from the Hermitian eigenproblem of
    the smaller Gram matrix.  Returns ``None`` when fewer than ``need`` values
    exceed ``tau`` or squaring would cost too much accuracy.
    """
    M, N = Y.shape
    tall = N <= M
    G = Y.conj().T @ Y if tall else Y @ Y.conj().T
    n = len(G)
    m = min(n, need + PARTIAL_EXTRA)
    try:
        lam, vec = scipy.linalg.eigh(G, subset_by_index=(n - m, n - 1), driver="evx", check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        return None
    if m < n and lam[0] > tau * tau:
        # more than m values above tau; the full decomposition is cheaper
        return None
    keep = lam > tau * tau
    lam, vec = lam[keep], vec[:, keep]
    if len(lam) < max(need, 1):
        return None
    sigma = np.sqrt(lam[::-1])
    if sigma[0] > PARTIAL_RATIO * tau:
        return None
    vec = vec[:, ::-1]
    if tall:
        V, U = vec, (Y @ vec) / sigma
    else:
        U, V = vec, (Y.conj().T @ vec) / sigma
    s = np.maximum(np.minimum(sigma, tau), sigma / q)
    return Y + (U * (s - sigma)) @ V.conj().T, s


def basic_step(W, F, smap: StructureMap, tau: float, q: float) -> np.ndarray:
    """One application of ``W -> S_s(q F + P_perp(W))``."""
    F = _check_structured(smap, F)
    W = as_matrix(W)
    if W.shape != smap.shape:
        raise InvalidInputError(f"W has shape {W.shape}, structure expects {smap.shape}")
    if not tau > 0 or not 1 < q < np.inf:
        raise InvalidParameterError(f"need tau > 0 and 1 < q < inf, got tau={tau}, q={q}")
    return _shrink(q * F + W - project_H(smap, W), tau, q)[0]


class _TauTracker:
    """Working penalty level; constant, or adapted to a target rank with a stagnation guard."""

    window = 50
    jump = 0.10

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        self.history: list[float] = []
        self.frozen: float | None = None
        self._jumps = 0

    def __call__(self, sigma_prev_W: np.ndarray | None, sigma_Y: np.ndarray) -> float:
        cfg = self.cfg
        if cfg.mode == FIXED_TAU:
            tau = cfg.tau
        elif self.frozen is not None:
            tau = self.frozen
        else:
            # before the first shrinkage the previous W is unavailable (or zero); S_s(Y) ~ Y / q for large sigma
            sigma = sigma_prev_W if sigma_prev_W is not None and np.any(sigma_prev_W) else sigma_Y / cfg.q
            tau = adapt_tau(sigma, cfg.K, cfg.q, cfg.tau_rule)
            if tau <= 0:
                tau = np.finfo(float).tiny
            if self.history and abs(tau - self.history[-1]) > self.jump * self.history[-1]:
                self._jumps += 1
            else:
                self._jumps = 0
            if self._jumps >= self.window:
                self.frozen = float(np.median(self.history[-self.window :]))
                log.info("tau oscillating for %d iterations; frozen at %.6g", self.window, self.frozen)
                tau = self.frozen
        self.history.append(tau)
        return tau


def _finish(
    smap: StructureMap,
    A: np.ndarray,
    W: np.ndarray,
    tau: float,
    cfg: SolverConfig,
    iterations: int,
    residuals: list[float],
    converged: bool,
    objective: float,
    tracker: _TauTracker,
    convexity: str | None = None,
    notes: list[str] | None = None,
) -> SolveResult:
    flag, margin = certificate(W, tau, cfg.gap_tol)
    notes = list(notes or [])
    guaranteed = cfg.mode == FIXED_TAU and convexity in (None, CONVEX, STRICTLY_CONVEX)
    if cfg.mode == FIXED_RANK:
        notes.append("fixed-rank mode: convergence theory does not apply")
        if tracker.frozen is not None:
            notes.append(f"tau frozen at {tracker.frozen:.6g} after oscillation")
    if not converged:
        notes.append(f"not converged after {iterations} iterations")
        log.warning("fixed-point iteration stopped at max_iter=%d (last residual %.3e)", iterations, residuals[-1])
    return SolveResult(
        A_star=A,
        W_star=W,
        generator=generator_of(smap, A),
        sigma_W=singular_values(W),
        sigma_A=singular_values(A),
        iterations=iterations,
        residual_history=np.asarray(residuals),
        objective_value=objective,
        certified=flag,
        margin=margin,
        final_tau=tau,
        converged=converged,
        guaranteed=guaranteed,
        convexity=convexity,
        tau_history=np.asarray(tracker.history),
        notes=notes,
    )


def _stopped(residual: float, W_prev: np.ndarray, rel_tol: float) -> bool:
    return residual / max(float(np.linalg.norm(W_prev)), 1.0) < rel_tol


def _picard(
    update: Callable[[np.ndarray], np.ndarray],
    A0: np.ndarray,
    W0: np.ndarray,
    smap: StructureMap,
    cfg: SolverConfig,
):
    """Iterate ``Z = update(A)``, ``W' = S_s(qZ + P_perp W)``, ``A' = (qZ - P_H W') / (q - 1)``."""
    q = cfg.q
    A, W = A0, W0
    residuals: list[float] = []
    if cfg.mode == FIXED_RANK and cfg.continuation:
        stages = [replace(cfg, K=k) for k in range(1, cfg.K + 1)]
    else:
        stages = [cfg]
    total = 0
    for k, stage in enumerate(stages):
        # intermediate continuation stages only need to land in the right basin
        tol = cfg.rel_tol if k == len(stages) - 1 else max(cfg.rel_tol, STAGE_TOL)
        tracker = _TauTracker(stage)
        sigma_W = singular_values(W) if np.any(W) else None
        converged = False
        for _ in range(stage.max_iter):
            total += 1
            Z = update(A)
            Y = q * Z + W - project_H(smap, W)
            partial = None
            if stage.mode == FIXED_RANK and sigma_W is not None and np.any(sigma_W):
                tau = tracker(sigma_W, None)
                partial = _partial_shrink(Y, tau, q, stage.K)
            if partial is not None:
                W_new, s = partial
            else:
                fac = svd(Y)
                if stage.mode != FIXED_RANK or sigma_W is None or not np.any(sigma_W):
                    tau = tracker(sigma_W, fac.sigma)
                s = np.maximum(np.minimum(fac.sigma, tau), fac.sigma / q)
                W_new = (fac.U * s) @ fac.V.conj().T
            A = (q * Z - project_H(smap, W_new)) / (q - 1)
            residuals.append(float(np.linalg.norm(W_new - W)))
            done = _stopped(residuals[-1], W, tol)
            W, sigma_W = W_new, s
            if done:
                converged = True
                break
    return project_H(smap, A), W, tau, total, residuals, converged, tracker


def solve_basic(F, smap: StructureMap, cfg: SolverConfig, W0=None) -> SolveResult:
    """Minimise ``R_tau(A) + q ||A - F||^2`` over the structured subspace.

    Picard-iterates :func:`basic_step` from ``W0`` (zero by default) until the
    relative change of ``W`` drops below ``cfg.rel_tol``; then
    ``A = (q F - P_H(W)) / (q - 1)``.
    """
    F = _check_structured(smap, F)
    W0 = np.zeros(smap.shape, dtype=complex) if W0 is None else as_matrix(W0).copy()
    A, W, tau, it, residuals, converged, tracker = _picard(lambda A: F, F, W0, smap, cfg)
    objective = eval_R(A, tau) + cfg.q * float(np.linalg.norm(A - F) ** 2)
    return _finish(smap, A, W, tau, cfg, it, residuals, converged, objective, tracker)


def gram_on_structure(M: SamplingOperator, smap: StructureMap) -> np.ndarray:
    """Matrix of ``M^* M`` restricted to the structured subspace, in an orthonormal basis.

    The basis is ``Lambda(e_w / sqrt(beta_w))``; the result is
    ``beta^{-1/2} M^H M beta^{-1/2}``.
    """
    Mmat = np.asarray(M.matrix)
    if Mmat.shape[1] != smap.n_omega:
        raise InvalidInputError(f"sampling operator acts on {Mmat.shape[1]} values, structure has {smap.n_omega}")
    scaled = Mmat / np.sqrt(smap.beta)[None, :]
    return scaled.conj().T @ scaled


def _extreme_eigs(G: np.ndarray) -> tuple[float, float]:
    ev = np.linalg.eigvalsh((G + G.conj().T) / 2)
    return float(ev[0]), float(ev[-1])


def _classify(lam_min: float) -> str:
    if lam_min > 1 + NORM_TOL:
        return STRICTLY_CONVEX
    if lam_min >= 1 - NORM_TOL:
        return CONVEX
    return NONCONVEX


def general_step(W, A, h, M: SamplingOperator, smap: StructureMap, tau: float, q: float):
    """One application of the general operator; returns ``(W', A')``.

    ``Z = M^*(h - M A) + A``, ``W' = S_s(q Z + P_perp(W))``,
    ``A' = (q Z - P_H(W')) / (q - 1)``.  ``M`` acts on generators; its adjoint
    on the structured subspace is ``v -> Lambda(M^H v / beta)``.
    """
    A = _check_structured(smap, A, "A")
    W = as_matrix(W)
    Z = _general_update(A, np.asarray(h, dtype=complex), np.asarray(M.matrix), smap)
    W_new = _shrink(q * Z + W - project_H(smap, W), tau, q)[0]
    A_new = (q * Z - project_H(smap, W_new)) / (q - 1)
    return W_new, A_new


def _apply(matrix: np.ndarray, v: np.ndarray) -> np.ndarray:
    # keeps a real operator real instead of casting it to complex on every product
    if np.isrealobj(matrix):
        return matrix @ v.real + 1j * (matrix @ v.imag)
    return matrix @ v


def _general_update(A, h, Mmat, smap):
    a = generator_of(smap, A)
    return lift(smap, _apply(Mmat.conj().T, h - _apply(Mmat, a)) / smap.beta) + A


def check_gram_norm(M: SamplingOperator, smap: StructureMap) -> tuple[float, float]:
    """Extreme eigenvalues of ``M^* M`` on the structured subspace; raises if the largest exceeds one."""
    lam_min, lam_max = _extreme_eigs(gram_on_structure(M, smap))
    if lam_max > 1 + NORM_TOL:
        raise PreconditionError(f"||M^* M|| = {lam_max:.6g} exceeds 1 on the structured subspace")
    return lam_min, lam_max


def _pair_iteration(
    update: Callable[[np.ndarray], np.ndarray],
    A0: np.ndarray,
    smap: StructureMap,
    cfg: SolverConfig,
    objective: Callable[[np.ndarray, float], float],
    convexity: str,
) -> SolveResult:
    W0 = np.zeros(smap.shape, dtype=complex)
    A, W, tau, it, residuals, converged, tracker = _picard(update, A0, W0, smap, cfg)
    notes = []
    if convexity == NONCONVEX:
        notes.append("nonconvex objective: the fixed point is only a stationary point")
    return _finish(smap, A, W, tau, cfg, it, residuals, converged, objective(A, tau), tracker, convexity, notes)


def solve_general(h, M: SamplingOperator, smap: StructureMap, cfg: SolverConfig) -> SolveResult:
    """Stationary point of ``R_tau(A) + q ||M A - h||^2`` over the structured subspace.

    Requires ``M^* M <= I`` on the subspace; the iteration starts from
    ``W = 0`` and ``A = M^* h``.
    """
    h = np.asarray(h, dtype=complex)
    Mmat = np.asarray(M.matrix)
    if h.shape != (Mmat.shape[0],):
        raise InvalidInputError(f"h has shape {h.shape}, operator has {Mmat.shape[0]} rows")
    lam_min, _ = check_gram_norm(M, smap)
    convexity = _classify(cfg.q * lam_min)
    A0 = lift(smap, Mmat.conj().T @ h / smap.beta)

    def objective(A, tau):
        return eval_R(A, tau) + cfg.q * float(np.linalg.norm(Mmat @ generator_of(smap, A) - h) ** 2)

    return _pair_iteration(lambda A: _general_update(A, h, Mmat, smap), A0, smap, cfg, objective, convexity)


def check_convexity_weighted(mu, beta, q: float) -> str:
    """Classify ``R_tau(Lambda a) + sum mu |a - f|^2`` by ``min(mu / beta)`` against one."""
    mu = np.asarray(mu, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if mu.shape != beta.shape:
        raise InvalidInputError(f"mu has shape {mu.shape}, beta has {beta.shape}")
    if not q > 1:
        raise InvalidParameterError(f"q must exceed 1, got {q}")
    ratio = mu / beta
    if ratio.max() > q * (1 + NORM_TOL):
        log.warning("q=%g is below max(mu/beta)=%g; the weighted iteration is not admissible", q, ratio.max())
    return _classify(float(ratio.min()))


def weighted_objective(A, f, mu, smap: StructureMap, tau: float) -> float:
    a = generator_of(smap, A)
    return eval_R(lift(smap, a), tau) + float(np.sum(mu * np.abs(a - f) ** 2))


def solve_weighted(f, mu, smap: StructureMap, cfg: SolverConfig) -> SolveResult:
    """Stationary point of ``R_tau(Lambda a) + sum_w mu_w |a_w - f_w|^2``.

    ``mu`` may vanish (missing data); then the objective is nonconvex and the
    result carries the ``nonconvex`` classification.  Requires
    ``q >= max(mu / beta)``.
    """
    f = np.asarray(f, dtype=complex)
    mu = np.asarray(mu, dtype=float)
    n = smap.n_omega
    if f.shape != (n,) or mu.shape != (n,):
        raise InvalidInputError(f"f and mu must have length |Omega| = {n}")
    if np.any(mu < 0) or not np.all(np.isfinite(mu)):
        raise InvalidInputError("weights must be finite and nonnegative")
    q = cfg.q
    beta = smap.beta.astype(float)
    ratio_max = float(np.max(mu / beta))
    if ratio_max > q * (1 + NORM_TOL):
        raise PreconditionError(f"q={q} is below max(mu/beta)={ratio_max:.6g}")
    convexity = check_convexity_weighted(mu, beta, q)
    F = lift(smap, f * mu / (q * beta))
    damp = mu / (q * beta**2)

    def update(A):
        return F + A - lift(smap, damp * adjoint_sum(smap, A))

    def objective(A, tau):
        return weighted_objective(A, f, mu, smap, tau)

    return _pair_iteration(update, F, smap, cfg, objective, convexity)


def unequal_gram(interp: SamplingOperator, mu, smap: StructureMap) -> np.ndarray:
    """``beta^{-1/2} I_X^* diag(mu) I_X beta^{-1/2}``, the data operator on the structured subspace."""
    Imat = np.asarray(interp.matrix)
    scaled = Imat / np.sqrt(smap.beta)[None, :]
    return scaled.conj().T @ (np.asarray(mu, dtype=float)[:, None] * scaled)


def min_admissible_q(interp: SamplingOperator, mu, smap: StructureMap) -> float:
    return _extreme_eigs(unequal_gram(interp, mu, smap))[1]


def unequal_objective(A, f, mu, interp: SamplingOperator, smap: StructureMap, tau: float) -> float:
    a = generator_of(smap, A)
    r = np.asarray(interp.matrix) @ a - f
    return eval_R(lift(smap, a), tau) + float(np.sum(mu * np.abs(r) ** 2))


def solve_unequal(f, X, mu, smap: StructureMap, interp: SamplingOperator, cfg: SolverConfig) -> SolveResult:
    """Stationary point of ``R_tau(Lambda a) + sum_j mu_j |(I_X a - f)_j|^2``.

    ``interp`` maps generator values to the sample points ``X``; ``q`` must
    dominate the largest eigenvalue of the data operator on the subspace.
    """
    f = np.asarray(f, dtype=complex)
    mu = np.asarray(mu, dtype=float)
    Imat = np.asarray(interp.matrix)
    if Imat.shape != (len(f), smap.n_omega):
        raise InvalidInputError(f"interpolation operator has shape {Imat.shape}, expected ({len(f)}, {smap.n_omega})")
    if X is not None and len(np.atleast_1d(np.asarray(X, dtype=float))) != len(f):
        raise InvalidInputError("sample points and measurements differ in length")
    if mu.shape != f.shape or np.any(mu < 0):
        raise InvalidInputError("weights must be nonnegative with one weight per sample")
    q = cfg.q
    lam_min, lam_max = _extreme_eigs(unequal_gram(interp, mu, smap))
    if lam_max > q * (1 + NORM_TOL):
        raise PreconditionError(
            f"data operator norm {lam_max:.6g} exceeds q={q}; the smallest admissible q is {lam_max:.6g}"
        )
    convexity = _classify(lam_min)
    beta = smap.beta.astype(float)
    F = lift(smap, Imat.conj().T @ (mu * f / q) / beta)

    # normal operator of the data term, formed once; the iteration only needs its action
    normal = Imat.conj().T @ (mu[:, None] * Imat) / (q * beta)[:, None]

    def update(A):
        a = adjoint_sum(smap, A) / beta
        return F + A - lift(smap, _apply(normal, a))

    def objective(A, tau):
        return unequal_objective(A, f, mu, interp, smap, tau)

    return _pair_iteration(update, F, smap, cfg, objective, convexity)


def dual_variables(W_star, F, smap: StructureMap, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Dual pair ``(X, Y)`` built from a fixed point ``W_star``; ``X + Y`` lies in the orthogonal complement."""
    W_star = as_matrix(W_star)
    F = as_matrix(F)
    p = q / (q - 1)
    PW = project_H(smap, W_star)
    X = 2 * p * (PW - F) + 2 * (W_star - PW)
    Y = -2 * p * (PW - F)
    return X, Y


def dual_objective(X, Y, F, tau: float, q: float) -> float:
    """Conjugate of ``tau^2 rank(A) + p ||A - B||^2 + q ||B - F||^2`` at ``(X, Y)``.

    ``S_tau(X/2 + Y/(2q) + F) + (q - 1) ||Y/(2q) + F||^2 - q ||F||^2``.
    """
    D = Y / (2 * q) + F
    return eval_S(X / 2 + D, tau) + (q - 1) * float(np.linalg.norm(D) ** 2) - q * float(np.linalg.norm(F) ** 2)
