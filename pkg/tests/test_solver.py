import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import admm_envelope, cgauss, envelope_objective, reference_fixedpoint, reference_step

from hankelfp.errors import InvalidInputError, InvalidParameterError, PreconditionError
from hankelfp.estimation import ExpModel, InterpSpec, SamplingOperator, build_interp, extract_freqs_1d, synthesize
from hankelfp.solver import (
    CONVEX,
    FIXED_RANK,
    NONCONVEX,
    STRICTLY_CONVEX,
    SolverConfig,
    adapt_tau,
    basic_step,
    certificate,
    check_convexity_weighted,
    check_gram_norm,
    dual_objective,
    dual_variables,
    general_step,
    min_admissible_q,
    solve_basic,
    solve_general,
    solve_unequal,
    solve_weighted,
    weighted_objective,
)
from hankelfp.structure import generator_of, hankel_map, lift, project_H, project_H_perp
from hankelfp.svcalc import apply_sv_function, shrinkage


def random_problem(rng, m, scale=0.5):
    smap = hankel_map(m, m)
    F = lift(smap, cgauss(rng, smap.n_omega))
    return smap, F, scale * np.linalg.norm(F, 2)


# ------------------------------------------------------------------ config


@pytest.mark.parametrize(
    "kwargs",
    [
        {"tau": 1.0, "q": 1.0},
        {"tau": 1.0, "q": np.inf},
        {"tau": 0.0},
        {"tau": None},
        {"mode": FIXED_RANK},
        {"mode": FIXED_RANK, "K": 0},
        {"mode": "other", "tau": 1.0},
        {"tau": 1.0, "max_iter": 0},
        {"mode": FIXED_RANK, "K": 2, "tau_rule": "bogus"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        SolverConfig(**kwargs)


def test_config_conjugate_exponent():
    assert SolverConfig(tau=1.0, q=4.0).p == pytest.approx(4 / 3)


# ------------------------------------------------------------------ basic step


def test_basic_step_zero():
    smap = hankel_map(3, 3)
    Z = np.zeros((3, 3))
    assert np.all(basic_step(Z, Z, smap, 1.0, 2.0) == 0)


def test_basic_step_structured_W(rng):
    smap, F, tau = random_problem(rng, 4)
    W = lift(smap, cgauss(rng, smap.n_omega))
    np.testing.assert_allclose(basic_step(W, F, smap, tau, 3.0), apply_sv_function(3.0 * F, shrinkage(tau, 3.0)), atol=1e-12)


def test_basic_step_matches_reference_transcription(rng):
    for _ in range(10):
        smap, F, tau = random_problem(rng, 5)
        W = cgauss(rng, 5, 5)
        np.testing.assert_allclose(basic_step(W, F, smap, tau, 2.0), reference_step(W, F, tau), atol=1e-12)


def test_basic_step_rejects_unstructured(rng):
    with pytest.raises(InvalidInputError):
        basic_step(np.zeros((3, 3)), cgauss(rng, 3, 3), hankel_map(3, 3), 1.0, 2.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), tau=st.floats(0.05, 4.0), q=st.floats(1.1, 6.0))
def test_basic_step_nonexpansive(seed, tau, q):
    r = np.random.default_rng(seed)
    smap, F, _ = random_problem(r, 4)
    W1, W2 = 2 * cgauss(r, 4, 4), 2 * cgauss(r, 4, 4)
    lhs = np.linalg.norm(basic_step(W1, F, smap, tau, q) - basic_step(W2, F, smap, tau, q))
    assert lhs <= np.linalg.norm(W1 - W2) + 1e-10


# ------------------------------------------------------------------ basic solver


def test_solve_basic_zero():
    smap = hankel_map(3, 3)
    res = solve_basic(np.zeros((3, 3)), smap, SolverConfig(tau=1.0))
    assert res.iterations == 1 and res.converged
    assert np.all(res.A_star == 0) and np.all(res.W_star == 0)


def test_solve_basic_no_active_shrinkage():
    smap = hankel_map(2, 2)
    F = lift(smap, np.ones(3))
    res = solve_basic(F, smap, SolverConfig(tau=1.0, q=2.0))
    np.testing.assert_allclose(res.A_star, F, atol=1e-9)
    assert res.certified


def test_solve_basic_matches_reference_loop(rng):
    smap, F, tau = random_problem(rng, 4)
    res = solve_basic(F, smap, SolverConfig(tau=tau, q=2.0, max_iter=40, rel_tol=1e-300))
    np.testing.assert_allclose(res.A_star, reference_fixedpoint(F, tau, 40), atol=1e-10)


@pytest.mark.parametrize("m", [3, 4])
def test_solve_basic_matches_admm(rng, m):
    for scale in (0.2, 0.5, 0.9):
        smap, F, tau = random_problem(rng, m, scale)
        res = solve_basic(F, smap, SolverConfig(tau=tau, q=2.0, rel_tol=1e-14, max_iter=100000))
        A_ref, _ = admm_envelope(F, tau, 2.0)
        ref = envelope_objective(A_ref, F, tau, 2.0)
        assert abs(res.objective_value - ref) <= 1e-8 * abs(ref)
        assert np.linalg.norm(res.A_star - A_ref) <= 1e-5 * np.linalg.norm(A_ref)


def test_solve_basic_output_is_structured(rng):
    smap, F, tau = random_problem(rng, 6)
    res = solve_basic(F, smap, SolverConfig(tau=tau))
    assert np.linalg.norm(project_H_perp(smap, res.A_star)) <= 1e-10 * np.linalg.norm(res.A_star)
    np.testing.assert_allclose(lift(smap, res.generator), res.A_star, atol=1e-14)


def test_solve_basic_residuals_nonincreasing(rng):
    for _ in range(5):
        smap, F, tau = random_problem(rng, 5, rng.uniform(0.2, 0.8))
        res = solve_basic(F, smap, SolverConfig(tau=tau, q=1.5, max_iter=2000))
        assert np.all(np.diff(res.residual_history) <= 1e-12)


def test_projected_fixed_point_is_unique(rng):
    smap, F, tau = random_problem(rng, 4)
    cfg = SolverConfig(tau=tau, q=2.0, rel_tol=1e-14, max_iter=100000)
    a = solve_basic(F, smap, cfg, W0=5 * cgauss(rng, 4, 4))
    b = solve_basic(F, smap, cfg, W0=5 * cgauss(rng, 4, 4))
    np.testing.assert_allclose(project_H(smap, a.W_star), project_H(smap, b.W_star), atol=1e-6)


def test_solve_basic_reports_nonconvergence(rng, caplog):
    smap, F, tau = random_problem(rng, 5)
    res = solve_basic(F, smap, SolverConfig(tau=tau, max_iter=2))
    assert not res.converged and res.iterations == 2
    assert any("not converged" in n for n in res.notes)


def test_fixed_rank_mode(rng):
    model = ExpModel(np.array([1.0, 0.5j]), 1j * np.array([0.7, -1.9]))
    f = synthesize(model, np.arange(21.0))
    smap = hankel_map(11, 11)
    res = solve_basic(lift(smap, f + 0.05 * cgauss(rng, 21)), smap, SolverConfig(mode=FIXED_RANK, K=2))
    assert res.rank == 2
    assert not res.guaranteed
    assert res.sigma_W[1] > res.final_tau > res.sigma_W[2]


def test_fixed_rank_alternative_rule_runs(rng):
    smap, F, _ = random_problem(rng, 4)
    res = solve_basic(F, smap, SolverConfig(mode=FIXED_RANK, K=1, tau_rule="q*sigma_K", max_iter=50))
    assert res.final_tau > 0 and len(res.tau_history) > 0


# ------------------------------------------------------------------ certificate and trichotomy


def test_certificate_examples():
    tau = 2.0
    ok, margin = certificate(np.diag([3 * tau, 0.2 * tau]), tau, 0.01)
    assert ok and margin == pytest.approx(0.8 * tau)
    ok, margin = certificate(np.diag([tau, 0.1]), tau, 0.01)
    assert not ok and margin == 0.0


def test_trichotomy_at_convergence(rng):
    checked = 0
    for _ in range(10):
        smap, F, tau = random_problem(rng, 5, rng.uniform(0.2, 0.6))
        res = solve_basic(F, smap, SolverConfig(tau=tau, rel_tol=1e-14, max_iter=100000))
        sW, sA = res.sigma_W, res.sigma_A
        hi = sW > tau * (1 + 1e-3)
        lo = sW < tau * (1 - 1e-3)
        np.testing.assert_allclose(sA[hi], sW[hi], atol=1e-8 * sW[0])
        assert np.all(sA[lo] <= 1e-8 * sW[0])
        # shared singular vectors for well separated values
        U, s, Vh = np.linalg.svd(res.W_star)
        for j in np.flatnonzero(hi):
            if (j == 0 or s[j - 1] - s[j] > 1e-3 * s[0]) and (j + 1 == len(s) or s[j] - s[j + 1] > 1e-3 * s[0]):
                assert np.linalg.norm(res.A_star @ Vh[j].conj() - sA[j] * U[:, j]) <= 1e-6
                checked += 1
    assert checked > 0


# ------------------------------------------------------------------ adapt_tau


def test_adapt_tau_examples():
    assert adapt_tau([10, 5, 1, 0.1], 2, 2.0) == 2.5
    assert adapt_tau([3.0, 3.0, 3.0], 1, 2.0) == 1.5
    assert adapt_tau([4.0, 0.0], 2, 2.0) == pytest.approx(4e-12)
    assert adapt_tau([10, 5], 2, 2.0, rule="q*sigma_K") == 10.0


def test_adapt_tau_range():
    with pytest.raises(InvalidParameterError):
        adapt_tau([1.0, 0.5], 3, 2.0)


# ------------------------------------------------------------------ general operator


def test_general_step_zero():
    smap = hankel_map(3, 3)
    M = SamplingOperator.diagonal(np.ones(smap.n_omega) / 3)
    W, A = general_step(np.zeros((3, 3)), np.zeros((3, 3)), np.zeros(smap.n_omega), M, smap, 1.0, 2.0)
    assert np.all(W == 0) and np.all(A == 0)


def test_general_step_reduces_to_basic(rng):
    smap, F, tau = random_problem(rng, 4)
    f = generator_of(smap, F)
    M = SamplingOperator.diagonal(np.sqrt(smap.beta))
    A = lift(smap, cgauss(rng, smap.n_omega))
    W = cgauss(rng, 4, 4)
    W_new, _ = general_step(W, A, np.sqrt(smap.beta) * f, M, smap, tau, 2.0)
    np.testing.assert_allclose(W_new, basic_step(W, F, smap, tau, 2.0), atol=1e-12)


def test_general_step_defining_identity(rng):
    smap = hankel_map(4, 4)
    Mmat = rng.uniform(0, 1, (5, smap.n_omega)) + 0j
    Mmat *= 0.9 / np.linalg.norm(Mmat / np.sqrt(smap.beta), 2)
    M = SamplingOperator(Mmat)
    A = lift(smap, cgauss(rng, smap.n_omega))
    W = cgauss(rng, 4, 4)
    h = cgauss(rng, 5)
    q = 2.5
    W_new, A_new = general_step(W, A, h, M, smap, 0.7, q)
    Z = lift(smap, Mmat.conj().T @ (h - Mmat @ generator_of(smap, A)) / smap.beta) + A
    np.testing.assert_allclose((q - 1) * A_new, q * Z - project_H(smap, W_new), atol=1e-12)
    assert np.linalg.norm(project_H_perp(smap, A_new)) <= 1e-12 * np.linalg.norm(A_new)


def test_gram_norm_violation_is_reported():
    smap = hankel_map(3, 3)
    M = SamplingOperator.diagonal(2 * np.sqrt(smap.beta))
    with pytest.raises(PreconditionError, match="4"):
        check_gram_norm(M, smap)
    with pytest.raises(PreconditionError):
        solve_general(np.zeros(smap.n_omega), M, smap, SolverConfig(tau=1.0))


def test_solve_general_matches_basic(rng):
    smap, F, tau = random_problem(rng, 4)
    f = generator_of(smap, F)
    M = SamplingOperator.diagonal(np.sqrt(smap.beta))
    cfg = SolverConfig(tau=tau, rel_tol=1e-13, max_iter=20000)
    a = solve_general(np.sqrt(smap.beta) * f, M, smap, cfg)
    b = solve_basic(F, smap, cfg)
    np.testing.assert_allclose(a.A_star, b.A_star, atol=1e-9)
    assert a.convexity == STRICTLY_CONVEX


# ------------------------------------------------------------------ weighted


def test_convexity_classification():
    beta = np.array([1.0, 2.0, 1.0])
    assert check_convexity_weighted(2 * beta, beta, 2.0) == STRICTLY_CONVEX
    assert check_convexity_weighted(beta, beta, 2.0) == CONVEX
    assert check_convexity_weighted(np.array([0.0, 2.0, 1.0]), beta, 2.0) == NONCONVEX


def test_weighted_reduction_iterates(rng):
    for _ in range(3):
        smap, F, tau = random_problem(rng, 5)
        f = generator_of(smap, F)
        cfg = SolverConfig(tau=tau, q=2.0, max_iter=200, rel_tol=1e-13)
        a = solve_basic(F, smap, cfg)
        b = solve_weighted(f, 2.0 * smap.beta, smap, cfg)
        assert a.iterations == b.iterations
        np.testing.assert_allclose(a.residual_history, b.residual_history, atol=1e-10)
        np.testing.assert_allclose(a.A_star, b.A_star, atol=1e-10)
        assert b.convexity == STRICTLY_CONVEX


def test_weighted_convex_case_is_a_minimum(rng):
    smap = hankel_map(5, 5)
    f = cgauss(rng, smap.n_omega)
    mu = smap.beta.astype(float)
    tau = 0.5 * np.linalg.norm(lift(smap, f), 2)
    res = solve_weighted(f, mu, smap, SolverConfig(tau=tau, q=2.0, rel_tol=1e-13, max_iter=100000))
    assert res.convexity == CONVEX
    best = weighted_objective(res.A_star, f, mu, smap, tau)
    assert best == pytest.approx(res.objective_value, rel=1e-12)
    for _ in range(20):
        a = res.generator + 1e-3 * cgauss(rng, smap.n_omega)
        assert weighted_objective(lift(smap, a), f, mu, smap, tau) >= best - 1e-10


def test_weighted_rejects_small_q(rng):
    smap = hankel_map(3, 3)
    with pytest.raises(PreconditionError):
        solve_weighted(np.ones(5), 3 * smap.beta, smap, SolverConfig(tau=1.0, q=2.0))


def test_weighted_rejects_bad_weights():
    smap = hankel_map(3, 3)
    with pytest.raises(InvalidInputError):
        solve_weighted(np.ones(5), -np.ones(5), smap, SolverConfig(tau=1.0))
    with pytest.raises(InvalidInputError):
        solve_weighted(np.ones(4), np.ones(4), smap, SolverConfig(tau=1.0))


def test_weighted_missing_data_flags_nonconvex():
    smap = hankel_map(5, 5)
    mu = 2.0 * smap.beta
    mu[3] = 0
    res = solve_weighted(np.ones(9), mu, smap, SolverConfig(tau=0.5, max_iter=50))
    assert res.convexity == NONCONVEX and not res.guaranteed
    assert any("nonconvex" in n for n in res.notes)


# ------------------------------------------------------------------ unequally spaced


def test_unequal_on_grid_matches_weighted(rng):
    smap = hankel_map(6, 6)
    n = smap.n_omega
    f = cgauss(rng, n)
    interp = build_interp(InterpSpec(np.arange(n), 1.0, np.arange(n, dtype=float)))
    mu = 2.0 * smap.beta.astype(float)
    cfg = SolverConfig(tau=0.4 * np.linalg.norm(lift(smap, f), 2), rel_tol=1e-12, max_iter=20000)
    a = solve_unequal(f, np.arange(n, dtype=float), mu, smap, interp, cfg)
    b = solve_weighted(f, mu, smap, cfg)
    np.testing.assert_allclose(a.A_star, b.A_star, atol=1e-8)


def test_unequal_off_grid_recovers_frequencies():
    model = ExpModel(np.array([1.0, 0.7 + 0.2j]), np.array([-0.2 + 2j * np.pi, 0.1 - 4j * np.pi]))
    n = 65
    h = 1.0 / (n - 1)
    X = np.sort(np.random.default_rng(7).uniform(0.0, 1.0, 80))
    smap = hankel_map(33, 33)
    interp = build_interp(InterpSpec(np.arange(n), h, X, 0.0, "cubic"))
    mu = np.full(80, 2.0 / min_admissible_q(interp, np.ones(80), smap))
    res = solve_unequal(synthesize(model, X), X, mu, smap, interp, SolverConfig(mode=FIXED_RANK, K=2, continuation=True))
    z = extract_freqs_1d(res.generator, 2, h)
    truth = model.zetas[np.argsort(model.zetas[:, 0].imag), 0]
    assert np.max(np.abs(z - truth)) < 1e-4


def test_unequal_zero_data():
    smap = hankel_map(4, 4)
    X = np.linspace(0, 6, 11)
    interp = build_interp(InterpSpec(np.arange(7), 1.0, X))
    mu = np.full(11, 0.5)
    res = solve_unequal(np.zeros(11), X, mu, smap, interp, SolverConfig(tau=1.0))
    assert np.all(res.A_star == 0)


def test_unequal_reports_minimal_q():
    smap = hankel_map(4, 4)
    X = np.linspace(0, 6, 40)
    interp = build_interp(InterpSpec(np.arange(7), 1.0, X))
    mu = np.full(40, 10.0)
    need = min_admissible_q(interp, mu, smap)
    with pytest.raises(PreconditionError, match=f"{need:.6g}"):
        solve_unequal(np.ones(40), X, mu, smap, interp, SolverConfig(tau=1.0, q=2.0))


# ------------------------------------------------------------------ duality


def test_dual_variables_zero():
    smap = hankel_map(3, 3)
    X, Y = dual_variables(np.zeros((3, 3)), np.zeros((3, 3)), smap, 2.0)
    assert np.all(X == 0) and np.all(Y == 0)


def test_dual_sum_is_perpendicular(rng):
    smap, F, _ = random_problem(rng, 4)
    W = cgauss(rng, 4, 4)
    X, Y = dual_variables(W, F, smap, 3.0)
    np.testing.assert_allclose(X + Y, 2 * project_H_perp(smap, W), atol=1e-12)
    assert np.linalg.norm(project_H(smap, X + Y)) <= 1e-12


def test_strong_duality(rng):
    for q in (1.5, 2.0, 4.0):
        smap, F, tau = random_problem(rng, 4)
        res = solve_basic(F, smap, SolverConfig(tau=tau, q=q, rel_tol=1e-14, max_iter=100000))
        X, Y = dual_variables(res.W_star, F, smap, q)
        assert dual_objective(X, Y, F, tau, q) == pytest.approx(-res.objective_value, rel=1e-6)
