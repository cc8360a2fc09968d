import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsk import compatible as cj
from rsk import geometry as geo
from rsk import maps
from rsk.errors import ConditioningError, NegativeSpectrumError, PreconditionError

OM = geo.OMEGA0
I4 = np.eye(4)


def denman_beavers(P, iters=60):
    """Square root and inverse root by the coupled Newton iteration."""
    Y, Z = P.copy(), np.eye(P.shape[0])
    for _ in range(iters):
        Y, Z = 0.5 * (Y + np.linalg.inv(Z)), 0.5 * (Z + np.linalg.inv(Y))
    return Y, Z


def random_spd(rng, n=4, spread=1.0):
    M = rng.standard_normal((n, n)) * spread
    return M @ M.T + 0.5 * np.eye(n)


def kron_solve_A(G, Omega):
    """Solve ``A^T G = Omega`` as a dense 16x16 linear system."""
    M = np.zeros((16, 16))
    for k in range(16):
        E = np.zeros(16)
        E[k] = 1.0
        M[:, k] = (E.reshape(4, 4).T @ G).ravel()
    return np.linalg.solve(M, Omega.ravel()).reshape(4, 4)


def test_endomorphism_A_against_dense_solve():
    G = np.diag([4.0, 1.0, 1.0, 1.0])
    A = cj.endomorphism_A(G, OM)
    assert np.max(np.abs(A - kron_solve_A(G, OM))) < 1e-14
    assert np.max(np.abs(A.T @ G - OM)) <= 1e-12


def test_A_of_round_metric_is_J0():
    A = cj.endomorphism_A(cj.compatible_metric(geo.J0, OM), OM)
    assert np.allclose(A, geo.J0) and np.allclose(A @ A, -I4)


def test_A_scales_inversely(rng):
    G = random_spd(rng)
    assert np.allclose(cj.endomorphism_A(3.0 * G, OM), cj.endomorphism_A(G, OM) / 3.0)


def test_ill_conditioned_metric_rejected():
    with pytest.raises(ConditioningError):
        cj.endomorphism_A(np.diag([1e9, 1.0, 1.0, 1.0]), OM)
    with pytest.raises(PreconditionError):
        cj.endomorphism_A(I4 + np.triu(np.ones((4, 4)), 1), OM)


def test_sqrt_simple_cases():
    assert np.allclose(cj.g_selfadjoint_sqrt(I4, I4), I4)
    assert np.allclose(cj.g_selfadjoint_sqrt(9.0 * I4, I4), 3.0 * I4)
    assert np.allclose(cj.g_selfadjoint_sqrt(9.0 * I4, I4, inverse=True), I4 / 3.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sqrt_matches_denman_beavers(seed):
    r = np.random.default_rng(seed)
    G = random_spd(r)
    # a G-self-adjoint positive operator: G^-1 H with H SPD
    P = np.linalg.solve(G, random_spd(r))
    S = cj.g_selfadjoint_sqrt(P, G)
    Y, Z = denman_beavers(P)
    assert np.max(np.abs(S - Y)) <= 1e-8 * max(1.0, np.max(np.abs(Y)))
    assert np.max(np.abs(S @ S - P)) <= 1e-9 * max(1.0, np.max(np.abs(P)))
    Si = cj.g_selfadjoint_sqrt(P, G, inverse=True)
    assert np.max(np.abs(Si - Z)) <= 1e-8 * max(1.0, np.max(np.abs(Z)))


def test_sqrt_rejects_negative_spectrum():
    with pytest.raises(NegativeSpectrumError):
        cj.g_selfadjoint_sqrt(np.diag([1.0, -1.0, 1.0, 1.0]), I4)


def test_sqrt_rejects_non_selfadjoint():
    with pytest.raises(PreconditionError):
        cj.g_selfadjoint_sqrt(I4 + np.triu(np.ones((4, 4)), 1), I4)


def test_retract_round_metric_gives_J0():
    assert np.max(np.abs(cj.retract_J(I4, OM) - geo.J0)) <= 1e-10


def test_retract_diag_perturbation():
    G = np.diag([4.0, 1.0, 1.0, 1.0])
    J = cj.retract_J(G, OM)
    res = cj.j_residuals(J, G, OM)
    assert res["square"] <= 1e-8
    assert res["min_metric_eigenvalue"] > 0
    assert res["form_invariance"] <= 1e-9


@pytest.mark.parametrize("c", [1e-3, 1.0, 1e3])
def test_retract_scale_invariant(c, rng):
    G = random_spd(rng)
    assert np.max(np.abs(cj.retract_J(c * G, OM) - cj.retract_J(G, OM))) <= 1e-8


def test_retraction_identity_on_compatible_J(rng):
    J = cj.random_compatible_J(rng, 100)
    assert np.max(np.abs(J @ J + I4)) < 1e-10
    back = cj.retract_J(cj.compatible_metric(J, OM), np.broadcast_to(OM, J.shape))
    assert np.max(np.abs(back - J)) <= 1e-8


def test_random_symplectic_preserves_form(rng):
    Phi = cj.random_symplectic(rng, 50)
    assert np.max(np.abs(np.swapaxes(Phi, 1, 2) @ OM @ Phi - OM)) < 1e-12


def test_positivity_on_random_vectors(rng):
    G = random_spd(rng)
    J = cj.retract_J(G, OM)
    s = rng.standard_normal((100, 4))
    s /= np.linalg.norm(s, axis=1, keepdims=True)
    assert np.all(np.einsum("ni,ij,jk,nk->n", s, OM, J, s) > 0)


def test_symmetrize_round_metric_is_unchanged(rng):
    P, Q = geo.random_points(rng, 200)
    for s in (maps.sigma_q22(), maps.sigma_q40()):
        g = cj.symmetrize_metric(cj.round_metric_field(), s)
        assert np.allclose(g(P, Q), I4)


def test_symmetrize_is_idempotent(rng):
    P, Q = geo.random_points(rng, 200)
    s = maps.sigma_q40()
    g = cj.symmetrize_metric(cj.random_metric_field(rng), s)
    gg = cj.symmetrize_metric(g, s)
    assert np.max(np.abs(gg(P, Q) - g(P, Q))) < 1e-13
    assert cj.check_metric_invariance(g, s, 1000, rng).passed


@pytest.mark.parametrize("sigma", [maps.sigma_q22(), maps.sigma_q40()], ids=lambda s: s.name)
def test_field_relations(sigma, rng):
    g = cj.symmetrize_metric(cj.random_metric_field(rng), sigma)
    for role, sign in (("J", -1), ("A", -1), ("sqrt", 1), ("inv_sqrt", 1)):
        r = cj.check_anti_invariance_J(cj.endo_field(g, role), sigma, 500, rng, sign=sign)
        assert r.passed, (role, r.max_residual)


def test_round_J_anti_invariant_q22(rng):
    r = cj.check_anti_invariance_J(cj.endo_field(cj.round_metric_field()), maps.sigma_q22(), 500, rng, tol=1e-9)
    assert r.passed


def test_unsymmetrized_metric_fails(rng):
    raw = cj.endo_field(cj.random_metric_field(rng))
    r = cj.check_anti_invariance_J(raw, maps.sigma_q40(), 500, rng)
    assert not r.passed and r.max_residual > 1e-3


def test_retraction_suite_passes(rng):
    results = cj.retraction_suite(rng, samples=100)
    assert len(results) == 24
    assert all(r.passed for r in results), [r.check for r in results if not r.passed]


def test_path_continuity(rng):
    P, Q = geo.random_points(rng, 1)
    s = maps.sigma_q22()
    G0 = cj.symmetrize_metric(cj.random_metric_field(rng), s)(P, Q)[0]
    G1 = cj.symmetrize_metric(cj.random_metric_field(rng), s)(P, Q)[0]
    min_eig, lip = cj.path_continuity(G0, G1, geo.form_matrix(P, Q)[0])
    assert min_eig > 0 and np.isfinite(lip)
