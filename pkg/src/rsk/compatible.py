"""From invariant metrics to anti-invariant compatible almost-complex structures.

All tensors live in the round-metric orthonormal frames of
:func:`rsk.geometry.frame`, so a metric is a symmetric 4x4 matrix ``G``, the
product form is ``OMEGA0`` and endomorphisms act on frame coordinates.
Functions accept single matrices or stacks ``(..., 4, 4)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry as geo
from . import maps
from .errors import ConditioningError, NegativeSpectrumError, PreconditionError
from .report import CheckResult

COND_MAX = 1e8
SPECTRUM_MIN = 1e-10


def _T(M):
    return np.swapaxes(M, -1, -2)


def fro(M):
    return np.sqrt(np.sum(M * M, axis=(-2, -1)))


def endomorphism_A(G, Omega):
    """The endomorphism with ``omega(x, y) = g(A x, y)``, i.e. ``A = -G^-1 Omega``."""
    G = np.asarray(G, dtype=float)
    Omega = np.asarray(Omega, dtype=float)
    if np.max(np.abs(G - _T(G))) > 1e-12 * max(1.0, np.max(np.abs(G))):
        raise PreconditionError("metric matrix is not symmetric")
    cond = np.linalg.cond(G)
    if np.any(cond > COND_MAX):
        raise ConditioningError(f"metric condition number {np.max(cond):.3g} exceeds {COND_MAX:g}")
    return -np.linalg.solve(G, Omega)


def _root_and_inverse(P, G):
    L = np.linalg.cholesky(G)
    Li = np.linalg.inv(L)
    # P~ = L^T P L^-T is symmetric when P is G-self-adjoint
    Pt = _T(L) @ P @ _T(Li)
    scale = np.max(np.abs(Pt), axis=(-2, -1), keepdims=True)
    if np.any(np.max(np.abs(Pt - _T(Pt)), axis=(-2, -1), keepdims=True) > 1e-8 * scale):
        raise PreconditionError("operator is not self-adjoint for the given metric")
    lam, V = np.linalg.eigh(0.5 * (Pt + _T(Pt)))
    if np.any(lam <= SPECTRUM_MIN):
        raise NegativeSpectrumError(f"smallest eigenvalue {np.min(lam):.3g} is not positive")
    r = np.sqrt(lam)
    S = _T(Li) @ (V * r[..., None, :]) @ _T(V) @ _T(L)
    Si = _T(Li) @ (V / r[..., None, :]) @ _T(V) @ _T(L)
    return S, Si


def g_selfadjoint_sqrt(P, G, inverse: bool = False):
    """Unique g-self-adjoint positive square root of ``P`` (or its inverse).

    Computed by congruence with the Cholesky factor of ``G`` followed by a
    symmetric eigendecomposition.
    """
    S, Si = _root_and_inverse(np.asarray(P, dtype=float), np.asarray(G, dtype=float))
    return Si if inverse else S


def retract_J(G, Omega):
    """``J = (-A^2)^(-1/2) A`` for ``A = endomorphism_A(G, Omega)``."""
    A = endomorphism_A(G, Omega)
    return g_selfadjoint_sqrt(-A @ A, G, inverse=True) @ A


def compatible_metric(J, Omega):
    """Matrix of ``omega(., J .)``; this is the embedding of J into metrics."""
    return np.asarray(Omega) @ np.asarray(J)


def j_residuals(J, G, Omega) -> dict:
    """Structural residuals of a retracted J (per-sample maxima)."""
    A = endomorphism_A(G, Omega)
    Si = g_selfadjoint_sqrt(-A @ A, G, inverse=True)
    I = np.eye(4)
    GJ = compatible_metric(J, Omega)
    return {
        "square": float(np.max(fro(J @ J + I))),
        "commute": float(np.max(fro(Si @ A - A @ Si))),
        "metric_symmetry": float(np.max(fro(GJ - _T(GJ)))),
        "min_metric_eigenvalue": float(np.min(np.linalg.eigvalsh(0.5 * (GJ + _T(GJ))))),
        "form_invariance": float(np.max(fro(_T(J) @ Omega @ J - Omega))),
        "defining_identity": float(np.max(fro(_T(A) @ G - Omega))),
        "g_skew": float(np.max(fro(_T(A) @ G + G @ A))),
    }


# --------------------------------------------------------------------------
# metric and endomorphism fields
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricField:
    """A rule ``(P, Q) -> G`` in the standard frames."""

    rule: Callable
    sigma_invariant: str | None = None

    def __call__(self, P, Q):
        G = self.rule(np.atleast_2d(P), np.atleast_2d(Q))
        return G


def round_metric_field() -> MetricField:
    return MetricField(lambda P, Q: np.broadcast_to(np.eye(4), (P.shape[0], 4, 4)).copy(), sigma_invariant="all")


def random_metric_field(rng: np.random.Generator, eps: float = 0.3, spread: float = 0.3) -> MetricField:
    """``g(s, t) = <s, t> + eps <S(x) s, S(x) t>`` with ``S(x)`` affine in the point.

    The point dependence keeps the field from being invariant by accident.
    """
    S0 = rng.standard_normal((6, 6)) / np.sqrt(6.0)
    Sk = spread * rng.standard_normal((6, 6, 6)) / np.sqrt(6.0)

    def rule(P, Q):
        X = np.concatenate([P, Q], axis=1)
        S = S0 + np.einsum("nk,kij->nij", X, Sk)
        B = geo.frame(P, Q)
        SB = np.einsum("nij,naj->nai", S, B)
        return np.eye(4) + eps * np.einsum("nai,nbi->nab", SB, SB)

    return MetricField(rule)


def sigma_frame_matrix(sigma: maps.MapSpec, P, Q):
    """``D[i, j] = <b_i(sigma x), d sigma b_j(x)>``: d sigma between standard frames."""
    return maps.jacobian_matrices(sigma, P, Q)


def symmetrize_metric(g: MetricField, sigma: maps.MapSpec) -> MetricField:
    """Average ``g`` with its pullback by ``sigma``."""

    def rule(P, Q):
        P1, Q1 = maps.evaluate(sigma, P, Q)
        D = sigma_frame_matrix(sigma, P, Q)
        return 0.5 * (g(P, Q) + _T(D) @ g(P1, Q1) @ D)

    return MetricField(rule, sigma_invariant=sigma.kind)


def endo_field(g: MetricField, role: str = "J") -> Callable:
    """Endomorphism field built from a metric field: role A, J, sqrt or inv_sqrt."""

    def rule(P, Q):
        G = g(P, Q)
        Om = geo.form_matrix(np.atleast_2d(P), np.atleast_2d(Q))
        A = endomorphism_A(G, Om)
        if role == "A":
            return A
        S, Si = _root_and_inverse(-A @ A, G)
        if role == "sqrt":
            return S
        if role == "inv_sqrt":
            return Si
        if role == "J":
            return Si @ A
        raise ValueError(role)

    return rule


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------

def check_metric_invariance(g: MetricField, sigma: maps.MapSpec, samples: int, rng, tol: float = 1e-8
                            ) -> CheckResult:
    P, Q = geo.random_points(rng, samples)
    P1, Q1 = maps.evaluate(sigma, P, Q)
    D = sigma_frame_matrix(sigma, P, Q)
    err = float(np.max(fro(_T(D) @ g(P1, Q1) @ D - g(P, Q))))
    return CheckResult("compatible_j", "metric_invariance", err <= tol, samples=samples, max_residual=err,
                       tolerance=tol, params={"sigma": sigma.name})


def check_anti_invariance_J(field: Callable, sigma: maps.MapSpec, samples: int, rng, sign: int = -1,
                            tol: float = 1e-7, label: str = "J") -> CheckResult:
    """``d sigma o E(x) = sign * E(sigma x) o d sigma`` at random samples.

    ``sign = -1`` is anti-invariance (J and A); ``+1`` is used for the roots.
    """
    P, Q = geo.random_points(rng, samples)
    P1, Q1 = maps.evaluate(sigma, P, Q)
    D = sigma_frame_matrix(sigma, P, Q)
    E0 = field(P, Q)
    E1 = field(P1, Q1)
    err = float(np.max(fro(D @ E0 - sign * E1 @ D)))
    return CheckResult("compatible_j", f"sigma_relation_{label}", err <= tol, samples=samples, max_residual=err,
                       tolerance=tol, params={"sigma": sigma.name, "sign": sign})


def random_symplectic(rng: np.random.Generator, n: int, scale: float = 0.5):
    """Random elements of Sp(4) preserving ``OMEGA0`` via the Cayley transform."""
    H = rng.standard_normal((n, 4, 4)) * scale
    H = 0.5 * (H + _T(H))
    X = np.linalg.solve(geo.OMEGA0, H)
    I = np.eye(4)
    return np.linalg.solve(I - 0.5 * X, I + 0.5 * X)


def random_compatible_J(rng: np.random.Generator, n: int):
    """Random omega-compatible structures ``Phi J0 Phi^-1`` with ``Phi`` symplectic."""
    Phi = random_symplectic(rng, n)
    return Phi @ geo.J0 @ np.linalg.inv(Phi)


def retraction_suite(rng, samples: int = 500, sigmas=None, tol_square: float = 1e-8, tol_anti: float = 1e-7,
                     tol_retract: float = 1e-8, tol_scale: float = 1e-8, scales=(1e-3, 1e3)) -> list:
    """Run the retraction checks on random sigma-invariant metrics.

    Each sample draws a fresh random metric field, symmetrizes it and
    evaluates it at one random point and at that point's image.
    """
    if sigmas is None:
        sigmas = (maps.sigma_q22(), maps.sigma_q40())
    results = []
    for sigma in sigmas:
        P, Q = geo.random_points(rng, samples)
        P1, Q1 = maps.evaluate(sigma, P, Q)
        D = sigma_frame_matrix(sigma, P, Q)
        Om0 = geo.form_matrix(P, Q)
        Om1 = geo.form_matrix(P1, Q1)
        G0 = np.empty((samples, 4, 4))
        G1 = np.empty((samples, 4, 4))
        for i in range(samples):
            gbar = symmetrize_metric(random_metric_field(rng), sigma)
            G0[i] = gbar(P[i:i + 1], Q[i:i + 1])[0]
            G1[i] = gbar(P1[i:i + 1], Q1[i:i + 1])[0]
        inv_err = float(np.max(fro(_T(D) @ G1 @ D - G0)))
        J0 = retract_J(G0, Om0)
        J1 = retract_J(G1, Om1)
        res = j_residuals(J0, G0, Om0)
        A0, A1 = endomorphism_A(G0, Om0), endomorphism_A(G1, Om1)
        R0, R1 = g_selfadjoint_sqrt(-A0 @ A0, G0), g_selfadjoint_sqrt(-A1 @ A1, G1)
        anti_J = float(np.max(fro(D @ J0 + J1 @ D)))
        anti_A = float(np.max(fro(D @ A0 + A1 @ D)))
        comm_R = float(np.max(fro(D @ R0 - R1 @ D)))
        back = retract_J(compatible_metric(J0, Om0), Om0)
        retract_err = float(np.max(fro(back - J0)))
        Jc = random_compatible_J(rng, samples)
        retract_err_conj = float(np.max(fro(retract_J(compatible_metric(Jc, Om0), Om0) - Jc)))
        scale_err = max(float(np.max(fro(retract_J(c * G0, Om0) - J0))) for c in scales)
        name = sigma.name
        common = {"sigma": name}
        results += [
            CheckResult("compatible_j", "metric_invariance", inv_err <= 1e-8, samples, inv_err, tolerance=1e-8,
                        params=common),
            CheckResult("compatible_j", "J_squared", res["square"] <= tol_square, samples, res["square"],
                        tolerance=tol_square, params=common),
            CheckResult("compatible_j", "A_defining_identity", res["defining_identity"] <= 1e-10, samples,
                        res["defining_identity"], tolerance=1e-10, params=common),
            CheckResult("compatible_j", "A_g_skew", res["g_skew"] <= 1e-10, samples, res["g_skew"],
                        tolerance=1e-10, params=common),
            CheckResult("compatible_j", "root_commutes_with_A", res["commute"] <= 1e-9, samples, res["commute"],
                        tolerance=1e-9, params=common),
            CheckResult("compatible_j", "compatibility_positive",
                        res["min_metric_eigenvalue"] > 0.0 and res["metric_symmetry"] <= 1e-9, samples,
                        res["metric_symmetry"], value={"min_eigenvalue": res["min_metric_eigenvalue"]},
                        tolerance=1e-9, params=common),
            CheckResult("compatible_j", "form_invariance", res["form_invariance"] <= 1e-9, samples,
                        res["form_invariance"], tolerance=1e-9, params=common),
            CheckResult("compatible_j", "anti_invariance_J", anti_J <= tol_anti, samples, anti_J,
                        tolerance=tol_anti, params=common),
            CheckResult("compatible_j", "anti_invariance_A", anti_A <= tol_anti, samples, anti_A,
                        tolerance=tol_anti, params=common),
            CheckResult("compatible_j", "root_commutes_with_sigma", comm_R <= tol_anti, samples, comm_R,
                        tolerance=tol_anti, params=common),
            CheckResult("compatible_j", "retraction_identity", max(retract_err, retract_err_conj) <= tol_retract,
                        samples, max(retract_err, retract_err_conj), tolerance=tol_retract,
                        value={"from_retracted": retract_err, "from_conjugated_J0": retract_err_conj},
                        params=common),
            CheckResult("compatible_j", "scale_invariance", scale_err <= tol_scale, samples, scale_err,
                        tolerance=tol_scale, params={**common, "scales": list(scales)}),
        ]
    return results


def path_continuity(G0, G1, Omega, steps: int = 100):
    """J along the straight metric path; returns (min eigenvalue along path, Lipschitz estimate)."""
    ts = np.linspace(0.0, 1.0, steps + 1)
    Gs = np.array([(1 - t) * G0 + t * G1 for t in ts])
    min_eig = float(np.min(np.linalg.eigvalsh(Gs)))
    Js = retract_J(Gs, np.broadcast_to(Omega, Gs.shape))
    jumps = fro(np.diff(Js, axis=0)) / (1.0 / steps)
    return min_eig, float(np.max(jumps))
