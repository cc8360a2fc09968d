"""Involutions and diffeomorphisms of S2 x S2, and the checks run on them.

Maps are described by immutable :class:`MapSpec` values and evaluated in
batches on ``(N, 3)`` point arrays. ``Compose((f, g))`` means ``f o g``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import ConstructionUnavailable, NondegeneracyError, PreconditionError, RoundingAmbiguous
from .kernels import twist_apply
from .report import CheckResult

MIRROR = np.array([1.0, 1.0, -1.0])
KINDS = ("identity", "sigma_q22", "sigma_q40", "twist", "reflect_f", "power", "compose")
INVOLUTIONS = ("sigma_q22", "sigma_q40", "reflect_f", "identity")


@dataclass(frozen=True)
class MapSpec:
    kind: str
    m: int = 0
    delta: float = 0.5
    k: int = 1
    children: tuple = ()
    inverse: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind == "twist":
            if int(self.m) != self.m or self.m % 2:
                raise ConstructionUnavailable(f"twist needs an even m, got {self.m}")
            if not 0.0 < self.delta < 5.0:
                raise PreconditionError("band half-width delta must lie in (0, 5)")
        if self.kind == "power" and len(self.children) != 1:
            raise ValueError("power takes exactly one base map")
        if self.kind == "compose" and not self.children:
            raise ValueError("compose needs at least one map")

    @property
    def has_analytic(self) -> bool:
        return all(c.has_analytic for c in self.children)

    @property
    def name(self) -> str:
        if self.kind == "twist":
            return f"Twist(m={self.m}, delta={self.delta}{', inv' if self.inverse else ''})"
        if self.kind == "power":
            return f"{self.children[0].name}^{self.k}"
        if self.kind == "compose":
            return " o ".join(c.name for c in self.children)
        return {"sigma_q22": "SigmaQ22", "sigma_q40": "SigmaQ40", "reflect_f": "ReflectF"}.get(self.kind, "Id")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "twist":
            d.update(m=self.m, delta=self.delta, inverse=self.inverse)
        if self.kind == "power":
            d["k"] = self.k
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "MapSpec":
        children = tuple(cls.from_dict(c) for c in d.get("children", ()))
        return cls(
            kind=d["kind"],
            m=int(d.get("m", 0)),
            delta=float(d.get("delta", d.get("δ", 0.5))),
            k=int(d.get("k", 1)),
            children=children,
            inverse=bool(d.get("inverse", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "MapSpec":
        return cls.from_dict(json.loads(text))


def identity() -> MapSpec:
    return MapSpec("identity")


def sigma_q22() -> MapSpec:
    return MapSpec("sigma_q22")


def sigma_q40() -> MapSpec:
    return MapSpec("sigma_q40")


def twist(m: int = 2, delta: float = 0.5) -> MapSpec:
    return MapSpec("twist", m=m, delta=delta)


def reflect_f() -> MapSpec:
    return MapSpec("reflect_f")


def power(base: MapSpec, k: int) -> MapSpec:
    return MapSpec("power", k=int(k), children=(base,))


def compose(*maps: MapSpec) -> MapSpec:
    return MapSpec("compose", children=tuple(maps))


def inverse(spec: MapSpec) -> MapSpec:
    if spec.kind in INVOLUTIONS:
        return spec
    if spec.kind == "twist":
        return MapSpec("twist", m=spec.m, delta=spec.delta, inverse=not spec.inverse)
    if spec.kind == "power":
        return power(spec.children[0], -spec.k)
    return compose(*(inverse(c) for c in reversed(spec.children)))


# --------------------------------------------------------------------------
# batched evaluation with optional tangent push
# --------------------------------------------------------------------------

def _apply(spec, P, Q, S):
    kind = spec.kind
    if kind == "identity":
        return P, Q, S
    if kind == "sigma_q22":
        return P * MIRROR, Q * MIRROR, (None if S is None else S * np.tile(MIRROR, 2))
    if kind == "sigma_q40":
        return -P, -Q, (None if S is None else -S)
    if kind == "reflect_f":
        xy = np.sum(P * Q, axis=1, keepdims=True)
        P1 = -P + 2.0 * xy * Q
        if S is None:
            return P1, Q, None
        U, V = S[:, :3], S[:, 3:]
        dxy = np.sum(U * Q, axis=1, keepdims=True) + np.sum(P * V, axis=1, keepdims=True)
        U1 = -U + 2.0 * dxy * Q + 2.0 * xy * V
        return P1, Q, np.concatenate([U1, V], axis=1)
    if kind == "twist":
        if S is None:
            P1, _ = twist_apply(P, Q, m=spec.m, delta=spec.delta, inverse=spec.inverse)
            return P1, Q, None
        P1, U1 = twist_apply(P, Q, S[:, :3], S[:, 3:], m=spec.m, delta=spec.delta, inverse=spec.inverse)
        return P1, Q, np.concatenate([U1, S[:, 3:]], axis=1)
    if kind == "power":
        base = spec.children[0] if spec.k >= 0 else inverse(spec.children[0])
        for _ in range(abs(spec.k)):
            P, Q, S = _apply(base, P, Q, S)
        return P, Q, S
    if kind == "compose":
        for child in reversed(spec.children):
            P, Q, S = _apply(child, P, Q, S)
        return P, Q, S
    raise ValueError(kind)  # pragma: no cover


def _renormalize(X):
    n = np.linalg.norm(X, axis=1, keepdims=True)
    if np.max(np.abs(n - 1.0), initial=0.0) > geo.RENORM_TOL:
        raise PreconditionError("map output drifted off the sphere")
    return X / n


def apply(spec: MapSpec, P, Q, S=None):
    """Evaluate ``spec`` at points ``(P, Q)``; push tangents ``S`` (N, 6) if given."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if S is not None:
        S = np.atleast_2d(np.asarray(S, dtype=float))
    P1, Q1, S1 = _apply(spec, P, Q, S)
    return _renormalize(P1), _renormalize(Q1), S1


def evaluate(spec: MapSpec, P, Q):
    P1, Q1, _ = apply(spec, P, Q)
    return P1, Q1


def push_tangent(spec: MapSpec, P, Q, S):
    return apply(spec, P, Q, S)[2]


def fro(M):
    """Per-sample Frobenius norm of a stack of matrices."""
    return np.sqrt(np.sum(M * M, axis=(-2, -1)))


def distance(P, Q, P1, Q1):
    """Product distance: the larger of the two factor distances."""
    return np.maximum(np.linalg.norm(P - P1, axis=-1), np.linalg.norm(Q - Q1, axis=-1))


# --------------------------------------------------------------------------
# single-point evaluators
# --------------------------------------------------------------------------

def _eval_point(spec, pt: geo.ProductPoint) -> geo.ProductPoint:
    p, q = pt.arrays
    P1, Q1 = evaluate(spec, p[None], q[None])
    return geo.ProductPoint.from_arrays(P1[0], Q1[0])


def eval_sigma_q22(pt: geo.ProductPoint) -> geo.ProductPoint:
    return _eval_point(sigma_q22(), pt)


def eval_sigma_q40(pt: geo.ProductPoint) -> geo.ProductPoint:
    return _eval_point(sigma_q40(), pt)


def eval_twist(m: int, delta: float, pt: geo.ProductPoint) -> geo.ProductPoint:
    return _eval_point(twist(m, delta), pt)


def eval_reflect_f(pt: geo.ProductPoint) -> geo.ProductPoint:
    return _eval_point(reflect_f(), pt)


def _inv_conj(z, sign):
    if z is None or np.isinf(z):
        return 0j
    if z == 0:
        return geo.INF
    return sign / np.conj(complex(z))


def sigma_q22_stereo(z, w):
    """Chart form ``(z, w) -> (1/conj(z), 1/conj(w))``."""
    return _inv_conj(z, 1.0), _inv_conj(w, 1.0)


def sigma_q40_stereo(z, w):
    """Chart form ``(z, w) -> (-1/conj(z), -1/conj(w))``."""
    return _inv_conj(z, -1.0), _inv_conj(w, -1.0)


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------

def check_equivariance(f: MapSpec, sigma: MapSpec, samples: int, rng, tol: float = 1e-9) -> CheckResult:
    P, Q = geo.random_points(rng, samples)
    A = evaluate(f, *evaluate(sigma, P, Q))
    B = evaluate(sigma, *evaluate(f, P, Q))
    err = float(np.max(distance(*A, *B)))
    return CheckResult(
        "maps", "equivariance", err <= tol, samples=samples, max_residual=err, tolerance=tol,
        params={"f": f.name, "sigma": sigma.name},
    )


def check_involution(sigma: MapSpec, samples: int, rng, tol: float = 1e-12) -> CheckResult:
    P, Q = geo.random_points(rng, samples)
    err = float(np.max(distance(P, Q, *evaluate(power(sigma, 2), P, Q))))
    return CheckResult("maps", "involution", err <= tol, samples=samples, max_residual=err, tolerance=tol,
                       params={"sigma": sigma.name})


def check_antisymplectic(sigma: MapSpec, samples: int, rng, mode: str = "analytic", tol: float | None = None,
                         ) -> CheckResult:
    if tol is None:
        tol = 1e-8 if mode == "analytic" else 1e-5
    P, Q = geo.random_points(rng, samples)
    M = geo.pullback_matrix(sigma, P, Q, mode=mode)
    err = float(np.max(fro(M + geo.OMEGA0)))
    return CheckResult("maps", "antisymplectic", err <= tol, samples=samples, max_residual=err, tolerance=tol,
                       params={"sigma": sigma.name, "mode": mode})


def pushforward_form_check(f: MapSpec, k: int, sigma: MapSpec, samples: int, rng, mode: str = "finite_difference",
                           tol: float = 1e-5, det_tol: float = 1e-10) -> CheckResult:
    """Check that ``(f^k)_* omega`` is symplectic and sigma-anti-invariant at samples.

    The pushforward is the pullback by ``f^-k``; anti-invariance compares the
    pullbacks by ``f^-k o sigma`` and ``f^-k``.
    """
    notes = []
    if k != 0:
        eq = check_equivariance(f, sigma, min(samples, 2000), rng)
        if not eq.passed:
            return CheckResult("maps", "pushforward_form", False, samples=samples, max_residual=eq.max_residual,
                               params={"f": f.name, "k": k, "sigma": sigma.name},
                               notes=["precondition failed: f is not sigma-equivariant"])
    P, Q = geo.random_points(rng, samples)
    g = inverse(power(f, k)) if k != 0 else identity()
    B = geo.frame(P, Q)
    W = geo.pullback_matrix(g, P, Q, mode=mode, B=B)
    Ws = geo.pullback_matrix(compose(g, sigma), P, Q, mode=mode, B=B)
    dets = np.linalg.det(W)
    bad = np.flatnonzero(np.abs(dets) < det_tol)
    if bad.size:
        i = int(bad[0])
        raise NondegeneracyError(
            f"pushed-forward form degenerate (det {dets[i]:.3e})",
            point=geo.ProductPoint.from_arrays(P[i], Q[i]),
        )
    skew = float(np.max(fro(W + np.swapaxes(W, 1, 2))))
    anti = float(np.max(fro(Ws + W)))
    err = max(skew, anti)
    notes.append(f"min |det| = {float(np.min(np.abs(dets))):.6g}")
    return CheckResult("maps", "pushforward_form", err <= tol, samples=samples, max_residual=err, tolerance=tol,
                       params={"f": f.name, "k": k, "sigma": sigma.name, "mode": mode}, notes=notes)


# --------------------------------------------------------------------------
# action on H2 via numerical mapping degrees
# --------------------------------------------------------------------------

DEFAULT_Z0 = np.array([0.3, -0.5, 0.8]) / np.linalg.norm([0.3, -0.5, 0.8])
DEFAULT_W0 = np.array([-0.6, 0.2, 0.5]) / np.linalg.norm([-0.6, 0.2, 0.5])


def sphere_grid(n: int):
    """Gauss-Legendre in latitude x trapezoid in longitude.

    Returns points, the two coordinate tangents, and quadrature weights.
    """
    x, wx = np.polynomial.legendre.leggauss(n)
    theta = 0.5 * math.pi * (x + 1.0)
    wt = 0.5 * math.pi * wx
    phi = 2.0 * math.pi * np.arange(n) / n
    T, F = np.meshgrid(theta, phi, indexing="ij")
    T, F = T.ravel(), F.ravel()
    st, ct, sf, cf = np.sin(T), np.cos(T), np.sin(F), np.cos(F)
    Y = np.stack([st * cf, st * sf, ct], axis=1)
    Yt = np.stack([ct * cf, ct * sf, -st], axis=1)
    Yf = np.stack([-st * sf, st * cf, np.zeros_like(st)], axis=1)
    weights = np.repeat(wt, n) * (2.0 * math.pi / n)
    return Y, Yt, Yf, weights


def sphere_degrees(f: MapSpec, which: str, n: int, z0=DEFAULT_Z0, w0=DEFAULT_W0):
    """Degrees of ``pr_j o f o inclusion`` for the sphere ``which`` in {"A", "B"}.

    ``A = {z0} x S2`` and ``B = S2 x {w0}``. Returns the raw (unrounded) degrees
    onto the first and the second factor.
    """
    Y, Yt, Yf, wts = sphere_grid(n)
    zero = np.zeros_like(Y)
    if which == "A":
        P, Q = np.broadcast_to(z0, Y.shape).copy(), Y
        St, Sf = np.concatenate([zero, Yt], 1), np.concatenate([zero, Yf], 1)
    elif which == "B":
        P, Q = Y, np.broadcast_to(w0, Y.shape).copy()
        St, Sf = np.concatenate([Yt, zero], 1), np.concatenate([Yf, zero], 1)
    else:
        raise ValueError(which)
    P1, Q1, Wt = apply(f, P, Q, St)
    Wf = push_tangent(f, P, Q, Sf)
    d1 = np.sum(wts * np.sum(P1 * np.cross(Wt[:, :3], Wf[:, :3]), axis=1)) / (4.0 * math.pi)
    d2 = np.sum(wts * np.sum(Q1 * np.cross(Wt[:, 3:], Wf[:, 3:]), axis=1)) / (4.0 * math.pi)
    return float(d1), float(d2)


def h2_action_degrees(f: MapSpec, grid: int = 256, max_grid: int = 2048, residue_tol: float = 0.1):
    """Integer matrix of ``f_*`` on H2 in the basis (A, B), with diagnostics.

    Column j holds the image of the j-th basis class; the A-coefficient is the
    degree onto the second factor and the B-coefficient the degree onto the
    first. Returns ``(matrix, info)``.
    """
    n = grid
    while True:
        a1, a2 = sphere_degrees(f, "A", n)
        b1, b2 = sphere_degrees(f, "B", n)
        raw = np.array([[a2, b2], [a1, b1]])
        rounded = np.rint(raw)
        residue = float(np.max(np.abs(raw - rounded)))
        if residue < residue_tol:
            return rounded.astype(int), {"grid": n, "residue": residue, "raw": raw}
        if n * 2 > max_grid:
            raise RoundingAmbiguous(f"degree residue {residue:.3g} at grid {n}")
        n *= 2


# --------------------------------------------------------------------------
# the quotient Z = X2 / sigma_q40
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuotientPoint:
    representative: geo.ProductPoint


def canonicalize(P, Q, tol: float = 1e-12):
    """Pick the lift whose first non-negligible coordinate is positive."""
    X = np.concatenate([np.atleast_2d(P), np.atleast_2d(Q)], axis=1)
    big = np.abs(X) > tol
    first = np.argmax(big, axis=1)
    lead = X[np.arange(X.shape[0]), first]
    sign = np.where(lead < 0.0, -1.0, 1.0)[:, None]
    X = X * sign
    return X[:, :3], X[:, 3:]


def quotient_map(pt: geo.ProductPoint) -> QuotientPoint:
    p, q = pt.arrays
    P, Q = canonicalize(p, q)
    return QuotientPoint(geo.ProductPoint.from_arrays(P[0], Q[0]))


def descend_g(qpt: QuotientPoint) -> QuotientPoint:
    return quotient_map(eval_reflect_f(qpt.representative))


def check_quotient_diagram(samples: int, rng, tol: float = 1e-12) -> CheckResult:
    """quotient o f = g o quotient, and f(-x, -y) = -f(x, y)."""
    P, Q = geo.random_points(rng, samples)
    f = reflect_f()
    lhs = canonicalize(*evaluate(f, P, Q))
    rhs = canonicalize(*evaluate(f, *canonicalize(P, Q)))
    diag = float(np.max(distance(*lhs, *rhs)))
    F1 = evaluate(f, P, Q)
    F2 = evaluate(f, -P, -Q)
    well = float(np.max(distance(-F1[0], -F1[1], *F2)))
    err = max(diag, well)
    return CheckResult("maps", "quotient_diagram", err <= tol, samples=samples, max_residual=err, tolerance=tol,
                       value={"diagram": diag, "well_defined": well})


def check_g_fixes_diagonal(samples: int, rng, tol: float = 1e-14) -> CheckResult:
    X = geo.random_sphere(rng, samples)
    P1, Q1 = evaluate(reflect_f(), X, X)
    err = float(np.max(distance(X, X, P1, Q1)))
    return CheckResult("maps", "g_fixes_diagonal", err <= tol, samples=samples, max_residual=err, tolerance=tol)


def diagonal_projection(P, Q, onto: str = "second"):
    """``(x, y) -> (y, y)`` (``onto="second"``) or ``(x, x)``."""
    X = Q if onto == "second" else P
    return X.copy(), X.copy()


def check_projection_commutes(samples: int, rng, onto: str = "second", tol: float = 1e-12) -> CheckResult:
    """Does the fibration ``Z -> Q`` commute with ``g``?

    Only the projection through the second factor does; it is the one whose
    fibers ``g`` preserves.
    """
    P, Q = geo.random_points(rng, samples)
    f = reflect_f()
    A = diagonal_projection(*evaluate(f, P, Q), onto=onto)
    B = evaluate(f, *diagonal_projection(P, Q, onto=onto))
    err = float(np.max(distance(*A, *B)))
    return CheckResult("maps", f"projection_commutes_{onto}", err <= tol, samples=samples, max_residual=err,
                       tolerance=tol)


# --------------------------------------------------------------------------
# fixed loci, torus restriction, Jacobians
# --------------------------------------------------------------------------

def torus_points(alpha, beta):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    z = np.zeros_like(alpha)
    return (np.stack([np.cos(alpha), np.sin(alpha), z], -1), np.stack([np.cos(beta), np.sin(beta), z], -1))


def fixed_locus_scan(sigma: MapSpec, rng, samples: int = 10_000, torus_grid: int = 64, fixed_tol: float = 1e-8
                     ) -> CheckResult:
    a = 2.0 * math.pi * np.arange(torus_grid) / torus_grid
    A, Bt = np.meshgrid(a, a, indexing="ij")
    Pt, Qt = torus_points(A.ravel(), Bt.ravel())
    Pr, Qr = geo.random_points(rng, samples)
    P = np.concatenate([Pt, Pr])
    Q = np.concatenate([Qt, Qr])
    disp = distance(P, Q, *evaluate(sigma, P, Q))
    fixed = disp <= fixed_tol
    on_torus = (np.abs(P[:, 2]) <= fixed_tol) & (np.abs(Q[:, 2]) <= fixed_tol)
    torus_disp = float(np.max(disp[: Pt.shape[0]]))
    value = {
        "fixed_count": int(fixed.sum()),
        "fixed_on_torus": bool(np.all(on_torus[fixed])),
        "torus_max_displacement": torus_disp,
        "min_displacement_off_torus": float(np.min(disp[Pt.shape[0]:])),
    }
    if sigma.kind == "sigma_q22":
        first = np.linalg.norm(Pr - evaluate(sigma, Pr, Qr)[0], axis=1)
        value["first_factor_formula_residual"] = float(np.max(np.abs(first - 2.0 * np.abs(Pr[:, 2]))))
        passed = value["fixed_on_torus"] and torus_disp <= 1e-12 and value["first_factor_formula_residual"] <= 1e-12
        desc = "torus {x3 = 0} x {y3 = 0}, pointwise fixed"
    else:
        passed = value["fixed_count"] == 0
        desc = "empty" if passed else "non-empty"
    value["description"] = desc
    return CheckResult("maps", "fixed_locus", passed, samples=samples + Pt.shape[0], value=value,
                       params={"sigma": sigma.name})


def check_twist_on_torus(m: int, delta: float, k: int = 1, n: int = 100, tol: float = 1e-9) -> CheckResult:
    """``f^k`` on L against ``(alpha, beta) -> (alpha + k m beta, beta)``."""
    a = 2.0 * math.pi * np.arange(n) / n - math.pi
    A, Bt = np.meshgrid(a, a, indexing="ij")
    A, Bt = A.ravel(), Bt.ravel()
    P, Q = torus_points(A, Bt)
    Pe, Qe = torus_points(A + k * m * Bt, Bt)
    err = float(np.max(distance(*evaluate(power(twist(m, delta), k), P, Q), Pe, Qe)))
    return CheckResult("maps", "twist_on_torus", err <= tol, samples=n * n, max_residual=err, tolerance=tol,
                       params={"m": m, "delta": delta, "k": k})


def check_twist_poles(m: int, delta: float, samples: int, rng, tol: float = 1e-12) -> CheckResult:
    P = geo.random_sphere(rng, samples)
    err = 0.0
    for pole in (-1.0, 1.0):
        Q = np.tile([0.0, 0.0, pole], (samples, 1))
        err = max(err, float(np.max(distance(P, Q, *evaluate(twist(m, delta), P, Q)))))
    return CheckResult("maps", "twist_identity_at_poles", err <= tol, samples=2 * samples, max_residual=err,
                       tolerance=tol, params={"m": m, "delta": delta})


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    ang = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=1)


def jacobian_matrices(f: MapSpec, P, Q):
    """Differential of ``f`` as 4x4 matrices between the frames at x and f(x)."""
    B = geo.frame(P, Q)
    P1, Q1 = evaluate(f, P, Q)
    B1 = geo.frame(P1, Q1)
    cols = [push_tangent(f, P, Q, B[:, j, :]) for j in range(4)]
    D = np.stack([np.einsum("nik,nk->ni", B1, c) for c in cols], axis=2)
    return D


def check_jacobian(f: MapSpec, n_side: int = 100, tol: float = 1e-3) -> CheckResult:
    X = fibonacci_sphere(n_side)
    P = np.repeat(X, n_side, axis=0)
    Q = np.tile(X, (n_side, 1))
    dets = np.linalg.det(jacobian_matrices(f, P, Q))
    mn = float(np.min(dets))
    return CheckResult("maps", "jacobian_determinant", mn > tol, samples=P.shape[0], value={"min_det": mn},
                       tolerance=tol, params={"f": f.name})


def check_differential_modes(f: MapSpec, samples: int, rng, tol: float = 1e-6, h: float = geo.FD_STEP
                             ) -> CheckResult:
    """Analytic differential against central differences on unit tangents."""
    P, Q = geo.random_points(rng, samples)
    B = geo.frame(P, Q)
    c = rng.standard_normal((samples, 4))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    S = np.einsum("ni,nik->nk", c, B)
    A = push_tangent(f, P, Q, S)
    F = geo.fd_differential(lambda a, b: evaluate(f, a, b), P, Q, S, h=h)
    err = float(np.max(np.abs(A - F)))
    return CheckResult("geometry", "differential_modes", err <= tol, samples=samples, max_residual=err,
                       tolerance=tol, params={"f": f.name})
