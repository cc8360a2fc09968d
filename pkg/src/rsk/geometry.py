"""Points, charts, the product form and the round metric on S2 x S2.

Single points are wrapped in small frozen dataclasses; every numeric routine
also has a batched form acting on ``(N, 3)`` arrays, which is what the checks
use.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

UNIT_TOL = 1e-12
RENORM_TOL = 1e-9
TANGENT_TOL = 1e-8
POLE_EPS = 1e-6
FD_STEP = 1e-5

#: Matrix of the product form in any frame returned by :func:`frame`.
OMEGA0 = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)
#: Product complex structure in the same frames (v -> x cross v on each factor).
J0 = -OMEGA0


@dataclass(frozen=True)
class UnitVec3:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        n = math.sqrt(self.x1**2 + self.x2**2 + self.x3**2)
        if abs(n - 1.0) > RENORM_TOL:
            raise PreconditionError(f"not a unit vector (norm {n!r})")
        if abs(n - 1.0) > UNIT_TOL:
            object.__setattr__(self, "x1", self.x1 / n)
            object.__setattr__(self, "x2", self.x2 / n)
            object.__setattr__(self, "x3", self.x3 / n)

    @classmethod
    def normalized(cls, v) -> "UnitVec3":
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise PreconditionError("cannot normalize the zero vector")
        v = v / n
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])


@dataclass(frozen=True)
class ProductPoint:
    p: UnitVec3
    q: UnitVec3

    @classmethod
    def from_arrays(cls, p, q) -> "ProductPoint":
        return cls(UnitVec3.normalized(p), UnitVec3.normalized(q))

    @property
    def arrays(self):
        return self.p.array, self.q.array


@dataclass(frozen=True)
class TangentPair:
    u: tuple
    v: tuple

    @classmethod
    def at(cls, pt: ProductPoint, u, v, tol: float = 1e-10) -> "TangentPair":
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        p, q = pt.arrays
        if abs(u @ p) > tol or abs(v @ q) > tol:
            raise PreconditionError("tangent pair is not tangent at the base point")
        return cls(tuple(u), tuple(v))

    @property
    def arrays(self):
        return np.array(self.u), np.array(self.v)


# --------------------------------------------------------------------------
# stereographic chart  z = (x1 + i x2) / (1 - x3)
# --------------------------------------------------------------------------

INF = complex("inf")


def stereo_to_cartesian(z) -> UnitVec3:
    """Inverse stereographic projection; ``z = inf`` is the north pole."""
    if z is None or cmath.isinf(z):
        return UnitVec3(0.0, 0.0, 1.0)
    z = complex(z)
    r2 = abs(z) ** 2
    d = 1.0 + r2
    return UnitVec3(2.0 * z.real / d, 2.0 * z.imag / d, (r2 - 1.0) / d)


def cartesian_to_stereo(x: UnitVec3) -> complex:
    if x.x3 >= 1.0 - 1e-15:
        return INF
    return complex(x.x1, x.x2) / (1.0 - x.x3)


def stereo_batch(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (X[:, 0] + 1j * X[:, 1]) / (1.0 - X[:, 2])


def cartesian_batch(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    r2 = np.abs(Z) ** 2
    d = 1.0 + r2
    return np.stack([2.0 * Z.real / d, 2.0 * Z.imag / d, (r2 - 1.0) / d], axis=-1)


# --------------------------------------------------------------------------
# sampling and frames
# --------------------------------------------------------------------------

def random_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    X = rng.standard_normal((n, 3))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def random_points(rng: np.random.Generator, n: int):
    P = random_sphere(rng, n)
    Q = random_sphere(rng, n)
    return P, Q


def sphere_frame(X: np.ndarray):
    """Oriented orthonormal tangent frames (a1, a2) with a1 x a2 = x."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    ref = np.zeros_like(X)
    use_e2 = np.abs(X[:, 0]) > 0.9
    ref[~use_e2, 0] = 1.0
    ref[use_e2, 1] = 1.0
    a1 = ref - np.sum(ref * X, axis=1, keepdims=True) * X
    a1 /= np.linalg.norm(a1, axis=1, keepdims=True)
    a2 = np.cross(X, a1)
    return a1, a2


def frame(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Frames at product points as an ``(N, 4, 6)`` array of ambient vectors.

    The product form reads ``OMEGA0`` and the round metric the identity in
    these frames.
    """
    P = np.atleast_2d(P)
    Q = np.atleast_2d(Q)
    a1, a2 = sphere_frame(P)
    c1, c2 = sphere_frame(Q)
    n = P.shape[0]
    B = np.zeros((n, 4, 6))
    B[:, 0, :3] = a1
    B[:, 1, :3] = a2
    B[:, 2, 3:] = c1
    B[:, 3, 3:] = c2
    return B


# --------------------------------------------------------------------------
# form and metric
# --------------------------------------------------------------------------

def _check_tangent(P, Q, S, tol=TANGENT_TOL):
    if np.max(np.abs(np.sum(S[..., :3] * P, axis=-1)), initial=0.0) > tol or np.max(
        np.abs(np.sum(S[..., 3:] * Q, axis=-1)), initial=0.0
    ) > tol:
        raise PreconditionError("vectors are not tangent at the base points")


def product_form_batch(P, Q, S, T, check=True):
    """Equal-area product form on ambient 6-vectors ``S``, ``T`` at ``(P, Q)``."""
    if check:
        _check_tangent(P, Q, S)
        _check_tangent(P, Q, T)
    return np.sum(P * np.cross(S[..., :3], T[..., :3]), axis=-1) + np.sum(
        Q * np.cross(S[..., 3:], T[..., 3:]), axis=-1
    )


def product_form(at: ProductPoint, s: TangentPair, t: TangentPair) -> float:
    p, q = at.arrays
    S = np.concatenate(s.arrays)
    T = np.concatenate(t.arrays)
    return float(product_form_batch(p, q, S, T))


def round_metric(at: ProductPoint, s: TangentPair, t: TangentPair) -> float:
    p, q = at.arrays
    S = np.concatenate(s.arrays)
    T = np.concatenate(t.arrays)
    _check_tangent(p, q, S)
    _check_tangent(p, q, T)
    return float(S @ T)


def form_matrix(P, Q, B=None):
    """Matrix of the product form in the frame ``B`` (defaults to :func:`frame`)."""
    if B is None:
        B = frame(P, Q)
    Pn = P[:, None, None, :]
    Qn = Q[:, None, None, :]
    cr1 = np.cross(B[:, :, None, :3], B[:, None, :, :3])
    cr2 = np.cross(B[:, :, None, 3:], B[:, None, :, 3:])
    return np.sum(Pn * cr1, axis=-1) + np.sum(Qn * cr2, axis=-1)


def pfaffian4(M: np.ndarray) -> np.ndarray:
    return M[..., 0, 1] * M[..., 2, 3] - M[..., 0, 2] * M[..., 1, 3] + M[..., 0, 3] * M[..., 1, 2]


# --------------------------------------------------------------------------
# differentials
# --------------------------------------------------------------------------

def project_tangent(P, Q, W):
    W = np.array(W, dtype=float, copy=True)
    W[..., :3] -= np.sum(W[..., :3] * P, axis=-1, keepdims=True) * P
    W[..., 3:] -= np.sum(W[..., 3:] * Q, axis=-1, keepdims=True) * Q
    return W


def _normalize(X):
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


def fd_differential(evaluate, P, Q, S, h=FD_STEP, order=4):
    """Central-difference differential of ``evaluate`` along tangents ``S``.

    ``evaluate(P, Q) -> (P', Q')`` is any batched map. The base curve is
    ``t -> normalize(x + t s)`` on each factor and the result is projected onto
    the tangent space at the image point. ``order`` selects the 2- or 4-point
    central stencil.
    """
    def at(t):
        Pt, Qt = evaluate(_normalize(P + t * S[:, :3]), _normalize(Q + t * S[:, 3:]))
        return np.concatenate([Pt, Qt], axis=1)

    if order == 2:
        D = (at(h) - at(-h)) / (2.0 * h)
    elif order == 4:
        D = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h)
    else:
        raise ValueError("order must be 2 or 4")
    P1, Q1 = evaluate(P, Q)
    return project_tangent(P1, Q1, D)


def differential(map_spec, at: ProductPoint, s: TangentPair, mode="analytic", h=FD_STEP) -> TangentPair:
    """Differential of a map at one point, analytic or by central differences."""
    from . import maps

    p, q = at.arrays
    P, Q = p[None], q[None]
    S = np.concatenate(s.arrays)[None]
    if mode == "analytic":
        W = maps.push_tangent(map_spec, P, Q, S)
    elif mode == "finite_difference":
        W = fd_differential(lambda a, b: maps.evaluate(map_spec, a, b), P, Q, S, h=h)
    else:
        raise ValueError(f"unknown differential mode {mode!r}")
    return TangentPair(tuple(W[0, :3]), tuple(W[0, 3:]))


def pullback_matrix(map_spec, P, Q, mode="analytic", h=FD_STEP, B=None):
    """Batched pullback of the product form: ``(N, 4, 4)`` in the frame at (P, Q)."""
    from . import maps

    if B is None:
        B = frame(P, Q)
    n = P.shape[0]
    images = []
    for i in range(4):
        S = B[:, i, :]
        if mode == "analytic":
            W = maps.push_tangent(map_spec, P, Q, S)
        else:
            W = fd_differential(lambda a, b: maps.evaluate(map_spec, a, b), P, Q, S, h=h)
        images.append(W)
    P1, Q1 = maps.evaluate(map_spec, P, Q)
    M = np.zeros((n, 4, 4))
    for i in range(4):
        for j in range(i + 1, 4):
            val = product_form_batch(P1, Q1, images[i], images[j], check=False)
            M[:, i, j] = val
            M[:, j, i] = -val
    return M


def pullback_form(map_spec, at: ProductPoint, mode="analytic", h=FD_STEP, det_tol=1e-10) -> np.ndarray:
    """Matrix of ``map^* omega`` at ``at`` in the standard frame.

    Raises :class:`NondegeneracyError` if the result is degenerate.
    """
    from .errors import NondegeneracyError

    p, q = at.arrays
    M = pullback_matrix(map_spec, p[None], q[None], mode=mode, h=h)[0]
    if abs(np.linalg.det(M)) < det_tol:
        raise NondegeneracyError("pulled-back form is degenerate", point=at)
    return M
