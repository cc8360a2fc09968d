"""Closed curves on the real torus L = {|z| = 1} x {|w| = 1} and their H1 classes.

A class ``(p, q)`` counts windings in ``(Arg z, Arg w)``. The z-circle
``gamma_B`` has class (1, 0) and the w-circle ``gamma_A`` has class (0, 1),
oriented by increasing ``Arg w``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import maps
from .errors import LeavesTorusError, PreconditionError, UnwrapError

TWO_PI = 2.0 * math.pi
TORUS_TOL = 1e-8
MAX_SAMPLES = 2**16
# consecutive samples must move less than this in each angle to be unwrap-safe
JUMP_LIMIT = 0.5 * math.pi


def wrap(x):
    """Map angles to [-pi, pi)."""
    return (np.asarray(x) + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class H1Class:
    p: int
    q: int

    def __iter__(self):
        return iter((self.p, self.q))


@dataclass(frozen=True)
class TorusCurve:
    """Ordered samples ``(alpha, beta)``; a closed curve repeats no endpoint.

    ``alpha`` and ``beta`` are kept unwrapped along the curve so that
    refinement can interpolate between neighbours.
    """

    alpha: np.ndarray
    beta: np.ndarray
    closed: bool = True

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise PreconditionError("alpha and beta must be 1-d arrays of equal length")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    def __len__(self):
        return self.alpha.size

    def steps(self):
        a, b = self.alpha, self.beta
        if self.closed:
            a, b = np.append(a, a[0]), np.append(b, b[0])
        return wrap(np.diff(a)), wrap(np.diff(b))

    def is_unwrap_safe(self, limit: float = JUMP_LIMIT) -> bool:
        da, db = self.steps()
        return bool(np.all(np.abs(da) < limit) and np.all(np.abs(db) < limit))

    def refined(self) -> "TorusCurve":
        """Double the sampling by inserting midpoints of the unwrapped steps."""
        da, db = self.steps()
        a = np.empty(2 * len(self))
        b = np.empty(2 * len(self))
        a[0::2], b[0::2] = self.alpha, self.beta
        a[1::2] = self.alpha + 0.5 * da
        b[1::2] = self.beta + 0.5 * db
        return TorusCurve(a, b, self.closed)

    def points(self):
        return maps.torus_points(self.alpha, self.beta)

    def reversed(self) -> "TorusCurve":
        return TorusCurve(self.alpha[::-1].copy(), self.beta[::-1].copy(), self.closed)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "alpha", "beta"])
            n = len(self)
            for i in range(n):
                w.writerow([repr(i / n), repr(float(self.alpha[i])), repr(float(self.beta[i]))])


def curve_gamma_A(z0: float = 0.0, samples: int = 256) -> TorusCurve:
    """``t -> (z0, t)``: the w-circle through z0."""
    if samples < 64:
        raise PreconditionError("at least 64 samples are required")
    t = TWO_PI * np.arange(samples) / samples
    return TorusCurve(np.full(samples, float(z0)), t)


def curve_gamma_B(w0: float = 0.0, samples: int = 256) -> TorusCurve:
    """``t -> (t, w0)``: the z-circle through w0."""
    if samples < 64:
        raise PreconditionError("at least 64 samples are required")
    t = TWO_PI * np.arange(samples) / samples
    return TorusCurve(t, np.full(samples, float(w0)))


def winding_class(c: TorusCurve, int_tol: float = 1e-6) -> H1Class:
    if not c.closed:
        raise PreconditionError("winding class needs a closed curve")
    if not c.is_unwrap_safe():
        raise UnwrapError("consecutive samples jump too far to unwrap")
    da, db = c.steps()
    raw = np.array([da.sum(), db.sum()]) / TWO_PI
    rounded = np.rint(raw)
    if np.max(np.abs(raw - rounded)) > int_tol:
        raise UnwrapError(f"winding sums {raw} are not integral")
    return H1Class(int(rounded[0]), int(rounded[1]))


def _image_angles(f, c: TorusCurve):
    P, Q = c.points()
    P1, Q1 = maps.evaluate(f, P, Q) if isinstance(f, maps.MapSpec) else f(P, Q)
    off = max(float(np.max(np.abs(P1[:, 2]))), float(np.max(np.abs(Q1[:, 2]))))
    if off > TORUS_TOL:
        raise LeavesTorusError(f"image leaves the torus by {off:.3g}")
    return np.arctan2(P1[:, 1], P1[:, 0]), np.arctan2(Q1[:, 1], Q1[:, 0])


def push_curve(f, c: TorusCurve, sigma: maps.MapSpec | None = None, max_samples: int = MAX_SAMPLES
               ) -> TorusCurve:
    """Image of a torus curve, refined until consecutive image samples are unwrap-safe.

    ``f`` is a :class:`MapSpec` or any batched callable ``(P, Q) -> (P', Q')``.
    ``sigma`` names the involution whose fixed torus carries the curve
    (default ``sigma_q22``); a fixed-point-free involution has no such torus.
    """
    if sigma is not None and sigma.kind != "sigma_q22":
        raise PreconditionError(f"{sigma.name} has no fixed torus to carry the curve")
    while True:
        a, b = _image_angles(f, c)
        # store unwrapped angles so the image can itself be refined later
        image = TorusCurve(np.unwrap(a), np.unwrap(b), c.closed)
        if image.is_unwrap_safe():
            return image
        if 2 * len(c) > max_samples:
            raise UnwrapError(f"image still not unwrap-safe at {len(c)} samples")
        c = c.refined()


def pushed_class(f, c: TorusCurve, sigma: maps.MapSpec | None = None) -> H1Class:
    """Class of the image of ``c``, required to survive one doubling of the sampling.

    Aliased steps (a true jump near a full turn) would change under doubling,
    so agreement guards the rounded class.
    """
    first = winding_class(push_curve(f, c, sigma))
    second = winding_class(push_curve(f, c.refined(), sigma))
    if first != second:
        raise UnwrapError(f"class changed under refinement: {tuple(first)} vs {tuple(second)}")
    return first


def twist_power_class(m: int, k: int, delta: float = 0.5, samples: int = 256, z0: float = 0.0) -> H1Class:
    f = maps.power(maps.twist(m, delta), k)
    return pushed_class(f, curve_gamma_A(z0, samples))


def perturbed_curve(base: TorusCurve, rng: np.random.Generator, amplitude: float = 0.4, modes: int = 3
                    ) -> TorusCurve:
    """A random homotopic deformation of ``base`` by smooth periodic bumps."""
    n = len(base)
    t = TWO_PI * np.arange(n) / n
    da = np.zeros(n)
    db = np.zeros(n)
    for j in range(1, modes + 1):
        ca, sa, cb, sb = rng.uniform(-1, 1, 4) * amplitude / j
        da += ca * np.cos(j * t) + sa * np.sin(j * t)
        db += cb * np.cos(j * t) + sb * np.sin(j * t)
    return TorusCurve(base.alpha + da, base.beta + db, base.closed)
