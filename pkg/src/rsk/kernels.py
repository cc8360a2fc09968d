"""Hot kernels for the fiberwise twist map.

The twist acts as ``(p, q) -> (G(q) p, q)`` where ``G(q)`` is the rotation of a
unit quaternion. Near the equator of the second factor ``G`` is the rotation by
``m * Arg(w)`` about the third axis; towards the lower pole it is contracted to
the identity by the belt-trick family

    Q(s, theta) = [exp(theta/2 (k cos s + i sin s)) exp(theta/2 (k cos s - i sin s))]^(m/2)

and the upper cap is obtained by conjugating with diag(1, 1, -1).

Two implementations are kept in lockstep: a per-point loop compiled by numba
and a vectorized numpy version. ``twist_apply`` dispatches on the backend flag
in ``rsk._accel``.
"""
import math

import numpy as np

from ._accel import backend_name, njit

HALF_PI = 0.5 * math.pi


# ---------------------------------------------------------------------------
# scalar helpers (numba)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _qmul(a0, a1, a2, a3, b0, b1, b2, b3):
    return (
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


@njit(cache=True)
def _sandwich(q0, q1, q2, q3, r0, r1, r2, r3, x, y, z):
    # vector part of q * (0, x, y, z) * conj(r)
    t0, t1, t2, t3 = _qmul(q0, q1, q2, q3, 0.0, x, y, z)
    o0, o1, o2, o3 = _qmul(t0, t1, t2, t3, r0, -r1, -r2, -r3)
    return o1, o2, o3


@njit(cache=True)
def _ramp(r, half):
    """Quintic smoothstep ramp s(r) in [0, pi/2] and its derivative ds/dr."""
    if r <= half:
        return 0.0, 0.0
    x = (r - half) / half
    if x >= 1.0:
        return HALF_PI, 0.0
    s = HALF_PI * x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    ds = HALF_PI * 30.0 * x * x * (1.0 - x) * (1.0 - x) / half
    return s, ds


@njit(cache=True)
def _belt(s, theta, n):
    """Belt-trick quaternion Q(s, theta) with partials in s and theta.

    Returns three 4-tuples: Q, dQ/ds, dQ/dtheta.
    """
    phi = 0.5 * theta
    cp = math.cos(phi)
    sp = math.sin(phi)
    cs = math.cos(s)
    ss = math.sin(s)
    # E+ = cos phi + sin phi (i sin s + k cos s); E- flips the i component
    ep = (cp, sp * ss, 0.0, sp * cs)
    em = (cp, -sp * ss, 0.0, sp * cs)
    ep_t = (-0.5 * sp, 0.5 * cp * ss, 0.0, 0.5 * cp * cs)
    em_t = (-0.5 * sp, -0.5 * cp * ss, 0.0, 0.5 * cp * cs)
    ep_s = (0.0, sp * cs, 0.0, -sp * ss)
    em_s = (0.0, -sp * cs, 0.0, -sp * ss)

    p = _qmul(ep[0], ep[1], ep[2], ep[3], em[0], em[1], em[2], em[3])
    a = _qmul(ep_t[0], ep_t[1], ep_t[2], ep_t[3], em[0], em[1], em[2], em[3])
    b = _qmul(ep[0], ep[1], ep[2], ep[3], em_t[0], em_t[1], em_t[2], em_t[3])
    p_t = (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])
    a = _qmul(ep_s[0], ep_s[1], ep_s[2], ep_s[3], em[0], em[1], em[2], em[3])
    b = _qmul(ep[0], ep[1], ep[2], ep[3], em_s[0], em_s[1], em_s[2], em_s[3])
    p_s = (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])

    q = p
    q_s = p_s
    q_t = p_t
    for _ in range(n - 1):
        # d(QP) = dQ P + Q dP
        a = _qmul(q_s[0], q_s[1], q_s[2], q_s[3], p[0], p[1], p[2], p[3])
        b = _qmul(q[0], q[1], q[2], q[3], p_s[0], p_s[1], p_s[2], p_s[3])
        q_s = (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])
        a = _qmul(q_t[0], q_t[1], q_t[2], q_t[3], p[0], p[1], p[2], p[3])
        b = _qmul(q[0], q[1], q[2], q[3], p_t[0], p_t[1], p_t[2], p_t[3])
        q_t = (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])
        q = _qmul(q[0], q[1], q[2], q[3], p[0], p[1], p[2], p[3])
    return q, q_s, q_t


@njit(cache=True)
def _twist_numba(P, Q, U, V, n, delta, inverse, tangent):
    npts = P.shape[0]
    P_out = np.empty_like(P)
    U_out = np.empty_like(U)
    half = 0.5 * delta
    t_cap = math.tanh(delta)
    for i in range(npts):
        p0, p1, p2 = P[i, 0], P[i, 1], P[i, 2]
        q0, q1, q2 = Q[i, 0], Q[i, 1], Q[i, 2]
        if abs(q2) >= t_cap:
            P_out[i, 0], P_out[i, 1], P_out[i, 2] = p0, p1, p2
            if tangent:
                U_out[i, 0], U_out[i, 1], U_out[i, 2] = U[i, 0], U[i, 1], U[i, 2]
            continue
        r = abs(math.atanh(q2))
        s, ds_dr = _ramp(r, half)
        theta = math.atan2(q1, q0)
        qq, qs, qt = _belt(s, theta, n)
        w0, w1, w2, w3 = qq
        s0, s1, s2, s3 = qs
        t0, t1, t2, t3 = qt
        if q2 > 0.0:
            w1, w2, s1, s2, t1, t2 = -w1, -w2, -s1, -s2, -t1, -t2
        if inverse:
            w1, w2, w3 = -w1, -w2, -w3
            s1, s2, s3 = -s1, -s2, -s3
            t1, t2, t3 = -t1, -t2, -t3
        x, y, z = _sandwich(w0, w1, w2, w3, w0, w1, w2, w3, p0, p1, p2)
        P_out[i, 0], P_out[i, 1], P_out[i, 2] = x, y, z
        if tangent:
            v0, v1, v2 = V[i, 0], V[i, 1], V[i, 2]
            rho2 = q0 * q0 + q1 * q1
            dtheta = (q0 * v1 - q1 * v0) / rho2
            sgn = 1.0 if q2 > 0.0 else -1.0
            ds = ds_dr * sgn * v2 / (1.0 - q2 * q2)
            d0 = s0 * ds + t0 * dtheta
            d1 = s1 * ds + t1 * dtheta
            d2 = s2 * ds + t2 * dtheta
            d3 = s3 * ds + t3 * dtheta
            a0, a1, a2 = _sandwich(w0, w1, w2, w3, w0, w1, w2, w3, U[i, 0], U[i, 1], U[i, 2])
            b0, b1, b2 = _sandwich(d0, d1, d2, d3, w0, w1, w2, w3, p0, p1, p2)
            c0, c1, c2 = _sandwich(w0, w1, w2, w3, d0, d1, d2, d3, p0, p1, p2)
            U_out[i, 0] = a0 + b0 + c0
            U_out[i, 1] = a1 + b1 + c1
            U_out[i, 2] = a2 + b2 + c2
    return P_out, U_out


# ---------------------------------------------------------------------------
# vectorized numpy path
# ---------------------------------------------------------------------------

def qmul(a, b):
    """Hamilton product of quaternion arrays with trailing axis (w, x, y, z)."""
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a):
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def _vec_sandwich(q, r, x):
    xq = np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)
    return qmul(qmul(q, xq), qconj(r))[..., 1:]


def ramp(r, delta):
    """Vectorized ramp ``s(r)`` and ``ds/dr`` for band half-width ``delta``."""
    r = np.asarray(r, dtype=float)
    half = 0.5 * delta
    x = np.clip((r - half) / half, 0.0, 1.0)
    s = HALF_PI * x**3 * (10.0 - 15.0 * x + 6.0 * x * x)
    ds = HALF_PI * 30.0 * x * x * (1.0 - x) ** 2 / half
    return s, ds


def belt_quaternion(s, theta, n):
    """Vectorized belt-trick quaternion and its partials (Q, dQ/ds, dQ/dtheta)."""
    s = np.asarray(s, dtype=float)
    theta = np.asarray(theta, dtype=float)
    s, theta = np.broadcast_arrays(s, theta)
    phi = 0.5 * theta
    cp, sp = np.cos(phi), np.sin(phi)
    cs, ss = np.cos(s), np.sin(s)
    zero = np.zeros_like(phi)
    ep = np.stack([cp, sp * ss, zero, sp * cs], axis=-1)
    em = np.stack([cp, -sp * ss, zero, sp * cs], axis=-1)
    ep_t = np.stack([-0.5 * sp, 0.5 * cp * ss, zero, 0.5 * cp * cs], axis=-1)
    em_t = np.stack([-0.5 * sp, -0.5 * cp * ss, zero, 0.5 * cp * cs], axis=-1)
    ep_s = np.stack([zero, sp * cs, zero, -sp * ss], axis=-1)
    em_s = np.stack([zero, -sp * cs, zero, -sp * ss], axis=-1)

    p = qmul(ep, em)
    p_t = qmul(ep_t, em) + qmul(ep, em_t)
    p_s = qmul(ep_s, em) + qmul(ep, em_s)
    q, q_s, q_t = p, p_s, p_t
    for _ in range(n - 1):
        q_s = qmul(q_s, p) + qmul(q, p_s)
        q_t = qmul(q_t, p) + qmul(q, p_t)
        q = qmul(q, p)
    return q, q_s, q_t


def _twist_numpy(P, Q, U, V, n, delta, inverse, tangent):
    P_out = P.copy()
    U_out = U.copy() if tangent else np.empty_like(U)
    q2 = Q[:, 2]
    live = np.abs(q2) < math.tanh(delta)
    if not live.any():
        return P_out, U_out
    p, q = P[live], Q[live]
    t = q[:, 2]
    r = np.abs(np.arctanh(t))
    s, ds_dr = ramp(r, delta)
    theta = np.arctan2(q[:, 1], q[:, 0])
    qq, qs, qt = belt_quaternion(s, theta, n)
    flip = np.where(t > 0.0, -1.0, 1.0)[:, None]
    cap = np.concatenate([np.ones_like(flip), flip, flip, np.ones_like(flip)], axis=1)
    qq, qs, qt = qq * cap, qs * cap, qt * cap
    if inverse:
        qq, qs, qt = qconj(qq), qconj(qs), qconj(qt)
    P_out[live] = _vec_sandwich(qq, qq, p)
    if tangent:
        v = V[live]
        rho2 = q[:, 0] ** 2 + q[:, 1] ** 2
        dtheta = (q[:, 0] * v[:, 1] - q[:, 1] * v[:, 0]) / rho2
        sgn = np.where(t > 0.0, 1.0, -1.0)
        ds = ds_dr * sgn * v[:, 2] / (1.0 - t * t)
        dq = qs * ds[:, None] + qt * dtheta[:, None]
        U_out[live] = _vec_sandwich(qq, qq, U[live]) + _vec_sandwich(dq, qq, p) + _vec_sandwich(qq, dq, p)
    return P_out, U_out


def twist_apply(P, Q, U=None, V=None, *, m, delta, inverse=False, backend=None):
    """Apply the twist to first-factor points ``P`` fibered over ``Q``.

    Returns ``(P_out, U_out)``; ``U_out`` is the first-factor component of the
    differential applied to tangents ``(U, V)`` or ``None`` when no tangents
    were given. The second factor is unchanged by the map and its tangent
    passes through as ``V``.
    """
    if m % 2:
        raise ValueError("twist kernel needs an even m")
    P = np.ascontiguousarray(P, dtype=float)
    Q = np.ascontiguousarray(Q, dtype=float)
    tangent = U is not None
    if tangent:
        U = np.ascontiguousarray(U, dtype=float)
        V = np.ascontiguousarray(V, dtype=float)
    else:
        U = np.zeros_like(P)
        V = np.zeros_like(Q)
    n = m // 2
    if n == 0:
        return P.copy(), (U.copy() if tangent else None)
    if n < 0:
        # Q(s, theta)^(-|n|): realize by the inverse rotation of the |n| family
        n, inverse = -n, not inverse
    if backend_name(backend) == "numba":
        P_out, U_out = _twist_numba(P, Q, U, V, n, float(delta), bool(inverse), tangent)
    else:
        P_out, U_out = _twist_numpy(P, Q, U, V, n, float(delta), bool(inverse), tangent)
    return P_out, (U_out if tangent else None)


def warmup():
    """Trigger numba compilation on a tiny input."""
    P = np.array([[1.0, 0.0, 0.0]])
    Q = np.array([[0.6, 0.0, -0.8]])
    twist_apply(P, Q, P, Q, m=2, delta=0.5, backend=backend_name())
