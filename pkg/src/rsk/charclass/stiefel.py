"""Stiefel-Whitney classes over F2 rings, and the w3 obstruction for the mapping torus."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from ..errors import PreconditionError, RingMismatchError
from .ring import F2Element, RingSpec


def binom_mod2(n: int, k: int) -> int:
    """C(n, k) mod 2 by Lucas' theorem: odd iff the bits of k are a subset of n's."""
    if k < 0 or n < 0 or k > n:
        return 0
    return 1 if (n & k) == k else 0


@dataclass(frozen=True)
class SWClass:
    rank: int
    w: tuple  # w[0] = 1, ..., w[rank]

    def __post_init__(self):
        if len(self.w) != self.rank + 1:
            raise ValueError("need exactly rank + 1 classes w_0..w_rank")
        ring = self.w[0].ring
        if any(x.ring != ring for x in self.w):
            raise RingMismatchError("all classes must live in the same ring")
        if self.w[0] != ring.one():
            raise ValueError("w_0 must be 1")
        for i, x in enumerate(self.w):
            if not x.is_homogeneous(i):
                raise ValueError(f"w_{i} = {x} is not homogeneous of degree {i}")

    @property
    def ring(self) -> RingSpec:
        return self.w[0].ring

    def __getitem__(self, i: int) -> F2Element:
        if i < 0:
            raise IndexError(i)
        return self.w[i] if i <= self.rank else self.ring.zero()

    def total(self) -> F2Element:
        out = self.ring.zero()
        for x in self.w:
            out = out + x
        return out

    @classmethod
    def from_total(cls, rank: int, total: F2Element) -> "SWClass":
        extra = [d for d in total.degrees() if d > rank]
        if extra:
            raise ValueError(f"total class has components above the rank in degrees {sorted(extra)}")
        return cls(rank, tuple(total.part(i) for i in range(rank + 1)))

    @classmethod
    def trivial(cls, ring: RingSpec, rank: int) -> "SWClass":
        return cls(rank, (ring.one(),) + (ring.zero(),) * rank)

    @classmethod
    def parse(cls, ring: RingSpec, text: str):
        """Parse ``bundle TQ rank 2 w = 1 + a + a^2``; returns ``(name, SWClass)``."""
        m = re.fullmatch(r"\s*bundle\s+(\S+)\s+rank\s+(\d+)\s+w\s*=\s*(.+?)\s*", text)
        if not m:
            raise ValueError(f"not a bundle declaration: {text!r}")
        return m.group(1), cls.from_total(int(m.group(2)), ring.parse_element(m.group(3)))

    def __str__(self):
        return f"rank {self.rank} w = {self.total()}"


def whitney_sum(E: SWClass, F: SWClass) -> SWClass:
    if E.ring != F.ring:
        raise RingMismatchError("bundles over different rings")
    return SWClass.from_total(E.rank + F.rank, E.total() * F.total())


def tensor_by_line(E: SWClass, L: SWClass) -> SWClass:
    """``w_k(E x L) = sum_i C(n - i, k - i) w_i(E) w_1(L)^(k - i)`` with ``n = rank E``."""
    if L.rank != 1:
        raise PreconditionError("second argument must be a line bundle")
    if E.ring != L.ring:
        raise RingMismatchError("bundles over different rings")
    n = E.rank
    x = L[1]
    out = []
    for k in range(n + 1):
        acc = E.ring.zero()
        for i in range(k + 1):
            if binom_mod2(n - i, k - i):
                acc = acc + E[i] * x ** (k - i)
        out.append(acc)
    return SWClass(n, tuple(out))


def closed_forms(E: SWClass, L: SWClass) -> dict:
    """The top and first classes of ``E x L`` from their short closed expressions.

    ``w_n = sum_j w_(n-j)(E) w_1(L)^j`` and ``w_1 = w_1(E) + n w_1(L)``.
    """
    n = E.rank
    x = L[1]
    top = E.ring.zero()
    for j in range(n + 1):
        top = top + E[n - j] * x ** j
    first = E[1] + n * x if n else E.ring.zero()
    return {"top": top, "first": first}


def check_closed_forms(E: SWClass, L: SWClass) -> bool:
    t = tensor_by_line(E, L)
    c = closed_forms(E, L)
    return t[E.rank] == c["top"] and (E.rank == 0 or t[1] == c["first"])


# --------------------------------------------------------------------------
# splitting-principle oracle
# --------------------------------------------------------------------------
# Polynomials over F2 in (t_1..t_n, x) are sets of exponent tuples.

def _pmul(a: set, b: set) -> set:
    c = Counter()
    for u in a:
        for v in b:
            c[tuple(i + j for i, j in zip(u, v))] += 1
    return {m for m, k in c.items() if k % 2}


def _elementary(j: int, n: int) -> set:
    out = set()
    for idx in combinations(range(n), j):
        mono = [0] * (n + 1)
        for i in idx:
            mono[i] = 1
        out.add(tuple(mono))
    return out


def _symmetric_reduce(poly: set, n: int) -> set:
    """Rewrite a t-symmetric polynomial in elementary symmetric functions.

    Returns exponent tuples ``(l_1..l_n, c)`` meaning ``e_1^l_1 ... e_n^l_n x^c``.
    """
    elem = [None] + [_elementary(j, n) for j in range(1, n + 1)]
    poly = set(poly)
    out = set()
    while poly:
        lead = max(poly)
        a, c = lead[:n], lead[n]
        if any(a[i] < a[i + 1] for i in range(n - 1)):
            raise RuntimeError(f"leading monomial {lead} is not symmetric; reduction failed")
        lam = tuple(a[i] - (a[i + 1] if i + 1 < n else 0) for i in range(n))
        term = {(0,) * n + (c,)}
        for j, e in enumerate(lam, start=1):
            for _ in range(e):
                term = _pmul(term, elem[j])
        poly ^= term
        out ^= {lam + (c,)}
    return out


def splitting_oracle(E: SWClass, L: SWClass) -> SWClass:
    """``w(E x L)`` from formal roots: expand ``prod_i (1 + t_i + x)`` and reduce."""
    if L.rank != 1:
        raise PreconditionError("second argument must be a line bundle")
    n = E.rank
    if n > 4:
        raise PreconditionError("the oracle is limited to rank <= 4")
    if n == 0:
        return SWClass.trivial(E.ring, 0)
    prod = {(0,) * (n + 1)}
    for i in range(n):
        factor = {(0,) * (n + 1)}
        root = [0] * (n + 1)
        root[i] = 1
        factor.add(tuple(root))
        factor.add((0,) * n + (1,))
        prod = _pmul(prod, factor)
    reduced = _symmetric_reduce(prod, n)
    total = E.ring.zero()
    for mono in reduced:
        val = E.ring.one()
        for j, e in enumerate(mono[:n], start=1):
            val = val * E[j] ** e
        total = total + val * L[1] ** mono[n]
    return SWClass.from_total(n, total)


# --------------------------------------------------------------------------
# the mapping torus computation
# --------------------------------------------------------------------------

RING_RP2_S1 = "ring a:1 b:1 / a^3 b^2"


def mapping_torus_breakdown(twisted: bool = True) -> dict:
    """All intermediate classes of the w3 computation on ``RP2 x S1``.

    ``a`` generates H^1(RP2), ``b`` generates H^1(S1). With ``twisted=False``
    the normal bundle is untwisted, which models the identity's mapping torus.
    """
    ring = RingSpec.parse(RING_RP2_S1)
    a, b = ring.gen("a"), ring.gen("b")
    one = ring.one()
    cube = (one + a) ** 3
    TQ = SWClass.from_total(2, cube)
    L = SWClass(1, (one, b)) if twisted else SWClass.trivial(ring, 1)
    TQL = tensor_by_line(TQ, L)
    trivial = SWClass.trivial(ring, 1)
    big = whitney_sum(whitney_sum(TQ, trivial), TQL)
    small = whitney_sum(TQ, TQL)
    cross = TQ[1] * TQL[2] + TQ[2] * TQL[1]
    return {
        "ring": ring,
        "w_TQ": cube,
        "w_TQ_expected": one + a + a**2,
        "w1_TQL": TQL[1],
        "w2_TQL": TQL[2],
        "w2_TQL_expected": TQ[2] + TQ[1] * L[1],
        "w1_TQL_expected": TQ[1],
        "w1w2_Q": TQ[1] * TQ[2],
        "w3_cross_terms": cross,
        "w3_without_trivial": small[3],
        "w3": big[3],
        "w1sq_w1L": TQ[1] ** 2 * L[1],
    }


def mapping_torus_w3(twisted: bool = True) -> F2Element:
    """w3 of ``T_Q + R + T_Q x L`` over ``RP2 x S1``; equals ``a^2 b`` when twisted."""
    d = mapping_torus_breakdown(twisted)
    checks = {
        "(1+a)^3 = 1 + a + a^2": d["w_TQ"] == d["w_TQ_expected"],
        "w2(TQ x L) = w2 + w1 w1(L)": d["w2_TQL"] == d["w2_TQL_expected"],
        "w1(TQ x L) = w1": d["w1_TQL"] == d["w1_TQL_expected"],
        "w1(Q) w2(Q) = 0": not d["w1w2_Q"],
        "cross terms give w3": d["w3_cross_terms"] == d["w3_without_trivial"],
        "trivial summand ignored": d["w3"] == d["w3_without_trivial"],
        "w3 = w1(Q)^2 w1(L)": d["w3"] == d["w1sq_w1L"],
    }
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise RuntimeError(f"intermediate identities failed: {failed}")
    return d["w3"]


def betti_product(*factors):
    """Betti numbers of a product from those of the factors (Kuenneth over a field)."""
    out = [1]
    for f in factors:
        new = [0] * (len(out) + len(f) - 1)
        for i, x in enumerate(out):
            for j, y in enumerate(f):
                new[i + j] += x * y
        out = new
    return out


def euler_characteristic(betti) -> int:
    return sum((-1) ** i * b for i, b in enumerate(betti))


def identity_torus_breakdown() -> dict:
    betti = betti_product([1, 0, 1], [1, 0, 1])
    chi_x = euler_characteristic(betti)
    if chi_x % 2:
        raise RuntimeError("Euler characteristic of the cover must be even")
    chi_z = chi_x // 2
    return {"betti_S2xS2": betti, "chi_S2xS2": chi_x, "covering_degree": 2, "chi_Z": chi_z, "w3": chi_z % 2}


def w3_identity_torus() -> int:
    """w3 of the identity's mapping torus on the fundamental class of Z.

    This is ``chi(Z) mod 2`` with ``chi(Z) = chi(S2 x S2) / 2``.
    """
    return identity_torus_breakdown()["w3"]
