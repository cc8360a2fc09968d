"""Graded commutative F2-algebras with pure-power relations.

Elements are sets of exponent tuples: addition is symmetric difference, and a
monomial is dropped as soon as one exponent reaches its relation bound or the
total degree passes the top degree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import RingMismatchError


@dataclass(frozen=True)
class RingSpec:
    names: tuple
    degrees: tuple
    bounds: tuple  # exponent at which a generator vanishes; None if free
    top_degree: int | None = None

    def __post_init__(self):
        if not (len(self.names) == len(self.degrees) == len(self.bounds)):
            raise ValueError("names, degrees and bounds must have equal length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be distinct")

    @classmethod
    def parse(cls, text: str, top_degree: int | None = None) -> "RingSpec":
        """Parse ``ring a:1 b:1 / a^3 b^2``."""
        text = text.strip()
        if not text.startswith("ring"):
            raise ValueError(f"not a ring declaration: {text!r}")
        body = text[4:]
        gens, _, rels = body.partition("/")
        names, degrees = [], []
        for tok in gens.split():
            name, _, deg = tok.partition(":")
            names.append(name)
            degrees.append(int(deg) if deg else 1)
        bounds = [None] * len(names)
        for tok in rels.split():
            m = re.fullmatch(r"([A-Za-z_]\w*)\^(\d+)", tok)
            if not m:
                raise ValueError(f"only pure-power relations are supported, got {tok!r}")
            bounds[names.index(m.group(1))] = int(m.group(2))
        return cls(tuple(names), tuple(degrees), tuple(bounds), top_degree)

    def __str__(self):
        gens = " ".join(f"{n}:{d}" for n, d in zip(self.names, self.degrees))
        rels = " ".join(f"{n}^{b}" for n, b in zip(self.names, self.bounds) if b is not None)
        return f"ring {gens} / {rels}".rstrip(" /")

    def degree(self, mono) -> int:
        return sum(e * d for e, d in zip(mono, self.degrees))

    def alive(self, mono) -> bool:
        for e, b in zip(mono, self.bounds):
            if b is not None and e >= b:
                return False
        return self.top_degree is None or self.degree(mono) <= self.top_degree

    def element(self, monos) -> "F2Element":
        acc = set()
        for mono in monos:
            mono = tuple(mono)
            if self.alive(mono):
                acc ^= {mono}
        return F2Element(self, frozenset(acc))

    def zero(self) -> "F2Element":
        return F2Element(self, frozenset())

    def one(self) -> "F2Element":
        return self.element([(0,) * len(self.names)])

    def gen(self, name: str) -> "F2Element":
        i = self.names.index(name)
        return self.element([tuple(1 if j == i else 0 for j in range(len(self.names)))])

    def parse_element(self, text: str) -> "F2Element":
        """Parse ``1 + a + a^2``, ``a^2 b`` or ``a^2*b``; ``0`` is zero."""
        result = self.zero()
        for term in text.split("+"):
            term = term.strip()
            if not term:
                raise ValueError(f"empty term in {text!r}")
            if term == "0":
                continue
            mono = [0] * len(self.names)
            if term != "1":
                for factor in re.split(r"[\s*]+", term):
                    m = re.fullmatch(r"([A-Za-z_]\w*)(?:\^(\d+))?", factor)
                    if not m or m.group(1) not in self.names:
                        raise ValueError(f"bad factor {factor!r} in {text!r}")
                    mono[self.names.index(m.group(1))] += int(m.group(2) or 1)
            result = result + self.element([mono])
        return result


@dataclass(frozen=True)
class F2Element:
    ring: RingSpec
    terms: frozenset = field(default_factory=frozenset)

    def _check(self, other):
        if not isinstance(other, F2Element):
            return NotImplemented
        if other.ring != self.ring:
            raise RingMismatchError("elements belong to different rings")
        return other

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.one() if other % 2 else self.ring.zero()
        self._check(other)
        return F2Element(self.ring, self.terms ^ other.terms)

    __radd__ = __add__
    __sub__ = __add__

    def __mul__(self, other):
        if isinstance(other, int):
            return self if other % 2 else self.ring.zero()
        self._check(other)
        acc = set()
        for x in self.terms:
            for y in other.terms:
                mono = tuple(i + j for i, j in zip(x, y))
                if self.ring.alive(mono):
                    acc ^= {mono}
        return F2Element(self.ring, frozenset(acc))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined")
        out = self.ring.one()
        for _ in range(k):
            out = out * self
        return out

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.terms == (self.ring.one() if other % 2 else self.ring.zero()).terms
        if not isinstance(other, F2Element):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, self.terms))

    def part(self, d: int) -> "F2Element":
        """Homogeneous component of degree ``d``."""
        return F2Element(self.ring, frozenset(m for m in self.terms if self.ring.degree(m) == d))

    def degrees(self) -> set:
        return {self.ring.degree(m) for m in self.terms}

    def is_homogeneous(self, d: int) -> bool:
        return all(self.ring.degree(m) == d for m in self.terms)

    def _mono_str(self, mono) -> str:
        parts = []
        for name, e in zip(self.ring.names, mono):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return " ".join(parts) if parts else "1"

    def __str__(self):
        if not self.terms:
            return "0"
        order = sorted(self.terms, key=lambda m: (self.ring.degree(m), tuple(-e for e in m)))
        return " + ".join(self._mono_str(m) for m in order)

    def __repr__(self):
        return f"F2Element({self})"
