"""Static homology data for Z = Gr(2, 4) with consistency checks.

Groups are stored as lists of cyclic orders: ``0`` for a copy of Z, ``n`` for
Z/n. The mod-2 intersection pairing is given on the basis ``(F, Q)`` of H_2,
where F is a fiber of the projection to the diagonal and Q is the image of
the diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..report import CheckResult
from .stiefel import euler_characteristic

SCHUBERT_CELLS = (1, 1, 2, 1, 1)
RP2_CELLS = (1, 1, 1)


@dataclass(frozen=True)
class HomologyTable:
    mod2: tuple = (1, 1, 2, 1, 1)
    integral: tuple = ((0,), (2,), (2,), (), (0,))
    basis: tuple = ("F", "Q")
    # pairing over F2 on the basis above; Q.Q is derived, see selfintersection_Q
    pairing: dict = field(default_factory=lambda: {("F", "F"): 0, ("F", "Q"): 1, ("Q", "F"): 1, ("Q", "Q"): 1})
    derived: tuple = (("Q", "Q"),)

    def dot(self, x: str, y: str) -> int:
        return self.pairing[(x, y)] % 2

    def pairing_matrix(self):
        return [[self.dot(x, y) for y in self.basis] for x in self.basis]


def selfintersection_Q() -> int:
    """Q.Q = e(N_Q) = e(T_Q) mod 2 = chi(RP2) mod 2 (normal bundle of Q is T_Q)."""
    return euler_characteristic(RP2_CELLS) % 2


def mod2_from_integral(integral) -> list:
    """Universal coefficients: dim H_k(.; Z2) = rank/2-part of H_k plus 2-torsion of H_(k-1)."""
    def count(groups):
        return sum(1 for g in groups if g == 0 or g % 2 == 0)

    def tor(groups):
        return sum(1 for g in groups if g != 0 and g % 2 == 0)

    return [count(integral[k]) + (tor(integral[k - 1]) if k else 0) for k in range(len(integral))]


def distinctness_from_pairing(dot) -> dict:
    """Derive [F] != 0, [Q] != 0 and [F] != [Q] using only bilinearity.

    ``dot(x, y)`` is the pairing on the labels "F" and "Q". A class pairing
    non-trivially with something is non-zero; if F were Q then F.Q = F.F.
    """
    f_nonzero = dot("F", "Q") != 0
    q_nonzero = dot("Q", "F") != 0
    f_ne_q = dot("F", "Q") != dot("F", "F")
    return {"F_nonzero": f_nonzero, "Q_nonzero": q_nonzero, "F_ne_Q": f_ne_q}


def g_action_on_h2(images: dict, basis=("F", "Q")):
    """Matrix of g_* on H_2(Z; Z2) from the images of the basis classes.

    ``images`` maps each basis label to a dict of coefficients.
    """
    return [[images[col].get(row, 0) % 2 for col in basis] for row in basis]


def homology_checks(table: HomologyTable | None = None) -> list:
    t = table or HomologyTable()
    out = []
    qq = selfintersection_Q()
    pair = (t.dot("F", "F"), t.dot("F", "Q"), t.dot("Q", "Q"))
    out.append(CheckResult(
        "charclass", "pairing_table", pair == (0, 1, 1) and t.dot("Q", "Q") == qq
        and t.dot("F", "Q") == t.dot("Q", "F"),
        value={"FF": pair[0], "FQ": pair[1], "QQ": pair[2]},
        notes=[f"Q.Q = chi(RP2) mod 2 = {qq} is derived, not taken from the source"],
    ))
    m = t.pairing_matrix()
    det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % 2
    out.append(CheckResult("charclass", "pairing_nondegenerate", det == 1, value={"det_mod2": det}))

    # the distinctness argument must not use Q.Q
    d = distinctness_from_pairing(lambda x, y: {("F", "F"): 0, ("F", "Q"): 1, ("Q", "F"): 1}[(x, y)])
    out.append(CheckResult("charclass", "distinct_F_Q", all(d.values()), value=d))

    b = list(t.mod2)
    n = len(b)
    poincare = all(b[k] == b[n - 1 - k] for k in range(n))
    cells = all(x <= c for x, c in zip(b, SCHUBERT_CELLS))
    chi_cells = euler_characteristic(SCHUBERT_CELLS)
    out.append(CheckResult(
        "charclass", "betti_mod2", b == [1, 1, 2, 1, 1] and poincare and cells,
        value={"betti": b, "poincare_symmetric": poincare, "bounded_by_cells": cells,
               "chi_from_cells": chi_cells, "chi_from_betti": euler_characteristic(b)},
    ))
    uct = mod2_from_integral(t.integral)
    out.append(CheckResult("charclass", "integral_table_uct", uct == b, value={"mod2_from_integral": uct}))

    g = g_action_on_h2({"F": {"F": 1}, "Q": {"Q": 1}})
    out.append(CheckResult("charclass", "g_action_h2", g == [[1, 0], [0, 1]], value=g,
                           notes=["g preserves the fibers of Z -> Q and fixes Q pointwise"]))
    return out
