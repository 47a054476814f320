"""The dihedral group of a regular n-gon, its group algebra, and the
reflection/rotation Fourier basis L_p, Q_p.

Elements are reflections R_k and rotations S_k (k mod n), with S_0 the
identity and the products

    R_k R_l = S_{k-l},  S_k S_l = S_{k+l},  R_k S_l = R_{k-l},  S_k R_l = R_{k+l}.

lam(n) = zeta_n is the rotation eigenvalue entering the Fourier basis.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

from gmpy2 import mpq

from .exactfield import CycloNum, rat, zeta


class GroupElem(NamedTuple):
    n: int
    kind: str  # 'R' reflection, 'S' rotation
    index: int

    def __str__(self):
        return f"{self.kind}{self.index}"


def reflection(n: int, k: int) -> GroupElem:
    return GroupElem(n, "R", k % n)


def rotation(n: int, k: int) -> GroupElem:
    return GroupElem(n, "S", k % n)


def identity(n: int) -> GroupElem:
    return GroupElem(n, "S", 0)


@lru_cache(maxsize=None)
def lam(n: int, j: int = 1) -> CycloNum:
    """lam^j with lam = zeta_n; trivial powers collapse to rationals."""
    j %= n
    if j == 0:
        return CycloNum.one()
    if 2 * j == n:
        return CycloNum.from_rational(-1)
    return zeta(n, j)


def group_mult(g: GroupElem, h: GroupElem) -> GroupElem:
    if g.n != h.n:
        raise ValueError(f"mixed group sizes {g.n} and {h.n}")
    n = g.n
    if g.kind == "R":
        if h.kind == "R":
            return GroupElem(n, "S", (g.index - h.index) % n)
        return GroupElem(n, "R", (g.index - h.index) % n)
    if h.kind == "R":
        return GroupElem(n, "R", (g.index + h.index) % n)
    return GroupElem(n, "S", (g.index + h.index) % n)


def group_inverse(g: GroupElem) -> GroupElem:
    if g.kind == "R":
        return g
    return GroupElem(g.n, "S", (-g.index) % g.n)


def all_elements(n: int) -> list[GroupElem]:
    return [GroupElem(n, "S", k) for k in range(n)] + [GroupElem(n, "R", k) for k in range(n)]


def conjugacy_class(g: GroupElem) -> frozenset[GroupElem]:
    n = g.n
    if g.kind == "R":
        if n % 2:
            return frozenset(GroupElem(n, "R", k) for k in range(n))
        return frozenset(GroupElem(n, "R", k) for k in range(g.index % 2, n, 2))
    return frozenset({GroupElem(n, "S", g.index), GroupElem(n, "S", (-g.index) % n)})


def conjugacy_classes(n: int) -> list[frozenset[GroupElem]]:
    seen, out = set(), []
    for g in all_elements(n):
        c = conjugacy_class(g)
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def klein_element(n: int) -> GroupElem:
    """The central rotation by a half turn; exists only for even n."""
    if n % 2:
        raise ValueError("no Klein operator for odd n")
    return GroupElem(n, "S", n // 2)


class GroupAlgElem:
    """Finitely supported CycloNum combination of group elements."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        self.n = n
        clean = {}
        if coeffs:
            for g, c in coeffs.items():
                if g.n != n:
                    raise ValueError("group element of wrong size")
                c = rat(c)
                if c:
                    clean[g] = c
        self.coeffs = clean

    @staticmethod
    def from_elem(g: GroupElem, coeff=1) -> "GroupAlgElem":
        return GroupAlgElem(g.n, {g: rat(coeff)})

    def __add__(self, other):
        if not isinstance(other, GroupAlgElem):
            return NotImplemented
        if self.n != other.n:
            raise ValueError("mixed group sizes")
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            out[g] = out.get(g, CycloNum.zero()) + c
        return GroupAlgElem(self.n, out)

    def __neg__(self):
        return GroupAlgElem(self.n, {g: -c for g, c in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, GroupAlgElem):
            return NotImplemented
        return self + (-other)

    def scale(self, s) -> "GroupAlgElem":
        s = rat(s)
        return GroupAlgElem(self.n, {g: c * s for g, c in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, GroupAlgElem) and self.n == other.n and self.coeffs == other.coeffs

    def is_zero(self) -> bool:
        return not self.coeffs

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = [f"({c})*{g}" for g, c in sorted(self.coeffs.items(), key=lambda kv: (kv[0].kind, kv[0].index))]
        return " + ".join(parts)

    __repr__ = __str__


def ga_mult(x: GroupAlgElem, y: GroupAlgElem) -> GroupAlgElem:
    if x.n != y.n:
        raise ValueError("mixed group sizes")
    out: dict = {}
    for g, cg in x.coeffs.items():
        for h, ch in y.coeffs.items():
            k = group_mult(g, h)
            c = cg * ch
            out[k] = out.get(k, CycloNum.zero()) + c
    return GroupAlgElem(x.n, out)


def lq_element(kind: str, p: int, n: int) -> GroupAlgElem:
    """L_p = (1/n) sum lam^{kp} R_k;  Q_p = (1/n) sum lam^{-kp} S_k."""
    p %= n
    inv_n = mpq(1, n)
    if kind == "L":
        coeffs = {GroupElem(n, "R", k): lam(n, k * p).scale(inv_n) for k in range(n)}
    elif kind == "Q":
        coeffs = {GroupElem(n, "S", k): lam(n, -k * p).scale(inv_n) for k in range(n)}
    else:
        raise ValueError("kind must be 'L' or 'Q'")
    return GroupAlgElem(n, coeffs)
