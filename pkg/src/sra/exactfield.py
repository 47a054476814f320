"""Exact arithmetic in cyclotomic fields Q(zeta_N) and exact dense linear algebra.

All scalars in this package are elements of some Q(zeta_N), represented on the
power basis {zeta_N^j : j < phi(N)} reduced modulo the N-th cyclotomic
polynomial.  The modulus is irreducible over Q, so zero-testing is faithful.
Rationals are gmpy2.mpq throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq

Rational = mpq

_ZERO = mpq(0)
_ONE = mpq(1)


def as_mpq(x) -> mpq:
    """Coerce ints, Fractions and 'p/q' strings to mpq."""
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


# ---------------------------------------------------------------------------
# dense univariate polynomials over mpq (ascending coefficients), used only to
# build the cyclotomic moduli and reduction tables
# ---------------------------------------------------------------------------


def _poly_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(num, den):
    num = list(num)
    dd = len(den) - 1
    lead = den[-1]
    quot = [_ZERO] * max(0, len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i] / lead
        if c != 0:
            quot[i - dd] = c
            for j, dc in enumerate(den):
                num[i - dd + j] -= c * dc
    return _poly_trim(quot), _poly_trim(num)


@lru_cache(maxsize=None)
def cyclotomic_polynomial(N: int) -> tuple:
    """Coefficients (ascending) of the N-th cyclotomic polynomial.

    Computed by dividing x^N - 1 by Phi_d for every proper divisor d of N.
    """
    if N < 1:
        raise ValueError("order must be positive")
    poly = [_ZERO] * (N + 1)
    poly[0] = mpq(-1)
    poly[N] = _ONE
    for d in divisors(N):
        if d == N:
            continue
        poly, rem = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
        if rem:
            raise ArithmeticError("cyclotomic division left a remainder")
    return tuple(poly)


@lru_cache(maxsize=None)
def _field_context(N: int):
    """(phi, rows) where rows[j] expresses zeta_N^(phi+j) on the power basis."""
    modulus = cyclotomic_polynomial(N)
    phi = len(modulus) - 1
    # x^phi = -(m_0 + ... + m_{phi-1} x^{phi-1}); iterate multiplication by x
    top = tuple(-c for c in modulus[:phi])
    rows = [top]
    needed = max(2 * phi - 2, N - 1)
    for _ in range(phi + 1, needed + 1):
        prev = rows[-1]
        shifted = [_ZERO] + list(prev[: phi - 1])
        lead = prev[phi - 1]
        if lead != 0:
            shifted = [s + lead * t for s, t in zip(shifted, top)]
        rows.append(tuple(shifted))
    return phi, tuple(rows)


def euler_phi(N: int) -> int:
    return _field_context(N)[0]


class CycloNum:
    """An element of Q(zeta_N), immutable, always in canonical reduced form.

    Arithmetic between different orders embeds both operands into the lcm
    order first.  Use ``reduce_order`` to shrink to the minimal cyclotomic
    subfield containing the value.
    """

    __slots__ = ("order", "coeffs", "_hash")

    def __init__(self, order: int, coeffs):
        phi = euler_phi(order)
        coeffs = tuple(coeffs)
        if len(coeffs) != phi:
            raise ValueError(f"need {phi} coefficients for order {order}, got {len(coeffs)}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError("CycloNum is immutable")

    # -- construction -----------------------------------------------------

    @staticmethod
    def from_rational(x) -> "CycloNum":
        return CycloNum(1, (as_mpq(x),))

    @staticmethod
    def zero() -> "CycloNum":
        return _CYC_ZERO

    @staticmethod
    def one() -> "CycloNum":
        return _CYC_ONE

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> mpq:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    # -- order handling -----------------------------------------------------

    def embed(self, M: int) -> "CycloNum":
        """Image of self in Q(zeta_M); requires order | M."""
        if M == self.order:
            return self
        if M % self.order:
            raise ValueError(f"cannot embed order {self.order} into {M}")
        step = M // self.order
        phi_m, rows = _field_context(M)
        out = [_ZERO] * phi_m
        for j, c in enumerate(self.coeffs):
            if c == 0:
                continue
            e = j * step
            if e < phi_m:
                out[e] += c
            else:
                row = rows[e - phi_m]
                for k, r in enumerate(row):
                    if r != 0:
                        out[k] += c * r
        return CycloNum(M, out)

    def _pair(self, other: "CycloNum"):
        if self.order == other.order:
            return self, other
        M = math.lcm(self.order, other.order)
        return self.embed(M), other.embed(M)

    def reduce_order(self) -> "CycloNum":
        """Rewrite over the smallest cyclotomic subfield that contains self."""
        if self.order == 1:
            return self
        if self.is_rational():
            return CycloNum(1, (self.coeffs[0],))
        for d in divisors(self.order):
            if d in (1, self.order):
                continue
            coerced = _try_express(self, d)
            if coerced is not None:
                return coerced
        return self

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, CycloNum):
            return other
        if isinstance(other, (int, Fraction)) or type(other) is type(_ZERO):
            return CycloNum(1, (as_mpq(other),))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._pair(o)
        return CycloNum(a.order, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycloNum(self.order, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._pair(o)
        return CycloNum(a.order, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def scale(self, r) -> "CycloNum":
        r = as_mpq(r)
        return CycloNum(self.order, tuple(c * r for c in self.coeffs))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.order == 1:
            return self.scale(o.coeffs[0])
        if self.order == 1:
            return o.scale(self.coeffs[0])
        a, b = self._pair(o)
        phi, rows = _field_context(a.order)
        conv = [_ZERO] * (2 * phi - 1)
        for i, x in enumerate(a.coeffs):
            if x == 0:
                continue
            bc = b.coeffs
            for j in range(phi):
                y = bc[j]
                if y != 0:
                    conv[i + j] += x * y
        out = conv[:phi]
        for e in range(phi, 2 * phi - 1):
            c = conv[e]
            if c != 0:
                row = rows[e - phi]
                for k, r in enumerate(row):
                    if r != 0:
                        out[k] += c * r
        return CycloNum(a.order, out)

    __rmul__ = __mul__

    def inverse(self) -> "CycloNum":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in cyclotomic field")
        if self.is_rational():
            return CycloNum(self.order, (1 / self.coeffs[0],) + (_ZERO,) * (len(self.coeffs) - 1))
        modulus = list(cyclotomic_polynomial(self.order))
        inv = _poly_modular_inverse(list(self.coeffs), modulus)
        phi = len(modulus) - 1
        inv = inv + [_ZERO] * (phi - len(inv))
        return CycloNum(self.order, inv)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def conjugate(self) -> "CycloNum":
        """Complex conjugation, zeta -> zeta^(-1)."""
        N = self.order
        out = CycloNum.zero()
        for j, c in enumerate(self.coeffs):
            if c != 0:
                out = out + zeta(N, -j).scale(c)
        return out.embed(N) if out.order != N else out

    # -- comparison / hashing -------------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.order == o.order:
            return self.coeffs == o.coeffs
        a, b = self._pair(o)
        return a.coeffs == b.coeffs

    def __ne__(self, other):
        r = self.__eq__(other)
        return NotImplemented if r is NotImplemented else not r

    def __hash__(self):
        h = self._hash
        if h is None:
            r = self.reduce_order()
            h = hash((r.order, r.coeffs))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"CycloNum({self})"

    def __str__(self):
        parts = []
        for j, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if j == 0:
                parts.append(str(c))
            else:
                base = f"z{self.order}" if j == 1 else f"z{self.order}^{j}"
                if c == 1:
                    parts.append(base)
                elif c == -1:
                    parts.append(f"-{base}")
                else:
                    parts.append(f"{c}*{base}")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += f" + {p}" if not p.startswith("-") else f" - {p[1:]}"
        return out


def _try_express(x: CycloNum, d: int):
    """x rewritten in Q(zeta_d) if it lies there (d | order), else None."""
    N = x.order
    phi_d = euler_phi(d)
    basis = [zeta(d, j).embed(N).coeffs for j in range(phi_d)]
    phi_n = len(x.coeffs)
    # solve basis^T * y = x by Gaussian elimination over mpq
    rows = [[basis[c][r] for c in range(phi_d)] + [x.coeffs[r]] for r in range(phi_n)]
    piv_cols = []
    r = 0
    for c in range(phi_d):
        pr = next((i for i in range(r, phi_n) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(phi_n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    sol = [_ZERO] * phi_d
    for i, c in enumerate(piv_cols):
        sol[c] = rows[i][-1]
    for i in range(r, phi_n):
        if rows[i][-1] != 0:
            return None
    return CycloNum(d, sol)


def _poly_modular_inverse(a, modulus):
    """Inverse of a modulo an irreducible monic modulus, via extended Euclid."""
    r0, r1 = list(modulus), _poly_trim(list(a))
    t0, t1 = [], [_ONE]
    while r1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        qt = _poly_mul(q, t1)
        t0, t1 = t1, _poly_trim([x - y for x, y in _zip_pad(t0, qt)])
    if len(r0) != 1:
        raise ZeroDivisionError("element is not invertible")
    lead = r0[0]
    return [c / lead for c in t0]


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [_ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x != 0:
            for j, y in enumerate(b):
                if y != 0:
                    out[i + j] += x * y
    return _poly_trim(out)


def _zip_pad(a, b):
    la, lb = len(a), len(b)
    if la < lb:
        a = a + [_ZERO] * (lb - la)
    elif lb < la:
        b = b + [_ZERO] * (la - lb)
    return zip(a, b)


_CYC_ZERO = CycloNum(1, (_ZERO,))
_CYC_ONE = CycloNum(1, (_ONE,))


@lru_cache(maxsize=None)
def zeta(N: int, k: int = 1) -> CycloNum:
    """zeta_N^k, with zeta_N = exp(2*pi*i/N)."""
    k %= N
    phi, rows = _field_context(N)
    if k < phi:
        coeffs = [_ZERO] * phi
        coeffs[k] = _ONE
        return CycloNum(N, coeffs)
    return CycloNum(N, rows[k - phi])


@lru_cache(maxsize=None)
def imag_unit() -> CycloNum:
    return zeta(4, 1)


def rat(x) -> CycloNum:
    """Rational number as a CycloNum."""
    if isinstance(x, CycloNum):
        return x
    return CycloNum.from_rational(x)


def field_arith(x: CycloNum, y: CycloNum, op: str) -> CycloNum:
    """Named dispatch used by the CLI; op in {add, sub, mul, div}."""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown op {op!r}")


@lru_cache(maxsize=None)
def trig_value(kind: str, r) -> CycloNum:
    """Exact sin(r*pi) or cos(r*pi) for rational r.

    cos(p/q*pi) = (zeta_{2q}^p + zeta_{2q}^{-p})/2; sin is reduced to cos via
    the quarter-turn shift.
    """
    r = as_mpq(r)
    if kind == "sin":
        return trig_value("cos", mpq(1, 2) - r)
    if kind != "cos":
        raise ValueError(f"unknown trig kind {kind!r}")
    p, q = int(r.numerator), int(r.denominator)
    z = zeta(2 * q, p)
    zc = zeta(2 * q, -p)
    return (z + zc).scale(mpq(1, 2))


def cos_pi(r) -> CycloNum:
    return trig_value("cos", as_mpq(r))


def sin_pi(r) -> CycloNum:
    return trig_value("sin", as_mpq(r))


# ---------------------------------------------------------------------------
# exact linear algebra
# ---------------------------------------------------------------------------


@dataclass
class CycloMatrix:
    rows: int
    cols: int
    entries: list  # row-major CycloNum

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match dimensions")

    def at(self, i: int, j: int) -> CycloNum:
        return self.entries[i * self.cols + j]

    @staticmethod
    def from_rows(rows) -> "CycloMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            flat.extend(rat(x) for x in row)
        return CycloMatrix(r, c, flat)

    def row(self, i: int) -> list:
        return self.entries[i * self.cols : (i + 1) * self.cols]


@dataclass
class SolveResult:
    rank: int
    nullspace: list  # list of length-cols lists of CycloNum
    particular: list | None
    consistent: bool


def solve_exact(A: CycloMatrix, b=None) -> SolveResult:
    """Row-reduce A (augmented with b when given) exactly.

    Returns the rank, a basis of the right nullspace and, when b is given, a
    particular solution or consistent=False.  Pivots are the first nonzero
    entry in each column.
    """
    rows = [list(A.row(i)) for i in range(A.rows)]
    if b is not None:
        if len(b) != A.rows:
            raise ValueError("rhs length does not match row count")
        for i, v in enumerate(b):
            rows[i] = rows[i] + [rat(v)]
    ncols = A.cols
    width = ncols + (1 if b is not None else 0)
    piv_of_col = {}
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_of_col[c] = r
        r += 1
    rank = r
    consistent = True
    if b is not None:
        for i in range(rank, len(rows)):
            if rows[i][ncols]:
                consistent = False
                break
    free_cols = [c for c in range(ncols) if c not in piv_of_col]
    nullspace = []
    for fc in free_cols:
        vec = [CycloNum.zero()] * ncols
        vec[fc] = CycloNum.one()
        for c, pr in piv_of_col.items():
            vec[c] = -rows[pr][fc]
        nullspace.append(vec)
    particular = None
    if b is not None and consistent:
        particular = [CycloNum.zero()] * ncols
        for c, pr in piv_of_col.items():
            particular[c] = rows[pr][ncols]
    return SolveResult(rank=rank, nullspace=nullspace, particular=particular, consistent=consistent)
