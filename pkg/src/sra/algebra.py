"""The deformed dihedral oscillator algebra: four odd generators a0, a1, b0, b1
over the dihedral group algebra, with normal ordering onto the PBW basis
(a0^k0 a1^k1 b0^l0 b1^l1) * group-element.

Letters are encoded 0=a0, 1=a1, 2=b0, 3=b1; slots 0,1 are a-type, 2,3 b-type,
and conjugating by a reflection exchanges a-type and b-type (bit 2 flip).

Deformation data lives in AlgebraParams: for odd n a single mu; for even
n = 2m two parameters (mu0, mu1) attached to the two reflection classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

from gmpy2 import mpq

from .dihedral import GroupAlgElem, GroupElem, group_mult, identity, lam, rotation
from .exactfield import CycloNum, as_mpq, rat, zeta

LETTER_NAMES = ("a0", "a1", "b0", "b1")
_LETTER_CODE = {name: i for i, name in enumerate(LETTER_NAMES)}

_ONE_C = CycloNum.one()
_MINUS_ONE = CycloNum.one().scale(-1)


@dataclass(frozen=True)
class AlgebraParams:
    n: int
    mu0: mpq
    mu1: mpq

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        object.__setattr__(self, "mu0", as_mpq(self.mu0))
        object.__setattr__(self, "mu1", as_mpq(self.mu1))
        if self.n % 2 and self.mu1 != 0:
            raise ValueError("odd n admits a single deformation parameter")

    @staticmethod
    def odd(n: int, nu) -> "AlgebraParams":
        if n % 2 == 0:
            raise ValueError("use AlgebraParams.even for even n")
        return AlgebraParams(n, n * as_mpq(nu), mpq(0))

    @staticmethod
    def even(n: int, nu0, nu1) -> "AlgebraParams":
        if n % 2:
            raise ValueError("use AlgebraParams.odd for odd n")
        m = n // 2
        nu0, nu1 = as_mpq(nu0), as_mpq(nu1)
        return AlgebraParams(n, m * (nu0 + nu1), m * (nu0 - nu1))

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def is_even(self) -> bool:
        return self.n % 2 == 0

    @property
    def mu(self) -> mpq:
        if self.is_even:
            raise ValueError("mu is the odd-n parameter; even n has mu0, mu1")
        return self.mu0

    @property
    def nu(self) -> mpq:
        if self.is_even:
            raise ValueError("even n has nu0, nu1")
        return self.mu0 / self.n

    @property
    def nu0(self) -> mpq:
        return (self.mu0 + self.mu1) / self.n

    @property
    def nu1(self) -> mpq:
        return (self.mu0 - self.mu1) / self.n


class PBWMonomial(NamedTuple):
    exps: tuple  # (k0, k1, l0, l1)
    grp: GroupElem

    @property
    def degree(self) -> int:
        return sum(self.exps)

    @property
    def parity(self) -> int:
        return self.degree % 2

    def __str__(self):
        parts = []
        for name, e in zip(LETTER_NAMES, self.exps):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        parts.append(str(self.grp))
        return "*".join(parts)


def _letters(exps) -> tuple:
    out = []
    for letter, e in enumerate(exps):
        out.extend([letter] * e)
    return tuple(out)


@lru_cache(maxsize=None)
def _comm_table(params: AlgebraParams):
    """[x,y] for letters x<y as (scalar, ((L-index, factor), ...)).

    Only (0,1), (0,3), (1,2), (2,3) are nonzero; the group content is carried
    by L projector letters that the rewriting keeps symbolic until emission.
    """
    n = params.n
    if params.is_even:
        m = params.m
        mu0, mu1 = params.mu0, params.mu1
        pairs01 = tuple(p for p in ((1 % n, mu0), ((m + 1) % n, mu1)) if p[1] != 0)
        pairs03 = tuple(p for p in ((0, mu0), (m % n, mu1)) if p[1] != 0)
        pairs23 = tuple(p for p in (((-1) % n, mu0), ((m - 1) % n, mu1)) if p[1] != 0)
    else:
        mu0 = params.mu0
        pairs01 = ((1 % n, mu0),) if mu0 != 0 else ()
        pairs03 = ((0, mu0),) if mu0 != 0 else ()
        pairs23 = (((-1) % n, mu0),) if mu0 != 0 else ()
    neg = lambda pairs: tuple((q, -f) for q, f in pairs)
    return {
        (0, 1): (mpq(0), pairs01),
        (0, 3): (mpq(1), pairs03),
        (1, 2): (mpq(-1), neg(pairs03)),
        (2, 3): (mpq(0), pairs23),
        (0, 2): (mpq(0), ()),
        (1, 3): (mpq(0), ()),
    }


# group letters inside the rewriting engine are ('R'|'S'|'L'|'Q', index);
# the projector kinds L and Q keep correction terms single-branched and are
# expanded over reflections/rotations only when a term reaches normal form.


def _gl_past_letter(n: int, g, letter: int):
    """(factor, new_letter, new_group) for moving group letter g past one
    generator letter."""
    kind, idx = g
    if kind == "S":
        return lam(n, -idx if letter < 2 else idx), letter, g
    if kind == "R":
        return -lam(n, idx if letter < 2 else -idx), letter ^ 2, g
    if kind == "L":
        q = (idx + 1) % n if letter < 2 else (idx - 1) % n
        return _MINUS_ONE, letter ^ 2, ("L", q)
    q = (idx + 1) % n if letter < 2 else (idx - 1) % n
    return _ONE_C, letter, ("Q", q)


def _gl_mult(n: int, g1, g2):
    """Product of two group letters: (factor, letter) or None when it dies."""
    k1, i1 = g1
    k2, i2 = g2
    if k1 == "R":
        if k2 == "R":
            return _ONE_C, ("S", (i1 - i2) % n)
        if k2 == "S":
            return _ONE_C, ("R", (i1 - i2) % n)
        if k2 == "L":
            return lam(n, i1 * i2), ("Q", i2 % n)
        return lam(n, -i1 * i2), ("L", i2 % n)
    if k1 == "S":
        if k2 == "R":
            return _ONE_C, ("R", (i1 + i2) % n)
        if k2 == "S":
            return _ONE_C, ("S", (i1 + i2) % n)
        if k2 == "L":
            return lam(n, -i1 * i2), ("L", i2 % n)
        return lam(n, i1 * i2), ("Q", i2 % n)
    if k1 == "L":
        if k2 == "L":
            return (_ONE_C, ("Q", i2 % n)) if (i1 + i2) % n == 0 else None
        if k2 == "Q":
            return (_ONE_C, ("L", i2 % n)) if (i1 - i2) % n == 0 else None
        if k2 == "R":
            return lam(n, i1 * i2), ("Q", (-i1) % n)
        return lam(n, i1 * i2), ("L", i1 % n)
    if k2 == "L":
        return (_ONE_C, ("L", i2 % n)) if (i1 + i2) % n == 0 else None
    if k2 == "Q":
        return (_ONE_C, ("Q", i2 % n)) if (i1 - i2) % n == 0 else None
    if k2 == "R":
        return lam(n, i1 * i2), ("L", (-i1) % n)
    return lam(n, i1 * i2), ("Q", i1 % n)


def _emit(params: AlgebraParams, result: dict, letters, group, coeff) -> None:
    n = params.n
    exps = [0, 0, 0, 0]
    for it in letters:
        exps[it] += 1
    exps = tuple(exps)
    kind, idx = group
    if kind == "S" or kind == "R":
        mono = PBWMonomial(exps, GroupElem(n, kind, idx))
        cur = result.get(mono)
        result[mono] = coeff if cur is None else cur + coeff
        return
    inv_n = mpq(1, n)
    base = coeff.scale(inv_n)
    if kind == "L":
        for j in range(n):
            mono = PBWMonomial(exps, GroupElem(n, "R", j))
            c = base * lam(n, j * idx)
            cur = result.get(mono)
            result[mono] = c if cur is None else cur + c
    else:
        for j in range(n):
            mono = PBWMonomial(exps, GroupElem(n, "S", j))
            c = base * lam(n, -j * idx)
            cur = result.get(mono)
            result[mono] = c if cur is None else cur + c


def _normalize_states(params: AlgebraParams, states: dict, leftmost: bool = True) -> dict:
    """Rewrite {item-tuple: coeff} states to normal form; returns monomial dict.

    Items are generator letters 0..3 and group letters.  Group letters move
    rightward (twisting generators), adjacent out-of-order generators swap and
    emit their commutator corrections; ``leftmost`` selects which violation is
    rewritten first, and both orders land on the same normal form.
    """
    n = params.n
    table = _comm_table(params)
    result: dict = {}
    frontier = states
    while frontier:
        next_frontier: dict = {}

        def push(items, coeff):
            cur = next_frontier.get(items)
            next_frontier[items] = coeff if cur is None else cur + coeff

        for items, coeff in frontier.items():
            if not coeff:
                continue
            positions = range(len(items) - 1) if leftmost else range(len(items) - 2, -1, -1)
            dpos = None
            for i in positions:
                a, b = items[i], items[i + 1]
                ga, gb = type(a) is tuple, type(b) is tuple
                if ga and gb:
                    dpos, action = i, "gg"
                    break
                if ga and not gb:
                    dpos, action = i, "gl"
                    break
                if not ga and not gb and a > b:
                    dpos, action = i, "swap"
                    break
            if dpos is None:
                if items and type(items[-1]) is tuple:
                    letters, group = items[:-1], items[-1]
                else:
                    letters, group = items, ("S", 0)
                _emit(params, result, letters, group, coeff)
                continue
            if action == "gg":
                prod = _gl_mult(n, items[dpos], items[dpos + 1])
                if prod is not None:
                    f, g = prod
                    push(
                        items[:dpos] + (g,) + items[dpos + 2 :],
                        coeff if f is _ONE_C else coeff * f,
                    )
                continue
            if action == "gl":
                f, letter, g = _gl_past_letter(n, items[dpos], items[dpos + 1])
                push(
                    items[:dpos] + (letter, g) + items[dpos + 2 :],
                    coeff if f is _ONE_C else coeff * f,
                )
                continue
            x, y = items[dpos], items[dpos + 1]
            push(items[:dpos] + (y, x) + items[dpos + 2 :], coeff)
            scalar, lparts = table[(y, x)]
            if scalar != 0:
                push(items[:dpos] + items[dpos + 2 :], coeff.scale(-scalar))
            for q, fmu in lparts:
                push(
                    items[:dpos] + (("L", q),) + items[dpos + 2 :],
                    coeff.scale(-fmu),
                )
        frontier = next_frontier
    return {m: c for m, c in result.items() if c}


class AlgElem:
    """A normal-ordered element: CycloNum combination of PBW monomials."""

    __slots__ = ("params", "terms")

    def __init__(self, params: AlgebraParams, terms=None):
        self.params = params
        clean = {}
        if terms:
            for m, c in terms.items():
                c = rat(c)
                if c:
                    clean[m] = c
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(params) -> "AlgElem":
        return AlgElem(params)

    @staticmethod
    def scalar(params, c) -> "AlgElem":
        return AlgElem(params, {PBWMonomial((0, 0, 0, 0), identity(params.n)): rat(c)})

    @staticmethod
    def from_group(params, g: GroupElem, coeff=1) -> "AlgElem":
        if g.n != params.n:
            raise ValueError("group element size differs from algebra")
        return AlgElem(params, {PBWMonomial((0, 0, 0, 0), g): rat(coeff)})

    @staticmethod
    def from_group_alg(params, x: GroupAlgElem) -> "AlgElem":
        if x.n != params.n:
            raise ValueError("group algebra size differs")
        return AlgElem(params, {PBWMonomial((0, 0, 0, 0), g): c for g, c in x.coeffs.items()})

    @staticmethod
    def generator(params, letter) -> "AlgElem":
        code = _LETTER_CODE[letter] if isinstance(letter, str) else int(letter)
        exps = tuple(1 if i == code else 0 for i in range(4))
        return AlgElem(params, {PBWMonomial(exps, identity(params.n)): rat(1)})

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((m.degree for m in self.terms), default=0)

    def parity(self):
        """0 or 1 if homogeneous, None if mixed, 0 for zero."""
        ps = {m.parity for m in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def homogeneous_part(self, parity: int) -> "AlgElem":
        return AlgElem(self.params, {m: c for m, c in self.terms.items() if m.parity == parity})

    def degree_part(self, d: int) -> "AlgElem":
        return AlgElem(self.params, {m: c for m, c in self.terms.items() if m.degree == d})

    def group_part(self) -> GroupAlgElem:
        out = {}
        for m, c in self.terms.items():
            if m.degree == 0:
                out[m.grp] = c
        return GroupAlgElem(self.params.n, out)

    # -- arithmetic -----------------------------------------------------------

    def _check(self, other):
        if self.params != other.params:
            raise ValueError("mixed algebra parameters")

    def __add__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, CycloNum.zero()) + c
        return AlgElem(self.params, out)

    def __neg__(self):
        return AlgElem(self.params, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, CycloNum.zero()) - c
        return AlgElem(self.params, out)

    def scale(self, c) -> "AlgElem":
        c = rat(c)
        if not c:
            return AlgElem(self.params)
        return AlgElem(self.params, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        return alg_mult(self, other)

    def __eq__(self, other):
        return (
            isinstance(other, AlgElem)
            and self.params == other.params
            and self.terms == other.terms
        )

    def __str__(self):
        if not self.terms:
            return "0"
        keys = sorted(self.terms, key=lambda m: (m.degree, m.exps, m.grp.kind, m.grp.index))
        return " + ".join(f"({self.terms[m]})*{m}" for m in keys)

    __repr__ = __str__


@lru_cache(maxsize=400_000)
def _mono_product(params: AlgebraParams, m1: PBWMonomial, m2: PBWMonomial):
    items = (
        _letters(m1.exps)
        + ((m1.grp.kind, m1.grp.index),)
        + _letters(m2.exps)
        + ((m2.grp.kind, m2.grp.index),)
    )
    out = _normalize_states(params, {items: CycloNum.one()})
    return tuple(out.items())


def alg_mult(x: AlgElem, y: AlgElem) -> AlgElem:
    if x.params != y.params:
        raise ValueError("mixed algebra parameters")
    out: dict = {}
    for m1, c1 in x.terms.items():
        for m2, c2 in y.terms.items():
            c12 = c1 * c2
            for mono, c in _mono_product(x.params, m1, m2):
                acc = out.get(mono)
                out[mono] = c12 * c if acc is None else acc + c12 * c
    return AlgElem(x.params, out)


def alg_commutator(x: AlgElem, y: AlgElem, sign: str = "commutator") -> AlgElem:
    xy = alg_mult(x, y)
    yx = alg_mult(y, x)
    if sign == "commutator":
        return xy - yx
    if sign == "anticommutator":
        return xy + yx
    raise ValueError("sign must be 'commutator' or 'anticommutator'")


def normal_order(word: Iterable, params: AlgebraParams, strategy: str = "leftmost") -> AlgElem:
    """Normal-order a word of generators, group(-algebra) elements and scalars.

    ``strategy`` picks which admissible rewrite is applied first; any choice
    yields the same element (the reduction is confluent), which the test suite
    exercises directly.
    """
    states = {(): CycloNum.one()}
    for item in word:
        if isinstance(item, str):
            item = _LETTER_CODE[item]
        if isinstance(item, GroupElem):
            item = (item.kind, item.index)
        if isinstance(item, int) and 0 <= item <= 3 or type(item) is tuple:
            states = {k + (item,): c for k, c in states.items()}
        elif isinstance(item, GroupAlgElem):
            new: dict = {}
            for k, c in states.items():
                for g, cg in item.coeffs.items():
                    kk = k + ((g.kind, g.index),)
                    cur = new.get(kk)
                    cc = c * cg
                    new[kk] = cc if cur is None else cur + cc
            states = new
        else:
            c = rat(item)
            states = {k: v * c for k, v in states.items()}
    if strategy not in ("leftmost", "rightmost"):
        raise ValueError("strategy must be 'leftmost' or 'rightmost'")
    out = _normalize_states(params, states, leftmost=strategy == "leftmost")
    return AlgElem(params, out)


# ---------------------------------------------------------------------------
# distinguished elements
# ---------------------------------------------------------------------------


def L_elem(params: AlgebraParams, p: int) -> AlgElem:
    from .dihedral import lq_element

    return AlgElem.from_group_alg(params, lq_element("L", p, params.n))


def Q_elem(params: AlgebraParams, p: int) -> AlgElem:
    from .dihedral import lq_element

    return AlgElem.from_group_alg(params, lq_element("Q", p, params.n))


@lru_cache(maxsize=None)
def sl2_generator(alpha: int, beta: int, params: AlgebraParams) -> AlgElem:
    """T^{ab} = ({a^alpha, b^beta} + {b^alpha, a^beta})/2."""
    a = [AlgElem.generator(params, 0), AlgElem.generator(params, 1)]
    b = [AlgElem.generator(params, 2), AlgElem.generator(params, 3)]
    t = alg_commutator(a[alpha], b[beta], "anticommutator") + alg_commutator(
        b[alpha], a[beta], "anticommutator"
    )
    return t.scale(mpq(1, 2))


@lru_cache(maxsize=None)
def singlet_element(params: AlgebraParams) -> AlgElem:
    """The quadratic invariant commuting with every sl2 generator."""
    a = [AlgElem.generator(params, 0), AlgElem.generator(params, 1)]
    b = [AlgElem.generator(params, 2), AlgElem.generator(params, 3)]
    acc = AlgElem.zero(params)
    for alpha in range(2):
        for beta in range(2):
            eps = 1 if (alpha, beta) == (0, 1) else -1 if (alpha, beta) == (1, 0) else 0
            if not eps:
                continue
            term = alg_commutator(a[alpha], b[beta], "anticommutator") - alg_commutator(
                b[alpha], a[beta], "anticommutator"
            )
            acc = acc + term.scale(eps)
    quarter_i_inv = (zeta(4).scale(4)).inverse()  # 1/(4i)
    return acc.scale(quarter_i_inv)


def klein_conjugate(x: AlgElem) -> AlgElem:
    """Multiply by the half-turn rotation (even n only); an involution that
    turns traces into supertraces and back."""
    params = x.params
    if params.n % 2:
        raise ValueError("Klein conjugation needs even n")
    k = AlgElem.from_group(params, rotation(params.n, params.m))
    return alg_mult(x, k)
