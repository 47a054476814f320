"""Closed-form generating functions of trace values on the singlet subalgebra.

Everything is represented exactly: a function of t is a ratio of Laurent
polynomials in w = exp(i*t/M), where M clears the denominators of the
deformation parameters, so that exp(i*t) and exp(i*mu*t) are integer powers
of w.  Degeneracy of a functional is then a divisibility statement, and
Taylor data at t = 0 is exact evaluation at w = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from gmpy2 import mpq

from .algebra import AlgElem, Q_elem, alg_mult, singlet_element
from .dihedral import lam, reflection, rotation
from .exactfield import CycloNum, as_mpq, rat, sin_pi, zeta
from .traces import TraceSpec


class NondegenerateError(Exception):
    """Raised when a construction requires a degenerate functional."""


_I = zeta(4)


class LaurentPoly:
    """Laurent polynomial in w with CycloNum coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for e, c in terms.items():
                c = rat(c)
                if c:
                    clean[int(e)] = c
        self.terms = clean

    @staticmethod
    def const(c) -> "LaurentPoly":
        return LaurentPoly({0: rat(c)})

    @staticmethod
    def w_power(e: int, c=1) -> "LaurentPoly":
        return LaurentPoly({e: rat(c)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.terms == other.terms

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            cur = out.get(e)
            s = c if cur is None else cur + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return LaurentPoly(out)

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                c = c1 * c2
                cur = out.get(e)
                s = c if cur is None else cur + c
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return LaurentPoly(out)

    def scale(self, c) -> "LaurentPoly":
        c = rat(c)
        if not c:
            return LaurentPoly()
        return LaurentPoly({e: v * c for e, v in self.terms.items()})

    def shift(self, k: int) -> "LaurentPoly":
        return LaurentPoly({e + k: c for e, c in self.terms.items()})

    def min_exp(self) -> int:
        return min(self.terms) if self.terms else 0

    def max_exp(self) -> int:
        return max(self.terms) if self.terms else 0

    def d_dw_times_w(self) -> "LaurentPoly":
        """w * d/dw, the exponent-scaling derivation."""
        return LaurentPoly({e: c.scale(e) for e, c in self.terms.items() if e})

    def stretch(self, k: int) -> "LaurentPoly":
        return LaurentPoly({e * k: c for e, c in self.terms.items()})

    def evaluate(self, x: CycloNum) -> CycloNum:
        acc = CycloNum.zero()
        xs: dict = {}

        def power(e: int) -> CycloNum:
            if e in xs:
                return xs[e]
            if e == 0:
                v = CycloNum.one()
            elif e > 0:
                v = power(e - 1) * x
            else:
                v = power(e + 1) * x.inverse()
            xs[e] = v
            return v

        for e, c in sorted(self.terms.items()):
            acc = acc + c * power(e)
        return acc

    def at_one(self) -> CycloNum:
        acc = CycloNum.zero()
        for c in self.terms.values():
            acc = acc + c
        return acc

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            if e == 0:
                parts.append(f"({c})")
            else:
                parts.append(f"({c})*w^{e}")
        return " + ".join(parts)

    __repr__ = __str__


def _poly_divmod(a: LaurentPoly, b: LaurentPoly):
    """Division with remainder for true polynomials (min_exp >= 0)."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    rem = dict(a.terms)
    quot: dict = {}
    db = b.max_exp()
    lead = b.terms[db]
    lead_inv = lead.inverse()
    while rem:
        da = max(rem)
        if da < db:
            break
        f = rem[da] * lead_inv
        quot[da - db] = f
        for e, c in b.terms.items():
            k = da - db + e
            cur = rem.get(k)
            s = -f * c if cur is None else cur - f * c
            if s:
                rem[k] = s
            else:
                rem.pop(k, None)
    return LaurentPoly(quot), LaurentPoly(rem)


def _poly_gcd(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    a = a.shift(-a.min_exp()) if not a.is_zero() else a
    b = b.shift(-b.min_exp()) if not b.is_zero() else b
    while not b.is_zero():
        _, r = _poly_divmod(a, b)
        a, b = b, r.shift(-r.min_exp()) if not r.is_zero() else r
    if a.is_zero():
        return LaurentPoly.const(1)
    return a.scale(a.terms[a.max_exp()].inverse())


class ExpPolyFn:
    """Exact function of t: num(w)/den(w) with w = exp(i*t/M), kept reduced.

    The denominator is normalized with lowest exponent 0 and unit constant
    term, so equality is literal and quasipolynomiality means the denominator
    is the constant 1.
    """

    __slots__ = ("M", "num", "den")

    def __init__(self, M: int, num: LaurentPoly, den: LaurentPoly, reduce: bool = True):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if reduce:
            num, den = _reduce_fraction(num, den)
        self.M = M
        self.num = num
        self.den = den

    @staticmethod
    def const(c, M: int = 1) -> "ExpPolyFn":
        return ExpPolyFn(M, LaurentPoly.const(c), LaurentPoly.const(1), reduce=False)

    @staticmethod
    def zero(M: int = 1) -> "ExpPolyFn":
        return ExpPolyFn(M, LaurentPoly(), LaurentPoly.const(1), reduce=False)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def lift(self, M2: int) -> "ExpPolyFn":
        if M2 == self.M:
            return self
        if M2 % self.M:
            raise ValueError("can only lift to a multiple frequency denominator")
        k = M2 // self.M
        return ExpPolyFn(M2, self.num.stretch(k), self.den.stretch(k), reduce=False)

    def _common(self, other: "ExpPolyFn"):
        M = math.lcm(self.M, other.M)
        return self.lift(M), other.lift(M), M

    def __add__(self, other):
        a, b, M = self._common(other)
        return ExpPolyFn(M, a.num * b.den + b.num * a.den, a.den * b.den)

    def __sub__(self, other):
        a, b, M = self._common(other)
        return ExpPolyFn(M, a.num * b.den - b.num * a.den, a.den * b.den)

    def __neg__(self):
        return ExpPolyFn(self.M, -self.num, self.den, reduce=False)

    def __mul__(self, other):
        a, b, M = self._common(other)
        return ExpPolyFn(M, a.num * b.num, a.den * b.den)

    def scale(self, c) -> "ExpPolyFn":
        return ExpPolyFn(self.M, self.num.scale(c), self.den, reduce=False)

    def __truediv__(self, other):
        a, b, M = self._common(other)
        if b.num.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return ExpPolyFn(M, a.num * b.den, a.den * b.num)

    def __eq__(self, other):
        if not isinstance(other, ExpPolyFn):
            return NotImplemented
        a, b, _ = self._common(other)
        return a.num == b.num and a.den == b.den

    def ddt(self) -> "ExpPolyFn":
        """d/dt = (i/M) * w * d/dw."""
        factor = _I.scale(mpq(1, self.M))
        num = self.num.d_dw_times_w() * self.den - self.num * self.den.d_dw_times_w()
        return ExpPolyFn(self.M, num.scale(factor), self.den * self.den)

    def at_zero(self) -> CycloNum:
        """Value at t=0 (w=1), cancelling removable singularities."""
        num, den = self.num, self.den
        dv = den.at_one()
        if dv:
            return num.at_one() / dv
        w_minus_1 = LaurentPoly({1: rat(1), 0: rat(-1)})
        while True:
            if num.is_zero():
                return CycloNum.zero()
            nv = num.at_one()
            if dv:
                return nv / dv
            if nv:
                raise ZeroDivisionError("pole at t=0")
            num, r1 = _poly_divmod(num.shift(-num.min_exp()), w_minus_1)
            den, r2 = _poly_divmod(den.shift(-den.min_exp()), w_minus_1)
            if not (r1.is_zero() and r2.is_zero()):
                raise ArithmeticError("inconsistent removable singularity")
            dv = den.at_one()

    def eval_at_unit(self, M_order: int, j: int) -> CycloNum:
        """Exact value at w = zeta_{M_order}^j."""
        x = zeta(M_order, j)
        dv = self.den.evaluate(x)
        if not dv:
            raise ZeroDivisionError("pole at the requested point")
        return self.num.evaluate(x) / dv

    def is_quasipoly(self) -> bool:
        return list(self.den.terms.items()) == [(0, CycloNum.one())]

    def __str__(self):
        return f"[{self.num}] / [{self.den}] with w = exp(i*t/{self.M})"

    __repr__ = __str__


def _reduce_fraction(num: LaurentPoly, den: LaurentPoly):
    if num.is_zero():
        return LaurentPoly(), LaurentPoly.const(1)
    # w is a ring unit but not a constant function: shifts of num and den must
    # stay paired so num/den is unchanged
    na, nb = num.min_exp(), den.min_exp()
    a = num.shift(-na)
    b = den.shift(-nb)
    g = _poly_gcd(a, b)
    if g.max_exp() > 0:
        a, r1 = _poly_divmod(a, g)
        b, r2 = _poly_divmod(b, g)
        if not (r1.is_zero() and r2.is_zero()):
            raise ArithmeticError("gcd does not divide")
    num = a.shift(na - nb)
    den = b
    shift = den.min_exp()
    if shift:
        den = den.shift(-shift)
        num = num.shift(-shift)
    c = den.terms[0]
    if c != CycloNum.one():
        inv = c.inverse()
        num = num.scale(inv)
        den = den.scale(inv)
    return num, den


@dataclass
class QuasiPolyForm:
    """f(t) = sum coeff * exp(i * freq * t) with exact rational freq."""

    M: int
    frequencies: list  # mpq values f, meaning exponent i*f*t
    coeffs: list

    def value_at_zero(self) -> CycloNum:
        acc = CycloNum.zero()
        for c in self.coeffs:
            acc = acc + c
        return acc


def quasipoly_check(f: ExpPolyFn):
    """(is_quasipoly, form) - true iff the denominator divides the numerator."""
    if not f.is_quasipoly():
        return False, None
    freqs, coeffs = [], []
    for e in sorted(f.num.terms):
        freqs.append(mpq(e, f.M))
        coeffs.append(f.num.terms[e])
    return True, QuasiPolyForm(M=f.M, frequencies=freqs, coeffs=coeffs)


# ---------------------------------------------------------------------------
# the closed forms
# ---------------------------------------------------------------------------


def freq_denominator(params) -> int:
    if params.is_even:
        return math.lcm(int(params.mu0.denominator), int(params.mu1.denominator))
    return int(params.mu0.denominator)


def _cos_t_mu(M: int, mu) -> LaurentPoly:
    a = int(as_mpq(mu) * M)
    return LaurentPoly({a: rat(mpq(1, 2))}) + LaurentPoly({-a: rat(mpq(1, 2))})


def _sin_t_mu(M: int, mu) -> LaurentPoly:
    a = int(as_mpq(mu) * M)
    if a == 0:
        return LaurentPoly()
    half_over_i = _I.scale(mpq(-1, 2))  # 1/(2i) = -i/2
    return LaurentPoly({a: half_over_i, -a: -half_over_i})


def gk_closed_form(spec: TraceSpec, k: int) -> ExpPolyFn:
    """The k-th Fourier-mode generating function as an exact rational in w."""
    params = spec.params
    n = params.n
    M = freq_denominator(params)
    eit = LaurentPoly.w_power(M)
    if not params.is_even:
        kappa = spec.kappa
        mu = params.mu0
        sp_l0 = spec.sp_L(0)
        sp_sk = spec.sp_group(rotation(n, k))
        lk = lam(n, k)
        lmk = lam(n, -k)
        g = LaurentPoly()
        if sp_l0:
            if mu != 0:
                g = g + (_cos_t_mu(M, mu) - LaurentPoly.const(1)).scale(
                    sp_l0.scale(mpq(2, 1) / mu)
                )
            bracket = (LaurentPoly.const(lk) - eit.scale(kappa)).scale(lmk * _I.scale(2))
            g = g + bracket * _sin_t_mu(M, mu).scale(sp_l0)
        if sp_sk:
            c = lmk * (rat(kappa) - lk) * (rat(kappa) - lk)
            g = g + LaurentPoly.const(c.scale(kappa) * sp_sk)
        num = eit.scale(rat(kappa) * lk) * g
        den_root = eit.scale(kappa) - LaurentPoly.const(lk)
        return ExpPolyFn(M, num, den_root * den_root)
    # even n: traces only; the supertrace twin evaluates through its base
    if spec._base is not None:
        raise ValueError("even-n generating functions are built from the trace twin")
    m = params.m
    mu0, mu1 = params.mu0, params.mu1
    x1 = CycloNum.zero()
    for l in range(1, m):
        s = sin_pi(mpq(l, m))
        x1 = x1 + s * s * spec.sp_group(rotation(n, 2 * l))
    x2 = CycloNum.zero()
    for l in range(m):
        s = sin_pi(mpq(2 * l + 1, 2 * m))
        x2 = x2 + s * s * spec.sp_group(rotation(n, 2 * l + 1))
    xp, xm = x1 + x2, x1 - x2
    sign = 1 if k % 2 == 0 else -1
    lk = lam(n, k)
    sk = spec.sp_group(rotation(n, k))
    one = LaurentPoly.const(1)
    f = (one - _cos_t_mu(M, mu0)).scale(lk.scale(mpq(2, m)) * xp)
    f = f + (one - _cos_t_mu(M, mu1)).scale(lk.scale(mpq(2 * sign, m)) * xm)
    f = f + LaurentPoly.const((rat(1) - lk) * (rat(1) - lk) * sk)
    brk = _sin_t_mu(M, mu0).scale(xp.scale(mu0)) + _sin_t_mu(M, mu1).scale(xm.scale(sign * mu1))
    f = f + (eit - LaurentPoly.const(lk)) * brk.scale(_I.scale(mpq(2, m)))
    num = eit * f
    den_root = eit - LaurentPoly.const(lk)
    return ExpPolyFn(M, num, den_root * den_root)


def fp_from_gk(spec: TraceSpec) -> list:
    """Invert the Fourier transform: F_p = (1/n) sum_k lam^{-kp} G_k."""
    n = spec.params.n
    gks = [gk_closed_form(spec, k) for k in range(n)]
    out = []
    for p in range(n):
        acc = ExpPolyFn.zero(gks[0].M)
        for k in range(n):
            acc = acc + gks[k].scale(lam(n, -k * p))
        out.append(acc.scale(mpq(1, n)))
    return out


def delta_fn(spec: TraceSpec, p: int) -> ExpPolyFn:
    """The exponential correction carried by the twisted p = 0 (and even-n
    p = m) generating functions."""
    params = spec.params
    n = params.n
    p %= n
    M = freq_denominator(params)
    if not params.is_even:
        if p != 0:
            return ExpPolyFn.zero(M)
        return ExpPolyFn(M, _sin_t_mu(M, params.mu0).scale(spec.sp_L(0)), LaurentPoly.const(1))
    if p == 0:
        return ExpPolyFn(M, _sin_t_mu(M, params.mu0).scale(spec.sp_L(0)), LaurentPoly.const(1))
    if p == params.m:
        return ExpPolyFn(M, _sin_t_mu(M, params.mu1).scale(spec.sp_L(params.m)), LaurentPoly.const(1))
    return ExpPolyFn.zero(M)


def phi_fn(spec: TraceSpec, p: int, fp: ExpPolyFn | None = None) -> ExpPolyFn:
    if fp is None:
        fp = fp_from_gk(spec)[p % spec.params.n]
    return fp + delta_fn(spec, p).scale(_I.scale(2))


def psi_value(spec: TraceSpec, p: int) -> CycloNum:
    """The constant value of the reflection-sector generating function."""
    return spec.sp_L(p % spec.params.n)


def s_power_trace(spec: TraceSpec, j: int, p: int, fps=None) -> CycloNum:
    """sp(s^j Q_p) read off the generating functions by formal derivatives."""
    if j < 0:
        raise ValueError("power must be nonnegative")
    params = spec.params
    n = params.n
    p %= n
    if spec._base is not None:
        v = s_power_trace(spec._base, j, p, fps)
        return -v if p % 2 else v
    if fps is None:
        fps = fp_from_gk(spec)
    f = fps[p]
    twist = None
    if not params.is_even:
        if p == 0:
            twist = params.mu0
    else:
        if p == 0:
            twist = params.mu0
        elif p == params.m:
            twist = params.mu1
    if twist is None:
        for _ in range(j):
            f = f.ddt()
        return f.at_zero()
    if j % 2:
        return CycloNum.zero()
    t2 = twist * twist
    for _ in range(j // 2):
        f = f.ddt().ddt() + f.scale(t2)
    return f.at_zero()


def gk_ode_residual(spec: TraceSpec, k: int) -> ExpPolyFn:
    """Residual of the first-order equation each Fourier mode satisfies."""
    params = spec.params
    n = params.n
    M = freq_denominator(params)
    gk = gk_closed_form(spec, k)
    eit = ExpPolyFn(M, LaurentPoly.w_power(M), LaurentPoly.const(1), reduce=False)
    lk = ExpPolyFn.const(lam(n, k), M)
    if not params.is_even:
        kappa = spec.kappa
        keit = eit.scale(kappa)
        dtilde = ExpPolyFn(
            M,
            _sin_t_mu(M, params.mu0).scale(spec.sp_L(0) * lam(n, -k)),
            LaurentPoly.const(1),
        )
        rhs1 = (lk + keit) / (lk - keit) * gk.scale(_I)
        rhs2 = (lk / (lk - keit)).scale(_I.scale(2 * kappa)) * (eit * dtilde).ddt()
        return gk.ddt() - rhs1 - rhs2
    dtilde = ExpPolyFn(
        M,
        _sin_t_mu(M, params.mu0).scale(spec.sp_L(0) * lam(n, -k))
        + _sin_t_mu(M, params.mu1).scale(spec.sp_L(params.m) * lam(n, k * (params.m - 1))),
        LaurentPoly.const(1),
    )
    rhs1 = (lk + eit) / (lk - eit) * gk.scale(_I)
    rhs2 = (ExpPolyFn.const(rat(1), M) / (lk - eit)).scale(_I.scale(2)) * (eit * dtilde).ddt()
    return gk.ddt() - rhs1 - rhs2


def fp_system_residual(spec: TraceSpec, p: int, fps=None) -> ExpPolyFn:
    """Residual of the coupled first-order system for the F_p."""
    params = spec.params
    n = params.n
    kappa = 1 if params.is_even else spec.kappa
    if fps is None:
        fps = fp_from_gk(spec)
    M = fps[0].M
    eit = ExpPolyFn(M, LaurentPoly.w_power(M), LaurentPoly.const(1), reduce=False)
    fp, fp1 = fps[p % n], fps[(p + 1) % n]
    dnext = delta_fn(spec, (p + 1) % n)
    lhs = fp.ddt() - (eit * fp1.ddt()).scale(kappa)
    rhs = fp.scale(_I) + (eit * fp1).scale(_I.scale(kappa)) + (eit * dnext).ddt().scale(
        _I.scale(2 * kappa)
    )
    return lhs - rhs


def null_vector_candidates(spec: TraceSpec):
    """Null vectors of the bilinear form built from the quasipolynomial
    frequency data: one per nonvanishing mode, with the twisted modes using
    the shifted-square construction.

    Returns a list of (p, AlgElem).  Raises NondegenerateError when some mode
    is not quasipolynomial.
    """
    params = spec.params
    n = params.n
    base = spec if spec._base is None else spec._base
    fps = fp_from_gk(base)
    forms = []
    for p, f in enumerate(fps):
        ok, form = quasipoly_check(f)
        if not ok:
            raise NondegenerateError(f"spec is nondegenerate: mode {p} has poles")
        forms.append(form)
    s = singlet_element(params)
    out = []
    for p, form in enumerate(forms):
        qp = Q_elem(params, p)
        twist = None
        if p == 0:
            twist = params.mu0
        elif params.is_even and p == params.m:
            twist = params.mu1
        if twist is None:
            acc = qp
            for fr in form.frequencies:
                acc = alg_mult(s, acc) - acc.scale(_I.scale(fr))
            out.append((p, acc))
        else:
            if form.frequencies:
                acc = qp
                seen = set()
                for fr in form.frequencies:
                    f2 = fr * fr
                    if f2 in seen:
                        continue
                    seen.add(f2)
                    shift = f2 - twist * twist
                    acc = alg_mult(s, alg_mult(s, acc)) + acc.scale(shift)
                acc = alg_mult(s, alg_mult(s, acc))
            else:
                acc = qp
            out.append((p, acc))
    if spec._base is not None:
        # transported functional: same construction, conjugated back
        from .algebra import klein_conjugate

        out = [(p, klein_conjugate(v)) for p, v in out]
    return out
