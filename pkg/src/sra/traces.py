"""Trace and supertrace functionals on the deformed dihedral algebra.

A functional is fixed by its free parameters on rotation conjugacy classes;
the remaining degree-zero values (reflections, and the identity for traces)
are filled in from the ground-level consistency conditions.  Values on
higher-degree PBW monomials are obtained by exact linear algebra over the
relations that the defining cyclic-invariance property imposes:

  * conjugation by rotations kills monomials whose a/b letter counts differ
    mod n and identifies the reflection sectors with a reference sector,
  * pulling the leading generator around the trace gives two-term recursions
    inside a sector,
  * invariance under the quadratic symmetry generators, and relations
    harvested from degree d+2 pulls whose leading terms cancel, close the
    remaining directions (the identity-rotation sector of a trace).

Every relation is generated by the normal-ordering engine, so the values are
exact consequences of the defining relations; an underdetermined or
inconsistent system raises instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .algebra import (
    AlgebraParams,
    AlgElem,
    PBWMonomial,
    alg_mult,
    klein_conjugate,
    normal_order,
    singlet_element,
    sl2_generator,
)
from .dihedral import GroupElem, identity, lam, lq_element, reflection, rotation
from .exactfield import CycloMatrix, CycloNum, cos_pi, rat, sin_pi, solve_exact


class TraceError(Exception):
    pass


class InsufficientRelationsError(TraceError):
    """The assembled cyclicity relations do not pin down a degree level."""


class TraceConsistencyError(TraceError):
    """The relations contradict each other: an algebra or spec bug."""


def _class_index(n: int, k: int) -> int:
    k %= n
    return min(k, n - k)


class TraceSpec:
    """A single trace (kappa=+1) or supertrace (kappa=-1) functional."""

    def __init__(self, params: AlgebraParams, kappa: int, free, group_values, base=None):
        self.params = params
        self.kappa = kappa
        self.free = tuple(rat(f) for f in free)
        self.group_values = dict(group_values)
        self._memo: dict = {}
        self._solved: set = set()
        self._base = base  # even-n supertraces evaluate through the Klein twin

    @property
    def n(self) -> int:
        return self.params.n

    def sp_group(self, g: GroupElem) -> CycloNum:
        return self.group_values[g]

    def sp_L(self, p: int) -> CycloNum:
        n = self.n
        acc = CycloNum.zero()
        for k in range(n):
            acc = acc + lam(n, k * p) * self.group_values[reflection(n, k)]
        return acc.scale(mpq(1, n))

    def sp_Q(self, p: int) -> CycloNum:
        n = self.n
        acc = CycloNum.zero()
        for k in range(n):
            acc = acc + lam(n, -k * p) * self.group_values[rotation(n, k)]
        return acc.scale(mpq(1, n))

    def is_zero_functional(self) -> bool:
        return all(not v for v in self.group_values.values())


def make_trace_spec(params: AlgebraParams, kappa: int, free) -> TraceSpec:
    """Build the functional from its free rotation-class parameters.

    Odd n: kappa=+1 takes (s_1..s_m), kappa=-1 takes (u_0..u_m).  Even n takes
    (s_1..s_m) for either kappa; the supertrace is the Klein transport of the
    trace with the same parameters.
    """
    if kappa not in (1, -1):
        raise ValueError("kappa must be +1 or -1")
    n = params.n
    free = tuple(rat(f) for f in free)
    if params.is_even:
        m = params.m
        if len(free) != m:
            raise ValueError(f"even n={n} needs {m} free parameters")
        base_values = _even_trace_values(params, free)
        if kappa == 1:
            return TraceSpec(params, 1, free, base_values)
        base = TraceSpec(params, 1, free, base_values)
        shifted = {}
        for g, v in base_values.items():
            # sp(g) of the transport is the trace of g*K
            tg = rotation(n, (g.index + m) % n) if g.kind == "S" else reflection(n, (g.index - m) % n)
            shifted[g] = base_values[tg]
        return TraceSpec(params, -1, free, shifted, base=base)
    m = (n - 1) // 2
    mu = params.mu0
    values: dict = {}
    if kappa == 1:
        if len(free) != m:
            raise ValueError(f"odd n={n} traces need {m} free parameters")
        for k in range(1, n):
            values[rotation(n, k)] = free[_class_index(n, k) - 1]
        x = CycloNum.zero()
        for r in range(1, n):
            s2 = sin_pi(mpq(r, n))
            x = x + s2 * s2 * values[rotation(n, r)]
        r_val = x.scale(mpq(-2 * mu, n))
        values[rotation(n, 0)] = x.scale(2 * mu * mu / n)  # = -mu * sp(L_0)
    else:
        if len(free) != m + 1:
            raise ValueError(f"odd n={n} supertraces need {m + 1} free parameters")
        for k in range(n):
            values[rotation(n, k)] = free[_class_index(n, k)]
        y = CycloNum.zero()
        for r in range(n):
            c2 = cos_pi(mpq(r, n))
            y = y + c2 * c2 * values[rotation(n, r)]
        r_val = y.scale(mpq(-2 * mu, n))
    for k in range(n):
        values[reflection(n, k)] = r_val
    return TraceSpec(params, kappa, free, values)


def _even_trace_values(params: AlgebraParams, free) -> dict:
    n, m = params.n, params.m
    mu0, mu1 = params.mu0, params.mu1
    values: dict = {}
    for k in range(1, n):
        values[rotation(n, k)] = free[_class_index(n, k) - 1]
    x1 = CycloNum.zero()
    for l in range(1, m):
        s = sin_pi(mpq(l, m))
        x1 = x1 + s * s * values[rotation(n, 2 * l)]
    x2 = CycloNum.zero()
    for l in range(m):
        s = sin_pi(mpq(2 * l + 1, 2 * m))
        x2 = x2 + s * s * values[rotation(n, 2 * l + 1)]
    xp, xm = x1 + x2, x1 - x2
    r_even = xp.scale(mpq(-mu0, m)) + xm.scale(mpq(-mu1, m))
    r_odd = xp.scale(mpq(-mu0, m)) - xm.scale(mpq(-mu1, m))
    for k in range(n):
        values[reflection(n, k)] = r_even if k % 2 == 0 else r_odd
    values[rotation(n, 0)] = xp.scale(mu0 * mu0 / mpq(m)) + xm.scale(mu1 * mu1 / mpq(m))
    return values


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def trace_eval(spec: TraceSpec, x: AlgElem) -> CycloNum:
    if x.params != spec.params:
        raise ValueError("element and functional have different algebra parameters")
    if spec._base is not None:
        return trace_eval(spec._base, klein_conjugate(x))
    acc = CycloNum.zero()
    for mono, c in x.terms.items():
        v = _sp_monomial(spec, mono)
        if v:
            acc = acc + c * v
    return acc


def _sp_monomial(spec: TraceSpec, mono: PBWMonomial) -> CycloNum:
    hit = spec._memo.get(mono)
    if hit is not None:
        return hit
    d = mono.degree
    if d == 0:
        return spec.group_values[mono.grp]
    if d % 2:
        return CycloNum.zero()
    _ensure_level(spec, d, mono.grp)
    return spec._memo[mono]


def _eval_known(spec: TraceSpec, elem_terms, skip) -> CycloNum:
    """Sum c*sp(mono) over terms, where skip(mono) marks unknown columns."""
    acc = CycloNum.zero()
    for mono, c in elem_terms:
        if skip(mono):
            continue
        v = _sp_monomial(spec, mono)
        if v:
            acc = acc + c * v
    return acc


def _net_ab(exps) -> int:
    return exps[0] + exps[1] - exps[2] - exps[3]


def _compositions(d: int):
    out = []
    for e0 in range(d + 1):
        for e1 in range(d + 1 - e0):
            for e2 in range(d + 1 - e0 - e1):
                out.append((e0, e1, e2, d - e0 - e1 - e2))
    return out


def _leading_letter(exps) -> int:
    return next(i for i in range(4) if exps[i])


def _pull_element(spec: TraceSpec, mono: PBWMonomial) -> AlgElem:
    """mono - kappa * (cyclic image), whose trace must vanish."""
    params = spec.params
    x = _leading_letter(mono.exps)
    rest = list(mono.exps)
    rest[x] -= 1
    word: list = []
    for letter, e in enumerate(rest):
        word.extend([letter] * e)
    word.append(mono.grp)
    word.append(x)
    cyc = normal_order(word, params)
    return AlgElem(params, {mono: rat(1)}) - cyc.scale(spec.kappa)


def _ensure_level(spec: TraceSpec, d: int, g: GroupElem) -> None:
    n = spec.n
    if g.kind == "S" and (g.index != 0 or spec.kappa == -1):
        key = (d, g)
        if key not in spec._solved:
            _solve_rotation_sector(spec, d, g.index)
            spec._solved.add(key)
        return
    if spec.kappa == -1 and g.kind == "R":
        key = (d, "R")
        if key not in spec._solved:
            _solve_joint(spec, d, include_s0=False)
            spec._solved.add(key)
        return
    key = (d, "joint")
    if key not in spec._solved:
        _solve_joint(spec, d, include_s0=True)
        spec._solved.add(key)


def _solve_rotation_sector(spec: TraceSpec, d: int, k: int) -> None:
    """S_k sectors solve monomial-by-monomial: rotation conjugation kills
    unbalanced letter counts and the leading-letter pull determines the rest."""
    n = spec.n
    kappa = spec.kappa
    g = rotation(n, k)
    for exps in _compositions(d):
        mono = PBWMonomial(exps, g)
        if _net_ab(exps) % n != 0:
            spec._memo[mono] = CycloNum.zero()
            continue
        elem = _pull_element(spec, mono)
        coeff = elem.terms.get(mono)
        if coeff is None or not coeff:
            raise InsufficientRelationsError(
                f"insufficient relations at degree {d} (sector {g})"
            )
        rhs = -_eval_known(
            spec,
            ((m, c) for m, c in elem.terms.items() if m != mono),
            skip=lambda m: False,
        )
        spec._memo[mono] = rhs / coeff


def _solve_joint(spec: TraceSpec, d: int, include_s0: bool) -> None:
    """Solve all reflection sectors (and for traces the identity-rotation
    sector) of one degree as a single exact sparse system.

    Cheap two-term relations (leading-letter pulls, group cycling) resolve
    almost every monomial; the few remaining directions are closed lazily by
    invariance rows and, for the identity sector, by relations harvested from
    pulls two degrees up whose leading terms cancel.
    """
    n = spec.n
    params = spec.params
    kappa = spec.kappa
    comps = _compositions(d)
    rep_indices = (0,) if n % 2 else (0, 1)

    # rotation conjugation: sp(W R_{r+2j}) = lam^{j*net} sp(W R_r)
    half = {}
    if n % 2:
        inv2 = pow(2, -1, n)
        for k in range(n):
            half[k] = (0, (k * inv2) % n)
    else:
        for k in range(n):
            half[k] = (k % 2, ((k - k % 2) // 2) % n)

    cols: dict = {}

    def column(mono: PBWMonomial):
        """(colid, factor, const) with sp(mono) = factor*unknown + const, or
        None when the value is already known."""
        if mono.degree != d:
            return None
        g = mono.grp
        if g.kind == "S":
            if g.index != 0 or kappa == -1 or not include_s0:
                return None
            if _net_ab(mono.exps) % n != 0:
                return None  # killed, value 0
            key = ("S0", mono.exps)
        else:
            rep, j = half[g.index]
            key = ("R", rep, mono.exps)
            if key not in cols:
                cols[key] = len(cols)
            return cols[key], lam(n, j * _net_ab(mono.exps)), CycloNum.zero()
        if key not in cols:
            cols[key] = len(cols)
        return cols[key], CycloNum.one(), CycloNum.zero()

    def known_value(mono: PBWMonomial) -> CycloNum:
        if mono.degree == d:
            g = mono.grp
            if g.kind == "S" and g.index == 0 and kappa == 1 and include_s0:
                if _net_ab(mono.exps) % n == 0:
                    raise AssertionError("unknown treated as known")
                return CycloNum.zero()
        return _sp_monomial(spec, mono)

    rows: list = []

    def add_row(elem: AlgElem, require_no_top=None):
        row: dict = {}
        rhs = CycloNum.zero()
        for mono, c in elem.terms.items():
            if require_no_top is not None and mono.degree >= require_no_top:
                raise TraceConsistencyError("expected leading terms to cancel")
            col = column(mono)
            if col is None:
                v = known_value(mono)
                if v:
                    rhs = rhs - c * v
            else:
                cid, factor, const = col
                if const:
                    rhs = rhs - c * const
                cc = c * factor
                if cid in row:
                    row[cid] = row[cid] + cc
                else:
                    row[cid] = cc
        rows.append(({k: v for k, v in row.items() if v}, rhs))

    # cheap two-term rows: pulls and group cycling for the reference sectors
    for rep in rep_indices:
        g = reflection(n, rep)
        for exps in comps:
            add_row(_pull_element(spec, PBWMonomial(exps, g)))
            word: list = [g]
            for letter, e in enumerate(exps):
                word.extend([letter] * e)
            cyc = normal_order(word, params)
            add_row(AlgElem(params, {PBWMonomial(exps, g): rat(1)}) - cyc)

    s0 = identity(n)
    t01 = sl2_generator(0, 1, params)
    t00 = sl2_generator(0, 0, params)
    t11 = sl2_generator(1, 1, params)
    se = singlet_element(params)
    harvest_pool = None
    if include_s0 and kappa == 1:
        harvest_pool = iter(
            e for e in _compositions(d + 2) if _net_ab(e) % n == 0
        )
        for exps in (e for e in comps if _net_ab(e) % n == 0):
            column(PBWMonomial(exps, s0))  # register the unknowns

    invariance_done: set = set()

    def add_invariance_rows(key) -> bool:
        if key in invariance_done:
            return False
        invariance_done.add(key)
        if key[0] == "S0":
            mono_elem = AlgElem(params, {PBWMonomial(key[1], s0): rat(1)})
            gens = (t01, t00, t11, se)  # the singlet commutes with rotations
        else:
            mono_elem = AlgElem(params, {PBWMonomial(key[2], reflection(n, key[1])): rat(1)})
            gens = (t01, t00, t11)  # the singlet anticommutes with reflections
        for t in gens:
            add_row(alg_mult(t, mono_elem) - alg_mult(mono_elem, t))
        return True

    colname = {}
    values = None
    for _round in range(200):
        colname = {cid: key for key, cid in cols.items()}
        values, unresolved = _solve_sparse(rows, len(cols), d)
        if not unresolved:
            break
        progress = False
        for cid in sorted(unresolved):
            if add_invariance_rows(colname[cid]):
                progress = True
        if progress:
            continue
        if harvest_pool is not None:
            added = 0
            for exps in harvest_pool:
                add_row(_pull_element(spec, PBWMonomial(exps, s0)), require_no_top=d + 1)
                added += 1
                if added >= max(4, 2 * len(unresolved)):
                    break
            if added:
                continue
        raise InsufficientRelationsError(f"insufficient relations at degree {d}")
    else:
        raise InsufficientRelationsError(f"insufficient relations at degree {d}")

    # materialize every sector of this degree
    for exps in comps:
        for rep in rep_indices:
            base_key = ("R", rep, exps)
            base_val = values[cols[base_key]] if base_key in cols else CycloNum.zero()
            net = _net_ab(exps)
            for j in range(n if n % 2 else n // 2):
                k = (rep + 2 * j) % n
                spec._memo[PBWMonomial(exps, reflection(n, k))] = lam(n, j * net) * base_val
        if include_s0 and kappa == 1:
            mono = PBWMonomial(exps, s0)
            if _net_ab(exps) % n != 0:
                spec._memo[mono] = CycloNum.zero()
            else:
                spec._memo[mono] = values[cols[("S0", exps)]]


def _solve_sparse(rows, ncols: int, d: int):
    """Incremental sparse reduced row echelon form over the field.

    Returns (values, unresolved): values for every column pinned uniquely,
    the rest reported back so the caller can generate more relations.  A row
    reducing to 0 = nonzero raises TraceConsistencyError.
    """
    echelon: dict = {}  # pivot col -> (row dict with pivot coeff 1, rhs)
    for r0, rhs in sorted(rows, key=lambda t: len(t[0])):
        r = dict(r0)
        while True:
            hit = next((c for c in r if c in echelon), None)
            if hit is None:
                break
            f = r.pop(hit)
            er, erhs = echelon[hit]
            for c, v in er.items():
                if c == hit:
                    continue
                cur = r.get(c)
                nv = (cur - f * v) if cur is not None else -f * v
                if nv:
                    r[c] = nv
                else:
                    r.pop(c, None)
            rhs = rhs - f * erhs
        r = {c: v for c, v in r.items() if v}
        if not r:
            if rhs:
                raise TraceConsistencyError(f"inconsistent trace relations at degree {d}")
            continue
        piv = min(r, key=lambda c: (len(r), c))
        inv = r[piv].inverse()
        r = {c: v * inv for c, v in r.items()}
        rhs = rhs * inv
        for pc, (er, erhs) in echelon.items():
            f = er.get(piv)
            if f is None or not f:
                continue
            for c, v in r.items():
                if c == piv:
                    continue
                cur = er.get(c)
                nv = (cur - f * v) if cur is not None else -f * v
                if nv:
                    er[c] = nv
                else:
                    er.pop(c, None)
            er.pop(piv, None)
            echelon[pc] = (er, erhs - f * rhs)
        echelon[piv] = (r, rhs)
    values: dict = {}
    unresolved: set = set()
    for c in range(ncols):
        entry = echelon.get(c)
        if entry is not None and len(entry[0]) == 1:
            values[c] = entry[1]
        else:
            unresolved.add(c)
    return values, unresolved


# ---------------------------------------------------------------------------
# Gram matrices of the bilinear form
# ---------------------------------------------------------------------------


def pbw_basis(params: AlgebraParams, max_degree: int) -> list:
    from .dihedral import all_elements

    out = []
    for dd in range(max_degree + 1):
        for exps in _compositions(dd):
            for g in all_elements(params.n):
                out.append(PBWMonomial(exps, g))
    return out


@dataclass
class GramReport:
    degree: int
    basis: list
    matrix: CycloMatrix
    rank: int
    kernel: list = field(default_factory=list)


def gram_matrix(spec: TraceSpec, D: int) -> GramReport:
    """B(f,g) = sp(f*g) on all PBW monomials of degree <= D, with kernel."""
    params = spec.params
    basis = pbw_basis(params, D)
    elems = [AlgElem(params, {m: rat(1)}) for m in basis]
    entries = []
    for x in elems:
        for y in elems:
            entries.append(trace_eval(spec, alg_mult(x, y)))
    mat = CycloMatrix(len(basis), len(basis), entries)
    res = solve_exact(mat)
    kernel = []
    for vec in res.nullspace:
        kernel.append(AlgElem(params, {m: c for m, c in zip(basis, vec) if c}))
    return GramReport(degree=D, basis=basis, matrix=mat, rank=res.rank, kernel=kernel)
