"""Singularity co-order analysis of vector fields for a differential function.

Elimination of one axis's derivatives on the invariant-surface manifold,
strong and weak co-order computation, symbolic analysis of the reduced
operator sets, representation checks in adapted jet coordinates, and Lie
bracket closure of two-field modules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import sympy as sp

from .core import (
    Expr,
    TriBool,
    UnknownFunction,
    _d,
    _provably_nonzero,
    diff,
    fn_symbol_info,
    free_atoms,
    is_zero,
    normalize,
)
from .errors import BothCoefficientsZero, NonPolynomialSplit, NotRepresentable
from .jets import (
    DifferentialFunction,
    JetContext,
    MultiIndex,
    VectorField,
    chain_jets,
    ord,
    total_derivative,
)


def substitute_jets(body, ctx, jetmap):
    """Replace jet symbols everywhere, including unknown-function arguments.

    A function symbol whose formal arguments intersect the map becomes the
    corresponding applied map at the rewritten arguments.
    """
    m = dict(jetmap)
    for s in body.free_symbols:
        info = fn_symbol_info(s)
        if info is not None:
            fn, order = info
            if any(a in jetmap for a in fn.args):
                m[s] = fn.applied(order, tuple(jetmap.get(a, a) for a in fn.args))
    return normalize(body.xreplace(m))


@dataclass
class EliminationResult:
    """Outcome of removing one axis's derivatives on the field's manifold."""

    hat: DifferentialFunction
    axis: int
    table: dict
    w0: Expr
    xi_hat: Expr
    eta_hat: Expr
    Q: VectorField

    @property
    def kept_axis(self):
        return 3 - self.axis


class _Eliminator:
    """Rewrite machinery for one (L, Q, axis) choice, with cached w-chains."""

    def __init__(self, ctx, Q, axis):
        self.ctx = ctx
        self.axis = axis
        self.kept = 3 - axis
        xi = {1: Q.xi1, 2: Q.xi2}
        self.xi_hat = normalize(xi[self.kept] / xi[axis])
        self.eta_hat = normalize(Q.eta / xi[axis])
        e_kept = MultiIndex(1, 0) if self.kept == 1 else MultiIndex(0, 1)
        self.w0 = normalize(self.eta_hat - self.xi_hat * ctx.jet(e_kept))
        self._w = [self.w0]
        self._dw = {0: [self.w0]}

    def _kept_jet(self, m):
        return self.ctx.jet(MultiIndex(m, 0) if self.kept == 1 else MultiIndex(0, m))

    def d_kept(self, e, times=1):
        f = DifferentialFunction(e, self.ctx)
        for _ in range(times):
            f = total_derivative(f, self.kept)
        return f.body

    def _dw_chain(self, j, m):
        """D_kept^m of w_j, cached."""
        row = self._dw.setdefault(j, [self.w(j)])
        while len(row) <= m:
            row.append(self.d_kept(row[-1]))
        return row[m]

    def _ehat(self, g):
        """Restricted evolution operator: d_elim plus chain through kept jets."""
        ctx = self.ctx
        memo = {}
        r = _d(g, ctx.var(self.axis), memo)
        for s, idx in chain_jets(g, ctx).items():
            m = idx.a1 if self.kept == 1 else idx.a2
            dg = _d(g, s, memo)
            if dg != 0:
                r = r + self._dw_chain(0, m) * dg
        return normalize(r)

    def w(self, j):
        while len(self._w) <= j:
            self._w.append(self._ehat(self._w[-1]))
        return self._w[j]

    def rewrite(self, idx):
        """Expression for u_idx with the eliminated-axis count >= 1."""
        a_elim = idx.a1 if self.axis == 1 else idx.a2
        a_kept = idx.a1 if self.kept == 1 else idx.a2
        return self.d_kept(self.w(a_elim - 1), a_kept)


def eliminate_on_Q(L, Q, axis=None):
    """Remove derivatives along one axis using the invariant-surface relation.

    The axis defaults to 2 whenever xi2 is not provably zero, else to 1;
    forcing an axis with a provably zero coefficient is rejected.
    """
    ctx = L.ctx
    z1 = is_zero(Q.xi1)
    z2 = is_zero(Q.xi2)
    if z1 is TriBool.PROVEN_ZERO and z2 is TriBool.PROVEN_ZERO:
        raise BothCoefficientsZero(
            "vector field %s has no independent-variable part" % (Q,)
        )
    if axis is None:
        axis = 2 if z2 is not TriBool.PROVEN_ZERO else 1
    elif (axis == 2 and z2 is TriBool.PROVEN_ZERO) or (
        axis == 1 and z1 is TriBool.PROVEN_ZERO
    ):
        raise BothCoefficientsZero(
            "cannot eliminate along axis %d: its coefficient is zero" % axis
        )
    elim = _Eliminator(ctx, Q, axis)
    table = {}
    jetmap = {}
    for s, idx in chain_jets(L.body, ctx).items():
        a_elim = idx.a1 if axis == 1 else idx.a2
        if a_elim >= 1:
            e = elim.rewrite(idx)
            table[idx] = e
            jetmap[s] = e
    hat = DifferentialFunction(substitute_jets(L.body, ctx, jetmap), ctx)
    return EliminationResult(
        hat=hat,
        axis=axis,
        table=table,
        w0=elim.w0,
        xi_hat=elim.xi_hat,
        eta_hat=elim.eta_hat,
        Q=Q,
    )


def strong_coorder(L, Q, axis=None):
    """Order of the associated function; -1 ultra-singular, ord L regular."""
    return ord(eliminate_on_Q(L, Q, axis).hat)


@dataclass
class CoorderReport:
    strong: int
    weak_lower: int
    weak_upper: int
    multiplier: Expr
    residual: DifferentialFunction
    maximal_rank: TriBool
    elimination: EliminationResult

    def __post_init__(self):
        if not (self.weak_lower <= self.weak_upper <= self.strong):
            raise ValueError("co-order bounds out of order")

    @property
    def exact(self):
        return self.weak_lower == self.weak_upper


def _split_nonvanishing(e):
    """(multiplier, residual) with multiplier provably nonvanishing.

    Pulls the denominator, the rational content and every provably nonzero
    factor into the multiplier; what remains is the residual.
    """
    num, den = normalize(e).as_numer_denom()
    multiplier = sp.S.One / den
    residual = num
    try:
        content, factors = sp.factor_list(num)
    except Exception:
        return normalize(multiplier), normalize(residual)
    multiplier = multiplier * content
    residual = sp.S.One
    for base, k in factors:
        if _provably_nonzero(base):
            multiplier = multiplier * base**k
        else:
            residual = residual * base**k
    return normalize(multiplier), normalize(residual)


def _top_kept_jet(ctx, kept_axis, k):
    return ctx.jet(MultiIndex(k, 0) if kept_axis == 1 else MultiIndex(0, k))


def weak_coorder(L, Q, axis=None):
    """Strong co-order plus the best multiplier-extracted bound pair."""
    result = eliminate_on_Q(L, Q, axis)
    strong = ord(result.hat)
    if strong == -1:
        return CoorderReport(
            strong=-1,
            weak_lower=-1,
            weak_upper=-1,
            multiplier=sp.S.One,
            residual=result.hat,
            maximal_rank=TriBool.PROVEN_ZERO,
            elimination=result,
        )
    multiplier, residual_body = _split_nonvanishing(result.hat.body)
    residual = DifferentialFunction(residual_body, result.hat.ctx)
    upper = ord(residual)
    if upper <= 0:
        # order cannot drop below 0 for a nonzero residual, so the bounds
        # already coincide; the rank verdict records u-dependence only
        rank = is_zero(diff(residual_body, result.hat.ctx.u))
        lower = upper
    else:
        top = _top_kept_jet(result.hat.ctx, result.kept_axis, upper)
        rank = is_zero(diff(residual_body, top))
        lower = (
            upper
            if rank in (TriBool.PROVEN_NONZERO, TriBool.PROBABLY_NONZERO)
            else 0
        )
    return CoorderReport(
        strong=strong,
        weak_lower=lower,
        weak_upper=upper,
        multiplier=multiplier,
        residual=residual,
        maximal_rank=rank,
        elimination=result,
    )


def reduced_field(ctx, xi, zeta_name="zeta"):
    """Q = xi*d_1 + d_2 + zeta(x1,x2,u)*d_u with a registered unknown zeta."""
    zeta = ctx.functions.get(zeta_name)
    if zeta is None:
        zeta = ctx.add_function(zeta_name, (ctx.x1, ctx.x2, ctx.u))
    return VectorField(ctx, xi, 1, zeta.base), zeta


def _poly_split(e, gens):
    """Coefficient list of e viewed as a polynomial in the given jets."""
    e = normalize(e)
    gens = [g for g in gens if g in e.free_symbols]
    if not gens:
        return [e]
    num, _den = e.as_numer_denom()
    try:
        p = sp.Poly(num, *gens)
    except Exception as exc:
        raise NonPolynomialSplit(str(exc))
    return [normalize(c) for c in p.coeffs()]


def _null_covers(null_orders, fn, order):
    for nfn, norder in null_orders:
        if nfn is fn and all(a >= b for a, b in zip(order, norder)):
            return True
    return False


def _reduce_by_null(e, null_orders):
    if not null_orders:
        return e
    m = {}
    for s in e.free_symbols:
        info = fn_symbol_info(s)
        if info is not None and _null_covers(null_orders, *info):
            m[s] = sp.S.Zero
    return normalize(e.xreplace(m)) if m else e


def _bare_symbol(e):
    """The function-derivative symbol s when e = c*s for a nonzero number c."""
    if isinstance(e, sp.Symbol):
        return e if fn_symbol_info(e) is not None else None
    if isinstance(e, sp.Mul):
        syms = [a for a in e.args if fn_symbol_info(a) is not None]
        rest = [a for a in e.args if fn_symbol_info(a) is None]
        if len(syms) == 1 and all(a.is_Number for a in rest):
            return syms[0]
    return None


def consistency_closure(equations, unknown, u, depth=2):
    """Heuristic decision whether a ζ-system admits solutions.

    Differentiates the system with respect to u, propagates vanishing
    derivative symbols upward, and searches for a member free of the unknown
    that is nonzero. Returns (consistent, closure list); a True verdict means
    only that no contradiction was found at the explored depth.
    """
    eqs = []
    for e in equations:
        e = normalize(e)
        if e != 0:
            eqs.append(e)
    null_orders = []
    for round_no in range(depth + 1):
        changed = False
        reduced = []
        seen = set()
        for e in eqs:
            e = _reduce_by_null(e, null_orders)
            if e == 0:
                continue
            key = sp.srepr(e)
            if key in seen:
                continue
            seen.add(key)
            reduced.append(e)
        eqs = reduced
        for e in eqs:
            zeta_syms = [
                s
                for s in e.free_symbols
                if (info := fn_symbol_info(s)) is not None and info[0] is unknown
            ]
            if not zeta_syms:
                verdict = is_zero(e)
                if verdict in (TriBool.PROVEN_NONZERO, TriBool.PROBABLY_NONZERO):
                    return False, eqs
                continue
            s = _bare_symbol(e)
            if s is not None:
                info = fn_symbol_info(s)
                if info[0] is unknown and (info[0], info[1]) not in null_orders:
                    null_orders.append((info[0], info[1]))
                    changed = True
        if round_no < depth:
            new = []
            for e in eqs:
                de = _reduce_by_null(diff(e, u), null_orders)
                if de != 0:
                    new.append(de)
            if new:
                eqs = eqs + new
                changed = True
        if not changed:
            break
    return True, eqs


@dataclass
class SetAnalysis:
    """Symbolic analysis of the one-parameter reduced operator set."""

    k: int
    s_ultra: list
    s_zero: list
    ultra_consistent: bool
    zero_consistent: bool
    regular_value: Expr
    hat: DifferentialFunction
    zeta: UnknownFunction
    xi: Expr


def field_power_on_u(ctx, xi, zeta, n):
    """n-fold action of xi*d_1 + d_2 + zeta*d_u on u as an (x,u)-function."""
    a = ctx.u
    for _ in range(n):
        a = normalize(xi * diff(a, ctx.x1) + diff(a, ctx.x2) + zeta.base * diff(a, ctx.u))
    return a


def analyze_reduced_set(L, xi, zeta_name="zeta"):
    """Ultra-singular and zero-co-order systems for Q = xi*d_1 + d_2 + ζd_u."""
    ctx = L.ctx
    xi = normalize(sp.sympify(xi))
    Q, zeta = reduced_field(ctx, xi, zeta_name)
    result = eliminate_on_Q(L, Q, axis=2)
    hat = result.hat
    k = ord(hat)
    r = ord(L)
    kept_jets = [ctx.jet(j, 0) for j in range(1, max(k, 1) + 1)]
    # an unevaluated map applied to eliminated jets (xi = u pushes kept jets
    # into its arguments) admits no finite coefficient split; leave the
    # sub-branch systems undetermined in that case
    try:
        s_ultra = _poly_split(hat.body, kept_jets)
        s_zero = []
        seen = set()
        for g in kept_jets:
            dg = diff(hat.body, g)
            for c in _poly_split(dg, kept_jets):
                key = sp.srepr(c)
                if c != 0 and key not in seen:
                    seen.add(key)
                    s_zero.append(c)
        ultra_ok, _closU = consistency_closure(s_ultra, zeta, ctx.u)
        zero_ok, _closZ = consistency_closure(s_zero, zeta, ctx.u)
    except NonPolynomialSplit:
        s_ultra = None
        s_zero = None
        ultra_ok = None
        zero_ok = None
    if 0 <= k < r:
        form = representation_check(L, xi, k)
        ineq = sp.S.Zero
        for idx, w in form.omegas.items():
            if idx.a1 != k:
                continue
            coeff = diff(form.body, w)
            if coeff != 0:
                ineq = ineq + coeff * diff(
                    field_power_on_u(ctx, xi, zeta, idx.a2), ctx.u
                )
        # evaluate leftover omega atoms back at their jet-space values
        back = {w: _mixed_derivative(ctx, xi, idx) for idx, w in form.omegas.items()}
        regular_value = normalize(ineq.xreplace(back))
    elif k >= 1:
        regular_value = diff(hat.body, _top_kept_jet(ctx, result.kept_axis, k))
    else:
        regular_value = sp.S.Zero
    return SetAnalysis(
        k=k,
        s_ultra=s_ultra,
        s_zero=s_zero,
        ultra_consistent=ultra_ok,
        zero_consistent=zero_ok,
        regular_value=regular_value,
        hat=hat,
        zeta=zeta,
        xi=xi,
    )


class OmegaSymbol(sp.Symbol):
    """Atom for an adapted jet coordinate omega_{(a1,a2)}."""

    __slots__ = ()


@dataclass
class OmegaForm:
    body: Expr
    omegas: dict


def _mixed_derivative(ctx, xi, idx):
    """omega value D_1^{a1} (xi D_1 + D_2)^{a2} u as a jet expression."""
    f = DifferentialFunction(ctx.u, ctx)
    for _ in range(idx.a2):
        f = DifferentialFunction(
            xi * total_derivative(f, 1).body + total_derivative(f, 2).body, ctx
        )
    for _ in range(idx.a1):
        f = total_derivative(f, 1)
    return f.body


def representation_check(L, xi, k):
    """Rewrite L in the adapted coordinates and check the co-order-k shape.

    The change omega_{(a1,a2)} = D_1^{a1}(xi*D_1 + D_2)^{a2} u is triangular
    in the second index, so the inversion recurses on it. Passes when every
    free omega atom has first index <= k and at least one atom attains k;
    raises NotRepresentable with the offending atom name otherwise.
    """
    ctx = L.ctx
    xi = normalize(sp.sympify(xi))
    omegas = {}
    inverse = {}

    def omega(idx):
        s = omegas.get(idx)
        if s is None:
            s = OmegaSymbol("w[%d,%d]" % (idx.a1, idx.a2))
            omegas[idx] = s
        return s

    def invert(idx):
        s = ctx.jet(idx)
        e = inverse.get(s)
        if e is not None:
            return e
        rest = normalize(_mixed_derivative(ctx, xi, idx) - s)
        m = {}
        for a, aidx in chain_jets(rest, ctx).items():
            if aidx.a2 >= idx.a2:
                raise NotRepresentable(
                    "coordinate change is not triangular at %s" % s
                )
            m[a] = invert(aidx)
        e = normalize(omega(idx) - substitute_jets(rest, ctx, m))
        inverse[s] = e
        return e

    jetmap = {s: invert(idx) for s, idx in chain_jets(L.body, ctx).items()}
    body = substitute_jets(L.body, ctx, jetmap)
    present = [idx for idx, w in omegas.items() if w in body.free_symbols]
    for s in body.free_symbols:
        info = fn_symbol_info(s)
        if info is not None:
            for idx, w in omegas.items():
                if w in info[0].args and idx not in present:
                    present.append(idx)
    bad = [idx for idx in present if idx.a1 > k]
    if bad:
        worst = max(bad, key=lambda i: (i.a1, i.a2))
        raise NotRepresentable(
            "atom w[%d,%d] exceeds first index %d" % (worst.a1, worst.a2, k),
            offending=str(omegas[worst]),
        )
    if not any(idx.a1 == k for idx in present):
        raise NotRepresentable(
            "no omega atom with first index %d present" % k
        )
    return OmegaForm(body=body, omegas=omegas)


def bracket(Q1, Q2):
    """Lie bracket of two first-order fields in (x1, x2, u)."""
    ctx = Q1.ctx
    c1 = Q1.coefficients()
    c2 = Q2.coefficients()
    return VectorField(
        ctx, *(Q1.apply_to(b) - Q2.apply_to(a) for a, b in zip(c1, c2))
    )


def _matrix_rank(rows):
    n = len(rows)
    for size in range(min(n, 3), 0, -1):
        for rsel in itertools.combinations(range(n), size):
            for csel in itertools.combinations(range(3), size):
                m = sp.Matrix([[rows[i][j] for j in csel] for i in rsel])
                det = normalize(m.det())
                if is_zero(det) in (TriBool.PROVEN_NONZERO, TriBool.PROBABLY_NONZERO):
                    return size
    return 0


def module_closed(Q1, Q2):
    """Whether [Q1,Q2] lies in the function-coefficient span of Q1 and Q2."""
    b = bracket(Q1, Q2)
    base = [Q1.coefficients(), Q2.coefficients()]
    return _matrix_rank(base + [b.coefficients()]) <= _matrix_rank(base)
