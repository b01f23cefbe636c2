"""Jet-space bookkeeping for two independent and one dependent variable.

Multi-indices, jet symbols, total derivatives, order computation,
characteristics and prolongation of vector fields.
"""

from __future__ import annotations

from typing import NamedTuple

import sympy as sp

from .core import (
    Expr,
    FnDerivSymbol,
    UnknownFunction,
    _d,
    diff,
    fn_symbol_info,
    normalize,
)
from .errors import OrderUndefined


class MultiIndex(NamedTuple):
    """Differentiation counts along the two independent variables."""

    a1: int
    a2: int

    def order(self):
        return self.a1 + self.a2

    def bump(self, axis):
        if axis == 1:
            return MultiIndex(self.a1 + 1, self.a2)
        if axis == 2:
            return MultiIndex(self.a1, self.a2 + 1)
        raise ValueError("axis must be 1 or 2")


class JetSymbol(sp.Symbol):
    """Interned atom for a jet variable u_alpha (the order-0 jet is u itself)."""

    __slots__ = ()


class JetContext:
    """Variable context: the independent pair, the dependent name, functions.

    Jet symbols are interned per context; the same printed name always means
    the same multi-index within one context. Contexts with swapped axes reuse
    the same symbols with transposed indices, which is why the index map is
    per context rather than global.
    """

    def __init__(self, x1="x1", x2="x2", dep="u"):
        self.x1 = sp.Symbol(str(x1))
        self.x2 = sp.Symbol(str(x2))
        if self.x1 == self.x2:
            raise ValueError("independent variables must be distinct")
        self.dep = str(dep)
        self.functions: dict[str, UnknownFunction] = {}
        self._jets: dict[MultiIndex, JetSymbol] = {}
        self._index: dict[JetSymbol, MultiIndex] = {}
        # intern the order-zero jet eagerly so chain rules over unknown
        # functions of u see it even before any derivative is requested
        self.jet(0, 0)

    def __repr__(self):
        return "JetContext(%s, %s; %s)" % (self.x1, self.x2, self.dep)

    def var(self, axis):
        return self.x1 if axis == 1 else self.x2

    def _jet_name(self, idx):
        if idx == (0, 0):
            return self.dep
        n1, n2 = self.x1.name, self.x2.name
        if len(n1) == 1 and len(n2) == 1:
            return "%s_%s" % (self.dep, n1 * idx.a1 + n2 * idx.a2)
        return "%s[%d,%d]" % (self.dep, idx.a1, idx.a2)

    def jet(self, a1, a2=None):
        if a2 is None:
            a1, a2 = a1
        idx = MultiIndex(int(a1), int(a2))
        if idx.a1 < 0 or idx.a2 < 0:
            raise ValueError("negative multi-index")
        s = self._jets.get(idx)
        if s is None:
            s = JetSymbol(self._jet_name(idx))
            self._jets[idx] = s
        self._index[s] = idx
        return s

    @property
    def u(self):
        return self.jet(0, 0)

    def index(self, s):
        """MultiIndex of a jet symbol of this context, else None."""
        return self._index.get(s)

    def add_function(self, name, args, nonzero=(), inverse=None):
        fn = UnknownFunction(name, args, nonzero=nonzero, inverse=inverse)
        self.functions[fn.name] = fn
        if fn.inverse is not None:
            self.functions[fn.inverse.name] = fn.inverse
        return fn


def chain_jets(body, ctx):
    """Jet symbols the body depends on, directly or through unknown functions.

    Formal jet arguments of derivative symbols count: H(t,x,u,u_x) depends on
    u_x even though only the atom H appears in the expression tree.
    """
    out = {}
    for s in body.free_symbols:
        idx = ctx.index(s)
        if idx is not None:
            out[s] = idx
            continue
        info = fn_symbol_info(s)
        if info is not None:
            for a in info[0].args:
                aidx = ctx.index(a)
                if aidx is not None:
                    out[a] = aidx
    return out


class DifferentialFunction:
    """An expression over a jet context, with normalization at construction."""

    def __init__(self, body, ctx):
        self.body = normalize(body)
        self.ctx = ctx

    def __repr__(self):
        return "DifferentialFunction(%s)" % self.body

    def __eq__(self, other):
        return (
            isinstance(other, DifferentialFunction)
            and self.body == other.body
            and self.ctx is other.ctx
        )

    def __hash__(self):
        return hash((self.body, id(self.ctx)))

    def order(self):
        return ord(self)

    @property
    def depends_on_u(self):
        u = self.ctx.u
        if u in self.body.free_symbols:
            return True
        for s in self.body.free_symbols:
            info = fn_symbol_info(s)
            if info is not None and u in info[0].args:
                return True
        return False


def ord(L):
    """Order of a differential function; -1 iff the body is identically zero.

    Nonzero bodies with no jet variable of positive order have order 0,
    including u-free bodies; u-dependence is exposed separately via
    DifferentialFunction.depends_on_u.
    """
    if L.body == 0:
        return -1
    jets = chain_jets(L.body, L.ctx)
    if not jets:
        return 0
    return max(idx.order() for idx in jets.values())


def total_derivative(L, axis):
    """Total derivative D_i, chain rule through jets and unknown functions."""
    body = L.body
    ctx = L.ctx
    memo = {}
    raw = _d(body, ctx.var(axis), memo)
    for s, idx in chain_jets(body, ctx).items():
        ds = _d(body, s, memo)
        if ds != 0:
            raw = raw + ds * ctx.jet(idx.bump(axis))
    return DifferentialFunction(raw, ctx)


class VectorField:
    """First-order operator xi1*d_1 + xi2*d_2 + eta*d_u with (x,u) coefficients.

    Whether (xi1, xi2) != (0, 0) holds is checked by the operations that
    need it; prolongation itself is happy with fields like x2*d_u.
    """

    def __init__(self, ctx, xi1, xi2, eta):
        self.ctx = ctx
        self.xi1 = normalize(xi1)
        self.xi2 = normalize(xi2)
        self.eta = normalize(eta)
        for c in (self.xi1, self.xi2, self.eta):
            for s in c.free_symbols:
                idx = ctx.index(s)
                if idx is not None and idx.order() > 0:
                    raise ValueError(
                        "coefficient %s contains the jet variable %s" % (c, s)
                    )

    def __repr__(self):
        return "VectorField(%s, %s, %s)" % (self.xi1, self.xi2, self.eta)

    def coefficients(self):
        return (self.xi1, self.xi2, self.eta)

    def apply_to(self, e):
        """Action on a function of (x1, x2, u), no prolongation."""
        ctx = self.ctx
        return normalize(
            self.xi1 * diff(e, ctx.x1)
            + self.xi2 * diff(e, ctx.x2)
            + self.eta * diff(e, ctx.u)
        )


def characteristic(Q):
    """Q[u] = eta - xi1*u_{1,0} - xi2*u_{0,1}."""
    ctx = Q.ctx
    return normalize(Q.eta - Q.xi1 * ctx.jet(1, 0) - Q.xi2 * ctx.jet(0, 1))


def prolong(Q, r):
    """Prolongation coefficients eta^{a,b} for all a+b <= r.

    Computed as D_1^a D_2^b Q[u] + xi1*u_{a+1,b} + xi2*u_{a,b+1}, which also
    reproduces eta itself at (0,0).
    """
    if r < 0:
        raise ValueError("prolongation order must be non-negative")
    ctx = Q.ctx
    ch = DifferentialFunction(characteristic(Q), ctx)
    out = {}
    d1 = ch
    for a in range(r + 1):
        term = d1
        for b in range(r + 1 - a):
            out[MultiIndex(a, b)] = normalize(
                term.body + Q.xi1 * ctx.jet(a + 1, b) + Q.xi2 * ctx.jet(a, b + 1)
            )
            if b < r - a:
                term = total_derivative(term, 2)
        if a < r:
            d1 = total_derivative(d1, 1)
    return out


def apply_prolonged(Q, L):
    """Action of the prolonged field Q_(r) on L, with r = ord L."""
    r = ord(L)
    if r == -1:
        raise OrderUndefined("prolonged action on an identically zero function")
    ctx = L.ctx
    coeffs = prolong(Q, r)
    memo = {}
    raw = Q.xi1 * _d(L.body, ctx.x1, memo) + Q.xi2 * _d(L.body, ctx.x2, memo)
    for s, idx in chain_jets(L.body, ctx).items():
        ds = _d(L.body, s, memo)
        if ds != 0:
            raw = raw + coeffs[idx] * ds
    return normalize(raw)


def transpose(L):
    """The same differential function with the two axes swapped.

    Formal jet arguments of unknown functions keep their printed names, so
    they must denote the transposed index under the flipped naming scheme;
    single-character variable names guarantee that, positional names do not.
    """
    ctx = L.ctx
    flipped = JetContext(ctx.x2.name, ctx.x1.name, ctx.dep)
    # a copy, not the same dict: functions registered later against one
    # orientation (zeta of a reduced set) must not leak into the other
    flipped.functions = dict(ctx.functions)
    m = {}
    for s in L.body.free_symbols:
        idx = ctx.index(s)
        if idx is not None:
            m[s] = flipped.jet(idx.a2, idx.a1)
            continue
        info = fn_symbol_info(s)
        if info is not None:
            for a in info[0].args:
                aidx = ctx.index(a)
                if aidx is None:
                    continue
                t = flipped.jet(aidx.a2, aidx.a1)
                if t != a:
                    raise ValueError(
                        "unknown-function argument %s cannot be transposed" % a
                    )
    return DifferentialFunction(L.body.xreplace(m), flipped)


def transpose_field(Q, flipped_ctx):
    return VectorField(flipped_ctx, Q.xi2, Q.xi1, Q.eta)
