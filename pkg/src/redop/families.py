"""Correspondence between reduction operators and parametric solution families.

One-parameter families come with a user-supplied inverse Phi (the parameter
expressed through x and u); the operator coefficient is recovered as
zeta = -(xi*Phi_1 + Phi_2)/Phi_u and cross-checked against the determining
equation, the invariance condition, and the equation itself.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import mpmath
import sympy as sp

from .core import (
    Expr,
    TriBool,
    UnknownFunction,
    diff,
    fn_symbol_info,
    is_zero,
    normalize,
    substitute,
)
from .errors import DegenerateInverse, LeaderNotSolvable, WrongCoorderBranch
from .jets import DifferentialFunction, VectorField, chain_jets, ord
from .reduction import determining_singular, solve_for_leader
from .singular import eliminate_on_Q, substitute_jets


def instantiate_function(e, fn, value):
    """Replace derivative symbols of fn by the partials of a concrete value."""
    m = {}
    for s in e.free_symbols:
        info = fn_symbol_info(s)
        if info is not None and info[0] is fn:
            val = value
            for var, count in zip(fn.args, info[1]):
                for _ in range(count):
                    val = diff(val, var)
            m[s] = val
    return normalize(e.xreplace(m)) if m else normalize(e)


@dataclass
class SolutionFamily:
    """u = f(x1, x2, kappa) together with its declared inverse kappa = Phi."""

    ctx: object
    f: Expr
    Phi: Expr
    kappa: sp.Symbol
    essential: TriBool = field(init=False)

    def __post_init__(self):
        self.f = normalize(sp.sympify(self.f))
        self.Phi = normalize(sp.sympify(self.Phi))
        residual = normalize(substitute(self.Phi, {self.ctx.u: self.f}) - self.kappa)
        if residual != 0:
            raise ValueError(
                "inverse check failed: Phi(x, f) - kappa = %s" % residual
            )
        dk = is_zero(diff(self.f, self.kappa))
        if dk is TriBool.PROVEN_ZERO:
            raise ValueError("the family parameter is not essential")
        self.essential = dk


def zeta_from_family(family, xi):
    """Operator coefficient zeta = -(xi*Phi_1 + Phi_2)/Phi_u."""
    ctx = family.ctx
    xi = normalize(sp.sympify(xi))
    Phi_u = diff(family.Phi, ctx.u)
    if is_zero(Phi_u) is TriBool.PROVEN_ZERO:
        raise DegenerateInverse("Phi does not depend on u")
    return normalize(
        -(xi * diff(family.Phi, ctx.x1) + diff(family.Phi, ctx.x2)) / Phi_u
    )


def _family_jet_map(L, family):
    ctx = family.ctx
    cache = {}

    def deriv(idx):
        e = cache.get(idx)
        if e is None:
            if idx == (0, 0):
                e = family.f
            elif idx.a1 > 0:
                from .jets import MultiIndex

                e = diff(deriv(MultiIndex(idx.a1 - 1, idx.a2)), ctx.x1)
            else:
                from .jets import MultiIndex

                e = diff(deriv(MultiIndex(idx.a1, idx.a2 - 1)), ctx.x2)
            cache[idx] = e
        return e

    return {s: deriv(idx) for s, idx in chain_jets(L.body, ctx).items()}


def verify_family_solves(L, family):
    """is_zero verdict of L with u = f substituted, kappa a free atom."""
    body = substitute_jets(L.body, family.ctx, _family_jet_map(L, family))
    return is_zero(body)


@dataclass
class BijectionReport:
    zeta: Expr
    zeta_star: Expr | None
    solves: TriBool
    determining: TriBool
    invariance: TriBool

    @property
    def certified(self):
        return (
            self.solves is TriBool.PROVEN_ZERO
            and self.determining is TriBool.PROVEN_ZERO
            and self.invariance is TriBool.PROVEN_ZERO
        )


def verify_bijection(L, family, xi):
    """Family-solves, invariance, and determining-equation verdicts for zeta."""
    ctx = family.ctx
    xi = normalize(sp.sympify(xi))
    solves = verify_family_solves(L, family)
    zeta = zeta_from_family(family, xi)
    char = normalize(
        substitute(zeta, {ctx.u: family.f})
        - substitute(xi, {ctx.u: family.f}) * diff(family.f, ctx.x1)
        - diff(family.f, ctx.x2)
    )
    invariance = is_zero(char)
    system = determining_singular(L, xi)
    residual = instantiate_function(system.equations[0], system.zeta, zeta)
    determining = is_zero(residual)
    return BijectionReport(
        zeta=zeta,
        zeta_star=None,
        solves=solves,
        determining=determining,
        invariance=invariance,
    )


def adjoint_operator(zeta, F, coorder, ctx):
    """Adjoint coefficient on the wave-type equation u_{1,1} = F(u).

    Co-order 1: zeta* = (F - zeta_1)/zeta_u. Co-order 0: zeta* =
    zeta_11/F_u(Ftil(zeta_1)), with exp treated as its own inverse pair.
    """
    zeta = normalize(sp.sympify(zeta))
    zu = diff(zeta, ctx.u)
    z1 = diff(zeta, ctx.x1)
    zu_verdict = is_zero(zu)
    if coorder == 1:
        if zu_verdict is TriBool.PROVEN_ZERO:
            raise WrongCoorderBranch("zeta does not depend on u")
        F_expr = F.base if isinstance(F, UnknownFunction) else normalize(sp.sympify(F))
        return normalize((F_expr - z1) / zu)
    if coorder == 0:
        if zu_verdict is not TriBool.PROVEN_ZERO:
            raise WrongCoorderBranch("zeta depends on u; co-order 0 needs zeta_u = 0")
        z11 = diff(z1, ctx.x1)
        if isinstance(F, UnknownFunction):
            if F.inverse is None:
                raise WrongCoorderBranch("F has no declared inverse")
            denom = F.applied((1,), (F.inverse(z1),))
        else:
            F_expr = normalize(sp.sympify(F))
            if F_expr == sp.exp(ctx.u):
                denom = z1
            else:
                raise WrongCoorderBranch(
                    "co-order 0 needs an invertible F with known derivative"
                )
        return normalize(z11 / denom)
    raise ValueError("coorder must be 0 or 1")


def coorder0_solution(L, zeta, xi):
    """Unique invariant solution u = G(x) and the criterion verdict.

    The criterion is zeta = xi*G_1 + G_2; the construction requires zeta
    free of u so the associated function is solvable for u itself.
    """
    ctx = L.ctx
    zeta = normalize(sp.sympify(zeta))
    xi = normalize(sp.sympify(xi))
    if is_zero(diff(zeta, ctx.u)) is not TriBool.PROVEN_ZERO:
        raise WrongCoorderBranch("zeta depends on u")
    Q = VectorField(ctx, xi, 1, zeta)
    hat = eliminate_on_Q(L, Q, axis=2).hat
    G = solve_for_leader(hat, ctx.u)
    crit = normalize(zeta - xi * diff(G, ctx.x1) - diff(G, ctx.x2))
    return G, is_zero(crit)


@dataclass
class BacklundReport:
    identity_q: TriBool
    identity_g: TriBool
    structural: TriBool
    points: list
    samples_requested: int

    @property
    def passed(self):
        ok_ids = (
            self.identity_q is TriBool.PROVEN_ZERO
            and self.identity_g is TriBool.PROVEN_ZERO
        )
        if not ok_ids:
            return False
        if self.structural is TriBool.PROVEN_ZERO:
            return True
        return bool(self.points) and all(
            abs(res) <= 1e-9 for (_pt, res) in self.points
        )


DEFAULT_KAPPAS = (
    sp.Rational(1, 2),
    sp.Integer(1),
    sp.Rational(3, 2),
    sp.Integer(2),
    sp.Rational(5, 2),
)


def _implicit_jet_map(L, ctx, Phi):
    """Jets of the implicitly defined u as (x, u)-functions.

    u_1 = -Phi_1/Phi_u and so on, prolonged by the chain rule along the
    surface Phi(x, u) = const.
    """
    Phi_u = diff(Phi, ctx.u)
    first = {
        1: normalize(-diff(Phi, ctx.x1) / Phi_u),
        2: normalize(-diff(Phi, ctx.x2) / Phi_u),
    }
    cache = {}

    def J(idx):
        e = cache.get(idx)
        if e is None:
            from .jets import MultiIndex

            if idx == (0, 0):
                e = ctx.u
            elif idx.a1 > 0:
                p = J(MultiIndex(idx.a1 - 1, idx.a2))
                e = normalize(diff(p, ctx.x1) + diff(p, ctx.u) * first[1])
            else:
                p = J(MultiIndex(idx.a1, idx.a2 - 1))
                e = normalize(diff(p, ctx.x2) + diff(p, ctx.u) * first[2])
            cache[idx] = e
        return e

    return {s: J(idx) for s, idx in chain_jets(L.body, ctx).items()}


def backlund_verify(L, zeta, Phi, xi, kappas=None, samples=10, seed=0):
    """Check the transformation identities, then sample the implicit surface.

    For each kappa the surface Phi(x, u) = kappa is sampled at random base
    points; u is recovered numerically and the residual of L evaluated with
    the implicit-function prolongations. When the residual is structurally
    zero the points are recorded with exact zeros.
    """
    ctx = L.ctx
    zeta = normalize(sp.sympify(zeta))
    Phi = normalize(sp.sympify(Phi))
    xi = normalize(sp.sympify(xi))
    Phi_u = diff(Phi, ctx.u)
    if is_zero(Phi_u) is TriBool.PROVEN_ZERO:
        raise DegenerateInverse("Phi does not depend on u")
    identity_q = is_zero(
        xi * diff(Phi, ctx.x1) + diff(Phi, ctx.x2) + zeta * Phi_u
    )
    Q = VectorField(ctx, xi, 1, zeta)
    hat = eliminate_on_Q(L, Q, axis=2).hat
    k = ord(hat)
    if k == 1:
        G = solve_for_leader(hat, ctx.jet(1, 0))
    elif k < 1 and hat.depends_on_u:
        G = solve_for_leader(hat, ctx.u)
    else:
        G = None
    if G is not None and k == 1:
        identity_g = is_zero(diff(Phi, ctx.x1) + G * Phi_u)
    elif G is not None:
        # co-order 0: the unique solution u = G(x) must lie on one surface
        identity_g = is_zero(diff(Phi, ctx.x1) + diff(G, ctx.x1) * Phi_u)
    else:
        identity_g = TriBool.SAMPLED_ZERO
    residual = substitute_jets(L.body, ctx, _implicit_jet_map(L, ctx, Phi))
    structural = is_zero(residual)
    points = []
    if kappas is None:
        kappas = DEFAULT_KAPPAS
    rng = random.Random(seed)
    can_evaluate = not any(
        fn_symbol_info(s) is not None for s in Phi.free_symbols
    )
    if can_evaluate:
        phi_fn = sp.lambdify((ctx.x1, ctx.x2, ctx.u), Phi, "mpmath")
        res_fn = None
        if structural is not TriBool.PROVEN_ZERO:
            res_fn = sp.lambdify((ctx.x1, ctx.x2, ctx.u), residual, "mpmath")
        for kappa in kappas:
            kv = float(kappa)
            found = 0
            attempts = 0
            while found < samples and attempts < samples * 20:
                attempts += 1
                a = rng.uniform(0.2, 1.5)
                b = rng.uniform(0.2, 1.5)
                root = None
                for start in (kv, 1.0, -1.0, 0.5, 2.0, -0.5):
                    try:
                        cand = mpmath.findroot(
                            lambda uu: phi_fn(a, b, uu) - kv, start
                        )
                    except (ValueError, ZeroDivisionError, mpmath.libmp.NoConvergence):
                        continue
                    if abs(mpmath.im(cand)) < 1e-30 and abs(
                        phi_fn(a, b, mpmath.re(cand)) - kv
                    ) < 1e-20:
                        root = mpmath.re(cand)
                        break
                if root is None:
                    continue
                if res_fn is None:
                    res = mpmath.mpf(0)
                else:
                    res = res_fn(a, b, root)
                points.append(((a, b, float(root), kv), abs(res)))
                found += 1
    return BacklundReport(
        identity_q=identity_q,
        identity_g=identity_g,
        structural=structural,
        points=points,
        samples_requested=samples * len(kappas),
    )
