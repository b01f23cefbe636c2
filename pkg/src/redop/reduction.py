"""Conditional invariance, determining systems, and ansatz reductions.

The singular route builds the single determining equation from the solved
restriction u_{1,0} = G(x1, x2, u); the regular route splits the invariance
residual polynomially as in the classical nonclassical-symmetry method.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .core import (
    AppliedMapBase,
    Expr,
    TriBool,
    UnknownFunction,
    _d,
    diff,
    fn_symbol_info,
    free_atoms,
    is_zero,
    normalize,
    substitute,
)
from .errors import (
    LeaderNotSolvable,
    NotAffineInLeader,
    ResidualNonInvariant,
    SetNotFirstCoorder,
    UnsupportedAnsatz,
)
from .jets import (
    DifferentialFunction,
    MultiIndex,
    VectorField,
    apply_prolonged,
    chain_jets,
    ord,
    total_derivative,
)
from .singular import (
    _poly_split,
    _top_kept_jet,
    analyze_reduced_set,
    eliminate_on_Q,
    reduced_field,
    substitute_jets,
)


def _depends_on(e, v):
    """Dependence through free symbols or unknown-function formal arguments."""
    if v in e.free_symbols:
        return True
    for s in e.free_symbols:
        info = fn_symbol_info(s)
        if info is not None and v in info[0].args:
            return True
    return False


def solve_for_leader(Lhat, leader):
    """Solve L̂ = 0 for the leader, affine case or invertible-kernel case.

    The kernel case covers bodies affine in a single node K(leader) with K
    either exp or a univariate unknown function carrying a declared inverse.
    """
    body = Lhat.body if isinstance(Lhat, DifferentialFunction) else normalize(Lhat)
    a = diff(body, leader)
    if a != 0 and not _depends_on(a, leader):
        b = normalize(body - a * leader)
        if not _depends_on(b, leader):
            if is_zero(a) in (TriBool.PROVEN_NONZERO, TriBool.PROBABLY_NONZERO):
                return normalize(-b / a)
            raise LeaderNotSolvable(
                "coefficient %s of %s is not confirmably nonzero" % (a, leader)
            )
    kernels = []
    for node in body.atoms(sp.exp, AppliedMapBase):
        if node.has(leader):
            kernels.append(node)
    for s in body.free_symbols:
        info = fn_symbol_info(s)
        if info is not None and leader in info[0].args:
            kernels.append(s)
    if len(kernels) != 1:
        raise LeaderNotSolvable(
            "body is not affine in %s and has no single invertible kernel" % leader
        )
    K = kernels[0]
    c = normalize(_d(body, K, {}))
    if c == 0 or _depends_on(c, leader):
        raise LeaderNotSolvable("kernel %s does not enter affinely" % K)
    rest = normalize(body - c * K)
    if _depends_on(rest, leader):
        raise LeaderNotSolvable("%s appears outside the kernel %s" % (leader, K))
    if is_zero(c) not in (TriBool.PROVEN_NONZERO, TriBool.PROBABLY_NONZERO):
        raise LeaderNotSolvable("kernel coefficient %s may vanish" % c)
    rhs = normalize(-rest / c)
    if isinstance(K, sp.exp):
        if K.args[0] != leader:
            raise LeaderNotSolvable("exp argument %s is not the leader" % K.args[0])
        if is_zero(rhs) is TriBool.PROVEN_ZERO:
            raise LeaderNotSolvable("logarithm of a vanishing value")
        return normalize(sp.log(rhs))
    if isinstance(K, sp.Symbol):
        fn, order = fn_symbol_info(K)
    else:
        fn, order = K._fn, K._order
        if K.args != (leader,):
            raise LeaderNotSolvable("kernel argument %s is not the leader" % (K.args,))
    if any(order) or len(fn.args) != 1 or fn.args[0] != leader:
        raise LeaderNotSolvable("kernel %s is not a plain function of the leader" % K)
    if fn.inverse is None:
        raise LeaderNotSolvable("%s has no declared inverse" % fn.name)
    return normalize(fn.inverse(rhs))


def _consequence_table(elim_hat, kept_axis, k, sol, max_order):
    """Kept-axis derivative consequences of the solved leader relation."""
    ctx = elim_hat.ctx
    table = {k: sol}
    for m in range(k + 1, max_order + 1):
        prev = table[m - 1]
        bumped = total_derivative(DifferentialFunction(prev, ctx), kept_axis).body
        jetmap = {
            _top_kept_jet(ctx, kept_axis, j): table[j]
            for j in range(k, m)
            if _top_kept_jet(ctx, kept_axis, j) in bumped.free_symbols
        }
        table[m] = substitute_jets(bumped, ctx, jetmap) if jetmap else normalize(bumped)
    return table


def _restrict_to_solved(expr, elim_hat, kept_axis, k, sol):
    """Substitute the leader relation and its consequences into expr."""
    ctx = elim_hat.ctx
    orders = [
        (idx.a1 if kept_axis == 1 else idx.a2)
        for idx in chain_jets(expr, ctx).values()
    ]
    max_order = max([o for o in orders], default=0)
    if max_order < k:
        return normalize(expr)
    table = _consequence_table(elim_hat, kept_axis, k, sol, max_order)
    jetmap = {
        _top_kept_jet(ctx, kept_axis, m): table[m] for m in range(k, max_order + 1)
    }
    return substitute_jets(expr, ctx, jetmap)


def conditional_invariance_test(L, Q, axis=None):
    """Definition-level test: prolonged action restricted to L ∩ Q_(r)."""
    ctx = L.ctx
    ip = apply_prolonged(Q, L)
    if ip == 0:
        return TriBool.PROVEN_ZERO
    elim = eliminate_on_Q(L, Q, axis)
    ip_elim = eliminate_on_Q(
        DifferentialFunction(ip, ctx), Q, axis=elim.axis
    ).hat.body
    k = ord(elim.hat)
    if k == -1:
        return is_zero(ip_elim)
    kept = elim.kept_axis
    leader = _top_kept_jet(ctx, kept, k)
    try:
        sol = solve_for_leader(elim.hat, leader)
    except LeaderNotSolvable as exc:
        raise NotAffineInLeader(str(exc), residual=ip_elim)
    restricted = _restrict_to_solved(ip_elim, elim.hat, kept, k, sol)
    return is_zero(restricted)


@dataclass
class DeterminingSystem:
    equations: list
    case: str
    G: Expr | None
    assumptions: list
    zeta: UnknownFunction | None = None


def _classify(L):
    """'evolution', 'wave', or 'singular-general' by the solved-form shape."""
    ctx = L.ctx
    body = L.body
    u10 = ctx.jet(1, 0)
    a = diff(body, u10)
    if a.is_Number and a != 0:
        rest = normalize(body - a * u10)
        if all(idx.a1 == 0 for idx in chain_jets(rest, ctx).values()):
            return "evolution"
    u11 = ctx.jet(1, 1)
    c = diff(body, u11)
    if c.is_Number and c != 0:
        rest = normalize(body - c * u11)
        if all(idx.order() == 0 for idx in chain_jets(rest, ctx).values()):
            return "wave"
    return "singular-general"


def determining_singular(L, xi, zeta_name="zeta"):
    """The single determining equation for first-co-order reduced sets.

    With the restriction solved as u_{1,0} = G(x1,x2,u), the equation reads
    zeta_1 + zeta_u G - (xi_1 + xi_u G) G = xi G_1 + G_2 + zeta G_u.
    """
    ctx = L.ctx
    xi = normalize(sp.sympify(xi))
    analysis = analyze_reduced_set(L, xi, zeta_name)
    if analysis.k != 1:
        raise SetNotFirstCoorder("reduced-set co-order is %d" % analysis.k)
    zeta = analysis.zeta
    leader = ctx.jet(1, 0)
    coeff = diff(analysis.hat.body, leader)
    G = solve_for_leader(analysis.hat, leader)
    assumptions = []
    if is_zero(coeff) is not TriBool.PROVEN_NONZERO:
        assumptions.append(coeff)
    z = zeta.base
    z1 = zeta.sym((1, 0, 0))
    zu = zeta.sym((0, 0, 1))
    xi1 = diff(xi, ctx.x1)
    xiu = diff(xi, ctx.u)
    eq = normalize(
        z1
        + zu * G
        - (xi1 + xiu * G) * G
        - (xi * diff(G, ctx.x1) + diff(G, ctx.x2) + z * diff(G, ctx.u))
    )
    return DeterminingSystem(
        equations=[eq],
        case=_classify(L),
        G=G,
        assumptions=assumptions,
        zeta=zeta,
    )


def de0_equation(L, zeta_name="zeta"):
    """Direct determining equation for evolution bodies u_{1,0} = H(...).

    Built from the substituted right-hand side H~ obtained by the chain
    Y_1 = zeta, Y_{j+1} = d_2 Y_j + zeta d_u Y_j, without going through the
    elimination machinery; serves as an independent cross-check.
    """
    ctx = L.ctx
    if _classify(L) != "evolution":
        raise ValueError("body is not in evolution form")
    u10 = ctx.jet(1, 0)
    a = diff(L.body, u10)
    H = normalize(-(L.body - a * u10) / a)
    zeta = ctx.functions.get(zeta_name)
    if zeta is None:
        zeta = ctx.add_function(zeta_name, (ctx.x1, ctx.x2, ctx.u))
    z = zeta.base
    r = max((idx.a2 for idx in chain_jets(H, ctx).values()), default=0)
    Y = [z]
    for _ in range(r - 1):
        Y.append(normalize(diff(Y[-1], ctx.x2) + z * diff(Y[-1], ctx.u)))
    jetmap = {ctx.jet(0, j): Y[j - 1] for j in range(1, r + 1)}
    Ht = substitute_jets(H, ctx, jetmap)
    z1 = zeta.sym((1, 0, 0))
    zu = zeta.sym((0, 0, 1))
    return normalize(z1 + zu * Ht - diff(Ht, ctx.x2) - z * diff(Ht, ctx.u))


def eq6_equation(L, zeta_name="zeta"):
    """Direct determining equation for wave bodies u_{1,1} = F(u)."""
    ctx = L.ctx
    if _classify(L) != "wave":
        raise ValueError("body is not in wave form")
    u11 = ctx.jet(1, 1)
    c = diff(L.body, u11)
    F = normalize(-(L.body - c * u11) / c)
    zeta = ctx.functions.get(zeta_name)
    if zeta is None:
        zeta = ctx.add_function(zeta_name, (ctx.x1, ctx.x2, ctx.u))
    z = zeta.base
    z1 = zeta.sym((1, 0, 0))
    zu = zeta.sym((0, 0, 1))
    z12 = zeta.sym((1, 1, 0))
    z1u = zeta.sym((1, 0, 1))
    z2u = zeta.sym((0, 1, 1))
    zuu = zeta.sym((0, 0, 2))
    Fu = diff(F, ctx.u)
    return normalize(
        z12 + z * z1u + (z2u + z * zuu) * (F - z1) / zu + zu * F - z * Fu
    )


def determining_regular(L, Q, axis=None):
    """Polynomial split of the invariance residual for a symbolic template.

    The elimination axis defaults to the one whose template coefficient is a
    proven-nonzero constant (the normalized tau = 1 direction), falling back
    to the usual axis-2 preference.
    """
    ctx = L.ctx
    if axis is None:
        z1v = is_zero(Q.xi1)
        z2v = is_zero(Q.xi2)
        if z1v is TriBool.PROVEN_NONZERO and z2v is not TriBool.PROVEN_NONZERO:
            axis = 1
        elif z2v is not TriBool.PROVEN_ZERO:
            axis = 2
        else:
            axis = 1
    elim = eliminate_on_Q(L, Q, axis)
    ip = apply_prolonged(Q, L)
    ip_elim = eliminate_on_Q(DifferentialFunction(ip, ctx), Q, axis=axis).hat.body
    k = ord(elim.hat)
    kept = elim.kept_axis
    if k >= 0:
        leader = _top_kept_jet(ctx, kept, k)
        try:
            sol = solve_for_leader(elim.hat, leader)
        except LeaderNotSolvable as exc:
            raise NotAffineInLeader(str(exc), residual=ip_elim)
        residual = _restrict_to_solved(ip_elim, elim.hat, kept, k, sol)
    else:
        residual = normalize(ip_elim)
    split_vars = sorted(
        {
            s
            for s, idx in chain_jets(residual, ctx).items()
            if idx.order() > 0
        },
        key=lambda s: s.name,
    )
    equations = [e for e in _poly_split(residual, split_vars) if e != 0]
    return DeterminingSystem(
        equations=equations,
        case="regular-split",
        G=None,
        assumptions=[],
        zeta=None,
    )


@dataclass
class AnsatzReduction:
    multiplier: Expr
    reduced: Expr
    essential_order: int
    order_exact: bool
    omega: Expr
    phi: UnknownFunction
    multiplier_verdict: TriBool = field(default=TriBool.PROBABLY_NONZERO)


def _phi_order(e, phi):
    orders = [-1]
    for s in e.free_symbols:
        info = fn_symbol_info(s)
        if info is not None and info[0] is phi:
            orders.append(info[1][0])
    return max(orders)


def reduce_with_ansatz(L, Q, f, omega, phi_name="phi"):
    """Substitute u = f(x, phi(omega)) into L and factor the multiplier.

    Only coordinate invariants omega in {x1, x2} are supported; the ansatz
    must contain the registered unknown phi, and any antiderivative baked
    into f is taken at face value (it is verified through the Q[f] check).
    """
    ctx = L.ctx
    omega = normalize(sp.sympify(omega))
    if omega == ctx.x1:
        noninv = ctx.x2
    elif omega == ctx.x2:
        noninv = ctx.x1
    else:
        raise UnsupportedAnsatz("omega must be one of the independent variables")
    phi = ctx.functions.get(phi_name)
    if phi is None:
        phi = ctx.add_function(phi_name, (sp.Symbol("w"),))
    f = sp.sympify(f)
    applied_map = {}
    for order, s in phi._syms.items():
        if s in f.free_symbols:
            applied_map[s] = phi.applied(order, (omega,))
    if not applied_map:
        raise UnsupportedAnsatz("ansatz does not involve %s" % phi_name)
    f = normalize(f.xreplace(applied_map))
    if _depends_on(f, ctx.u):
        raise UnsupportedAnsatz("ansatz body may not depend on u")

    char = normalize(
        substitute(Q.eta, {ctx.u: f})
        - substitute(Q.xi1, {ctx.u: f}) * diff(f, ctx.x1)
        - substitute(Q.xi2, {ctx.u: f}) * diff(f, ctx.x2)
    )
    if is_zero(char) is not TriBool.PROVEN_ZERO:
        raise UnsupportedAnsatz(
            "ansatz is not invariant under the field: Q[f] = %s" % char
        )
    omega_invariance = normalize(
        substitute(Q.xi1, {ctx.u: f}) * diff(omega, ctx.x1)
        + substitute(Q.xi2, {ctx.u: f}) * diff(omega, ctx.x2)
    )
    if is_zero(omega_invariance) is not TriBool.PROVEN_ZERO:
        raise UnsupportedAnsatz("omega is not an invariant of the field")

    derivs = {MultiIndex(0, 0): f}

    def deriv(idx):
        e = derivs.get(idx)
        if e is None:
            if idx.a1 > 0:
                e = diff(deriv(MultiIndex(idx.a1 - 1, idx.a2)), ctx.x1)
            else:
                e = diff(deriv(MultiIndex(idx.a1, idx.a2 - 1)), ctx.x2)
            derivs[idx] = e
        return e

    jetmap = {s: deriv(idx) for s, idx in chain_jets(L.body, ctx).items()}
    body = substitute_jets(L.body, ctx, jetmap)
    if body == 0:
        return AnsatzReduction(
            multiplier=sp.S.One,
            reduced=sp.S.Zero,
            essential_order=-1,
            order_exact=True,
            omega=omega,
            phi=phi,
            multiplier_verdict=TriBool.PROVEN_NONZERO,
        )

    to_syms = {}
    for node in body.atoms(AppliedMapBase):
        if node._fn is phi and node.args == (omega,):
            to_syms[node] = phi.sym(node._order)
    body = normalize(body.xreplace(to_syms))

    num, den = body.as_numer_denom()
    multiplier = sp.S.One
    residual = sp.S.One
    try:
        content, factors = sp.factor_list(num)
    except Exception:
        content, factors = sp.S.One, [(num, 1)]
    multiplier = multiplier * content
    for base, kpow in factors:
        has_noninv = noninv in base.free_symbols
        base_phi_order = _phi_order(base, phi)
        if has_noninv:
            if base_phi_order > 0:
                raise ResidualNonInvariant(
                    "factor %s mixes %s with derivatives of %s"
                    % (base, noninv, phi_name)
                )
            multiplier = multiplier * base**kpow
        else:
            residual = residual * base**kpow
    for base, kpow in sp.factor_list(den)[1] + [(sp.factor_list(den)[0], 1)]:
        has_noninv = noninv in base.free_symbols
        base_phi_order = _phi_order(base, phi)
        if has_noninv and base_phi_order > 0:
            raise ResidualNonInvariant(
                "denominator factor %s mixes %s with derivatives of %s"
                % (base, noninv, phi_name)
            )
        if has_noninv or base_phi_order < 0:
            multiplier = multiplier / base**kpow
        else:
            residual = residual / base**kpow
    multiplier = normalize(multiplier)
    residual = normalize(residual)
    verdict = is_zero(multiplier)
    order = _phi_order(residual, phi)
    if order >= 1:
        top_coeff = diff(residual, phi.sym((order,)))
        exact = is_zero(top_coeff) in (
            TriBool.PROVEN_NONZERO,
            TriBool.PROBABLY_NONZERO,
        )
    else:
        exact = True
    return AnsatzReduction(
        multiplier=multiplier,
        reduced=residual,
        essential_order=order,
        order_exact=exact,
        omega=omega,
        phi=phi,
        multiplier_verdict=verdict,
    )
