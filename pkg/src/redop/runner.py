"""Command dispatch: each CLI command maps to one analysis routine."""

from __future__ import annotations

import time

import sympy as sp

from .core import CONFIG, TriBool, diff, fn_symbol_info, is_zero, normalize, primitive_equation
from .errors import NotAffineInLeader
from .families import backlund_verify, verify_bijection, zeta_from_family
from .jets import ord, transpose
from .reduction import (
    conditional_invariance_test,
    determining_regular,
    determining_singular,
    reduce_with_ansatz,
)
from .report import (
    FAILED,
    PROVED,
    SAMPLED,
    UNDECIDABLE,
    AnalysisReport,
    CommandResult,
    Verdict,
    nonzero_claim_status,
    render,
    zero_claim_status,
)
from .singular import analyze_reduced_set, weak_coorder

COMMANDS = ("analyze", "coorder", "detsys", "verify", "reduce", "bijection")


def _xi_expr(ctx, label):
    if label == "0":
        return sp.S.Zero
    if label == "u":
        return ctx.u
    raise ValueError("xi must be '0' or 'u'")


def _named(mapping, name, what):
    if name is None:
        raise ValueError("this command needs --%s" % what)
    if name not in mapping:
        raise ValueError("unknown %s %r" % (what, name))
    return mapping[name]


def _cmd_analyze(problem, options):
    L = problem.equation
    verdicts = []
    expressions = {}
    oriented = [(L.ctx.x2.name, L), (L.ctx.x1.name, transpose(L))]
    for axis_name, Lo in oriented:
        r = ord(Lo)
        for label in ("0", "u"):
            sa = analyze_reduced_set(Lo, _xi_expr(Lo.ctx, label))
            where = "normalized on %s, xi = %s" % (axis_name, label)
            key = "%s.xi=%s" % (axis_name, label)
            expressions[key + ".associated"] = render(sa.hat.body)
            if sa.k == r:
                verdicts.append(Verdict(
                    claim="%s: regular (generic co-order %d equals the order)" % (where, sa.k),
                    status=PROVED,
                ))
                continue
            verdicts.append(Verdict(
                claim="%s: singular set of co-order %d" % (where, sa.k),
                status=PROVED,
                detail="associated function of order %d" % sa.k,
            ))
            expressions[key + ".regular_value"] = render(sa.regular_value)
            if sa.s_ultra is None:
                verdicts.append(Verdict(
                    claim="%s: sub-branch systems are undetermined" % where,
                    status=UNDECIDABLE,
                    detail="no finite coefficient split in the kept jets",
                ))
                continue
            verdicts.append(Verdict(
                claim="%s: ultra-singular sub-branch is %s"
                % (where, "consistent" if sa.ultra_consistent else "inconsistent"),
                status=SAMPLED if sa.ultra_consistent else PROVED,
                detail="conditions: %s" % "; ".join(render(e) for e in sa.s_ultra),
            ))
            if sa.k >= 1:
                verdicts.append(Verdict(
                    claim="%s: lower co-order sub-branch is %s"
                    % (where, "consistent" if sa.zero_consistent else "inconsistent"),
                    status=SAMPLED if sa.zero_consistent else PROVED,
                    detail="conditions: %s" % "; ".join(render(e) for e in sa.s_zero),
                ))
    return verdicts, expressions


def _cmd_coorder(problem, options):
    Q = _named(problem.fields, options.get("field"), "field")
    rep = weak_coorder(problem.equation, Q)
    verdicts = [
        Verdict(claim="strong singularity co-order = %d" % rep.strong, status=PROVED),
        Verdict(
            claim="weak singularity co-order bounds [%d, %d]"
            % (rep.weak_lower, rep.weak_upper),
            status=PROVED,
        ),
    ]
    if rep.weak_upper <= 0:
        verdicts.append(Verdict(
            claim="weak co-order is exactly %d" % rep.weak_upper,
            status=PROVED,
            detail="a nonzero residual cannot drop below order 0",
        ))
    elif rep.exact:
        verdicts.append(Verdict(
            claim="weak co-order is exactly %d" % rep.weak_upper,
            status=PROVED if rep.maximal_rank is not TriBool.PROBABLY_NONZERO else SAMPLED,
            detail="top-jet coefficient verdict: %s" % rep.maximal_rank.name,
        ))
    else:
        verdicts.append(Verdict(
            claim="weak co-order is exactly %d" % rep.weak_upper,
            status=UNDECIDABLE,
            detail="top-jet coefficient verdict: %s" % rep.maximal_rank.name,
        ))
    if rep.multiplier != 1:
        verdicts.append(Verdict(
            claim="extracted multiplier does not vanish",
            status=nonzero_claim_status(is_zero(rep.multiplier)),
        ))
    expressions = {
        "associated": render(rep.elimination.hat.body),
        "multiplier": render(rep.multiplier),
        "residual": render(rep.residual.body),
    }
    return verdicts, expressions


def _solved_display(eq, zeta):
    candidates = []
    for s in eq.free_symbols:
        info = fn_symbol_info(s)
        if info is not None and info[0] is zeta and any(info[1]):
            c = diff(eq, s)
            if isinstance(c, sp.Number) and c != 0:
                candidates.append((info[1][0], sum(info[1]), s, c))
    if not candidates:
        return "%s = 0" % render(primitive_equation(eq))
    _, _, s, c = max(candidates, key=lambda q: (q[0], q[1], q[2].name))
    rhs = normalize(s - eq / c)
    return "%s = %s" % (s.name, render(rhs))


def _cmd_detsys(problem, options):
    L = problem.equation
    if options.get("field") is not None:
        Q = _named(problem.fields, options["field"], "field")
        ds = determining_regular(L, Q)
        verdicts = [Verdict(
            claim="regular-case determining system with %d equations" % len(ds.equations),
            status=PROVED,
            detail="case: %s" % ds.case,
        )]
        expressions = {
            "equation_%d" % (i + 1): "%s = 0" % render(e)
            for i, e in enumerate(ds.equations)
        }
        return verdicts, expressions
    xi = _xi_expr(L.ctx, options.get("xi", "0"))
    ds = determining_singular(L, xi)
    verdicts = [Verdict(
        claim="single determining equation for the co-order 1 set",
        status=PROVED,
        detail="case: %s" % ds.case,
    )]
    for a in ds.assumptions:
        verdicts.append(Verdict(
            claim="solvability assumption: %s does not vanish" % render(a),
            status=nonzero_claim_status(is_zero(a)),
        ))
    expressions = {
        "determining": _solved_display(ds.equations[0], ds.zeta),
        "leading_derivative": render(ds.G),
    }
    return verdicts, expressions


def _cmd_verify(problem, options):
    Q = _named(problem.fields, options.get("field"), "field")
    try:
        verdict = conditional_invariance_test(problem.equation, Q)
        verdicts = [Verdict(
            claim="conditional invariance criterion holds on the manifold",
            status=zero_claim_status(verdict),
            detail="residual verdict: %s" % verdict.name,
        )]
        return verdicts, {}
    except NotAffineInLeader as e:
        return [Verdict(
            claim="conditional invariance criterion holds on the manifold",
            status=UNDECIDABLE,
            detail=str(e),
        )], {}


def _cmd_reduce(problem, options):
    Q = _named(problem.fields, options.get("field"), "field")
    a = _named(problem.ansatzes, options.get("ansatz"), "ansatz")
    ar = reduce_with_ansatz(problem.equation, Q, a.f, a.omega)
    verdicts = []
    if ar.essential_order < 0:
        verdicts.append(Verdict(
            claim="ansatz reduces the equation to the identity 0 = 0",
            status=PROVED,
            detail="ultra-singular reduction, essential order -1",
        ))
    else:
        verdicts.append(Verdict(
            claim="essential order of the reduced equation = %d" % ar.essential_order,
            status=PROVED if ar.order_exact else UNDECIDABLE,
            detail="top derivative coefficient %s"
            % ("does not vanish" if ar.order_exact else "could not be certified"),
        ))
    if ar.multiplier != 1:
        verdicts.append(Verdict(
            claim="reduction multiplier does not vanish",
            status=nonzero_claim_status(ar.multiplier_verdict),
        ))
    expressions = {
        "multiplier": render(ar.multiplier),
        "reduced": "%s = 0" % render(ar.reduced),
        "omega": render(ar.omega),
    }
    return verdicts, expressions


def _cmd_bijection(problem, options):
    L = problem.equation
    fam = _named(problem.families, options.get("family"), "family")
    xi = _xi_expr(L.ctx, options.get("xi", "0"))
    rep = verify_bijection(L, fam, xi)
    verdicts = [
        Verdict(claim="family solves the equation",
                status=zero_claim_status(rep.solves)),
        Verdict(claim="family is invariant under its reduction operator",
                status=zero_claim_status(rep.invariance)),
        Verdict(claim="recovered zeta satisfies the determining equation",
                status=zero_claim_status(rep.determining)),
        Verdict(claim="family parameter is essential",
                status=nonzero_claim_status(fam.essential)),
    ]
    samples = options.get("samples") or 10
    bk = backlund_verify(L, rep.zeta, fam.Phi, xi,
                         samples=samples, seed=options.get("seed") or 0)
    verdicts.append(Verdict(
        claim="surface identity xi*Phi_1 + Phi_2 + zeta*Phi_u = 0",
        status=zero_claim_status(bk.identity_q),
    ))
    verdicts.append(Verdict(
        claim="flow identity Phi_1 + G*Phi_u = 0",
        status=zero_claim_status(bk.identity_g),
    ))
    if bk.structural is TriBool.PROVEN_ZERO:
        status, detail = PROVED, "residual is structurally zero; %d points exact" % len(bk.points)
    elif bk.points and all(res <= 1e-9 for _, res in bk.points):
        status, detail = SAMPLED, "max residual %.3g over %d points" % (
            max(res for _, res in bk.points), len(bk.points))
    else:
        status, detail = FAILED, "residual nonzero or no sample points found"
    verdicts.append(Verdict(
        claim="implicit-surface residual vanishes at sampled points",
        status=status, detail=detail,
    ))
    expressions = {"zeta": render(rep.zeta), "Phi": render(fam.Phi)}
    return verdicts, expressions


_DISPATCH = {
    "analyze": _cmd_analyze,
    "coorder": _cmd_coorder,
    "detsys": _cmd_detsys,
    "verify": _cmd_verify,
    "reduce": _cmd_reduce,
    "bijection": _cmd_bijection,
}


def run(command, problem, **options):
    """Execute one command against a parsed problem, returning a report."""
    if command not in _DISPATCH:
        raise ValueError("unknown command %r" % command)
    if options.get("samples"):
        CONFIG["samples"] = int(options["samples"])
    if options.get("seed") is not None:
        CONFIG["seed"] = int(options["seed"])
    t0 = time.perf_counter()
    verdicts, expressions = _DISPATCH[command](problem, options)
    elapsed = (time.perf_counter() - t0) * 1000.0
    inputs = {
        k: str(v)
        for k, v in options.items()
        if k in ("field", "family", "ansatz", "xi") and v is not None
    }
    result = CommandResult(
        command=command,
        inputs=inputs,
        verdicts=verdicts,
        expressions=expressions,
        timing_ms=round(elapsed, 3),
    )
    return AnalysisReport(problem=options.get("problem_name"), results=[result])
