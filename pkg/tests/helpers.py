"""Shared builders for the tests: standard equations, corpus access, random data."""

from importlib import resources

import sympy as sp

from redop import DifferentialFunction, JetContext, parse_problem


def heat():
    """u_t = u_xx on (t, x)."""
    ctx = JetContext("t", "x", "u")
    return ctx, DifferentialFunction(ctx.jet(1, 0) - ctx.jet(0, 2), ctx)


def liouville():
    """u_xy = exp(u) on (x, y)."""
    ctx = JetContext("x", "y", "u")
    return ctx, DifferentialFunction(ctx.jet(1, 1) - sp.exp(ctx.u), ctx)


def wave_zero():
    """u_xy = 0 on (x, y)."""
    ctx = JetContext("x", "y", "u")
    return ctx, DifferentialFunction(ctx.jet(1, 1), ctx)


def wave_generic():
    """u_xy = F(u) with F_u declared nonvanishing."""
    ctx = JetContext("x", "y", "u")
    F = ctx.add_function("F", (ctx.u,), nonzero=((1,),))
    return ctx, DifferentialFunction(ctx.jet(1, 1) - F(ctx.u), ctx), F


def third_order_t():
    """u_ttt = exp(u_xx)*(u_x + u)."""
    ctx = JetContext("t", "x", "u")
    body = ctx.jet(3, 0) - sp.exp(ctx.jet(0, 2)) * (ctx.jet(0, 1) + ctx.u)
    return ctx, DifferentialFunction(body, ctx)


def first_order_t():
    """u_t = exp(u_xx)*(u_x + u), same right-hand side as third_order_t."""
    ctx = JetContext("t", "x", "u")
    body = ctx.jet(1, 0) - sp.exp(ctx.jet(0, 2)) * (ctx.jet(0, 1) + ctx.u)
    return ctx, DifferentialFunction(body, ctx)


def corpus_text(stem):
    return (resources.files("redop") / "corpus" / (stem + ".prob")).read_text()


def corpus_problem(stem):
    return parse_problem(corpus_text(stem))


def corpus_stems():
    root = resources.files("redop") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".prob"))


def rand_expr(rng, atoms, depth=3, allow_exp=True):
    """Random expression over the atoms; exponentials never nest."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.7:
            return rng.choice(atoms)
        return sp.Integer(rng.randint(1, 4))
    ops = ["add", "add", "mul", "mul", "pow"]
    if allow_exp:
        ops.append("exp")
    op = rng.choice(ops)
    if op == "add":
        a = rand_expr(rng, atoms, depth - 1, allow_exp)
        b = rand_expr(rng, atoms, depth - 1, allow_exp)
        return a - b if rng.random() < 0.3 else a + b
    if op == "mul":
        a = rand_expr(rng, atoms, depth - 1, allow_exp)
        b = rand_expr(rng, atoms, depth - 1, allow_exp)
        # denominators stay away from zero on the sampling box
        if rng.random() < 0.2:
            return a / (1 + b**2)
        return a * b
    if op == "pow":
        return rand_expr(rng, atoms, depth - 1, False) ** rng.randint(2, 3)
    return sp.exp(rand_expr(rng, atoms, depth - 1, False))


def rand_jet_body(rng, ctx, max_order=2, depth=3):
    """Random differential function body over coordinates and low jets."""
    atoms = [ctx.x1, ctx.x2, ctx.u]
    for a1 in range(max_order + 1):
        for a2 in range(max_order + 1 - a1):
            if a1 + a2 > 0:
                atoms.append(ctx.jet(a1, a2))
    return rand_expr(rng, atoms, depth=depth)
