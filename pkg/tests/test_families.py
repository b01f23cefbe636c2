"""Solution families, operator recovery, adjoints, transformation checks."""

import pytest
import sympy as sp

from redop import (
    SolutionFamily,
    TriBool,
    VectorField,
    adjoint_operator,
    backlund_verify,
    coorder0_solution,
    normalize,
    verify_bijection,
    verify_family_solves,
    zeta_from_family,
)
from redop.errors import DegenerateInverse, WrongCoorderBranch
from redop.families import instantiate_function

from helpers import heat, liouville, wave_generic

kappa = sp.Symbol("kappa")


def heat_grow_family():
    ctx, L = heat()
    t, x, u = ctx.x1, ctx.x2, ctx.u
    fam = SolutionFamily(ctx, kappa * sp.exp(t + x), u * sp.exp(-t - x), kappa)
    return ctx, L, fam


def liouville_main_family():
    ctx, L = liouville()
    x, y, u = ctx.x1, ctx.x2, ctx.u
    f = sp.log(2) - 2 * sp.log(x + y + kappa)
    Phi = sp.sqrt(2) * sp.exp(-u / 2) - x - y
    fam = SolutionFamily(ctx, f, Phi, kappa)
    return ctx, L, fam


class TestSolutionFamily:
    def test_inverse_must_recover_the_parameter(self):
        ctx, L = heat()
        with pytest.raises(ValueError):
            SolutionFamily(ctx, kappa * sp.exp(ctx.x1), ctx.u, kappa)

    def test_heat_families_validate(self):
        ctx, L, fam = heat_grow_family()
        assert fam.essential is TriBool.PROVEN_NONZERO
        t, x, u = ctx.x1, ctx.x2, ctx.u
        line = SolutionFamily(ctx, kappa * x, u / x, kappa)
        # df/dkappa = x vanishes on a hyperplane, so no proof is possible
        assert line.essential is TriBool.PROBABLY_NONZERO

    def test_solves_verdicts(self):
        ctx, L, fam = heat_grow_family()
        assert verify_family_solves(L, fam) is TriBool.PROVEN_ZERO
        t, x, u = ctx.x1, ctx.x2, ctx.u
        bogus = SolutionFamily(ctx, kappa * (t + x), u / (t + x), kappa)
        assert verify_family_solves(L, bogus) is not TriBool.PROVEN_ZERO


class TestZetaFromFamily:
    def test_heat_values(self):
        ctx, L = heat()
        t, x, u = ctx.x1, ctx.x2, ctx.u
        cases = [
            (kappa * sp.exp(t + x), u * sp.exp(-t - x), u),
            (x**2 / 2 + t + kappa, u - x**2 / 2 - t, x),
            (kappa * x, u / x, u / x),
        ]
        for f, Phi, want in cases:
            fam = SolutionFamily(ctx, f, Phi, kappa)
            assert normalize(zeta_from_family(fam, 0) - want) == 0

    def test_liouville_value(self):
        ctx, L, fam = liouville_main_family()
        want = -sp.sqrt(2) * sp.exp(ctx.u / 2)
        assert normalize(zeta_from_family(fam, 0) - want) == 0


class TestVerifyBijection:
    def test_heat_families_certify(self):
        ctx, L = heat()
        t, x, u = ctx.x1, ctx.x2, ctx.u
        for f, Phi in [
            (kappa * sp.exp(t + x), u * sp.exp(-t - x)),
            (x**2 / 2 + t + kappa, u - x**2 / 2 - t),
            (kappa * x, u / x),
        ]:
            fam = SolutionFamily(ctx, f, Phi, kappa)
            rep = verify_bijection(L, fam, 0)
            assert rep.certified, (f, rep)

    def test_liouville_family_certifies(self):
        ctx, L, fam = liouville_main_family()
        rep = verify_bijection(L, fam, 0)
        assert rep.certified
        assert normalize(rep.zeta + sp.sqrt(2) * sp.exp(ctx.u / 2)) == 0


class TestAdjoint:
    def test_liouville_coorder_one_fixed_point(self):
        ctx, L = liouville()
        zeta = -sp.sqrt(2) * sp.exp(ctx.u / 2)
        star = adjoint_operator(zeta, sp.exp(ctx.u), 1, ctx)
        assert normalize(star - zeta) == 0
        # applying it twice is the identity on this orbit
        assert normalize(adjoint_operator(star, sp.exp(ctx.u), 1, ctx) - zeta) == 0

    def test_coorder_zero_formula(self):
        ctx, L = liouville()
        zeta = -2 / (ctx.x1 + ctx.x2)
        star = adjoint_operator(zeta, sp.exp(ctx.u), 0, ctx)
        assert normalize(star - zeta) == 0

    def test_branch_guards(self):
        ctx, L = liouville()
        with pytest.raises(WrongCoorderBranch):
            adjoint_operator(-2 / (ctx.x1 + ctx.x2), sp.exp(ctx.u), 1, ctx)
        with pytest.raises(WrongCoorderBranch):
            adjoint_operator(-sp.sqrt(2) * sp.exp(ctx.u / 2), sp.exp(ctx.u), 0, ctx)
        with pytest.raises(ValueError):
            adjoint_operator(ctx.x1, sp.exp(ctx.u), 2, ctx)

    def test_generic_wave_needs_a_declared_inverse(self):
        ctx, L, F = wave_generic()
        zeta = (ctx.x1 + ctx.x2) ** 2 / 2
        with pytest.raises(WrongCoorderBranch):
            adjoint_operator(zeta, F, 0, ctx)
        Ftil = F.declare_inverse("Ftil")
        star = adjoint_operator(zeta, F, 0, ctx)
        want = 1 / F.applied((1,), (Ftil(ctx.x1 + ctx.x2),))
        assert normalize(star - want) == 0


class TestCoorderZeroSolution:
    def test_liouville_flat_solution(self):
        ctx, L = liouville()
        x, y = ctx.x1, ctx.x2
        G, verdict = coorder0_solution(L, -2 / (x + y), 0)
        assert normalize(G - sp.log(2 / (x + y) ** 2)) == 0
        assert verdict is TriBool.PROVEN_ZERO

    def test_u_dependent_zeta_rejected(self):
        ctx, L = liouville()
        with pytest.raises(WrongCoorderBranch):
            coorder0_solution(L, ctx.u, 0)


class TestBacklundVerify:
    def test_heat_surface(self):
        ctx, L = heat()
        t, x, u = ctx.x1, ctx.x2, ctx.u
        rep = backlund_verify(L, u, u * sp.exp(-t - x), 0)
        assert rep.identity_q is TriBool.PROVEN_ZERO
        assert rep.identity_g is TriBool.PROVEN_ZERO
        assert rep.structural is TriBool.PROVEN_ZERO
        assert len(rep.points) == rep.samples_requested == 50
        assert all(res == 0 for _pt, res in rep.points)
        assert rep.passed

    def test_identity_failure_blocks_the_pass(self):
        ctx, L = heat()
        # u itself parametrizes the constants, which do solve the equation,
        # but zeta = u is not the operator attached to that inverse
        rep = backlund_verify(L, ctx.u, ctx.u, 0)
        assert rep.structural is TriBool.PROVEN_ZERO
        assert rep.identity_q is not TriBool.PROVEN_ZERO
        assert not rep.passed

    def test_sample_count_follows_the_request(self):
        ctx, L = heat()
        t, x, u = ctx.x1, ctx.x2, ctx.u
        rep = backlund_verify(L, u, u * sp.exp(-t - x), 0, samples=2)
        assert rep.samples_requested == 10
        assert len(rep.points) == 10

    def test_u_free_inverse_rejected(self):
        ctx, L = heat()
        with pytest.raises(DegenerateInverse):
            backlund_verify(L, ctx.u, ctx.x1 + ctx.x2, 0)


class TestInstantiate:
    def test_partials_of_the_value_replace_the_symbols(self):
        ctx, L = heat()
        zeta = ctx.add_function("zeta", (ctx.x1, ctx.x2, ctx.u))
        e = zeta.sym((0, 1, 0)) + ctx.u * zeta.sym((0, 0, 1))
        got = instantiate_function(e, zeta, ctx.x2 * ctx.u)
        assert normalize(got - (ctx.u + ctx.u * ctx.x2)) == 0
