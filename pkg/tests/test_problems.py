"""Problem-file grammar: tokenizing, parsing, rendering, round trips."""

import pytest
import sympy as sp

from redop import parse_problem, render_problem, normalize, ord
from redop.errors import ParseError, UndeclaredIdentifier

from helpers import corpus_stems, corpus_text

HEAT = "vars t x;\ndep u;\neq: u_t = u_xx;\n"


class TestTokenizer:
    def test_unexpected_character_carries_position(self):
        with pytest.raises(ParseError) as ei:
            parse_problem("vars t x;\ndep u;\neq: u_t = u @ 2;\n")
        assert "unexpected character" in str(ei.value)
        assert ei.value.line == 3
        assert ei.value.col == 13

    def test_decimal_literals_rejected(self):
        with pytest.raises(ParseError) as ei:
            parse_problem("vars t x;\ndep u;\neq: u_t = 1.5*u_xx;\n")
        assert "decimal literals" in str(ei.value)
        assert ei.value.line == 3

    def test_unterminated_brace_in_derivative(self):
        with pytest.raises(ParseError) as ei:
            parse_problem("vars t x;\ndep u;\nfn H(u_xx);\neq: u_t = H_{u_xx;\n")
        assert "unterminated" in str(ei.value)

    def test_bare_underscore_needs_a_suffix(self):
        with pytest.raises(ParseError) as ei:
            parse_problem("vars t x;\ndep u;\neq: u_ = 0;\n")
        assert "suffix" in str(ei.value)

    def test_comments_run_to_end_of_line(self):
        p = parse_problem("# heading\nvars t x; # trailing\ndep u;\neq: u_t = u_xx;\n")
        assert p.ctx.x1.name == "t"

    def test_comma_between_vars_rejected(self):
        with pytest.raises(ParseError) as ei:
            parse_problem("vars t, x;\ndep u;\neq: u_t = u_xx;\n")
        assert ei.value.line == 1


class TestUndeclaredNames:
    def test_derivative_of_unknown_base(self):
        with pytest.raises(UndeclaredIdentifier) as ei:
            parse_problem("vars t x;\ndep u;\neq: u_t = v_xx;\n")
        assert ei.value.name == "v"
        assert "undeclared identifier 'v'" in str(ei.value)

    def test_plain_unknown_name(self):
        with pytest.raises(UndeclaredIdentifier) as ei:
            parse_problem("vars t x;\ndep u;\neq: u_t = w;\n")
        assert ei.value.name == "w"

    def test_family_parameter_scope_ends_with_the_statement(self):
        text = (
            "vars t x;\ndep u;\n"
            "family grow: kap*exp(t+x) param kap inverse u*exp(-t-x);\n"
            "eq: u_t = kap;\n"
        )
        with pytest.raises(UndeclaredIdentifier) as ei:
            parse_problem(text)
        assert ei.value.name == "kap"


class TestParsing:
    def test_heat_equation(self):
        p = parse_problem(HEAT)
        ctx = p.ctx
        assert (ctx.x1.name, ctx.x2.name, ctx.dep) == ("t", "x", "u")
        assert normalize(p.equation.body - (ctx.jet(1, 0) - ctx.jet(0, 2))) == 0
        assert ord(p.equation) == 2

    def test_function_with_assumption(self):
        p = parse_problem(
            "vars t x;\ndep u;\nfn F(u) assume nonzero F_u;\neq: u_tx = F(u);\n"
        )
        F = p.ctx.functions["F"]
        assert (1,) in F.nonzero
        assert ord(p.equation) == 2
        want = p.ctx.jet(1, 1) - F(p.ctx.u)
        assert normalize(p.equation.body - want) == 0

    def test_declared_inverse(self):
        p = parse_problem(
            "vars t x;\ndep u;\nfn F(u) assume nonzero F_u inverse G;\n"
            "eq: u_tx = F(u);\n"
        )
        F = p.ctx.functions["F"]
        assert F.inverse is not None and F.inverse.name == "G"
        assert F.inverse.inverse is F

    def test_numeric_multi_index(self):
        p = parse_problem("vars t x;\ndep u;\neq: u_t = u[1,2];\n")
        assert normalize(p.equation.body - (p.ctx.jet(1, 0) - p.ctx.jet(1, 2))) == 0

    def test_jet_token_spells_the_multi_index(self):
        p = parse_problem("vars t x;\ndep u;\neq: u_txx = u;\n")
        assert normalize(p.equation.body - (p.ctx.jet(1, 2) - p.ctx.u)) == 0

    def test_power_is_right_associative(self):
        p = parse_problem("vars t x;\ndep u;\neq: u_t = u^2^3;\n")
        assert normalize(p.equation.body - (p.ctx.jet(1, 0) - p.ctx.u**8)) == 0

    def test_field_statement(self):
        p = parse_problem(HEAT + "field expo: 0, 1, u;\n")
        Q = p.fields["expo"]
        assert (Q.xi1, Q.xi2, Q.eta) == (0, 1, p.ctx.u)

    def test_field_with_jet_coefficient_rejected(self):
        with pytest.raises(ParseError):
            parse_problem(HEAT + "field bad: u_x, 1, 0;\n")

    def test_ansatz_statement(self):
        p = parse_problem(HEAT + "ansatz sep: phi*exp(x) omega t;\n")
        a = p.ansatzes["sep"]
        phi = p.ctx.functions["phi"]
        assert normalize(a.f - phi.base * sp.exp(p.ctx.x2)) == 0
        assert a.omega == p.ctx.x1

    def test_phi_is_reserved(self):
        with pytest.raises(ParseError):
            parse_problem("vars t x;\ndep phi;\neq: phi_t = 0;\n")
        with pytest.raises(ParseError):
            parse_problem(HEAT + "fn phi(u);\n")

    def test_equation_must_have_a_derivative(self):
        with pytest.raises(ParseError) as ei:
            parse_problem("vars t x;\ndep u;\neq: u = 0;\n")
        assert "must involve derivatives" in str(ei.value)

    def test_missing_statements_reported(self):
        with pytest.raises(ParseError):
            parse_problem("vars t x;\ndep u;\n")
        with pytest.raises(ParseError):
            parse_problem("dep u;\neq: u_t = 0;\n")


class TestEquality:
    def test_same_text_parses_equal(self):
        a = parse_problem(HEAT + "field expo: 0, 1, u;\n")
        b = parse_problem(HEAT + "field expo: 0, 1, u;\n")
        assert a == b

    def test_different_field_name_breaks_equality(self):
        a = parse_problem(HEAT + "field expo: 0, 1, u;\n")
        b = parse_problem(HEAT + "field other: 0, 1, u;\n")
        assert a != b

    def test_not_a_problem_file(self):
        assert parse_problem(HEAT) != "text"


class TestRoundTrip:
    @pytest.mark.parametrize("stem", corpus_stems())
    def test_parse_render_identity(self, stem):
        p = parse_problem(corpus_text(stem))
        rendered = render_problem(p)
        p2 = parse_problem(rendered)
        assert p2 == p
        # canonical text is a fixed point of another round trip
        assert render_problem(p2) == rendered
