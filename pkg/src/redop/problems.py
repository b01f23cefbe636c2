"""Problem-file grammar: tokenizer, parser, and canonical renderer.

A problem file is a sequence of semicolon-terminated statements:

    vars t x;
    dep u;
    fn H(t, x, u, u_x, u_xx) assume nonzero H_{u_xx};
    fn F(u) assume nonzero F_u inverse Ftil;
    eq: u_t = u_xx;
    field expo: 0, 1, u;
    family grow: kappa*exp(t+x) param kappa inverse u*exp(-t-x);
    ansatz sep: phi*exp(x) omega t;

Derivative tokens spell multi-indices with the declared variable letters
(u_txx is the t-once, x-twice jet) or numerically (u[1,2]); derivatives of
declared functions use the formal argument names, braced when longer than
one character (H_{u_xx}). Comments run from '#' to end of line. The name
phi is reserved for the unknown function of ansatz statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .core import is_zero, normalize
from .errors import ParseError, UndeclaredIdentifier
from .families import SolutionFamily
from .jets import DifferentialFunction, JetContext, VectorField, ord

KEYWORDS = {
    "vars", "dep", "fn", "eq", "field", "family", "ansatz",
    "assume", "nonzero", "inverse", "param", "omega",
}
BUILTINS = {"exp", "ln", "sqrt"}
RESERVED = KEYWORDS | BUILTINS | {"phi"}

_PUNCT = set(";:,()[]+-*/^=")


@dataclass
class Token:
    kind: str  # num | name | deriv | punct | end
    value: object
    line: int
    col: int


def _tokenize(text):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                raise ParseError("decimal literals are not supported, use fractions", line, start_col)
            tokens.append(Token("num", int(text[i:j]), line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            name = text[i:j]
            col += j - i
            i = j
            if i < n and text[i] == "_":
                i += 1
                col += 1
                parts = []
                while i < n:
                    if text[i] == "{":
                        k = text.find("}", i)
                        if k < 0:
                            raise ParseError("unterminated '{' in derivative token", line, col)
                        parts.append(text[i + 1 : k])
                        col += k - i + 1
                        i = k + 1
                    elif text[i].isalnum():
                        parts.append(text[i])
                        i += 1
                        col += 1
                    else:
                        break
                if not parts:
                    raise ParseError("derivative token needs a suffix after '_'", line, col)
                tokens.append(Token("deriv", (name, tuple(parts)), line, start_col))
            else:
                tokens.append(Token("name", name, line, start_col))
            continue
        if c in _PUNCT:
            tokens.append(Token("punct", c, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError("unexpected character %r" % c, line, col)
    tokens.append(Token("end", None, line, col))
    return tokens


@dataclass
class Ansatz:
    f: object
    omega: object


@dataclass
class ProblemFile:
    ctx: JetContext
    equation: DifferentialFunction
    function_names: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)
    families: dict = field(default_factory=dict)
    ansatzes: dict = field(default_factory=dict)

    def _signature(self):
        fns = []
        for name in self.function_names:
            fn = self.ctx.functions[name]
            fns.append((
                name,
                tuple(a.name for a in fn.args),
                tuple(sorted(fn.nonzero)),
                fn.inverse.name if fn.inverse is not None else None,
            ))
        return (
            (self.ctx.x1.name, self.ctx.x2.name, self.ctx.dep),
            tuple(fns),
            self.equation.body,
            tuple((k, v.xi1, v.xi2, v.eta) for k, v in sorted(self.fields.items())),
            tuple(
                (k, v.f, v.Phi, v.kappa.name) for k, v in sorted(self.families.items())
            ),
            tuple((k, v.f, v.omega) for k, v in sorted(self.ansatzes.items())),
        )

    def __eq__(self, other):
        if not isinstance(other, ProblemFile):
            return NotImplemented
        return self._signature() == other._signature()


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.ctx = None
        self.function_names = []
        self.equation = None
        self.fields = {}
        self.families = {}
        self.ansatzes = {}
        self.scope = {}  # extra expression-level names (family params, phi)

    # token plumbing

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect_punct(self, c):
        t = self.next()
        if t.kind != "punct" or t.value != c:
            raise ParseError("expected %r" % c, t.line, t.col)
        return t

    def expect_name(self, what="identifier"):
        t = self.next()
        if t.kind != "name":
            raise ParseError("expected %s" % what, t.line, t.col)
        return t

    def expect_keyword(self, kw):
        t = self.next()
        if t.kind != "name" or t.value != kw:
            raise ParseError("expected %r" % kw, t.line, t.col)
        return t

    def fresh_name(self, t):
        if t.value in RESERVED:
            raise ParseError("%r is a reserved word" % t.value, t.line, t.col)
        if self.ctx is not None and (
            t.value in (self.ctx.x1.name, self.ctx.x2.name, self.ctx.dep)
            or t.value in self.ctx.functions
        ):
            raise ParseError("%r is already declared" % t.value, t.line, t.col)
        return t.value

    # statements

    def parse(self):
        while self.peek().kind != "end":
            t = self.next()
            if t.kind != "name":
                raise ParseError("expected a statement keyword", t.line, t.col)
            handler = getattr(self, "stmt_" + t.value, None)
            if t.value not in KEYWORDS or handler is None:
                raise ParseError("unknown statement %r" % t.value, t.line, t.col)
            handler(t)
        if self.ctx is None:
            raise ParseError("missing 'vars' statement", 1, 1)
        if self.equation is None:
            raise ParseError("missing 'eq:' statement", 1, 1)
        return ProblemFile(
            ctx=self.ctx,
            equation=self.equation,
            function_names=self.function_names,
            fields=self.fields,
            families=self.families,
            ansatzes=self.ansatzes,
        )

    def need_ctx(self, t):
        if self.ctx is None:
            raise ParseError("'vars' and 'dep' must come first", t.line, t.col)

    def stmt_vars(self, t):
        if self.ctx is not None:
            raise ParseError("duplicate 'vars' statement", t.line, t.col)
        a = self.fresh_name(self.expect_name("independent variable"))
        b = self.expect_name("independent variable")
        if b.value in RESERVED or b.value == a:
            raise ParseError("bad independent variable %r" % b.value, b.line, b.col)
        self.expect_punct(";")
        self._vars = (a, b.value)

    def stmt_dep(self, t):
        if self.ctx is not None:
            raise ParseError("duplicate 'dep' statement", t.line, t.col)
        if not hasattr(self, "_vars"):
            raise ParseError("'dep' must follow 'vars'", t.line, t.col)
        d = self.expect_name("dependent variable")
        if d.value in RESERVED or d.value in self._vars:
            raise ParseError("bad dependent variable %r" % d.value, d.line, d.col)
        self.expect_punct(";")
        self.ctx = JetContext(self._vars[0], self._vars[1], d.value)

    def stmt_fn(self, t):
        self.need_ctx(t)
        name = self.fresh_name(self.expect_name("function name"))
        self.expect_punct("(")
        args = []
        while True:
            args.append(self.parse_fn_arg())
            nxt = self.next()
            if nxt.kind == "punct" and nxt.value == ",":
                continue
            if nxt.kind == "punct" and nxt.value == ")":
                break
            raise ParseError("expected ',' or ')'", nxt.line, nxt.col)
        nonzero = []
        inverse = None
        while True:
            nxt = self.peek()
            if nxt.kind == "name" and nxt.value == "assume":
                self.next()
                self.expect_keyword("nonzero")
                nonzero.extend(self.parse_assume_tokens(name, args))
            elif nxt.kind == "name" and nxt.value == "inverse":
                self.next()
                inverse = self.fresh_name(self.expect_name("inverse name"))
            elif nxt.kind == "punct" and nxt.value == ";":
                self.next()
                break
            else:
                raise ParseError("expected 'assume', 'inverse' or ';'", nxt.line, nxt.col)
        self.ctx.add_function(name, args, nonzero=nonzero, inverse=inverse)
        self.function_names.append(name)

    def parse_fn_arg(self):
        t = self.next()
        if t.kind == "name":
            s = self.lookup_variable(t)
            return s
        if t.kind == "deriv":
            base, parts = t.value
            if base != self.ctx.dep:
                raise ParseError("formal arguments must be variables or jets", t.line, t.col)
            return self.jet_from_parts(parts, t)
        raise ParseError("expected a formal argument", t.line, t.col)

    def parse_assume_tokens(self, fname, args):
        slots = {a.name: i for i, a in enumerate(args)}
        orders = []
        while True:
            t = self.peek()
            if t.kind == "deriv" and t.value[0] == fname:
                self.next()
                order = [0] * len(args)
                for part in t.value[1]:
                    if part not in slots:
                        raise ParseError(
                            "%r is not an argument of %s" % (part, fname), t.line, t.col
                        )
                    order[slots[part]] += 1
                orders.append(tuple(order))
            elif t.kind == "name" and t.value == fname:
                self.next()
                orders.append((0,) * len(args))
            else:
                break
        if not orders:
            t = self.peek()
            raise ParseError("expected derivative tokens after 'nonzero'", t.line, t.col)
        return orders

    def stmt_eq(self, t):
        self.need_ctx(t)
        if self.equation is not None:
            raise ParseError("duplicate 'eq:' statement", t.line, t.col)
        self.expect_punct(":")
        body = self.parse_expr()
        nxt = self.peek()
        if nxt.kind == "punct" and nxt.value == "=":
            self.next()
            body = body - self.parse_expr()
        self.expect_punct(";")
        L = DifferentialFunction(body, self.ctx)
        if ord(L) < 1:
            raise ParseError("the equation must involve derivatives", t.line, t.col)
        self.equation = L

    def stmt_field(self, t):
        self.need_ctx(t)
        name = self.fresh_name(self.expect_name("field name"))
        if name in self.fields:
            raise ParseError("duplicate field %r" % name, t.line, t.col)
        self.expect_punct(":")
        xi1 = self.parse_expr()
        self.expect_punct(",")
        xi2 = self.parse_expr()
        self.expect_punct(",")
        eta = self.parse_expr()
        self.expect_punct(";")
        try:
            self.fields[name] = VectorField(self.ctx, xi1, xi2, eta)
        except ValueError as e:
            raise ParseError(str(e), t.line, t.col)

    def stmt_family(self, t):
        self.need_ctx(t)
        name = self.fresh_name(self.expect_name("family name"))
        if name in self.families:
            raise ParseError("duplicate family %r" % name, t.line, t.col)
        self.expect_punct(":")
        # the parameter is declared after the expression that uses it
        param = self._scan_ahead_param(t)
        kappa = sp.Symbol(param)
        self.scope[param] = kappa
        try:
            f = self.parse_expr()
            self.expect_keyword("param")
            self.expect_name("parameter name")
            self.expect_keyword("inverse")
        finally:
            del self.scope[param]
        Phi = self.parse_expr()
        self.expect_punct(";")
        try:
            self.families[name] = SolutionFamily(self.ctx, f, Phi, kappa)
        except ValueError as e:
            raise ParseError(str(e), t.line, t.col)

    def _scan_ahead_param(self, t):
        i = self.pos
        while i < len(self.tokens):
            tok = self.tokens[i]
            if tok.kind == "punct" and tok.value == ";":
                break
            if tok.kind == "name" and tok.value == "param":
                nxt = self.tokens[i + 1]
                if nxt.kind != "name" or nxt.value in RESERVED:
                    raise ParseError("expected parameter name", nxt.line, nxt.col)
                if nxt.value in (self.ctx.x1.name, self.ctx.x2.name, self.ctx.dep):
                    raise ParseError(
                        "parameter shadows a declared variable", nxt.line, nxt.col
                    )
                return nxt.value
            i += 1
        raise ParseError("family statement needs a 'param' clause", t.line, t.col)

    def stmt_ansatz(self, t):
        self.need_ctx(t)
        name = self.fresh_name(self.expect_name("ansatz name"))
        if name in self.ansatzes:
            raise ParseError("duplicate ansatz %r" % name, t.line, t.col)
        self.expect_punct(":")
        phi = self.ctx.functions.get("phi")
        if phi is None:
            phi = self.ctx.add_function("phi", (sp.Symbol("w"),))
        self.scope["phi"] = phi.base
        try:
            f = self.parse_expr()
            self.expect_keyword("omega")
            omega = self.parse_expr()
        finally:
            del self.scope["phi"]
        self.expect_punct(";")
        self.ansatzes[name] = Ansatz(f=normalize(f), omega=normalize(omega))

    # expressions (precedence climbing; ^ is right-associative)

    _BINARY = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}

    def parse_expr(self, rbp=0):
        left = self.parse_prefix()
        while True:
            t = self.peek()
            if t.kind != "punct" or t.value not in self._BINARY:
                break
            lbp = self._BINARY[t.value]
            if lbp <= rbp:
                break
            self.next()
            if t.value == "^":
                right = self.parse_expr(lbp - 1)
                left = left ** right
            else:
                right = self.parse_expr(lbp)
                if t.value == "+":
                    left = left + right
                elif t.value == "-":
                    left = left - right
                elif t.value == "*":
                    left = left * right
                else:
                    left = left / right
        return left

    def parse_prefix(self):
        t = self.next()
        if t.kind == "num":
            return sp.Integer(t.value)
        if t.kind == "punct" and t.value == "-":
            return -self.parse_expr(15)
        if t.kind == "punct" and t.value == "+":
            return self.parse_expr(15)
        if t.kind == "punct" and t.value == "(":
            e = self.parse_expr()
            self.expect_punct(")")
            return e
        if t.kind == "deriv":
            return self.resolve_deriv(t)
        if t.kind == "name":
            return self.resolve_name(t)
        raise ParseError("expected an expression", t.line, t.col)

    def resolve_deriv(self, t):
        base, parts = t.value
        if base == self.ctx.dep:
            return self.jet_from_parts(parts, t)
        fn = self.ctx.functions.get(base)
        if fn is not None:
            slots = {a.name: i for i, a in enumerate(fn.args)}
            order = [0] * len(fn.args)
            for part in parts:
                if part not in slots:
                    raise ParseError(
                        "%r is not an argument of %s" % (part, base), t.line, t.col
                    )
                order[slots[part]] += 1
            return fn.sym(tuple(order))
        raise UndeclaredIdentifier(base, t.line, t.col)

    def jet_from_parts(self, parts, t):
        a1 = a2 = 0
        for part in parts:
            if part == self.ctx.x1.name:
                a1 += 1
            elif part == self.ctx.x2.name:
                a2 += 1
            else:
                raise ParseError(
                    "%r is not an independent variable" % part, t.line, t.col
                )
        return self.ctx.jet(a1, a2)

    def lookup_variable(self, t):
        if t.value == self.ctx.x1.name:
            return self.ctx.x1
        if t.value == self.ctx.x2.name:
            return self.ctx.x2
        if t.value == self.ctx.dep:
            return self.ctx.u
        if t.value in self.scope:
            return self.scope[t.value]
        raise UndeclaredIdentifier(t.value, t.line, t.col)

    def resolve_name(self, t):
        callable_next = (
            self.peek().kind == "punct" and self.peek().value == "("
        )
        if t.value in BUILTINS:
            if not callable_next:
                raise ParseError("%s needs arguments" % t.value, t.line, t.col)
            args = self.parse_call_args()
            if len(args) != 1:
                raise ParseError("%s takes one argument" % t.value, t.line, t.col)
            return {"exp": sp.exp, "ln": sp.log, "sqrt": sp.sqrt}[t.value](args[0])
        if self.ctx is not None and t.value in self.ctx.functions:
            fn = self.ctx.functions[t.value]
            if not callable_next:
                if t.value == "phi" and "phi" in self.scope:
                    return self.scope["phi"]
                raise ParseError("%s needs arguments" % t.value, t.line, t.col)
            args = self.parse_call_args()
            if len(args) != len(fn.args):
                raise ParseError(
                    "%s expects %d arguments" % (t.value, len(fn.args)), t.line, t.col
                )
            return fn.applied((0,) * len(fn.args), tuple(args))
        if t.value == "phi" and "phi" in self.scope:
            return self.scope["phi"]
        if callable_next:
            raise ParseError("%r is not a function" % t.value, t.line, t.col)
        s = self.lookup_variable(t)
        if s == self.ctx.u and self.peek().kind == "punct" and self.peek().value == "[":
            self.next()
            i1 = self.next()
            self.expect_punct(",")
            i2 = self.next()
            self.expect_punct("]")
            if i1.kind != "num" or i2.kind != "num":
                raise ParseError("numeric multi-index expected", i1.line, i1.col)
            return self.ctx.jet(i1.value, i2.value)
        return s

    def parse_call_args(self):
        self.expect_punct("(")
        args = [self.parse_expr()]
        while True:
            t = self.next()
            if t.kind == "punct" and t.value == ",":
                args.append(self.parse_expr())
            elif t.kind == "punct" and t.value == ")":
                return args
            else:
                raise ParseError("expected ',' or ')'", t.line, t.col)


def parse_problem(text):
    """Parse problem-file text into a fully resolved ProblemFile."""
    return _Parser(text).parse()


def render_problem(problem):
    """Canonical problem-file text; parse_problem inverts it."""
    from .report import render as _render

    def render(e):
        return _render(e, call_form=True)

    ctx = problem.ctx
    lines = [
        "vars %s %s;" % (ctx.x1.name, ctx.x2.name),
        "dep %s;" % ctx.dep,
    ]
    for name in problem.function_names:
        fn = ctx.functions[name]
        stmt = "fn %s(%s)" % (name, ", ".join(a.name for a in fn.args))
        if fn.nonzero:
            stmt += " assume nonzero " + " ".join(
                fn.deriv_name(order) for order in sorted(fn.nonzero)
            )
        if fn.inverse is not None:
            stmt += " inverse %s" % fn.inverse.name
        lines.append(stmt + ";")
    lines.append("eq: %s = 0;" % render(problem.equation.body))
    for name, Q in sorted(problem.fields.items()):
        lines.append(
            "field %s: %s, %s, %s;" % (name, render(Q.xi1), render(Q.xi2), render(Q.eta))
        )
    for name, fam in sorted(problem.families.items()):
        lines.append(
            "family %s: %s param %s inverse %s;"
            % (name, render(fam.f), fam.kappa.name, render(fam.Phi))
        )
    for name, a in sorted(problem.ansatzes.items()):
        lines.append("ansatz %s: %s omega %s;" % (name, render(a.f), render(a.omega)))
    return "\n".join(lines) + "\n"
