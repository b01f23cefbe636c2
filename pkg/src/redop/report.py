"""Analysis reports: verdict records, grammar-notation rendering, JSON I/O.

Statuses: proved (symbolic certificate), sampled (numeric evidence only),
failed (counterexample or disproof), undecidable (no certificate either
way where one was required).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import sympy as sp
from sympy.printing.str import StrPrinter

from .core import TriBool, fn_symbol_info

PROVED = "proved"
SAMPLED = "sampled"
FAILED = "failed"
UNDECIDABLE = "undecidable"


class GrammarPrinter(StrPrinter):
    """Prints expressions in the problem-file notation: ^ powers, ln.

    With call_form=True undifferentiated unknown functions print as calls
    at their formal arguments (F(u), H(t, x, u, u_x, u_xx)) so the output
    parses back as problem-file text; phi stays bare since the grammar
    reserves it.
    """

    _default_settings = dict(StrPrinter._default_settings, call_form=False)

    def _print_log(self, expr):
        return "ln(%s)" % self._print(expr.args[0])

    def _print_Symbol(self, expr):
        if self._settings["call_form"]:
            info = fn_symbol_info(expr)
            if info is not None and not any(info[1]) and info[0].name != "phi":
                fn = info[0]
                return "%s(%s)" % (fn.name, ", ".join(a.name for a in fn.args))
        return super()._print_Symbol(expr)


def render(e, call_form=False):
    printer = GrammarPrinter({"call_form": call_form})
    return printer.doprint(sp.sympify(e)).replace("**", "^")


def zero_claim_status(verdict):
    """Status for a claim of the form 'expression vanishes'."""
    if verdict is TriBool.PROVEN_ZERO:
        return PROVED
    if verdict is TriBool.SAMPLED_ZERO:
        return SAMPLED
    return FAILED


def nonzero_claim_status(verdict):
    """Status for a claim of the form 'expression does not vanish'.

    All-zero samples neither certify nor refute such a claim, so they map
    to undecidable rather than failed.
    """
    if verdict is TriBool.PROVEN_NONZERO:
        return PROVED
    if verdict is TriBool.PROBABLY_NONZERO:
        return SAMPLED
    if verdict is TriBool.PROVEN_ZERO:
        return FAILED
    return UNDECIDABLE


@dataclass
class Verdict:
    claim: str
    status: str
    detail: str = ""

    def to_dict(self):
        return {"claim": self.claim, "status": self.status, "detail": self.detail}

    @classmethod
    def from_dict(cls, d):
        return cls(claim=d["claim"], status=d["status"], detail=d.get("detail", ""))


@dataclass
class CommandResult:
    command: str
    inputs: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    expressions: dict = field(default_factory=dict)
    timing_ms: float = 0.0

    def to_dict(self):
        return {
            "command": self.command,
            "inputs": dict(self.inputs),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "expressions": dict(self.expressions),
            "timing_ms": self.timing_ms,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            command=d["command"],
            inputs=dict(d.get("inputs", {})),
            verdicts=[Verdict.from_dict(v) for v in d.get("verdicts", [])],
            expressions=dict(d.get("expressions", {})),
            timing_ms=d.get("timing_ms", 0.0),
        )


@dataclass
class AnalysisReport:
    problem: str | None = None
    results: list = field(default_factory=list)
    version: str = "1"

    def to_dict(self):
        d = {"results": [r.to_dict() for r in self.results], "version": self.version}
        if self.problem is not None:
            d["problem"] = self.problem
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            problem=d.get("problem"),
            results=[CommandResult.from_dict(r) for r in d.get("results", [])],
            version=d.get("version", "1"),
        )

    @property
    def worst_status(self):
        ranking = {PROVED: 0, SAMPLED: 1, UNDECIDABLE: 2, FAILED: 3}
        worst = PROVED
        for r in self.results:
            for v in r.verdicts:
                if ranking[v.status] > ranking[worst]:
                    worst = v.status
        return worst


def emit_report(report, format="text"):
    if format == "json":
        return json.dumps(report.to_dict(), sort_keys=True)
    if format != "text":
        raise ValueError("format must be 'text' or 'json'")
    lines = []
    if report.problem is not None:
        lines.append("problem: %s" % report.problem)
    for r in report.results:
        inputs = " ".join("%s=%s" % (k, v) for k, v in sorted(r.inputs.items()))
        header = "== %s" % r.command
        if inputs:
            header += " (%s)" % inputs
        header += "  [%.1f ms]" % r.timing_ms
        lines.append(header)
        for name, text in r.expressions.items():
            lines.append("  %s: %s" % (name, text))
        for v in r.verdicts:
            line = "  [%s] %s" % (v.status, v.claim)
            if v.detail:
                line += "  (%s)" % v.detail
            lines.append(line)
    return "\n".join(lines)


def parse_report(text):
    """Inverse of emit_report(..., 'json')."""
    return AnalysisReport.from_dict(json.loads(text))
