"""Exit codes, report formats, and flag handling of the console entry point."""

import json

import pytest

from redop.cli import main
from redop.report import AnalysisReport, emit_report, parse_report

from helpers import corpus_text


@pytest.fixture
def prob(tmp_path):
    """Write a corpus problem to disk and return its path as a string."""

    def write(stem):
        p = tmp_path / ("%s.prob" % stem)
        p.write_text(corpus_text(stem))
        return str(p)

    return write


class TestExitCodes:
    def test_success_is_zero(self, prob, capsys):
        assert main(["detsys", prob("heat")]) == 0
        out = capsys.readouterr().out
        assert "problem: heat" in out
        assert "== detsys" in out
        assert "[proved]" in out

    def test_failed_verification_is_one(self, prob, capsys):
        assert main(["verify", prob("heat"), "--field", "badfield"]) == 1
        out = capsys.readouterr().out
        assert "[failed]" in out

    def test_missing_file_is_two(self, tmp_path, capsys):
        assert main(["analyze", str(tmp_path / "nope.prob")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_parse_error_is_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.prob"
        bad.write_text("vars t x;\ndep u;\neq: u_t = v_xx;\n")
        assert main(["coorder", str(bad)]) == 2
        assert "undeclared identifier 'v'" in capsys.readouterr().err

    def test_missing_required_flag_is_two(self, prob, capsys):
        assert main(["verify", prob("heat")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_unknown_field_name_is_two(self, prob, capsys):
        assert main(["verify", prob("heat"), "--field", "ghost"]) == 2
        assert "ghost" in capsys.readouterr().err

    def test_undecidable_is_three(self, prob, capsys):
        assert main(["analyze", prob("ttt")]) == 3
        out = capsys.readouterr().out
        assert "[undecidable]" in out


class TestJsonOutput:
    def test_single_line_round_trip(self, prob, capsys):
        assert main(["coorder", prob("heat"), "--field", "expo", "--json"]) == 0
        out = capsys.readouterr().out.strip()
        assert "\n" not in out
        rep = parse_report(out)
        assert rep.problem == "heat"
        assert rep.results[0].command == "coorder"
        assert emit_report(rep, "json") == out

    def test_empty_report_serialization(self):
        rep = AnalysisReport(problem=None, results=[])
        assert emit_report(rep, "json") == '{"results": [], "version": "1"}'
        assert parse_report(emit_report(rep, "json")) == rep

    def test_json_keys_are_sorted_and_stable(self, prob, capsys):
        assert main(["verify", prob("heat"), "--field", "expo", "--json"]) == 0
        out = capsys.readouterr().out.strip()
        d = json.loads(out)
        assert list(d) == sorted(d)
        assert d["version"] == "1"
        for r in d["results"]:
            for v in r["verdicts"]:
                assert v["status"] in ("proved", "sampled", "failed", "undecidable")

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            emit_report(AnalysisReport(), "yaml")


class TestFlags:
    def test_samples_and_seed_accepted(self, prob, capsys):
        code = main(
            ["bijection", prob("heat"), "--family", "grow",
             "--samples", "3", "--seed", "7"]
        )
        assert code == 0
        assert "[proved]" in capsys.readouterr().out

    def test_xi_selects_the_reduced_set(self, prob, capsys):
        assert main(["detsys", prob("transport"), "--xi", "u"]) == 0
        out = capsys.readouterr().out
        assert "xi=u" in out

    def test_reduce_needs_field_and_ansatz(self, prob, capsys):
        assert main(["reduce", prob("heat"), "--field", "linear"]) == 2
        capsys.readouterr()
        code = main(
            ["reduce", prob("heat"), "--field", "linear", "--ansatz", "quad"]
        )
        assert code == 0
        assert "[proved]" in capsys.readouterr().out

    def test_bad_command_exits_argparse(self, prob):
        with pytest.raises(SystemExit) as ei:
            main(["frobnicate", prob("heat")])
        assert ei.value.code == 2
