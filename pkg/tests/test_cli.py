"""Command line tests, run in process through main(argv)."""

from __future__ import annotations

import io
import re
import sys
from itertools import product

import pytest

from somon.cli import main

SR3_TEXT = "aps: s, r, d\ns;r;r\ns;d;r\ns;s;r\ns;s;d\ns;s;s\n"

CK_TEXT = (
    "forall pi in sys. (F (r[pi] & X r[pi])) ->"
    " F fix(K, true => pi in K,"
    " forall p1 in K. forall p2 in sys."
    " H (s[p1] <-> s[p2]) | H (r[p1] <-> r[p2]) => p2 in K)."
    " forall q in K. F r[q]"
)

ARRIVAL_RE = re.compile(
    r"k=\d+ verdict=(sat|unsat|inconclusive)"
    r" check_calls=\d+ sat_hits=\d+ fix_seeds=\d+ wit_hits=\d+$"
)


@pytest.fixture
def sr3(tmp_path):
    path = tmp_path / "runs.tr"
    path.write_text(SR3_TEXT)
    return str(path)


class TestMonitor:
    def test_stream_stops_at_the_verdict(self, sr3, capsys):
        code = main(["monitor", "--formula", CK_TEXT, "--traces", sr3])
        lines = capsys.readouterr().out.strip().splitlines()
        assert code == 1
        assert len(lines) == 4  # the fifth run is never fed
        assert all(ARRIVAL_RE.match(line) for line in lines)
        assert lines[0] == (
            "k=1 verdict=inconclusive check_calls=40"
            " sat_hits=0 fix_seeds=0 wit_hits=0"
        )
        assert lines[3].startswith("k=4 verdict=unsat check_calls=527")

    def test_sat_exit_code(self, sr3, capsys):
        code = main(["monitor", "--formula", "exists p in sys. F d[p]",
                     "--traces", sr3])
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert out[-1].startswith("k=2 verdict=sat")

    @pytest.mark.filterwarnings("ignore::somon.monitor.MonitorWarning")
    def test_inconclusive_exit_code(self, sr3, capsys):
        code = main(["monitor", "--formula", "exists X. forall p in X. d[p]",
                     "--traces", sr3])
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 2
        assert len(out) == 5
        assert all("verdict=inconclusive" in line for line in out)

    def test_csv_output(self, sr3, tmp_path, capsys):
        out_csv = tmp_path / "rows.csv"
        code = main(["monitor", "--formula", CK_TEXT, "--traces", sr3,
                     "--csv", str(out_csv), "--deterministic"])
        capsys.readouterr()
        assert code == 1
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == (
            "row,arrival_index,verdict,check_calls,step_checks,"
            "sat_hits,fix_seeds,wit_hits,elapsed_ms"
        )
        assert len(lines) == 5
        assert all(line.endswith(",0") for line in lines[1:])

    def test_formula_from_file(self, sr3, tmp_path, capsys):
        claim = tmp_path / "claim.hl2"
        claim.write_text(CK_TEXT + "\n")
        code = main(["monitor", "--formula", str(claim), "--traces", sr3])
        capsys.readouterr()
        assert code == 1


class TestCheck:
    def test_true_and_false(self, sr3, capsys):
        assert main(["check", "--formula", "exists p in sys. F d[p]",
                     "--traces", sr3]) == 0
        assert capsys.readouterr().out.strip() == "true"
        assert main(["check", "--formula", "forall p in sys. F d[p]",
                     "--traces", sr3]) == 0
        assert capsys.readouterr().out.strip() == "false"

    def test_oracle_cross_check(self, sr3, capsys):
        code = main(["check", "--formula", CK_TEXT, "--traces", sr3,
                     "--oracle"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "false"

    def test_traces_from_stdin(self, capsys, monkeypatch):
        monkeypatch.setattr(sys, "stdin", io.StringIO("aps: a,b\na;b\n;b\n"))
        code = main(["check", "--formula", "exists p in sys. a[p]",
                     "--traces", "-"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "true"

    def test_pad_policy(self, tmp_path, capsys):
        path = tmp_path / "uneven.tr"
        path.write_text("a;b;a\na\n")
        code = main(["check", "--formula", "exists p in sys. G !b[p]",
                     "--aps", "a,b", "--traces", str(path), "--pad"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "true"


class TestUnfold:
    def test_worked_rewrite(self, capsys):
        code = main(["unfold", "--formula", "exists X. forall p in X. a[p]",
                     "--aps", "a,b,c", "--bound", "2"])
        assert code == 0
        assert capsys.readouterr().out.strip() == (
            "exists x1 in sys. exists x2 in sys. a[x1] & a[x2]"
        )


class TestAnalyze:
    def test_marks_table(self, capsys):
        code = main(["analyze", "--formula", "forall p in sys. a[p]",
                     "--aps", "a,b,c"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("{-}")
        assert "forall p in sys" in lines[0]
        assert lines[1].startswith("{+,-}")
        assert "a[p]" in lines[1]


class TestErrors:
    def test_syntax_error(self, sr3, capsys):
        code = main(["monitor", "--formula", "exists p in sys. a[p",
                     "--traces", sr3])
        err = capsys.readouterr().err
        assert code == 3
        assert err.startswith("error: syntax:")
        assert re.search(r"line \d+", err)

    def test_missing_trace_file(self, capsys):
        code = main(["check", "--formula", "exists p in sys. a[p]",
                     "--traces", "/nonexistent/file.tr"])
        assert code == 3
        assert capsys.readouterr().err.startswith("error: io:")

    def test_unknown_optimization(self, sr3, capsys):
        code = main(["check", "--formula", "exists p in sys. a[p]",
                     "--traces", sr3, "--disable", "speed"])
        assert code == 3
        assert capsys.readouterr().err.startswith("error: usage:")

    def test_unfolding_a_fixpoint(self, capsys):
        text = (
            "fix(K, forall p0 in sys. a[p0] => p0 in K,"
            " forall p1 in K. forall p2 in sys. a[p1] => p2 in K)."
            " exists q in K. true"
        )
        code = main(["unfold", "--formula", text, "--aps", "a", "--bound", "2"])
        assert code == 3
        assert capsys.readouterr().err.startswith("error: unfold:")

    def test_subset_bound(self, tmp_path, capsys):
        lines = []
        for steps in product("01", repeat=5):
            lines.append(";".join("a" if bit == "1" else "" for bit in steps))
            if len(lines) == 21:
                break
        path = tmp_path / "many.tr"
        path.write_text("aps: a\n" + "\n".join(lines) + "\n")
        code = main(["check", "--formula", "exists X. exists p in X. a[p]",
                     "--traces", str(path)])
        assert code == 3
        assert capsys.readouterr().err.startswith("error: subset-bound:")

    def test_missing_required_argument(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["monitor", "--traces", "whatever"])
        assert exc.value.code == 3
        assert capsys.readouterr().err.startswith("error: usage:")

    def test_bad_trace_line(self, tmp_path, capsys):
        path = tmp_path / "bad.tr"
        path.write_text("a;b\nq^;b\n")
        code = main(["check", "--formula", "exists p in sys. a[p]",
                     "--aps", "a,b", "--traces", str(path)])
        assert code == 3
        err = capsys.readouterr().err
        assert err.startswith("error: trace:")
        assert "line 2" in err


class TestVersion:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.startswith("somon ")


class TestBench:
    def test_muddy_run_writes_csv_and_figure(self, tmp_path, capsys):
        out_csv = tmp_path / "muddy.csv"
        out_png = tmp_path / "muddy.png"
        code = main(["bench", "muddy", "--children", "2", "--bound", "1",
                     "--csv", str(out_csv), "--fig", str(out_png),
                     "--deterministic"])
        out = capsys.readouterr().out
        assert code == 0
        assert "summary" in out and "verdict=unsat" in out
        header = out_csv.read_text().splitlines()[0]
        assert header.startswith(
            "row,arrival_index,verdict,check_calls,step_checks,"
            "sat_hits,fix_seeds,wit_hits,elapsed_ms"
        )
        assert "bound" in header and "children" in header
        assert out_png.read_bytes()[:4] == b"\x89PNG"

    def test_sender_receiver_summary(self, capsys):
        code = main(["bench", "sender-receiver", "--length", "3"])
        out = capsys.readouterr().out
        assert code == 0
        assert re.search(r"summary length=3 verdict=unsat arrivals=\d+", out)

    @pytest.mark.filterwarnings("ignore::somon.monitor.MonitorWarning")
    def test_grouping_prints_one_summary_per_config(self, tmp_path, capsys):
        out_png = tmp_path / "configs.png"
        code = main(["bench", "grouping", "--traces", "3", "--seed", "1",
                     "--fig", str(out_png)])
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        summaries = [line for line in out if line.startswith("summary")]
        assert len(summaries) == 4
        for name in ("all-off", "fix-only", "sat-only", "all-on"):
            assert any(f"config={name}" in line for line in summaries)
        assert out_png.read_bytes()[:4] == b"\x89PNG"

    def test_planning_summary_reports_reachability(self, tmp_path, capsys):
        out_png = tmp_path / "plan.png"
        code = main(["bench", "planning", "--nodes", "5", "--edge-prob",
                     "0.4", "--mode", "tins", "--seed", "2", "--walks", "6",
                     "--fig", str(out_png)])
        out = capsys.readouterr().out
        assert code == 0
        assert "reachable=" in out and "mode=tins" in out
        assert out_png.exists()
