import subprocess
import sys

import pytest

from gbach.checker import Trace, parse_report, replay
from gbach.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_UNKNOWN, main
from gbach.parser import parse_program
from gbach.rushhour import CASES, generate_rush_hour, rush_hour_source
from gbach.syntax import format_program


@pytest.fixture
def case2(tmp_path):
    p = tmp_path / "case2.gbach"
    p.write_text(rush_hour_source(CASES[2]))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestParse:
    def test_clean(self, capsys, case2):
        code, out, _ = run(capsys, "parse", case2)
        assert code == EXIT_OK and out.strip() == "0 errors"

    def test_diagnostics(self, capsys, tmp_path):
        p = tmp_path / "bad.gbach"
        p.write_text("proc P() = P().\nrun Q().\n")
        code, out, _ = run(capsys, "parse", p)
        assert code == EXIT_FAIL
        assert "UnguardedProcedure" in out and "UnresolvedIdentifier" in out
        assert out.strip().endswith("2 errors")

    def test_print_round_trips(self, capsys, truck_source, tmp_path):
        p = tmp_path / "t.gbach"
        p.write_text(truck_source)
        code, out, _ = run(capsys, "parse", p, "--print")
        text = out.rsplit("0 errors", 1)[0]
        assert code == EXIT_OK and parse_program(text).structure() == parse_program(truck_source).structure()

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "parse", tmp_path / "nope.gbach")
        assert code == EXIT_IO and "error" in err


class TestCheck:
    def test_holds_with_witness(self, capsys, case2, tmp_path):
        w = tmp_path / "w.trace"
        code, out, _ = run(capsys, "check", case2, "--witness", w)
        fields = parse_report(out)
        assert code == EXIT_OK and fields["verdict"] == "holds" and fields["bound"] == "complete"
        trace = Trace.from_text(w.read_text())
        assert len(trace) == fields["witness_len"]
        assert replay(trace, parse_program(case2.read_bytes()))

    def test_refuted(self, capsys, case2):
        code, out, _ = run(capsys, "check", case2, "-f", "Reach(#out = 2)")
        assert code == EXIT_FAIL and parse_report(out)["witness_len"] == -1

    def test_unknown_under_budget(self, capsys, case2):
        code, out, _ = run(capsys, "check", case2, "--max-states", "5")
        assert code == EXIT_UNKNOWN and parse_report(out)["bound"] == "max-states"

    def test_show_trace(self, capsys, case2):
        code, out, _ = run(capsys, "check", case2, "--show-trace")
        assert code == EXIT_OK and "TRACE v1" in out

    def test_named_formula(self, capsys, truck_source, tmp_path):
        p = tmp_path / "t.gbach"
        p.write_text(truck_source)
        code, _, _ = run(capsys, "check", p, "-f", "f")
        assert code in (EXIT_OK, EXIT_FAIL)
        code, _, err = run(capsys, "check", p)
        assert code == EXIT_FAIL and "exactly one" in err

    def test_bad_limit(self, capsys, case2):
        with pytest.raises(SystemExit):
            main(["check", str(case2), "--max-states", "0"])

    def test_workers_same_report(self, capsys, case2):
        _, one, _ = run(capsys, "check", case2)
        _, four, _ = run(capsys, "check", case2, "--workers", "4")
        drop = lambda s: {k: v for k, v in parse_report(s).items() if k != "wall_ms"}
        assert drop(one) == drop(four)


class TestRun:
    def test_seeded(self, capsys, case2):
        a = run(capsys, "run", case2, "--seed", "3", "--max-steps", "20")
        b = run(capsys, "run", case2, "--seed", "3", "--max-steps", "20")
        assert a == b and a[0] == EXIT_OK
        assert a[1].startswith("TRACE v1") and "# " in a[1]


class TestTransform:
    @pytest.mark.parametrize("case", [1, 4])
    def test_matches_generator(self, capsys, tmp_path, case):
        src = tmp_path / "plain.gbach"
        src.write_text(rush_hour_source(CASES[case]))
        out_path = tmp_path / "gl.gbach"
        code, _, err = run(capsys, "transform", src, "-F", "#out = 1", "-o", out_path)
        assert code == EXIT_OK and "P1.2 transformed" in err
        assert format_program(parse_program(out_path.read_text())) == format_program(generate_rush_hour(case, "GL"))

    def test_unchanged_echoes_source(self, capsys, tmp_path):
        p = tmp_path / "x.gbach"
        p.write_text("// keep me\nrun ask(a); get(b).\n")
        code, out, _ = run(capsys, "transform", p, "-F", "#out = 1")
        assert code == EXIT_OK and out == p.read_text()

    def test_dry_run_and_report(self, capsys, tmp_path):
        p = tmp_path / "x.gbach"
        p.write_text("run get(a); tell(out).\n")
        rep = tmp_path / "r.txt"
        code, out, _ = run(capsys, "transform", p, "-F", "#out = 1", "--dry-run", "--report", rep)
        assert code == EXIT_OK and "P1.1 skipped" in out and rep.read_text() == out

    def test_force(self, capsys, tmp_path):
        p = tmp_path / "x.gbach"
        p.write_text("run get(a); tell(out).\n")
        code, out, _ = run(capsys, "transform", p, "-F", "#out = 1", "--force")
        assert code == EXIT_OK and "[get(a) -> tell(out)]" in out

    def test_idempotent(self, capsys, tmp_path, case2):
        once = tmp_path / "once.gbach"
        run(capsys, "transform", case2, "-F", "#out = 1", "-o", once)
        code, out, _ = run(capsys, "transform", once, "-F", "#out = 1")
        assert code == EXIT_OK and out == once.read_text()


class TestBench:
    def test_small_matrix(self, capsys, tmp_path):
        out_file = tmp_path / "bench.txt"
        code, out, _ = run(capsys, "bench", "--cases", "1", "--repeats", "1",
                           "--export-traces", tmp_path / "traces", "-o", out_file)
        assert code == EXIT_OK and "[case 1 GL]" in out and out_file.read_text() == out
        assert sorted(p.name for p in (tmp_path / "traces").iterdir()) == ["case1-GL.trace", "case1-NoGL.trace"]

    def test_budget_is_not_failure(self, capsys):
        code, out, _ = run(capsys, "bench", "--cases", "2", "--variants", "NoGL", "--repeats", "1",
                           "--max-states", "10")
        assert code == EXIT_OK and "unknown" in out


def test_module_entry_point(tmp_path):
    p = tmp_path / "x.gbach"
    p.write_text("run tell(a).\n")
    res = subprocess.run([sys.executable, "-m", "gbach", "parse", str(p)], capture_output=True, text=True)
    assert res.returncode == 0 and "0 errors" in res.stdout
