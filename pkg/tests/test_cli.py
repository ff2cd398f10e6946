import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from instances import BISTABLE, P1, P1_EQ
from lgin.cli import main
from lgin.dynamics import fold_search
from lgin.equilibria import find_equilibria
from lgin.model import ModelParams
from lgin.report import THEOREM_CHECKS, AnalysisReport, CheckResult, analyze


def flags(p: ModelParams) -> list[str]:
    out = []
    for k, v in p.as_dict().items():
        out += [f"--{k}", repr(v)]
    return out


def run(capsys, argv):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def read_csv(text):
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


class TestAnalyze:
    def test_p1(self, capsys):
        code, out, _ = run(capsys, ["analyze", *flags(P1)])
        d = json.loads(out)
        assert code == 0
        assert d["count"] == 1 and d["labels"] == ["LAS"]
        assert d["uniqueness"]["condB"] is True
        assert d["gas_certified"] is True
        assert [c["name"] for c in d["theorem_checks"]] == list(THEOREM_CHECKS)
        assert all(c["passed"] for c in d["theorem_checks"])

    def test_bistable(self, capsys):
        code, out, _ = run(capsys, ["analyze", *flags(BISTABLE)])
        d = json.loads(out)
        assert code == 0
        assert d["count"] == 3 and d["labels"] == ["LAS", "Saddle", "LAS"]
        assert d["gas_certified"] is False

    def test_fold(self, capsys):
        f = fold_search(BISTABLE, "c1", 0.3, 3.0)
        code, out, _ = run(capsys, ["analyze", "--params", json.dumps(f.as_dict())])
        d = json.loads(out)
        assert code == 0 and d["count"] == 2

    def test_zero_parameter(self, capsys):
        code, _, err = run(capsys, ["analyze", "--b1", "0", "--b2", "3", "--c1", "1",
                                    "--c2", "1", "--h1", "0.5", "--h2", "0.5"])
        assert code == 1 and "b1 must be > 0" in err

    def test_malformed_json(self, capsys):
        code, _, err = run(capsys, ["analyze", "--params", "{oops"])
        assert code == 1 and "JSON" in err

    def test_missing_flag(self, capsys):
        code, _, err = run(capsys, ["analyze", "--b1", "3"])
        assert code == 1 and "--h2" in err

    def test_raw_flags(self, capsys):
        code, out, _ = run(capsys, ["analyze", "--raw", "--b1", "3", "--b2", "3", "--c11", "2",
                                    "--c12", "8", "--c21", "6", "--c22", "4", "--H1", "1", "--H2", "0.5"])
        assert code == 0
        assert json.loads(out)["params"] == dict(b1=3, b2=3, c1=2, c2=3, h1=2, h2=2)

    def test_params_file(self, capsys, tmp_path):
        f = tmp_path / "p.json"
        f.write_text(json.dumps(P1.as_dict()))
        out_file = tmp_path / "r.json"
        code, out, _ = run(capsys, ["analyze", "--params", f"@{f}", "--out", str(out_file)])
        assert code == 0 and out == ""
        assert json.loads(out_file.read_text())["count"] == 1

    def test_failed_check_exits_2(self, capsys, monkeypatch):
        import lgin.cli as cli_mod

        real = cli_mod.analyze

        def broken(p, tol):
            rep = real(p, tol=tol)
            checks = (CheckResult("pattern_theorem", False, "forced"),) + rep.theorem_checks[1:]
            return AnalysisReport(rep.params, rep.equilibria, rep.uniqueness, rep.gas_certified, checks)

        monkeypatch.setattr(cli_mod, "analyze", broken)
        code, out, _ = run(capsys, ["analyze", *flags(P1)])
        assert code == 2 and json.loads(out)["all_passed"] is False

    def test_env_tolerance(self, capsys, monkeypatch):
        monkeypatch.setenv("LGIN_DEFAULT_TOL", "1e-7")
        assert run(capsys, ["analyze", *flags(P1)])[0] == 0
        monkeypatch.setenv("LGIN_DEFAULT_TOL", "nope")
        code, _, err = run(capsys, ["analyze", *flags(P1)])
        assert code == 1 and "LGIN_DEFAULT_TOL" in err


class TestReportRoundTrip:
    @pytest.mark.parametrize("p", [P1, BISTABLE, ModelParams(0.3, 40, 0.02, 7, 3, 0.05)])
    def test_round_trip(self, p):
        rep = analyze(p)
        d = rep.to_dict()
        again = AnalysisReport.from_dict(json.loads(json.dumps(d)))
        assert again == rep
        assert again.to_dict() == d


class TestSimulate:
    def test_p1(self, capsys):
        code, out, _ = run(capsys, ["simulate", *flags(P1), "--x0", "0", "--y0", "0", "--steps", "100"])
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["n", "x", "y"] and len(rows) == 101
        assert float(rows[-1][1]) == pytest.approx(P1_EQ, abs=1e-9)
        assert float(rows[-1][2]) == pytest.approx(P1_EQ, abs=1e-9)
        assert "# limit=" in out and "# monotone_onset=" in out
        assert "\r" not in out

    def test_fixed_start(self, capsys):
        x = repr(P1_EQ)
        code, out, _ = run(capsys, ["simulate", *flags(P1), "--x0", x, "--y0", x, "--steps", "20"])
        _, rows = read_csv(out)
        vals = np.array([[float(r[1]), float(r[2])] for r in rows])
        assert np.all(np.abs(vals - P1_EQ) <= 1e-12)

    def test_17_digit_floats(self, capsys):
        _, out, _ = run(capsys, ["simulate", *flags(P1), "--x0", "0.1", "--y0", "0.2", "--steps", "3"])
        _, rows = read_csv(out)
        assert float(rows[0][1]) == 0.1
        assert rows[1][1] == format(float(rows[1][1]), ".17g")

    def test_negative_start(self, capsys):
        code, _, err = run(capsys, ["simulate", *flags(P1), "--x0", "-1", "--y0", "0"])
        assert code == 1 and "outside" in err


class TestBasin:
    def test_p1(self, capsys):
        code, out, _ = run(capsys, ["basin", *flags(P1), "--bounds", "0,5,0,5", "--nx", "50", "--ny", "50"])
        header, rows = read_csv(out)
        assert code == 0 and header == ["x", "y", "label"] and len(rows) == 2500
        assert {r[2] for r in rows} == {"1"}

    def test_separatrix(self, capsys, tmp_path):
        sep = tmp_path / "sep.csv"
        code, _, _ = run(capsys, ["basin", *flags(BISTABLE), "--nx", "10", "--ny", "10",
                                  "--separatrix", str(sep), "--sep-nx", "31"])
        assert code == 0
        header, rows = read_csv(sep.read_text())
        assert header == ["x", "ystar"]
        ys = [float(r[1]) for r in rows]
        assert len(ys) > 20 and all(b > a for a, b in zip(ys, ys[1:]))

    def test_separatrix_outside_regime(self, capsys, tmp_path):
        code, _, err = run(capsys, ["basin", *flags(P1), "--separatrix", str(tmp_path / "s.csv")])
        assert code == 1 and "bistable" in err

    def test_fold_q2(self, capsys):
        f = fold_search(BISTABLE, "c1", 0.3, 3.0)
        (x1, y1), _ = find_equilibria(f).points()
        code, out, _ = run(capsys, ["basin", *flags(f), "--bounds", "0,7.5,0,7.5", "--nx", "16", "--ny", "16"])
        _, rows = read_csv(out)
        q2 = [r for r in rows if float(r[0]) <= x1 and float(r[1]) >= y1]
        assert q2 and all(r[2] == "1" for r in q2)

    @pytest.mark.parametrize("extra", [["--bounds", "0,1,0"], ["--bounds", "1,0,0,1"], ["--nx", "1"]])
    def test_bad_input(self, capsys, extra):
        assert run(capsys, ["basin", *flags(P1), *extra])[0] == 1


class TestScan:
    def test_header_and_rows(self, capsys):
        code, out, _ = run(capsys, ["scan", "--draws", "40", "--seed", "7"])
        header, rows = read_csv(out)
        assert code == 0
        assert header == "b1,b2,c1,c2,h1,h2,count,labels,condA,condB,gas".split(",")
        assert len(rows) == 40
        for r in rows:
            assert r[6] in {"1", "2", "3"}
            if "true" in (r[8], r[9]):
                assert r[6] == "1"
            if r[6] == "3":
                assert r[7] == "LAS;Saddle;LAS"

    def test_deterministic(self, capsys):
        a = run(capsys, ["scan", "--draws", "1", "--seed", "7"])[1]
        b = run(capsys, ["scan", "--draws", "1", "--seed", "7"])[1]
        assert a == b

    def test_jobs_independent(self, capsys):
        a = run(capsys, ["scan", "--draws", "30", "--seed", "3", "--jobs", "1"])[1]
        b = run(capsys, ["scan", "--draws", "30", "--seed", "3", "--jobs", "3"])[1]
        assert a == b

    def test_grid(self, capsys):
        code, out, _ = run(capsys, ["scan", "--grid", "b1=2:8:3;c1=2:6:2", "--b2", "6", "--c2", "3",
                                    "--h1", "0.01", "--h2", "0.01"])
        _, rows = read_csv(out)
        assert code == 0 and len(rows) == 6
        assert sorted({r[6] for r in rows}) == ["1", "3"]

    @pytest.mark.parametrize("argv", [
        ["scan"], ["scan", "--draws", "0"], ["scan", "--draws", "2", "--jobs", "0"],
        ["scan", "--grid", "zz=1:2:3", "--b1", "1"], ["scan", "--grid", "b1=1:2"],
        ["scan", "--draws", "abc"],
    ])
    def test_bad_input(self, capsys, argv):
        try:
            code = main(argv)
        except SystemExit as exc:
            code = exc.code
        capsys.readouterr()
        assert code == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "lgin", "analyze", *flags(P1)], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["count"] == 1
    r = subprocess.run([sys.executable, "-m", "lgin", "nonsense"], capture_output=True, text=True)
    assert r.returncode == 1
