import csv
import io
import json
import math
import subprocess
import sys

import pytest

from mqcbound import cli
from mqcbound.bounds import closed_form_qN
from mqcbound.verification import CheckRecord, VerifyReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestBounds:
    def test_q1_row(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "7", "--p", "0.3", "--q", "1")
        assert code == 0
        assert out.splitlines()[0] == "N,q,p,rank,lower,upper,log_lower,log_upper"
        (row,) = rows(out)
        assert (row["N"], row["q"], row["rank"]) == ("7", "1", "128")
        assert float(row["lower"]) == pytest.approx(0.3, abs=1e-12)
        assert float(row["upper"]) == pytest.approx(0.6, abs=1e-12)

    def test_sweep_row_count_and_order(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "500", "--p", "0.3,0.6", "--q-range", "1:500:1", "--format", "csv")
        assert code == 0
        table = rows(out)
        assert len(table) == 1000
        keys = [(int(r["N"]), float(r["p"]), int(r["q"])) for r in table]
        assert keys == sorted(keys)

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(capsys, "bounds", "--n", "5", "--p", "0.37", "--q", "3")
        value = rows(out)[0]["lower"]
        assert len(value.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) >= 15

    @pytest.mark.parametrize("argv", [
        ["bounds", "--n", "4", "--p", "1.5", "--q", "1"],
        ["bounds", "--n", "4", "--p", "0.5", "--q", "5"],
        ["bounds", "--n", "4", "--p-range", "0.5:0.1:0.1"],
        ["bounds", "--n", "4", "--p-range", "0.1:0.5:0"],
        ["bounds", "--n", "0", "--p", "0.5"],
        ["bounds", "--p", "0.5"],
        ["nonsense"],
    ])
    def test_usage_errors(self, capsys, argv):
        try:
            code = cli.main(argv)
        except SystemExit as exc:
            code = exc.code
        assert code == 1
        assert capsys.readouterr().err

    def test_json_structure(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "70", "--p", "0.5", "--q", "1,2", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["meta"]["seed"] == 0 and doc["meta"]["tool"] == "mqcbound"
        assert list(doc["rows"][0]) == ["N", "q", "p", "rank", "lower", "upper", "log_lower", "log_upper"]
        assert doc["rows"][0]["rank"] == str(2**70)  # wider than a double mantissa

    def test_out_file_is_deterministic(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"]
        for path, threads in zip(paths, ("1", "1", "2")):
            assert cli.main(["bounds", "--n", "20,30", "--p-range", "0.1:0.9:0.4", "--out", str(path),
                             "--threads", threads]) == 0
        assert capsys.readouterr().out == ""
        data = [p.read_bytes() for p in paths]
        assert data[0] == data[1] == data[2]
        assert len(rows(data[0].decode())) == 3 * 50


class TestOtherCommands:
    def test_transition(self, capsys):
        code, out, _ = run(capsys, "transition", "--n", "200,300", "--p-range", "0.2:0.8:0.3")
        assert code == 0
        table = rows(out)
        assert out.splitlines()[0] == "N,p,q_half_lower,q_half_upper,width,q_c_model,Q_c_cap"
        assert len(table) == 6
        for r in table:
            assert float(r["q_c_model"]) == pytest.approx(int(r["N"]) * float(r["p"]))

    def test_transition_without_decay(self, capsys):
        code, out, _ = run(capsys, "transition", "--n", "2", "--p", "0.999")
        assert code == 0
        assert rows(out)[0]["width"] == ""

    def test_figure2(self, capsys):
        code, out, _ = run(capsys, "figure2", "--p", "0.99", "--n-range", "2:400:2")
        assert code == 0
        table = rows(out)
        assert list(table[0])[:5] == ["N", "b_qN", "B_qN", "b_qNm1", "B_qNm1"]
        assert float(table[0]["b_qN"]) == pytest.approx(float(closed_form_qN(2, 0.99)), rel=1e-12)
        ns = [int(r["N"]) for r in table]
        logs = [math.log(float(r["b_qN"])) for r in table]
        mean_n, mean_l = sum(ns) / len(ns), sum(logs) / len(logs)
        slope = sum((n - mean_n) * (l - mean_l) for n, l in zip(ns, logs)) / sum((n - mean_n) ** 2 for n in ns)
        assert slope < 0
        first = next(n for n, l in zip(ns, logs) if l < math.log(0.99) - 1)
        assert 100 <= first <= 400

    def test_profile(self, capsys):
        code, out, _ = run(capsys, "profile", "--n", "500", "--p", "0.6", "--q-range", "0:400:100")
        assert code == 0
        table = rows(out)
        assert [int(r["q"]) for r in table] == [0, 100, 200, 300, 400]
        assert float(table[3]["relative"]) == pytest.approx(0.5, rel=0.05)
        assert float(table[0]["K_obs"]) == pytest.approx(334.641, abs=1e-3)

    def test_rank(self, capsys):
        code, out, _ = run(capsys, "rank", "--n", "4")
        assert code == 0
        table = rows(out)
        assert [(r["q"], r["rank"], r["half_rank"]) for r in table] == [
            ("1", "16", "8"), ("2", "12", "6"), ("3", "4", "2"), ("4", "2", "1")]

    def test_snr(self, capsys):
        code, out, _ = run(capsys, "snr", "--n", "100", "--p", "0.5", "--q", "10,60")
        assert code == 0
        low, high = rows(out)
        assert low["observable"] == "true" and float(low["eta"]) == 1.0
        assert high["observable"] == "false"
        assert float(high["log_eta"]) == pytest.approx(36.0)


class TestVerify:
    def test_passes(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        assert cli.main(["verify", "--max-n", "4", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["passed"] is True
        rank = [r for r in doc["records"] if r["check"] == "rank_zigzag" and r["params"]["N"] == 4
                and r["params"]["q"] == 2]
        assert rank[0]["params"]["rank"] == 12
        proj = [r for r in doc["records"] if r["check"] == "projector_equivalence"]
        assert proj and all(r["residual"] < 1e-10 for r in proj)

    def test_failure_exit_code(self, capsys, monkeypatch):
        bad = VerifyReport(1, 0, [CheckRecord("rank_zigzag", {"N": 1, "q": 1}, False, 1.0, "forced")])
        monkeypatch.setattr("mqcbound.verification.run_verification", lambda *a, **k: bad)
        code, _, err = run(capsys, "verify", "--max-n", "1")
        assert code == 3
        assert "FAIL rank_zigzag" in err

    def test_bad_max_n(self, capsys):
        assert run(capsys, "verify", "--max-n", "9")[0] == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mqcbound.cli", "rank", "--n", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "3,1,8,4"
