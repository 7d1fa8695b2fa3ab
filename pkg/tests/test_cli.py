import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from pcmfill.cli import main
from pcmfill.pcm import parse_matrix
from pcmfill.results import parse_record


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


@pytest.fixture
def ri_file(tmp_path):
    path = tmp_path / "ri.txt"
    path.write_text("5 1 0.9\n4 3 0\n")
    return path


def _kv(text: str) -> dict:
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


class TestAnalyze:
    def test_incomplete(self, run, data_dir):
        code, out, _ = run("analyze", data_dir / "example2.txt")
        assert code == 0
        info = _kv(out)
        assert info["connected"] == "yes"
        assert info["unique completion"] == "yes"
        assert info["m"] == "2"
        assert "KI" not in info

    def test_complete_consistent(self, run, data_dir):
        code, out, _ = run("analyze", data_dir / "consistent3.txt")
        info = _kv(out)
        assert (info["KI"], info["TI"], info["CI"]) == ("0.0000", "1.0000", "0.0000")

    def test_disconnected(self, run, data_dir):
        info = _kv(run("analyze", data_dir / "disconnected4.txt")[1])
        assert info["connected"] == "no"
        assert info["unique completion"] == "no"

    def test_reciprocity_error(self, run, data_dir):
        code, _, err = run("analyze", data_dir / "bad_reciprocal.txt")
        assert code == 2
        assert "(2,1)" in err

    def test_parse_error_location(self, run, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("2\n1 two\n1 1\n")
        code, _, err = run("analyze", bad)
        assert code == 2
        assert "line 2, column 3" in err

    def test_missing_file(self, run, tmp_path):
        assert run("analyze", tmp_path / "nope.txt")[0] == 2

    def test_csv(self, run, data_dir):
        out = run("analyze", data_dir / "example2.txt", "--format", "csv")[1]
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["key", "value"]


class TestComplete:
    def test_lex_example(self, run, data_dir):
        code, out, _ = run("complete", data_dir / "example2.txt", "--method", "lex")
        assert code == 0
        assert "(1,3)=4.0000" in out and "(1,4)=8.0000" in out
        res = parse_record(out)
        np.testing.assert_allclose(res.fill_values(), [4, 8], atol=1e-9)
        assert res.trace[0].triad.label() == "(2,3,4)"

    def test_all_methods_matrix_b(self, run, data_dir):
        code, out, _ = run("complete", data_dir / "matrix_b.txt", "--method", "all", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        fills = {(r["method"], r["cell"]): float(r["value"]) for r in rows}
        expected = {
            ("lex", "(1,2)"): 0.8274, ("lex", "(1,5)"): 0.4564,
            ("eig", "(1,2)"): 1.0993, ("eig", "(1,5)"): 0.6047,
            ("lls", "(1,2)"): 1.1141, ("lls", "(1,5)"): 0.6146,
        }
        for key, value in expected.items():
            assert fills[key] == pytest.approx(value, abs=2e-3)

    def test_all_methods_report_pairwise_ici(self, run, data_dir):
        out = run("complete", data_dir / "matrix_b.txt", "--method", "all")[1]
        assert "# ici lex-eig:" in out and "# ici eig-lls:" in out

    def test_tree_all_methods_agree(self, run, data_dir):
        out = run("complete", data_dir / "tree4.txt", "--method", "all")[1]
        values = [float(line.rsplit(":", 1)[1]) for line in out.splitlines() if line.startswith("# ici")]
        assert len(values) == 3
        assert max(abs(v) for v in values) <= 1e-6

    def test_disconnected_needs_flag(self, run, data_dir):
        code, _, err = run("complete", data_dir / "disconnected4.txt")
        assert code == 3
        assert "not unique" in err
        code, out, _ = run("complete", data_dir / "disconnected4.txt", "--allow-nonunique")
        assert code == 0
        assert "# unique: no" in out

    def test_round_trip_through_analyze(self, run, data_dir, tmp_path):
        record = tmp_path / "filled.txt"
        assert run("complete", data_dir / "matrix_b.txt", "--out", record)[0] == 0
        theta_head = parse_record(record.read_text()).theta[0]
        info = _kv(run("analyze", record, "--precision", "15")[1])
        assert float(info["TI"]) == pytest.approx(theta_head, abs=1e-9)

    def test_record_is_a_matrix_file(self, run, data_dir):
        out = run("complete", data_dir / "matrix_a.txt", "--method", "eig")[1]
        assert parse_matrix(out).m == 0

    def test_bad_method(self, run, data_dir):
        assert run("complete", data_dir / "example2.txt", "--method", "gci")[0] == 1


class TestWeights:
    def _gm(self, run, path, method):
        out = run("weights", path, "--method", method, "--scheme", "gm", "--format", "csv")[1]
        rows = list(csv.reader(io.StringIO(out)))
        return [float(r[1]) for r in rows[1:]], [int(r[2]) for r in rows[1:]]

    def test_rank_flip(self, run, data_dir):
        w_lex, r_lex = self._gm(run, data_dir / "matrix_b.txt", "lex")
        w_eig, r_eig = self._gm(run, data_dir / "matrix_b.txt", "eig")
        assert w_lex[0] < w_lex[1] and r_lex[0] > r_lex[1]
        assert w_eig[0] > w_eig[1] and r_eig[0] < r_eig[1]

    def test_consistent_gm_equals_em(self, run, data_dir):
        out = run("weights", data_dir / "consistent3.txt", "--format", "csv", "--precision", "12")[1]
        rows = list(csv.reader(io.StringIO(out)))
        for r in rows[1:]:
            assert float(r[1]) == pytest.approx(float(r[3]), abs=1e-9)

    def test_incomplete_without_method_is_usage_error(self, run, data_dir):
        code, _, err = run("weights", data_dir / "matrix_b.txt")
        assert code == 1
        assert "--method" in err

    def test_table_text(self, run, data_dir):
        out = run("weights", data_dir / "matrix_b.txt", "--method", "all")[1]
        header = out.splitlines()[0].split()
        assert header[0] == "alternative"
        assert "gm(lex)%" in header and "em(lls)%" in header


class TestSimulate:
    def test_smoke_and_determinism(self, run, tmp_path, ri_file):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code, out, _ = run("simulate", "--preset", "case-5-1", "--target", "50", "--seed", "7",
                               "--ri-table", ri_file, "--out", path)
            assert code == 0
            assert json.loads(out)["accepted"] == 50
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_text().splitlines()) == 51

    def test_zero_threshold(self, run, ri_file):
        code, out, err = run("simulate", "--n", "4", "--m", "3", "--target", "8", "--seed", "2",
                             "--threshold", "0", "--ri-table", ri_file)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 8
        assert all(float(r["ici"]) <= 1e-6 for r in rows)
        assert json.loads(err)["accepted"] == 8

    def test_guard_trips(self, run, ri_file):
        code, _, err = run("simulate", "--preset", "case-5-1", "--target", "1", "--threshold", "1e-7",
                           "--ri-table", ri_file)
        assert code == 3
        assert "generations" in err

    def test_missing_ri_entry(self, run, tmp_path):
        empty = tmp_path / "ri.txt"
        empty.write_text("")
        code, _, err = run("simulate", "--n", "7", "--m", "5", "--target", "1", "--ri-table", empty)
        assert code == 2
        assert "random index" in err

    def test_needs_case(self, run):
        assert run("simulate")[0] == 1


def test_estimate_ri(run):
    code, out, _ = run("estimate-ri", "--case", "3,1", "--case", "4,0", "--samples", "20")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0].split()[:2] == ["3", "1"]
    assert float(lines[0].split()[2]) == pytest.approx(0.0, abs=1e-9)


def test_no_subcommand_is_usage_error(run):
    assert run()[0] == 1


def test_console_entry_point(data_dir):
    proc = subprocess.run([sys.executable, "-m", "pcmfill.cli", "analyze", str(data_dir / "example2.txt")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "connected: yes" in proc.stdout
