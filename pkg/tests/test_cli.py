import json
import subprocess
import sys

import pytest

from cyclorank import curvedb
from cyclorank.cli import main
from cyclorank.report import parse_structured


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_check_worked_example(capsys):
    rc, out, _ = run(capsys, "check", "37a1", "--prime", "5")
    assert rc == 0
    assert "good ordinary at 5 (a_5 = -2)" in out
    assert "rank constant in the tower: yes" in out


def test_check_by_ainvs_and_flag(capsys):
    rc, out, _ = run(capsys, "check", "--curve", "0,0,1,-1,0", "--prime", "5", "--prec", "10")
    assert rc == 0 and out.startswith("37a1")


def test_check_structured(capsys):
    rc, out, _ = run(capsys, "check", "37a1", "--prime", "5", "--format", "structured")
    kind, data = parse_structured(out)
    assert rc == 0 and kind == "condition_report" and data["verdict"]["rank_constant"]


@pytest.mark.parametrize("argv", [
    ["check", "99a", "--prime", "5"],
    ["check", "--prime", "5"],
    ["check", "37a1", "--prime", "4"],
    ["check", "37a1", "--prime", "2"],
    ["check", "1,2,3", "--prime", "5"],
    ["frobnicate"],
    [],
])
def test_usage_errors(capsys, argv):
    rc, _, err = run(capsys, *argv)
    assert rc == 1


def test_scan_table(capsys):
    rc, out, _ = run(capsys, "scan", "--curve", "433a", "--max-prime", "20", "--prec", "8")
    assert rc == 0
    assert out.splitlines()[1] == "433a  | {13}"


def test_scan_structured_diagnostics(capsys):
    rc, out, _ = run(capsys, "scan", "--curve", "433a", "--max-prime", "20", "--prec", "8",
                     "--format", "structured")
    kind, data = parse_structured(out)
    assert rc == 0 and kind == "scan" and data["primes"] == [13]
    assert {d["p"] for d in data["diagnostics"]} >= {5, 13}


def test_scan_rank_zero_is_usage_error(capsys):
    rc, _, err = run(capsys, "scan", "--curve", "11a3", "--max-prime", "20")
    assert rc == 1 and "positive rank" in err


def test_sieve(capsys):
    rc, out, _ = run(capsys, "sieve", "--curve", "37a1", "--field-poly", "x^2+1",
                     "--max-prime", "100")
    assert rc == 0 and "sigma0" in out and "1/2" in out


def test_sieve_bad_polynomial(capsys):
    rc, _, err = run(capsys, "sieve", "--curve", "37a1", "--field-poly", "x^2-1",
                     "--max-prime", "100")
    assert rc == 1 and "reducible" in err


def test_prep(capsys):
    # (T + 5)(T + 25)(1 + T) at p = 5, scaled by nothing
    rc, out, _ = run(capsys, "prep", "--prime", "5", "--coeffs", "125,155,31,1",
                     "--truncation", "8")
    assert rc == 0
    lines = dict(line.split(" = ") for line in out.splitlines())
    assert lines["mu"] == "0" and lines["lambda"] == "2"
    assert lines["val(a_r)"] == "3"


def test_prep_zero_series_is_computation_error(capsys):
    rc, _, err = run(capsys, "prep", "--prime", "5", "--coeffs", "0,0")
    assert rc == 2 and "PrecisionInsufficient" in err


def test_prep_bad_coefficients(capsys):
    rc, _, _ = run(capsys, "prep", "--prime", "5", "--coeffs", "1/5,1")
    assert rc == 1
    rc, _, _ = run(capsys, "prep", "--prime", "5", "--coeffs", "a,b")
    assert rc == 1


def test_ingest(capsys, tmp_path):
    rc, out, _ = run(capsys, "ingest", "--db", str(curvedb.default_db_path()))
    assert rc == 0 and out.strip().endswith("12 records")
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"label": "x", "ainvs": [0,0,1,-1,0], "rank": 1, "generators": [[1,1,1,1]]}\n')
    rc, _, err = run(capsys, "ingest", "--db", str(bad))
    assert rc == 1 and "line 1" in err
    rc, _, _ = run(capsys, "ingest", "--db", str(tmp_path / "missing.jsonl"))
    assert rc == 1


def test_db_env_override(capsys, monkeypatch, tmp_path):
    path = tmp_path / "one.jsonl"
    path.write_text(json.dumps({"label": "37a1", "ainvs": [0, 0, 1, -1, 0], "rank": 1,
                                "generators": [[0, 1, 0, 1]]}) + "\n")
    monkeypatch.setenv(curvedb.DB_ENV, str(path))
    rc, _, _ = run(capsys, "check", "37a1", "--prime", "5", "--prec", "10")
    assert rc == 0
    rc, _, _ = run(capsys, "check", "389a", "--prime", "5")
    assert rc == 1


def test_fetch(capsys, stub_endpoint, closed_endpoint):
    rc, out, _ = run(capsys, "fetch", "--label", "37a1", "--endpoint", stub_endpoint)
    assert rc == 0 and json.loads(out)["ainvs"] == [0, 0, 1, -1, 0]
    rc, _, _ = run(capsys, "fetch", "--label", "37zz", "--endpoint", stub_endpoint)
    assert rc == 1
    rc, _, _ = run(capsys, "fetch", "--label", "37a1", "--endpoint", closed_endpoint)
    assert rc == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cyclorank", "check", "37a1", "--prime", "5",
                           "--prec", "10"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "a_5 = -2" in proc.stdout
