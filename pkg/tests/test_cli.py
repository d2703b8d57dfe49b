"""The kdv command line: subcommands, JSON/CSV output and exit codes."""

import csv
import json
import subprocess
import sys

import pytest

from gkdv.cli import EXIT_DOMAIN, EXIT_IDENTITY, EXIT_IO, EXIT_OK, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def jet_file(tmp_path):
    def write(g, c, a=()):
        path = tmp_path / f"jet{len(list(tmp_path.iterdir()))}.json"
        path.write_text(json.dumps({"g": g, "a": list(a), "c": list(c)}))
        return path

    return write


def test_curve_examples(capsys, jet_file):
    code, out, _ = run(capsys, "curve", jet_file(1, [0, 0, 0]))
    assert code == EXIT_OK
    assert json.loads(out)["curve"]["mu"] == ["0", "0"]
    code, out, _ = run(capsys, "curve", jet_file(1, [1, 0, 3]))
    report = json.loads(out)
    assert code == EXIT_OK and report["curve"]["mu"] == ["0", "-1/2"]
    assert all(w["ok"] for w in report["weights"])


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "curve", bad)[0] == EXIT_IO
    assert run(capsys, "curve", tmp_path / "missing.json")[0] == EXIT_IO


def test_bad_arguments(capsys):
    assert run(capsys, "--tol", "-1", "verify")[0] == EXIT_IO
    assert run(capsys, "no-such-command")[0] == EXIT_IO
    assert run(capsys)[0] == EXIT_IO


def test_roundtrip(capsys, jet_file):
    code, out, _ = run(capsys, "roundtrip", "--genus", 2, "--count", 20, "--seed", 3)
    report = json.loads(out)
    assert code == EXIT_OK and report["exact"] and report["max_residual"] == 0
    code, out, _ = run(capsys, "roundtrip", "--mode", "float", "--genus", 2, "--count", 20)
    report = json.loads(out)
    assert code == EXIT_OK and report["max_residual"] <= 1e-10
    assert run(capsys, "roundtrip", jet_file(1, [0, 1, 1]))[0] == EXIT_DOMAIN


def test_divisor(capsys, jet_file, tmp_path):
    code, out, _ = run(capsys, "divisor", jet_file(1, [2, 4, 3]))
    assert code == EXIT_OK
    assert json.loads(out)["divisor"] == {"points": [{"xi": "1", "y": "4"}]}
    code, out, _ = run(capsys, "divisor", "--roundtrip", "--genus", 3, "--count", 10)
    assert code == EXIT_OK and json.loads(out)["max_residual"] == 0
    off = tmp_path / "off.json"
    off.write_text(json.dumps({"curve": {"g": 1, "mu": ["0", "0"]}, "divisor": {"points": [{"xi": "1", "y": "1"}]}}))
    assert run(capsys, "divisor", "--roundtrip", off)[0] == EXIT_DOMAIN


def test_flow_writes_csv(capsys, jet_file, tmp_path):
    out_csv = tmp_path / "flow.csv"
    code, out, _ = run(capsys, "flow", jet_file(1, ["1/2", 0, "1"]), "--span", "-0.5:0.5", "--samples", 11,
                       "--out", out_csv)
    assert code == EXIT_OK
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["t", "c0", "c1", "c2"] and len(rows) == 12
    assert json.loads(out)["mu_drift"] <= 1e-9


def test_flow_pole_is_domain_error(capsys, jet_file):
    assert run(capsys, "flow", jet_file(1, ["1/2", 0, "1"]), "--span", 10)[0] == EXIT_DOMAIN


def test_wfun(capsys, jet_file):
    jet = jet_file(2, [0.2, 0.1, -0.3, 0.2, 0.1], [0.3])
    code, out, _ = run(capsys, "wfun", jet, "--xs", "-0.5:0.5:21")
    report = json.loads(out)
    assert code == EXIT_OK and report["w0"] == 1 and report["dlogw0"] == 0
    code, out, _ = run(capsys, "wfun", jet, "--grid", "1:-0.4:0.4:5", "--grid", "2:-0.4:0.4:5")
    report = json.loads(out)
    assert code == EXIT_OK and report["hessian_residual"] <= 1e-5 and report["shape"] == [5, 5]


def test_eigen(capsys, jet_file):
    jet = jet_file(1, ["1/2", 0, "1"])
    code, out, _ = run(capsys, "eigen", jet, "--xi", "0.2")
    report = json.loads(out)
    assert code == EXIT_OK and report["ok"]
    code, out, _ = run(capsys, "eigen", jet, "--zero-energy")
    assert code == EXIT_OK
    assert run(capsys, "eigen", jet, "--xi", "0.2", "--y", "1")[0] == EXIT_DOMAIN
    assert run(capsys, "eigen", jet)[0] == EXIT_IO


def test_verify(capsys):
    for g in (1, 2):
        code, out, _ = run(capsys, "verify", "--genus", g)
        assert code == EXIT_OK and not json.loads(out)["failed"]
    code, _, err = run(capsys, "verify", "--genus", 3)
    assert code == EXIT_IO and "numeric" in err
    code, out, _ = run(capsys, "verify", "--genus", 3, "--level", "numeric")
    assert code == EXIT_OK


def test_rescale_check(capsys):
    code, out, _ = run(capsys, "rescale-check", "--count", 30, "--seed", 4)
    assert code == EXIT_OK and json.loads(out)["cases"] == 30


def test_outputs_are_deterministic(capsys):
    first = run(capsys, "roundtrip", "--mode", "float", "--genus", 3, "--count", 5, "--seed", 9)
    second = run(capsys, "roundtrip", "--mode", "float", "--genus", 3, "--count", 5, "--seed", 9)
    assert first == second


def test_printed_goldens_report_the_fourth_order_discrepancy(capsys):
    code, out, err = run(capsys, "--paper-goldens")
    report = json.loads(out)
    assert report["failed"] == ["g2 mu2 as printed"]
    assert code == EXIT_IDENTITY
    assert "PASS  g2 mu2 with unit u'''' coefficient" in err


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gkdv.cli", "verify", "--genus", "1"], capture_output=True, text=True)
    assert proc.returncode == 0


def test_negative_ranges_and_values(capsys, jet_file):
    jet = jet_file(1, ["1/2", 0, "1"])
    assert run(capsys, "flow", jet, "--span", "-0.3:0.3", "--samples", 5)[0] == EXIT_OK
    assert run(capsys, "eigen", jet, "--xi", "-0.2", "--span", "-0.2:0.2")[0] == EXIT_OK
