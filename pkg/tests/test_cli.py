import json
import subprocess
import sys

import pytest

from lgfano import asymptotics as asy
from lgfano import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_statespace_text_table(capsys):
    code, out, _ = run(["statespace", "cubic4fold", "--format", "text"], capsys)
    assert code == 0
    rows = {int(l.split()[0]): l.split()[1:] for l in out.splitlines()[1:] if l.split()[0].lstrip("-").isdigit()}
    assert rows[0] == ["25", "25"] and rows[2] == ["1", "1"] and rows[-2] == ["1", "1"]


def test_report_envelope(capsys):
    code, out, _ = run(["statespace", "degree8"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["ok"]
    assert rep["schema_version"] == cli.SCHEMA_VERSION
    assert len(rep["input_hash"]) == 64
    assert rep["options"]["precision"] == 200
    assert rep["result"]["cr"]["graded_dims"] == {"0": 12}


@pytest.mark.parametrize("cmd", ["statespace", "diagram", "ifunction", "pf-check", "massive", "mirror-j"])
def test_exact_reports_are_byte_identical(cmd, capsys):
    a = run([cmd, "delpezzo"], capsys)
    b = run([cmd, "delpezzo"], capsys)
    assert a[0] == 0 and a == b


def test_massive_table(capsys):
    code, out, _ = run(["massive", "delpezzo", "--terms", "20"], capsys)
    res = json.loads(out)["result"]
    assert code == 0
    assert res["reference_recursion_ratio"] == "729"
    sol = res["solutions"][0]
    assert sol["alpha"] == "27" and sol["lambda"] == "1"
    assert sol["a"][1] == "7/243" and len(sol["a"]) == 21


def test_diagram_svg(capsys):
    code, out, _ = run(["diagram", "orbicurve", "--format", "svg"], capsys)
    assert code == 0 and out.count("<svg") == 2


def test_exponent_convention_flag(capsys):
    _, small, _ = run(["ifunction", "delpezzo", "--side", "fjrw", "--order", "2"], capsys)
    _, big, _ = run(["ifunction", "delpezzo", "--side", "fjrw", "--order", "2", "--exponent-convention", "big"],
                    capsys)
    e_small = {t["exponent"] for t in json.loads(small)["result"]["fjrw"]["terms"]}
    e_big = {t["exponent"] for t in json.loads(big)["result"]["fjrw"]["terms"]}
    assert {str(int(e) - 1) for e in e_small} == e_big


def test_p_trunc_flag(capsys):
    _, out, _ = run(["ifunction", "delpezzo", "--side", "gw", "--p-trunc", "1", "--order", "2"], capsys)
    assert json.loads(out)["result"]["gw"]["ptrunc"] == {"0": 1}


@pytest.mark.parametrize("cmd", ["verify-all", "statespace"])
def test_malformed_weights_exit_1(cmd, capsys):
    code, _, err = run([cmd, "malformed"], capsys)
    assert code == 1 and "gcd" in err


def test_missing_problem_exit_1(capsys):
    assert run(["statespace", "/nonexistent/problem.json"], capsys)[0] == 1


def test_schema_violation_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"weights": [1, 1], "degree": 3, "colour": "red"}))
    code, _, err = run(["statespace", str(p)], capsys)
    assert code == 1 and "problem file" in err


def test_bad_json_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{weights: [1,1]")
    assert run(["statespace", str(p)], capsys)[0] == 1


def test_user_problem_file(tmp_path, capsys):
    p = tmp_path / "cubic_curve.json"
    p.write_text(json.dumps({"weights": [1, 1, 1], "degree": 3}))
    code, out, _ = run(["verify-all", str(p)], capsys)
    # Calabi-Yau: kappa = 0, only the exact checks apply
    assert code == 0 and set(json.loads(out)["result"]["checks"]) == {"statespace", "diagram"}


def test_verification_failure_exit_2(monkeypatch, capsys):
    monkeypatch.setitem(cli.COMMANDS, "statespace", lambda pb, args: ({}, False))
    assert run(["statespace", "delpezzo"], capsys)[0] == 2


def test_precision_failure_exit_3(monkeypatch, capsys):
    def boom(pb, args):
        raise asy.PrecisionFailure("tail bound not reached")
    monkeypatch.setitem(cli.COMMANDS, "asymptotics", boom)
    assert run(["asymptotics", "delpezzo"], capsys)[0] == 3


def test_verify_all_chains_by_kappa(capsys):
    _, fano, _ = run(["verify-all", "degree8"], capsys)
    _, gt, _ = run(["verify-all", "sextic"], capsys)
    _, dp, _ = run(["verify-all", "delpezzo"], capsys)
    assert set(json.loads(fano)["result"]["checks"]) == {"statespace", "diagram", "pf-check", "massive"}
    assert set(json.loads(gt)["result"]["checks"]) == {"statespace", "diagram", "pf-check"}
    assert set(json.loads(dp)["result"]["checks"]) == {"statespace", "diagram", "pf-check", "massive", "mirror-j"}


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "lgfano", "statespace", "sextic", "--format", "text"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "ledger" in r.stdout
