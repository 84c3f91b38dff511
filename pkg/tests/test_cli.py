import csv
import io
import json
import subprocess
import sys

import pytest

from bdfactor.cli import CSV_COLUMNS, run

MM1 = ["--preset", "mm1", "--lambda", "1", "--mu", "2", "--mu0", "0"]


def _json(capsys, argv, code=0):
    assert run(argv) == code
    out = capsys.readouterr().out
    return json.loads(out)


def test_classify_example(capsys):
    d = _json(capsys, ["classify", *MM1])
    assert d["command"] == "classify"
    assert d["result"]["regime"] == "PositiveRecurrent"
    assert d["result"]["B"]["value"] == pytest.approx(2.0, rel=1e-10)
    assert d["config"]["N"] == 50 and d["config"]["seed"] == 42 and d["config"]["tol"] == 1e-12


def test_ul_blocked_exits_3(capsys):
    assert run(["factorize-ul", *MM1, "--x0", "0.5", "--json"]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 3
    assert "ConservativeRecurrentBlocked" in (err["reason"], err["error"])


def test_verify_example(capsys):
    d = _json(capsys, ["verify", "--preset", "linear", "--lambda", "1", "--mu", "1", "--beta", "3",
                       "--lu", "--mu0-hat", "0", "--N", "50"])
    assert d["result"]["passed"]
    for c in d["result"]["checks"]:
        assert c["residual"] <= 1e-9, c


def test_verify_ul(capsys):
    d = _json(capsys, ["verify", "--preset", "mm1", "--lambda", "2", "--mu", "1", "--mu0", "0", "--ul",
                       "--x0", "0.7", "--N", "40"])
    assert d["result"]["passed"]
    assert {c["check"] for c in d["result"]["checks"]} >= {"reconstruction", "row_sums", "dual_path"}


def test_json_is_byte_identical(capsys):
    argv = ["simulate", "--preset", "mm1", "--lambda", "1", "--mu", "2", "--mu0", "1",
            "--quantity", "absorption_prob", "--i", "1", "--n", "3", "--trials", "2000"]
    run(argv)
    a = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == a
    d = json.loads(a)["result"]
    assert d["target"] == pytest.approx(0.25)
    run(argv[:-1] + ["2000", "--seed", "7"])
    assert capsys.readouterr().out != a


def test_csv_columns_and_precision(capsys):
    assert run(["factorize-lu", *MM1, "--N", "8", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# config ")
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    assert rows[0] == CSV_COLUMNS["factorize-lu"]
    v = rows[2][1]
    assert float(v) == float(repr(float(v)))
    assert len(v.replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 17
    assert rows[2][1] == "%.17g" % float(rows[2][1])


def test_table_format(capsys):
    assert run(["darboux", *MM1, "--lu", "--N", "5", "--format", "table"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# darboux ")
    assert lines[1].split() == CSV_COLUMNS["darboux"]


@pytest.mark.parametrize("argv", [
    ["classify"],
    ["classify", "--preset", "mm1", "--lambda", "1"],
    ["classify", "--preset", "mm1", "--lambda", "-1", "--mu", "1"],
    ["verify", *MM1],
    ["poly", *MM1, "--x", "a,b"],
    ["classify", *MM1, "--N", "1"],
    ["nope"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(argv + ["--json"] if argv != ["nope"] else argv) == 2


def test_structured_usage_error(capsys):
    assert run(["verify", *MM1, "--json"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2 and err["error"] == "UsageError" and "--lu" in err["message"]


def test_inadmissible_lu(capsys):
    assert run(["factorize-lu", *MM1, "--mu0-hat", "5", "--json"]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 3 and err["detail"]


def test_poly_and_spectral(capsys):
    d = _json(capsys, ["poly", *MM1, "--x", "0,1.5", "--degree", "3"])
    vals = {(r["n"], r["x"]): r["value"] for r in d["result"]["values"]}
    assert vals[(0, 1.5)] == 1.0 and vals[(1, 0.0)] == pytest.approx(1.0)
    d = _json(capsys, ["poly", *MM1, "--x", "0", "--degree", "2", "--kind", "associated"])
    assert d["result"]["family"] == "associated"
    d = _json(capsys, ["poly", *MM1, "--x", "0.3", "--degree", "4", "--lu", "--N", "10"])
    assert d["result"]["family"] == "lu_transformed"
    d = _json(capsys, ["spectral-check", *MM1, "--lu"])
    assert d["result"]["passed"]


def test_spec_file(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"preset": "mm_inf", "params": {"lambda": 1, "mu": 1}}))
    d = _json(capsys, ["classify", "--spec", str(path)])
    assert d["result"]["regime"] == "PositiveRecurrent"
    d = _json(capsys, ["factorize-lu", "--spec", str(path), "--route", "recursive", "--N", "6"])
    assert d["result"]["route"] == "recursive"


def test_presets(capsys):
    d = _json(capsys, ["presets"])
    assert [r["preset"] for r in d["result"]["presets"]] == ["linear", "mm1", "mm_inf"]


def test_simulate_too_few_exit_1(capsys):
    assert run(["simulate", "--preset", "mm1", "--lambda", "1", "--mu", "2", "--mu0", "1",
                "--quantity", "conditional_hitting", "--trials", "150", "--json"]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "TooFewAccepted"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "bdfactor", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd, cols in CSV_COLUMNS.items():
        assert ",".join(cols) in r.stdout
