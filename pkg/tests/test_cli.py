import csv
import io
import json
import subprocess
import sys

import pytest

from bsmlie import __version__
from bsmlie.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("case,n", [("const", 6), ("hyp-g0", 5), ("hyp", 5)])
def test_verify_symmetries_passes(capsys, case, n):
    code, out, _ = run(capsys, "verify-symmetries", "--case", case)
    rep = json.loads(out)
    assert code == 0
    gens = rep["results"]["cases"][0]["generators"]
    assert len(gens) == n and all(g["passed"] for g in gens)


def test_injected_non_symmetry_exits_2(capsys):
    code, out, _ = run(capsys, "verify-symmetries", "--case", "const", "--inject", "y-dy")
    assert code == 2
    assert json.loads(out)["results"]["failing"] == ["const:Y(y d/dy)"]


def test_report_envelope(capsys):
    _, out, _ = run(capsys, "verify-symmetries", "--case", "const", "--seed", "9")
    rep = json.loads(out)
    assert rep["seed"] == 9
    assert rep["artifact"]["version"] == __version__
    assert rep["params"]["const"]["f0"] == 0.5
    assert rep["tolerances"]["zero_test_rel"] == 1e-9


def test_brackets(capsys):
    assert run(capsys, "brackets", "--case", "const")[0] == 0
    assert run(capsys, "brackets", "--case", "hyp-g0")[0] == 0
    code, out, _ = run(capsys, "brackets", "--case", "hyp", "--format", "text")
    assert code == 2 and "mismatch [X4,X5]" in out


def test_solutions_exit_codes(capsys):
    assert run(capsys, "solutions", "--case", "2.1-2")[0] == 0
    code, out, _ = run(capsys, "solutions", "--case", "2.1-5")
    assert code == 3
    assert json.loads(out)["results"]["cases"][0]["status"] == "suspected-misprint"


def test_solutions_csv(capsys):
    code, out, _ = run(capsys, "solutions", "--case", "2.3-1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 50
    assert set(rows[0]) == {"case", "t", "x", "y", "u", "u_imag"}


def test_converge(capsys):
    code, out, _ = run(capsys, "converge", "--case", "x", "--format", "text")
    assert code == 0 and "exact" in out
    code, out, _ = run(capsys, "converge", "--case", "2.1-2")
    orders = json.loads(out)["results"]["ladders"][0]["orders"]
    assert code == 0 and all(1.8 <= o <= 2.2 for o in orders)


def test_converge_forward_stencil_fails_second_order_band(capsys):
    code, _, _ = run(capsys, "converge", "--case", "2.1-2", "--stencil", "forward",
                     "--levels", "11x11x10,21x21x20,41x41x40")
    assert code == 2


def test_params_file(tmp_path, capsys):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"r": 0.04, "f0": 0.6, "case_params": {"k2": 0.5}}))
    code, out, _ = run(capsys, "solutions", "--case", "2.1-2", "--params", str(f))
    rep = json.loads(out)
    assert code == 0
    assert rep["params"]["const"]["r"] == 0.04
    assert rep["results"]["cases"][0]["case_params"]["k2"] == 0.5


@pytest.mark.parametrize("content", ['{"sigma": 1}', '[1, 2]', '{"r": "high"}', "not json"])
def test_bad_params_file_is_usage_error(tmp_path, capsys, content):
    f = tmp_path / "p.json"
    f.write_text(content)
    assert run(capsys, "verify-symmetries", "--case", "const", "--params", str(f))[0] == 1


@pytest.mark.parametrize("argv", [["brackets"], ["frobnicate"],
                                  ["verify-symmetries", "--case", "const", "--format", "xml"],
                                  ["brackets", "--case", "const", "--all"]])
def test_argument_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1
    capsys.readouterr()


def test_unknown_case_is_usage_error(capsys):
    assert run(capsys, "solutions", "--case", "9.9-9")[0] == 1


def test_out_directory(tmp_path, capsys):
    code, out, _ = run(capsys, "brackets", "--case", "const", "--out", str(tmp_path),
                       "--format", "text")
    assert code == 0
    assert (tmp_path / "brackets.txt").read_text().startswith("case const")


def test_identical_runs_are_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        d = tmp_path / str(i)
        run(capsys, "solutions", "--all", "--out", str(d))
        outs.append((d / "solutions.json").read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bsmlie", "verify-symmetries", "--case",
                           "hyp-g0", "--format", "text"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.count("pass") == 5


def test_converge_csv_has_finest_grid(capsys):
    code, out, _ = run(capsys, "converge", "--case", "x", "--format", "csv",
                       "--levels", "5x5x4,7x7x6,9x9x8")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 81
    assert all(abs(float(r["u"]) - float(r["u_exact"])) < 1e-10 for r in rows)
