import csv
import io
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from pspin_gap import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def schema():
    return json.loads((resources.files("pspin_gap") / "schemas" / "output-v1.schema.json").read_text())


def test_critical_point_p5(capsys):
    code, out, _ = run(capsys, "critical-point", "--p", "5")
    assert code == 0
    (row,) = rows(out)
    assert float(row["m_star"]) == 0.5
    assert abs(float(row["lambda_star"]) - 0.285714) < 1e-6
    assert abs(float(row["s_star"]) - 0.41810) < 1e-5
    assert max(float(row[f"residual_d{k}"]) for k in (1, 2, 3)) <= 1e-8


def test_critical_point_p11_and_p3(capsys):
    code, out, _ = run(capsys, "critical-point", "--p", "11")
    assert code == 0 and abs(float(rows(out)[0]["m_star"]) - 0.836660) < 1e-6
    code, _, err = run(capsys, "critical-point", "--p", "3")
    assert code == 2 and "no critical point" in err


def test_csv_format(capsys):
    _, out, _ = run(capsys, "critical-point", "--p", "7")
    header, line = out.splitlines()
    assert header.split(",")[:4] == ["p", "m_star", "lambda_star", "s_star"]
    assert "\r" not in out
    # 17 significant digits round-trip doubles exactly
    assert len(line.split(",")[2].lstrip("0.").rstrip()) >= 15


def test_phase_diagram_p3(capsys):
    code, out, _ = run(capsys, "phase-diagram", "--p", "3", "--lambda-min", "0.1",
                       "--lambda-steps", "5")
    assert code == 0
    lines = {r["line"] for r in rows(out)}
    assert "first" in lines and "terminus" not in lines and "terminus_closed_form" not in lines
    assert sum(r["line"] == "first" for r in rows(out)) == 5


def test_phase_diagram_p11_json(capsys):
    code, out, _ = run(capsys, "phase-diagram", "--p", "11", "--lambda-min", "0.2",
                       "--lambda-steps", "41", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema())
    kinds = {r["line"] for r in doc["rows"]}
    assert {"first", "second", "terminus", "terminus_closed_form", "meeting"} <= kinds
    term = next(r for r in doc["rows"] if r["line"] == "terminus")
    closed = next(r for r in doc["rows"] if r["line"] == "terminus_closed_form")
    assert abs(term["lambda"] - closed["lambda"]) < 1e-4


def test_phase_diagram_empty_grid(capsys):
    code, _, err = run(capsys, "phase-diagram", "--p", "5", "--lambda-steps", "0")
    assert code == 2 and "empty" in err


def test_alpha_curve(capsys):
    code, out, _ = run(capsys, "alpha-curve", "--p", "5", "--lambda-min", "0.2",
                       "--lambda-max", "1", "--lambda-steps", "3")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == ["lambda", "s_c", "alpha", "quad_error", "m1", "m2", "e_c"]
    assert r[0]["alpha"] == "none"
    assert float(r[1]["alpha"]) > 0 and float(r[2]["alpha"]) > 0


def test_alpha_curve_single_row(capsys):
    code, out, _ = run(capsys, "alpha-curve", "--p", "3", "--lambda", "1")
    assert code == 0 and len(rows(out)) == 1


def test_alpha_curve_threads_keep_order(capsys):
    args = ["alpha-curve", "--p", "5", "--lambda-min", "0.3", "--lambda-steps", "4"]
    _, serial, _ = run(capsys, *args)
    _, parallel, _ = run(capsys, *args, "--threads", "2")
    assert serial == parallel


def test_gap_scaling_self_test(capsys):
    code, out, _ = run(capsys, "gap-scaling", "--self-test")
    assert code == 0
    fit = [r for r in rows(out) if r["record"] == "fit"][0]
    assert abs(float(fit["slope"]) + 0.3) < 1e-12


def test_gap_scaling_needs_three_sizes(capsys):
    code, _, _ = run(capsys, "gap-scaling", "--p", "3", "--lambda", "1", "--n-list", "200,400")
    assert code == 2


def test_gap_scaling_small(capsys):
    code, out, _ = run(capsys, "gap-scaling", "--p", "3", "--lambda", "1",
                       "--n-list", "60,90,120,150", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema())
    fit = [r for r in doc["rows"] if r["record"] == "fit"][0]
    assert 0.7 < fit["ratio"] < 1.3


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--p", "3", "--lambda", "1", "--n", "10", "--s", "0")
    assert code == 0
    assert abs(float(rows(out)[0]["gap"]) - 2) < 1e-12
    code, _, err = run(capsys, "spectrum", "--p", "3", "--lambda", "1", "--n", "10", "--k", "12")
    assert code == 2


def test_spectrum_single_dip(capsys):
    code, out, _ = run(capsys, "spectrum", "--p", "3", "--lambda", "1", "--n", "100",
                       "--s-steps", "200")
    gaps = [float(r["gap"]) for r in rows(out)]
    dips = [i for i in range(1, len(gaps) - 1) if gaps[i] < gaps[i - 1] and gaps[i] < gaps[i + 1]]
    assert code == 0 and len(dips) == 1


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--p", "3", "--lambda", "1", "--s", "0.55", "--n", "8")
    assert code == 0
    r = rows(out)[0]
    assert float(r["rel_dev_e0"]) <= 1e-10 and float(r["rel_dev_e1"]) <= 1e-10
    assert r["pass"] == "true"
    code, out, _ = run(capsys, "validate", "--p", "5", "--lambda", "0.5", "--s", "0", "--n", "6")
    assert abs(float(rows(out)[0]["sector_gap"]) - 2) < 1e-12
    code, _, err = run(capsys, "validate", "--p", "3", "--lambda", "1", "--n", "13")
    assert code == 2 and "13" in err


def test_invalid_inputs(capsys):
    assert run(capsys, "alpha-curve", "--p", "4", "--lambda", "0.5")[0] == 2
    assert run(capsys, "alpha-curve", "--lambda", "0.5")[0] == 2
    assert run(capsys, "spectrum", "--p", "3", "--lambda", "1.5", "--n", "10")[0] == 2


def test_numerical_failure_exit_code(capsys, monkeypatch):
    from pspin_gap import semiclassical
    from pspin_gap.errors import NumericalError

    def boom(p):
        raise NumericalError("forced")
    monkeypatch.setattr(semiclassical, "critical_point", boom)
    code, _, err = run(capsys, "critical-point", "--p", "5")
    assert code == 3 and "forced" in err


def test_output_file_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert cli.main(["alpha-curve", "--p", "7", "--lambda-min", "0.4", "--lambda-steps", "3",
                         "--format", "json", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    jsonschema.validate(json.loads(a.read_text()), schema())


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "pspin_gap", "critical-point", "--p", "5"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("p,m_star")


@pytest.mark.parametrize("command", list(cli.COMMANDS))
def test_help(command, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([command, "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "--format" in out
