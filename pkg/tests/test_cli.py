import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from spinflow.cli import TRIG_WARNING, main
from spinflow.maps import xi

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "schemas" / "run_record.schema.json").read_text()
)


def run_cli(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows_of(csv_text):
    lines = csv_text.strip().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_xi_csv_contract(capsys):
    code, out, err = run_cli(
        ["xi", "--kind", "mem", "--r", "0.1", "--tau-end", "5", "--points", "6"], capsys
    )
    assert code == 0
    header, rows = rows_of(out)
    assert header == ["tau", "xi", "dxi"]
    assert rows[0] == ["0", "1", "0"]
    assert len(rows) == 6
    assert rows[1][1] == "%.17g" % xi("mem", 0.1, 1.0)
    assert err == ""


def test_trig_warning_only_for_oscillatory_memory_kernel(capsys):
    _, _, err = run_cli(
        ["xi", "--kind", "mem", "--r", "0.5", "--tau-end", "1"], capsys
    )
    assert TRIG_WARNING in err
    _, _, err = run_cli(
        ["xi", "--kind", "post", "--r", "0.5", "--tau-end", "1"], capsys
    )
    assert TRIG_WARNING not in err
    _, _, err = run_cli(
        ["xi", "--kind", "mem", "--r", "0.2", "--tau-end", "1"], capsys
    )
    assert TRIG_WARNING not in err


def test_physical_parameter_entry(capsys):
    code, out, _ = run_cli(
        [
            "xi", "--kind", "mem", "--gamma0", "0.05", "--gamma", "0.5",
            "--tau-end", "2", "--points", "3",
        ],
        capsys,
    )
    assert code == 0
    _, rows = rows_of(out)
    assert rows[1][1] == "%.17g" % xi("mem", 0.1, 1.0)


@pytest.mark.parametrize(
    "argv",
    [
        ["xi", "--kind", "mem", "--r", "0.1", "--gamma0", "1", "--tau-end", "1"],
        ["xi", "--kind", "mem", "--tau-end", "1"],
        ["xi", "--kind", "nonsense", "--r", "0.1", "--tau-end", "1"],
        ["xi", "--kind", "mem", "--r", "0.1", "--tau-end", "-2"],
        ["xi", "--kind", "mem", "--r", "-0.1", "--tau-end", "1"],
        ["solve", "--kind", "mem", "--r", "0.1", "--tau-end", "1", "--state", "2,0,0"],
        ["sigma", "--kind", "mem", "--r", "0.1", "--tau-end", "1",
         "--state1", "1,0,0", "--state2", "1,0,0"],
        ["oracle", "--kind", "mem", "--r", "0.1", "--tau-end", "1", "--tol", "0.01"],
        ["measure", "--kind", "mem", "--r", "0.1", "--budget", "10"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    code, _, _ = run_cli(argv, capsys)
    assert code == 2


def test_solve_methods_agree(capsys):
    base = ["solve", "--kind", "post", "--r", "0.3", "--n", "1",
            "--tau-end", "6", "--points", "13", "--state", "0.9,0.2,0.1"]
    outputs = {}
    for method in ("closed", "ode", "quadrature", "tcl"):
        code, out, _ = run_cli(base + ["--method", method], capsys)
        assert code == 0
        header, rows = rows_of(out)
        assert header == ["tau", "pe", "re_b", "im_b"]
        assert len(rows) == 13
        outputs[method] = np.array([[float(v) for v in row] for row in rows])
    for method in ("ode", "quadrature", "tcl"):
        np.testing.assert_allclose(
            outputs[method], outputs["closed"], atol=5e-6,
            err_msg=f"method {method} disagrees with closed form",
        )


def test_solve_tcl_refuses_singular_horizon(capsys):
    code, _, err = run_cli(
        ["solve", "--kind", "mem", "--r", "0.5", "--tau-end", "10", "--method", "tcl"],
        capsys,
    )
    assert code == 1
    assert "time-local rates unusable" in err
    assert "4.71238898" in err


def test_trace_distance_monotone_physical(capsys):
    code, out, _ = run_cli(
        ["trace-distance", "--kind", "mem", "--r", "0.2", "--n", "1",
         "--tau-end", "10", "--points", "51"],
        capsys,
    )
    assert code == 0
    header, rows = rows_of(out)
    assert header == ["tau", "distance"]
    dist = np.array([float(r[1]) for r in rows])
    assert dist[0] == 1.0
    assert np.all(np.diff(dist) <= 1e-12)


def test_sigma_rows(capsys):
    code, out, err = run_cli(
        ["sigma", "--kind", "mem", "--r", "0.5", "--n", "10",
         "--tau-end", "10", "--points", "21"],
        capsys,
    )
    assert code == 0
    assert TRIG_WARNING in err
    header, rows = rows_of(out)
    assert header == ["tau", "sigma"]
    values = np.array([float(r[1]) for r in rows])
    assert values[0] == 0.0
    assert np.any(values > 0.0)  # backflow in the oscillatory regime


def test_oracle_emits_pass_line(capsys):
    code, out, err = run_cli(
        ["oracle", "--kind", "post", "--r", "0.3", "--n", "1",
         "--tau-end", "5", "--points", "21", "--steps", "800"],
        capsys,
    )
    assert code == 0
    header, rows = rows_of(out)
    assert header[:4] == ["tau", "pe_closed", "re_b_closed", "im_b_closed"]
    assert len(rows) == 21
    last = err.strip().splitlines()[-1]
    assert last.startswith("max|delta| = ")
    assert last.endswith("<= 1e-06: PASS")


def test_oracle_fail_still_exits_zero(capsys):
    code, _, err = run_cli(
        ["oracle", "--kind", "mem", "--r", "0.2", "--tau-end", "5",
         "--points", "11", "--steps", "100", "--tol", "1e-12"],
        capsys,
    )
    assert code == 0
    assert "> 1e-12: FAIL" in err.strip().splitlines()[-1]


def test_tcl_rates_truncates_at_divergence(capsys):
    code, out, err = run_cli(
        ["tcl-rates", "--kind", "mem", "--r", "0.5", "--tau-end", "10",
         "--points", "101"],
        capsys,
    )
    assert code == 0
    assert "rates diverge at tau = 4.7123889" in err
    header, rows = rows_of(out)
    assert header == ["tau", "gamma1", "gamma2", "gamma3"]
    assert len(rows) == sum(1 for t in np.linspace(0, 10, 101) if t < 1.5 * math.pi)
    assert rows[0][1:] == ["0", "0", "0"]


def test_choi_matrix_output(capsys):
    code, out, err = run_cli(
        ["choi", "--kind", "mem", "--r", "0.2", "--n", "1", "--tau", "3"], capsys
    )
    assert code == 0
    assert "min eigenvalue = " in err
    header, rows = rows_of(out)
    assert header == ["row", "col", "re", "im"]
    assert len(rows) == 16


def test_choi_intermediate_map_window(capsys):
    code, out, _ = run_cli(
        ["choi", "--kind", "mem", "--r", "0.2", "--n", "1",
         "--tau", "20", "--tau-start", "18", "--format", "json"],
        capsys,
    )
    assert code == 0
    records = json.loads(out)
    assert len(records) == 16
    assert {"row", "col", "re", "im"} == set(records[0])


def test_choi_reports_non_invertible_start(capsys):
    code, _, err = run_cli(
        ["choi", "--kind", "mem", "--r", "0.5", "--n", "1",
         "--tau", "5", "--tau-start", repr(1.5 * math.pi)],
        capsys,
    )
    assert code == 1
    assert "lambda3" in err


def test_measure_row_contract(capsys):
    code, out, _ = run_cli(
        ["measure", "--kind", "mem", "--r", "0.5", "--n", "10",
         "--budget", "150", "--format", "json"],
        capsys,
    )
    assert code == 0
    (record,) = json.loads(out)
    assert record["value"] > 0.04
    assert record["method"] == "analytic-sigma"
    assert record["classification"] == "Unphysical(positivity broken)"
    assert record["evaluations"] <= 150
    for key in ("first_x", "first_y", "first_z", "second_x", "second_y", "second_z"):
        assert key in record


def test_divisibility_rows(capsys):
    code, out, _ = run_cli(
        ["divisibility", "--kind", "mem", "--r", "0.2", "--n", "1",
         "--grid", "100"],
        capsys,
    )
    assert code == 0
    header, rows = rows_of(out)
    assert header == ["divisible", "min_eigenvalue", "t1", "t2", "tau_end", "grid"]
    assert rows[0][0] == "false"

    code, out, _ = run_cli(
        ["divisibility", "--kind", "post", "--r", "0.6", "--n", "1",
         "--grid", "100"],
        capsys,
    )
    assert code == 0
    _, rows = rows_of(out)
    assert rows[0][0] == "true"


def test_positivity_row(capsys):
    code, out, _ = run_cli(
        ["positivity", "--kind", "mem", "--r", "0.2", "--n", "1",
         "--tau-end", "20"],
        capsys,
    )
    assert code == 0
    header, rows = rows_of(out)
    assert header == ["ok", "worst_tau", "max_norm", "witness_x", "witness_y", "witness_z"]
    assert rows[0][0] == "true"
    assert float(rows[0][2]) <= 1.0 + 1e-10


def test_classify_row(capsys):
    code, out, _ = run_cli(
        ["classify", "--kind", "post", "--r", "0.6", "--n", "1",
         "--budget", "150", "--format", "json"],
        capsys,
    )
    assert code == 0
    (record,) = json.loads(out)
    assert record["verdict"] == "TimeDependentMarkovian-Divisible"
    assert record["params_physical"] is True
    assert record["divisible"] is True
    assert record["measure_value"] == 0.0


def test_output_file_flag(tmp_path, capsys):
    target = tmp_path / "xi.csv"
    code, out, _ = run_cli(
        ["xi", "--kind", "mem", "--r", "0.1", "--tau-end", "1",
         "--points", "3", "--out", str(target)],
        capsys,
    )
    assert code == 0
    assert out == ""
    header, rows = rows_of(target.read_text())
    assert header == ["tau", "xi", "dxi"]
    assert len(rows) == 3


def test_version_banner(capsys):
    code, out, _ = run_cli(["--version"], capsys)
    assert code == 0
    assert out.strip().startswith("spinflow ")


def _write_config(tmp_path, text):
    path = tmp_path / "cfg.txt"
    path.write_text(text)
    return str(path)


SMOKE_CONFIG = """\
# two memory-kernel points, fast analyses only
kind = mem
r = 0.1, 0.2
n = 1
tau_end = 10
tau_points = 101
analyses = rates, choi
format = csv
seed = 20240901
budget = 150
"""


def test_sweep_smoke_flat_config(tmp_path, capsys):
    cfg = _write_config(tmp_path, SMOKE_CONFIG)
    out_dir = tmp_path / "run"
    code, _, err = run_cli(
        ["sweep", "--config", cfg, "--out-dir", str(out_dir)], capsys
    )
    assert code == 0
    assert "sweep complete: 2 points, 0 failures" in err

    header, rows = rows_of((out_dir / "rates.csv").read_text())
    assert header == ["index", "kind", "r", "n", "tau", "gamma1", "gamma2", "gamma3"]
    assert len(rows) == 202  # both points physical: full grid each
    header, rows = rows_of((out_dir / "choi.csv").read_text())
    assert header == ["index", "kind", "r", "n", "tau", "min_eigenvalue"]
    assert len(rows) == 202

    record = json.loads((out_dir / "run_record.json").read_text())
    jsonschema.validate(record, SCHEMA)
    assert record["tool"] == "spinflow"
    assert record["failures"] == []
    assert len(record["points"]) == 2
    verdicts = {pt["classification"] for pt in record["points"]}
    assert verdicts == {"TimeDependentMarkovian-Nondivisible"}
    assert all(pt["measure_value"] == 0.0 for pt in record["points"])


def test_sweep_byte_deterministic(tmp_path, capsys):
    cfg = _write_config(tmp_path, SMOKE_CONFIG)
    dirs = []
    for tag in ("a", "b"):
        out_dir = tmp_path / tag
        code, _, _ = run_cli(
            ["sweep", "--config", cfg, "--out-dir", str(out_dir)], capsys
        )
        assert code == 0
        dirs.append(out_dir)
    for name in ("rates.csv", "choi.csv"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
    records = []
    for d in dirs:
        rec = json.loads((d / "run_record.json").read_text())
        rec.pop("wall_time_s")
        records.append(rec)
    assert records[0] == records[1]


def test_sweep_json_config_and_json_outputs(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "kind": ["mem", "post"],
                "r": [0.2],
                "n": [1.0],
                "tau_end": 8,
                "tau_points": 41,
                "analyses": ["positivity", "divisibility"],
                "format": "json",
                "seed": 7,
                "budget": 120,
            }
        )
    )
    out_dir = tmp_path / "run"
    code, _, _ = run_cli(
        ["sweep", "--config", str(cfg), "--out-dir", str(out_dir)], capsys
    )
    assert code == 0
    positivity = json.loads((out_dir / "positivity.json").read_text())
    assert len(positivity) == 2
    assert all(rec["ok"] is True for rec in positivity)
    divisibility = json.loads((out_dir / "divisibility.json").read_text())
    assert {rec["kind"]: rec["divisible"] for rec in divisibility} == {
        "mem": False,
        "post": True,
    }


@pytest.mark.parametrize(
    "text",
    [
        "kind = mem\nr = 0.1\nanalyses = rates\nbogus_key = 1\n",
        "kind = mem\nr = 0.1\nanalyses =\n",
        "kind = mem\nr = 0.1\ngamma0 = 1\nanalyses = rates\n",
        "kind = mem\nr = -0.1\nanalyses = rates\n",
        "kind = mem\nr = 0.1\nanalyses = rates\nformat = yaml\n",
        "kind = mem\nr = 0.1\nanalyses = rates\nbudget = 5\n",
        "kind = mem\nr = 0.1\nanalyses = spectroscopy\n",
    ],
)
def test_sweep_config_errors_exit_2(text, tmp_path, capsys):
    cfg = _write_config(tmp_path, text)
    code, _, err = run_cli(
        ["sweep", "--config", cfg, "--out-dir", str(tmp_path / "x")], capsys
    )
    assert code == 2
    assert "config error" in err
