import csv
import io
import json
import math

import pytest

from prodtail.cli import main
from prodtail.config import RunConfig
from prodtail.tables import (
    BOUND_COLUMNS,
    build_bound_rows,
    build_tree_rows,
    emit_tail_table,
    emit_tree_experiment,
)


def run_cli(args):
    try:
        return main(args)
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def parse_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    return rows


def test_bound_rows_grid_and_sandwich():
    ts = [10.0**-e for e in range(1, 13)]
    lams = [0.5, 1.0, 2.0, 3.0, 5.0]
    rows = build_bound_rows(ts, lams)
    assert len(rows) == 60
    for row in rows:
        assert row["error"] is None
        assert row["asymptotic_lower"] <= row["exact"] <= row["asymptotic_upper"] <= 1.0
        assert row["exact"] <= row["bound_optimal"] <= 1.0
        assert row["log_asymptotic_lower"] <= row["log_exact"] <= row["log_asymptotic_upper"]


def test_bound_rows_reference_values():
    row = build_bound_rows([0.01], [1.0])[0]
    assert row["exact"] == pytest.approx(0.0308961, abs=1e-6)
    assert row["bound_optimal"] == pytest.approx(0.2689478, abs=1e-6)
    assert row["legacy_bound"] == pytest.approx(1.8973666, abs=1e-6)
    clamped = build_bound_rows([0.5], [1.0])[0]
    assert clamped["bound_optimal"] == 1.0


def test_bound_rows_error_marker():
    rows = build_bound_rows([0.5, 1.5], [1.0])
    assert rows[0]["error"] is None
    assert rows[1]["error"] is not None and "t must lie in" in rows[1]["error"]
    assert rows[1]["exact"] is None


def test_tree_rows_markers():
    rows = build_tree_rows([30], [30], 10, seed=1)
    assert rows[0]["rate"] == 1.0
    assert rows[0]["std_error"] is None  # degenerate SE -> undefined marker
    rows = build_tree_rows([30], [1], 1, seed=1)
    assert rows[0]["rate"] in (0.0, 1.0)
    assert rows[0]["std_error"] is None
    rows = build_tree_rows([10], [20], 5, seed=1)  # k > n is a per-row error
    assert rows[0]["error"] is not None


def test_emitters_validate_grids(tmp_path):
    with pytest.raises(ValueError):
        emit_tail_table(RunConfig(command="bounds", t_grid=(), lambda_grid=(1.0,)))
    with pytest.raises(ValueError):
        emit_tree_experiment(RunConfig(command="tree", n_grid=(), k_grid=(1,)))


def test_cli_bounds_csv_json_fidelity(tmp_path):
    csv_path = tmp_path / "table.csv"
    json_path = tmp_path / "table.json"
    base = ["bounds", "--t", "0.01", "1e-6", "--lambda", "1.0", "2.5", "--seed", "7"]
    assert run_cli(base + ["--format", "csv", "--out", str(csv_path)]) == 0
    assert run_cli(base + ["--format", "json", "--out", str(json_path)]) == 0
    csv_rows = parse_csv(csv_path.read_text())
    json_rows = json.loads(json_path.read_text())
    assert len(csv_rows) == len(json_rows) == 4
    for crow, jrow in zip(csv_rows, json_rows):
        for name in BOUND_COLUMNS:
            jval = jrow[name]
            cval = crow[name]
            if jval is None:
                assert cval == ""
            elif isinstance(jval, float):
                assert float(cval) == jval
            else:
                assert str(jval) == cval


def test_cli_determinism(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    args = ["sample", "--lambda", "1.0", "--count", "200", "--method",
            "compound", "--seed", "99"]
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_sample_output(tmp_path, capsys):
    assert run_cli(["sample", "--lambda", "2.0", "--count", "50",
                    "--method", "direct", "--seed", "3", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 50
    for row in rows:
        assert 0.0 < row["value"] <= 1.0
        assert row["value"] == pytest.approx(math.exp(row["log_value"]), rel=1e-9)
        assert (row["factor_count"] == 0) == (row["value"] == 1.0)


def test_cli_beta_sample_needs_shape(capsys):
    code = run_cli(["sample", "--lambda", "1.0", "--method", "beta",
                    "--count", "10"])
    assert code == 2


def test_cli_tail_output(capsys):
    assert run_cli(["tail", "--t", "0.01", "--lambda", "1.0",
                    "--format", "json"]) == 0
    row = json.loads(capsys.readouterr().out)[0]
    assert row["exact"] == pytest.approx(0.0308961, abs=1e-6)
    assert row["log_exact"] == pytest.approx(math.log(row["exact"]), rel=1e-9)


def test_cli_poisson_output(capsys):
    assert run_cli(["poisson", "--mu", "0.0", "--nu", "4.0",
                    "--format", "json"]) == 0
    row = json.loads(capsys.readouterr().out)[0]
    assert row["prob_ge"] == pytest.approx(math.exp(-4.0), rel=1e-11)
    assert row["prob_ge"] == pytest.approx(row["bound"], rel=1e-11)
    assert row["prob_gt"] == 0.0


def test_cli_tree_output(capsys):
    assert run_cli(["tree", "--n", "50", "--k", "50", "--trials", "5",
                    "--seed", "2", "--format", "json"]) == 0
    row = json.loads(capsys.readouterr().out)[0]
    assert row["rate"] == 1.0
    assert row["std_error"] is None


def test_cli_usage_errors():
    assert run_cli(["tail", "--lambda", "1.0"]) == 2  # missing --t
    assert run_cli(["nonsense"]) == 2
    assert run_cli([]) == 2


def test_cli_io_error(tmp_path):
    missing = tmp_path / "no" / "such" / "dir" / "out.csv"
    code = run_cli(["tail", "--t", "0.5", "--lambda", "1.0",
                    "--out", str(missing)])
    assert code == 3


def test_cli_verify_quick(tmp_path):
    report_path = tmp_path / "report.json"
    code = run_cli(["verify", "--quick", "--seed", "5",
                    "--report", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["overall_pass"] is True
    assert report["seed"] == 5


def test_cli_verify_zeroed_tolerance_fails(tmp_path):
    report_path = tmp_path / "report.json"
    code = run_cli(["verify", "--quick", "--seed", "5",
                    "--tolerance-scale", "0.0", "--report", str(report_path)])
    assert code == 1
    report = json.loads(report_path.read_text())
    assert report["overall_pass"] is False
