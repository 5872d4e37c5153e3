import json
import math

import numpy as np
import pytest

from apmas.core.outputs import atomic_write, atomic_write_text, format_summary, trajectory_header, write_run_outputs
from apmas.core.pipeline import ScenarioRun
from apmas.core.scenario import scenario_from_dict


@pytest.fixture
def run(p2_document):
    return ScenarioRun(scenario_from_dict({**p2_document, "dt": 0.01, "t_final": 40.0}))


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_output_files(tmp_path, run):
    paths = run.write(tmp_path)
    assert {path.name for path in paths.values()} == {"p2.csv", "p2.report.json", "p2.summary.txt"}
    assert sorted(p.name for p in tmp_path.iterdir()) == ["p2.csv", "p2.report.json", "p2.summary.txt"]


def test_csv_shape(tmp_path, run):
    header, rows = read_csv(run.write(tmp_path)["trajectory"])
    assert header == ["t", "x_1", "x_2", "xi_1", "xi_2", "norm_delta_inf", "V", "sum_xi"]
    assert len(header) == 1 + 2 * 2 + 3
    assert len(rows) == math.floor(40.0 / 0.01) + 1
    assert all(len(row) == len(header) for row in rows)
    assert float(rows[0][0]) == 0.0 and float(rows[-1][0]) == 40.0


def test_csv_residual_step(tmp_path, p2_document):
    run = ScenarioRun(scenario_from_dict({**p2_document, "dt": 0.3, "t_final": 1.0}))
    _, rows = read_csv(run.write(tmp_path)["trajectory"])
    assert len(rows) == math.floor(1.0 / 0.3) + 2
    assert float(rows[-1][0]) == 1.0


def test_csv_round_trips_floats(tmp_path, run):
    _, rows = read_csv(run.write(tmp_path)["trajectory"])
    values = np.array([[float(v) for v in row] for row in rows])
    assert np.array_equal(values[:, 1:3], run.trajectory.x)
    assert np.array_equal(values[:, 3:5], run.trajectory.xi)


def test_outputs_are_deterministic(tmp_path, p2_document):
    first, second = tmp_path / "first", tmp_path / "second"
    ScenarioRun(scenario_from_dict(p2_document)).write(first)
    ScenarioRun(scenario_from_dict(p2_document)).write(second)
    for name in ("p2.csv", "p2.report.json", "p2.summary.txt"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_report_json(tmp_path, run):
    report = json.loads(run.write(tmp_path)["report"].read_text(encoding="utf-8"))
    assert report["scenario"] == "p2"
    assert report["epsilon"] == 4.0
    assert report["settled"] is True
    assert report["zero_eigenvalue_count"] == 1
    assert len(report["closed_loop_spectrum"]) == 4
    assert list(report) == sorted(report)


def test_summary(run):
    lines = format_summary("p2", run.report)
    assert lines[0].split() == ["scenario", "p2"]
    assert any(line.split()[:2] == ["epsilon", "4.0"] for line in lines)
    assert any(line.startswith("settled") and "true" in line for line in lines)


def test_header_for_single_agent():
    assert trajectory_header(1) == ["t", "x_1", "xi_1", "norm_delta_inf", "V", "sum_xi"]


def test_atomic_write_leaves_no_temporary_files(tmp_path):
    target = tmp_path / "nested" / "file.txt"
    atomic_write_text(target, "first\n")
    atomic_write_text(target, "second\n")
    assert target.read_text(encoding="utf-8") == "second\n"
    assert [p.name for p in target.parent.iterdir()] == ["file.txt"]


def test_failed_write_keeps_previous_file(tmp_path, run):
    target = tmp_path / "p2.csv"
    target.write_text("previous\n", encoding="utf-8")

    def explode(handle):
        handle.write("partial")
        raise RuntimeError("disk full")

    with pytest.raises(RuntimeError):
        atomic_write(target, explode)
    assert target.read_text(encoding="utf-8") == "previous\n"
    assert [p.name for p in tmp_path.iterdir()] == ["p2.csv"]


def test_write_run_outputs_direct(tmp_path, run):
    paths = write_run_outputs(tmp_path / "out", "direct", run.trajectory, run.derived, run.Ldag, run.report)
    assert paths["summary"].read_text(encoding="utf-8").startswith("scenario          direct")
