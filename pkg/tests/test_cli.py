import json

import numpy as np
import pytest

from planefield.chartio import load_model, save_model, validate_payload
from planefield.catalog import flat_torus_model, two_pi_torus_model
from planefield.cli import main


@pytest.fixture()
def torus_file(tmp_path):
    path = tmp_path / "torus.json"
    save_model(flat_torus_model(), path)
    return path


@pytest.fixture()
def reeb_file(tmp_path):
    path = tmp_path / "reeb.json"
    assert main(["model", "reeb", "--emit", str(path)]) == 0
    return path


def _read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_model_emit_round_trips(reeb_file):
    model = load_model(reeb_file)
    assert model.model_id == "reeb-solid-torus"
    assert model.foliation == "foliation"
    assert "paper" in model.named_frames


def test_classify_reports_parabolic(reeb_file, tmp_path):
    out = tmp_path / "rep.json"
    code = main(["classify", str(reeb_file), "--grid", "32,8,8",
                 "--output", str(out)])
    assert code == 0
    payload = _read(out)
    validate_payload(payload, "report")
    assert payload["body"]["classification"] == "parabolic"
    assert payload["body"]["grid"] == [32, 8, 8]
    assert payload["body"]["tol"] == 1e-8


def test_grid_and_tol_overrides_echoed(reeb_file, tmp_path):
    out = tmp_path / "rep.json"
    main(["classify", str(reeb_file), "--grid", "8x4x4", "--tol", "1e-6",
          "--output", str(out)])
    body = _read(out)["body"]
    assert body["grid"] == [8, 4, 4]
    assert body["tol"] == 1e-6


def test_check_writes_worst_points(reeb_file, tmp_path):
    out = tmp_path / "rep.json"
    assert main(["check", str(reeb_file), "--grid", "16,4,4",
                 "--output", str(out)]) == 0
    body = _read(out)["body"]
    assert "worst_points" in body and len(body["worst_points"]) == 10


def test_check_csv_dump(reeb_file, tmp_path):
    out = tmp_path / "points.csv"
    assert main(["check", str(reeb_file), "--grid", "8,4,4",
                 "--format", "csv", "--output", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("p1,p2,p3,b00")
    assert len(lines) == 1 + 8 * 4 * 4


def test_missing_file_is_usage_error(capsys):
    assert main(["check", "missing.json"]) == 2
    assert "missing.json" in capsys.readouterr().err


def test_bad_grid_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["classify", "whatever.json", "--grid", "1,1"])
    assert err.value.code == 2


def test_verify_builtin_suite(tmp_path):
    out = tmp_path / "suite.json"
    assert main(["verify", "builtin:contact-deformation",
                 "--output", str(out)]) == 0
    payload = _read(out)
    validate_payload(payload, "suite-report")
    assert payload["body"]["all_passed"]


def test_verify_unknown_builtin_is_usage_error():
    assert main(["verify", "builtin:nope"]) == 2


def test_verify_suite_file_failure_exit_code(tmp_path):
    spec = {"suite": "custom", "checks": [
        {"name": "impossible", "operation": "classify-expect",
         "target": "spheres", "grid": [6, 6, 6], "tolerance": 1e-8,
         "expectation": "parabolic"}]}
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(spec))
    assert main(["verify", str(path)]) == 1


def test_verify_rejects_negative_tolerance(tmp_path):
    spec = {"suite": "custom", "checks": [
        {"name": "bad", "operation": "classify-expect",
         "target": "spheres", "tolerance": -1.0,
         "expectation": "elliptic"}]}
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(spec))
    assert main(["verify", str(path)]) == 2


def test_scan_subcommand(tmp_path):
    chart = tmp_path / "torus2pi.json"
    save_model(two_pi_torus_model(), chart)
    out = tmp_path / "scan.json"
    code = main(["scan", str(chart), "--alpha", "vertical",
                 "--beta", "winding-contact", "--s-range", "0:0.4:3",
                 "--grid", "5,5,5", "--output", str(out)])
    assert code == 0
    payload = _read(out)
    validate_payload(payload, "scan-report")
    rows = payload["body"]["rows"]
    assert [r["s"] for r in rows] == [0.0, 0.2, 0.4]
    assert rows[2]["contact_volume_min"] == pytest.approx(-0.16, abs=1e-12)


def test_integrate_h_subcommand(torus_file, tmp_path):
    out = tmp_path / "ih.json"
    code = main(["integrate-h", str(torus_file),
                 "--distribution", "graph-foliation",
                 "--grid", "16,16,16", "--output", str(out)])
    assert code == 0
    payload = _read(out)
    validate_payload(payload, "integrate-report")
    assert abs(payload["body"]["integral_h"]) <= 1e-8
    assert payload["body"]["max_pointwise_defect"] <= 1e-9


def test_integrate_h_requires_periodic_chart(reeb_file):
    assert main(["integrate-h", str(reeb_file), "--grid", "4,4,4"]) == 2


def test_plotdata_csv(reeb_file, tmp_path):
    out = tmp_path / "line.csv"
    code = main(["plotdata", str(reeb_file), "--along", "r", "--n", "16",
                 "--output", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "r,k_e,h"
    assert len(lines) == 17
    values = np.array([[float(v) for v in line.split(",")]
                       for line in lines[1:]])
    assert np.max(np.abs(values[:, 1])) <= 1e-8   # parabolic along the line


def test_model_atlas_emit(tmp_path):
    out = tmp_path / "atlas.json"
    assert main(["model", "atlas", "--emit", str(out)]) == 0
    payload = _read(out)
    validate_payload(payload, "atlas")
    for chart in payload["charts"]:
        validate_payload(chart, "chart")
    assert len(payload["transitions"]) == 4


def test_model_product_emit(tmp_path):
    out = tmp_path / "product.json"
    assert main(["model", "product", "--emit", str(out)]) == 0
    model = load_model(out)
    assert model.foliation == "foliation"


def test_report_bodies_identical_across_worker_counts(torus_file, tmp_path):
    bodies = []
    for jobs in (1, 2, 8):
        out = tmp_path / f"rep{jobs}.json"
        code = main(["classify", str(torus_file),
                     "--distribution", "graph-foliation",
                     "--grid", "12,12,12", "--jobs", str(jobs),
                     "--output", str(out)])
        assert code == 0
        bodies.append(json.dumps(_read(out)["body"], sort_keys=True))
    assert bodies[0] == bodies[1] == bodies[2]


def test_env_var_sets_default_jobs(torus_file, tmp_path, monkeypatch):
    monkeypatch.setenv("PLANEFIELD_JOBS", "3")
    out = tmp_path / "rep.json"
    assert main(["classify", str(torus_file), "--grid", "6,6,6",
                 "--output", str(out)]) == 0
