import json

import pytest

from planefield.errors import ConfigError
from planefield.verify import (CheckSpec, SuiteSpec, builtin_suite,
                               builtin_suite_names, elliptic_contradiction,
                               run_suite, suite_from_payload)


def test_contradiction_detector_semantics():
    # impossible: positive curvature everywhere on a closed chart forces a
    # nonzero mean-curvature integral
    assert elliptic_contradiction("elliptic", periodic=True, integral_h=0.0)
    assert not elliptic_contradiction("parabolic", periodic=True, integral_h=0.0)
    assert not elliptic_contradiction("elliptic", periodic=False, integral_h=0.0)
    assert not elliptic_contradiction("elliptic", periodic=True, integral_h=0.5)


def test_empty_suite_passes_vacuously():
    report = run_suite(SuiteSpec(suite="empty", checks=[]))
    assert report.vacuous
    assert report.all_passed
    assert report.body()["total"] == 0


def test_negative_tolerance_rejected():
    payload = {"suite": "bad", "checks": [
        {"name": "x", "operation": "classify-expect", "tolerance": -1.0,
         "target": "reeb", "expectation": "parabolic"}]}
    with pytest.raises(ConfigError):
        suite_from_payload(payload)


def test_unknown_operation_rejected():
    payload = {"suite": "bad", "checks": [
        {"name": "x", "operation": "no-such-op"}]}
    with pytest.raises(ConfigError):
        suite_from_payload(payload)


def test_malformed_payload_rejected():
    with pytest.raises(ConfigError):
        suite_from_payload({"suite": "x"})


def test_check_errors_recorded_not_fatal():
    spec = SuiteSpec(suite="mixed", checks=[
        CheckSpec("broken", "classify-expect",
                  {"target": "no/such/file.json", "expectation": "parabolic"}),
        CheckSpec("fine", "elliptic-obstruction-mock", {}),
    ])
    report = run_suite(spec)
    assert not report.results[0].passed
    assert report.results[0].error
    assert report.results[1].passed
    assert not report.all_passed


def test_report_body_is_deterministic():
    spec = builtin_suite("contact-deformation")
    a = json.dumps(run_suite(spec).body(), sort_keys=True)
    b = json.dumps(run_suite(spec).body(), sort_keys=True)
    assert a == b


def test_builtin_names_stable():
    names = builtin_suite_names()
    assert "reeb-solid-torus" in names
    assert "mean-curvature-divergence" in names
    with pytest.raises(ConfigError):
        builtin_suite("nope")


def test_suite_payload_round_trip():
    payload = {"suite": "custom", "checks": [
        {"name": "sphere-elliptic", "operation": "classify-expect",
         "target": "spheres", "grid": [8, 8, 8], "tolerance": 1e-8,
         "expectation": "elliptic"},
    ]}
    report = run_suite(suite_from_payload(payload))
    assert report.all_passed


@pytest.mark.parametrize("name", builtin_suite_names())
def test_builtin_suites_pass(name):
    report = run_suite(builtin_suite(name))
    failures = [(r.name, r.measured, r.error)
                for r in report.results if not r.passed]
    assert report.all_passed, failures
    json.dumps({"body": report.body(), "timings": report.timings()})
