import pytest

from prodtail.config import RunConfig
from prodtail.verify import (
    VerificationReport,
    ks_two_sample_critical,
    run_verify_suite,
)


def quick_config(**kwargs):
    return RunConfig(mc_samples=20_000, ks_samples=20_000, gof_samples=20_000,
                     reroot_trees=30, tree_n=150, tree_trials=30, **kwargs)


def test_full_suite_default_passes():
    report = run_verify_suite()
    assert report.overall_pass
    families = {record.name for record in report.checks}
    assert len(families) >= 9
    assert all(record.threshold > 0.0 for record in report.checks)
    failing = [r for r in report.checks if not r.passed]
    assert failing == []


def test_report_roundtrip():
    report = run_verify_suite(quick_config(seed=31))
    clone = VerificationReport.from_json(report.to_json())
    assert clone == report


def test_determinism_same_seed():
    a = run_verify_suite(quick_config(seed=77)).to_dict()
    b = run_verify_suite(quick_config(seed=77)).to_dict()
    a.pop("elapsed_seconds")
    b.pop("elapsed_seconds")
    assert a == b


def test_override_forces_failure():
    config = quick_config(seed=31,
                          tolerance_overrides={"moment_match": 0.0})
    report = run_verify_suite(config)
    assert not report.overall_pass
    failing = {record.name for record in report.checks if not record.passed}
    assert failing == {"moment_match"}


def test_tolerance_scale_zero_fails_everything():
    report = run_verify_suite(quick_config(seed=31, tolerance_scale=0.0))
    assert not report.overall_pass
    assert all(not record.passed for record in report.checks)


def test_ks_critical_value():
    # 0.001-level two-sample critical value at n = m = 1e5
    assert ks_two_sample_critical(0.001, 100_000, 100_000) == pytest.approx(
        0.008718, abs=2e-6)
