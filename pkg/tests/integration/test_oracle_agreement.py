import pytest

from spinmem.main import cmd_oracle


@pytest.mark.integration_test
def test_two_spin_swap_matches_master_equation(reference_config, workspace):
    report = cmd_oracle(reference_config, workspace)

    comparison = report["comparison"]
    assert comparison["max_mean_error"] < 0.02
    assert comparison["max_cavity_cov_error"] < 0.05
    assert report["spin_decay_error"] < 1e-6
    assert report["fid_envelope_error"] < 0.05
    assert (workspace.root / "oracle_report.json").exists()
    assert (workspace.root / "oracle_trajectory.csv").exists()
