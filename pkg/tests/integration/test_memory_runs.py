"""
Protocol-level runs of the single-mode and multi-mode memory against the
reference figures of merit.
"""
import math

import numpy as np
import orjson
import pytest

from spinmem.main import cmd_multimode, cmd_run, result_cache, tuned_setup
from spinmem.metrics import CLASSICAL_FIDELITY
from spinmem.protocol import fix_t_cav_eff, prepare_protocol, run_memory
from spinmem.protocol.memory import pulse_drives


@pytest.mark.integration_test
def test_primary_echo_is_silenced(means_only_setup):
    t_mem = 10e-6
    result = run_memory(1.0, t_mem, means_only_setup)
    trajectory = result.trajectory
    t_echo = result.timing.primary_echo_time

    window = np.abs(trajectory.times - t_echo) < 0.2e-6
    leaked = np.max(np.abs(trajectory.cavity_amplitude[window]))

    assert leaked < 0.05 * abs(result.alpha_out)
    # retrieval reverses the sign of the stored field
    assert result.alpha_out.real < 0


@pytest.mark.integration_test
def test_cavity_time_is_a_fixed_point(means_only_config, means_only_setup):
    setup = means_only_setup
    t_mem = means_only_config["protocol"]["t_mem_s"]
    t_cav = setup.t_cav_eff

    assert 0 < t_cav < setup.t_swap + setup.constants.t_delta_t

    drives = pulse_drives(setup, setup.a_max)
    rerun = fix_t_cav_eff(setup, t_mem, setup.t_swap, drives, guess=t_cav)
    assert abs(rerun - t_cav) < 1e-9


@pytest.mark.slow_integration_test
def test_gain_follows_spin_dephasing(means_only_config, workspace):
    cache = result_cache(workspace)
    gains = []
    for t_mem in (10e-6, 20e-6):
        setup = tuned_setup(means_only_config, cache, t_mem)
        result = run_memory(1.0, t_mem, setup, prepare_protocol(setup, t_mem))
        gains.append(abs(result.alpha_out))
    t2 = 1.0 / setup.model.params.gamma_perp

    assert gains[1] / gains[0] == pytest.approx(math.exp(-10e-6 / t2), rel=0.05)


@pytest.mark.slow_integration_test
def test_reference_run(reference_config, workspace):
    summary = cmd_run(reference_config, workspace)
    metrics = summary["metrics"]

    assert metrics["gain"] == pytest.approx(0.79, abs=0.05)
    assert metrics["var_sum"] == pytest.approx(1.11, abs=0.05)
    assert metrics["fq"] == pytest.approx(0.80, abs=0.05)
    assert metrics["fq"] > CLASSICAL_FIDELITY
    assert summary["alpha_out"].real < 0
    written = orjson.loads((workspace.root / "summary.json").read_bytes())
    assert written["metrics"]["gain"] == pytest.approx(metrics["gain"])


@pytest.mark.slow_integration_test
def test_homogeneous_run(homogeneous_config, workspace):
    metrics = cmd_run(homogeneous_config, workspace)["metrics"]

    assert metrics["gain"] == pytest.approx(0.82, abs=0.05)
    assert metrics["var_sum"] == pytest.approx(1.02, abs=0.03)
    assert metrics["fq"] == pytest.approx(0.87, abs=0.05)


@pytest.mark.slow_integration_test
def test_multimode_cross_talk(homogeneous_config, workspace):
    summary = cmd_multimode(homogeneous_config, workspace)

    assert summary["cross_talk"] < 0.05
    assert np.allclose(summary["gains"], 0.80, atol=0.05)
    assert np.allclose(summary["var_sums"], 1.02, atol=0.03)
    assert (workspace.root / "cross_talk.csv").exists()


@pytest.mark.integration_test
def test_step_halving_converges(means_only_setup):
    t_mem = 10e-6
    coarse = run_memory(1.0, t_mem, means_only_setup)
    fine_setup = means_only_setup.replace(steps=means_only_setup.steps.scaled(0.5))
    fine = run_memory(1.0, t_mem, fine_setup)

    assert abs(fine.alpha_out - coarse.alpha_out) < 1e-4 * abs(fine.alpha_out)
