import math
from types import SimpleNamespace

import numpy as np
import pytest

from spinmem.dynamics import ControlSchedule
from spinmem.errors import RevivalNotFoundError
from spinmem.logs import logger
from spinmem.protocol import (
    ExperimentSetup,
    PreparedProtocol,
    fix_t_cav_eff,
    locate_revival,
    run_memory,
    solve_timing,
    swap_residual,
)


@pytest.fixture
def setup(resonant_model) -> ExperimentSetup:
    return ExperimentSetup(resonant_model, mode="means_only")


def test_setup_defaults(setup: ExperimentSetup, params):
    assert setup.pulse_control.kappa == params.kappa_max
    assert setup.pulse_control.delta_cs == 0.0
    assert setup.pulse_shape.duration == setup.constants.t_pi
    assert setup.replace(t_swap=70e-9).t_swap == 70e-9
    assert setup.t_swap is None


def test_locate_revival_refines_peak():
    times = np.linspace(0.0, 10.0, 11)
    signal = -((times - 4.3) ** 2)
    assert locate_revival(times, signal, 1.0, 9.0) == pytest.approx(4.3)


def test_locate_revival_failures():
    times = np.linspace(0.0, 10.0, 11)
    with pytest.raises(RevivalNotFoundError):
        locate_revival(times, np.ones(11), 1.0, 9.0)
    with pytest.raises(RevivalNotFoundError):
        locate_revival(times, times, 1.0, 9.0)
    with pytest.raises(RevivalNotFoundError):
        locate_revival(times, -((times - 5) ** 2), 4.5, 5.5)


def test_swap_residual_is_linear(setup: ExperimentSetup):
    t_swap = math.pi / (2 * setup.model.params.gens)
    first = swap_residual(setup, t_swap, 1.0)
    second = swap_residual(setup, t_swap, 2.0)
    assert abs(first) < 0.5
    assert second == pytest.approx(2 * first, rel=1e-6)


def test_run_memory_with_prepared_schedule(setup: ExperimentSetup, params):
    t_swap = math.pi / (2 * params.gens)
    schedule = ControlSchedule.constant(2 * t_swap, 0.0, 0.0, 2e-10)
    prepared = PreparedProtocol(
        timing=solve_timing(20e-6, t_swap, 40e-9),
        drives=(None, None),
        schedule=schedule,
        a_max=(1.0, 1.0),
    )
    result = run_memory(0.1, 20e-6, setup, prepared)

    assert result.alpha_in == 0.1
    assert result.alpha_out.real == pytest.approx(-0.1, abs=1e-3)
    assert result.cov_out is None
    assert math.isnan(result.var_sum)
    assert result.timing is prepared.timing


def test_full_mode_keeps_cavity_covariance(setup: ExperimentSetup, params):
    schedule = ControlSchedule.constant(10e-9, 0.0, params.kappa_min, 2e-10)
    prepared = PreparedProtocol(
        solve_timing(20e-6, 70e-9, 40e-9), (None, None), schedule, (1.0, 1.0)
    )
    result = run_memory(0.0, 20e-6, setup.replace(mode="full"), prepared)
    assert result.cov_out.shape == (2, 2)
    assert result.var_sum == pytest.approx(1.0, abs=1e-6)
    assert "hold" in result.trajectory.psd_ratios


def test_fix_t_cav_eff_reaches_observed_revival(setup: ExperimentSetup, mocker):
    mocker.patch.multiple(
        "spinmem.protocol.memory",
        solve_timing=mocker.Mock(return_value=SimpleNamespace(t_echo=10e-6)),
        observed_revival=mocker.Mock(return_value=10e-6 + 40e-9),
    )
    warn = mocker.patch.object(logger, "warn")

    t_cav = fix_t_cav_eff(setup, 20e-6, 74e-9, (None, None))

    assert t_cav == pytest.approx(40e-9)
    warn.assert_not_called()


def test_fix_t_cav_eff_warns_when_unconverged(setup: ExperimentSetup, mocker):
    peaks = iter(10e-6 + np.array([30e-9, 45e-9, 60e-9]))
    mocker.patch.multiple(
        "spinmem.protocol.memory",
        solve_timing=mocker.Mock(return_value=SimpleNamespace(t_echo=10e-6)),
        observed_revival=mocker.Mock(side_effect=lambda *args: next(peaks)),
    )
    warn = mocker.patch.object(logger, "warn")

    t_cav = fix_t_cav_eff(setup, 20e-6, 74e-9, (None, None))

    assert t_cav == pytest.approx(60e-9)
    warn.assert_called_once()
