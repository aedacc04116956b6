import math

import numpy as np
import pytest

from spinmem.distributions import FrequencyLine
from spinmem.dynamics import ControlSchedule, integrate
from spinmem.errors import MetricsError
from spinmem.metrics import (
    CLASSICAL_FIDELITY,
    excess_noise_series,
    extrapolate_gain,
    fid_analytic_compare,
    fid_initial_state,
    gain_decomposition,
    inversion_summary,
    max_nonclassical_time,
    qubit_fidelity,
)
from spinmem.metrics.analysis import SWAP_ABSORPTION_TIME, total_lowering
from spinmem.model import init_state
from spinmem.protocol import solve_timing

# pure-loss fidelity drops to 2/3 at G = sqrt(2) - 1
CLASSICAL_GAIN = math.sqrt(2.0) - 1.0


@pytest.fixture
def idle_run(three_spin_model):
    model = three_spin_model.decoupled()
    schedule = ControlSchedule.constant(1e-6, 0.0, 1e6, 1e-9)
    return integrate(
        fid_initial_state(model), schedule, model, mode="means_only", sample_stride=1e-8
    )


def test_fid_initial_state(three_spin_model):
    state = fid_initial_state(three_spin_model)
    assert np.allclose(state.spins[:, 0], three_spin_model.n)
    assert state.cov is None
    assert state.cavity_amplitude == 0j


def test_total_lowering_of_fid(idle_run):
    s_minus = total_lowering(idle_run)
    assert s_minus[0] == pytest.approx(1.5)
    assert abs(s_minus[-1]) < abs(s_minus[0])


def test_fid_compare_needs_decoupled_model(idle_run, three_spin_model):
    line = FrequencyLine(w=1e6, delta_hfs=1e6)
    with pytest.raises(MetricsError):
        fid_analytic_compare(idle_run, three_spin_model, line)


def test_fid_compare_window(idle_run, three_spin_model):
    line = FrequencyLine(w=2e7, delta_hfs=1e6)
    comparison = fid_analytic_compare(idle_run, three_spin_model.decoupled(), line)
    assert comparison.times[-1] <= 5 * 2 / line.w * (1 + 1e-12)
    assert comparison.simulated[0] == pytest.approx(1.0)
    assert comparison.analytic[0] == pytest.approx(1.0)
    assert comparison.max_error >= 0


def test_excess_noise_needs_covariances(idle_run, resonant_model, params):
    with pytest.raises(MetricsError):
        excess_noise_series(idle_run)

    schedule = ControlSchedule.constant(5e-9, 0.0, params.kappa_min, 1e-10)
    full = integrate(init_state(resonant_model), schedule, resonant_model)
    series = excess_noise_series(full)
    assert np.allclose(series["var_sum"], 1.0)
    assert np.allclose(series["spin_var"], 1.0)


def test_inversion_summary(idle_run, three_spin_model):
    timing = solve_timing(20e-6, 73.7e-9, 40e-9)
    summary = inversion_summary(idle_run, three_spin_model, timing)
    assert set(summary) == {"p_exc_eff_mid", "p_exc_eff_end"}
    assert summary["p_exc_eff_end"] == pytest.approx(0.5)


def test_gain_decomposition(params):
    decomposition = gain_decomposition(
        0.79, params.kappa_min, params.gens, params.gamma_perp, 20e-6, 10e-9
    )
    t_transfer = math.pi / (2 * params.gens) + 20e-9
    assert decomposition.kappa_factor == pytest.approx(
        math.exp(-params.kappa_min * t_transfer)
    )
    assert decomposition.gamma_factor == pytest.approx(
        math.exp(-params.gamma_perp * (20e-6 - SWAP_ABSORPTION_TIME))
    )
    assert decomposition.intrinsic_gain > decomposition.gain
    assert decomposition.to_dict()["g0"] == decomposition.intrinsic_gain


def test_extrapolate_gain():
    assert extrapolate_gain(0.8, 100e-6, 100e-6) == pytest.approx(0.8 / math.e)


def test_max_nonclassical_time():
    t2 = 100e-6
    t_max = max_nonclassical_time(0.8, 1.0, 20e-6, t2, dim=6, points=4)
    expected = 20e-6 + t2 * math.log(0.8 / CLASSICAL_GAIN)
    assert t_max == pytest.approx(expected, rel=1e-4)
    assert qubit_fidelity(CLASSICAL_GAIN, 1.0, dim=6) == pytest.approx(
        CLASSICAL_FIDELITY, abs=1e-9
    )


def test_classical_channel_has_no_margin():
    with pytest.raises(MetricsError):
        max_nonclassical_time(0.3, 1.0, 20e-6, 100e-6, dim=6, points=4)
