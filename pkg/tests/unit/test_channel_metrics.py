import cmath
import math

import pytest

from spinmem.errors import ChannelError
from spinmem.metrics import (
    channel_metrics,
    fit_gain,
    fq_haar,
    qubit_fidelity,
)
from spinmem.metrics.channel import added_noise, cardinal_states

INPUTS = [0j, 0.5, 1.0, 1j, -0.5 - 0.5j]


def amplitude_damping_fidelity(gain: float) -> float:
    return (3.0 + gain**2 + 2.0 * gain) / 6.0


def test_fit_gain_recovers_linear_map():
    c = 0.8 * cmath.exp(0.3j)
    fit = fit_gain(INPUTS, [c * x for x in INPUTS])
    assert fit.gain == pytest.approx(0.8)
    assert fit.phase == pytest.approx(0.3)
    assert fit.linearity_residual == pytest.approx(0.0, abs=1e-12)
    assert abs(fit.offset) < 1e-12


def test_fit_gain_reports_offset():
    fit = fit_gain(INPUTS, [0.5 * x + 0.01 for x in INPUTS])
    assert fit.offset == pytest.approx(0.01)
    assert fit.linearity_residual > 0


@pytest.mark.parametrize(
    "inputs, outputs",
    [
        ([0j, 1.0], [0j, 0.5]),
        ([1.0, 2.0, 3.0], [0.5, 1.0, 1.5]),
        ([0j, 1.0, 2.0], [0j]),
    ],
)
def test_fit_gain_needs_vacuum_and_three_inputs(inputs, outputs):
    with pytest.raises(ChannelError):
        fit_gain(inputs, outputs)


def test_added_noise():
    assert added_noise(1.1) == pytest.approx(0.05)
    assert added_noise(0.9995) == 0.0
    with pytest.raises(ChannelError):
        added_noise(0.9)


def test_cardinal_states_are_normalized():
    states = cardinal_states(6)
    assert len(states) == 6
    assert all(state.norm() == pytest.approx(1.0) for state in states)


@pytest.mark.parametrize("gain", [1.0, 0.8, 0.4])
def test_pure_loss_fidelity(gain: float):
    expected = amplitude_damping_fidelity(gain)
    assert qubit_fidelity(gain, 1.0) == pytest.approx(expected, abs=1e-9)
    assert fq_haar(gain, 1.0) == pytest.approx(expected, abs=1e-9)


def test_noise_lowers_fidelity():
    assert qubit_fidelity(0.8, 1.11) < qubit_fidelity(0.8, 1.0)


def test_fidelity_needs_positive_gain():
    with pytest.raises(ChannelError):
        qubit_fidelity(0.0, 1.0)


def test_channel_metrics():
    outputs = [0.8 * x for x in INPUTS]
    metrics = channel_metrics(INPUTS, outputs, 1.0, dim=10, points=8)
    data = metrics.to_dict()

    assert metrics.fq == pytest.approx(amplitude_damping_fidelity(0.8), abs=1e-9)
    assert set(data) == {
        "gain",
        "phase",
        "var_sum",
        "fq",
        "fq_haar",
        "linearity_residual",
        "offset",
    }
    assert math.isclose(data["gain"], 0.8)
