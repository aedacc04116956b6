import numpy as np
import pytest
import qutip

from spinmem.errors import ChannelError
from spinmem.oracle.gaussian_channel import (
    gaussian_channel_apply,
    loss_kraus,
    quadrature_moments,
    tail_population,
)

DIM = 20


@pytest.mark.parametrize("eta", [0.0, 0.3, 1.0])
def test_loss_kraus_is_trace_preserving(eta: float):
    total = sum(op.T @ op for op in loss_kraus(eta, 8))
    assert np.allclose(total, np.eye(8))


def test_pure_loss_keeps_coherent_states_coherent():
    rho = qutip.coherent_dm(DIM, 1.2)
    out = gaussian_channel_apply(rho, 0.7, 0.0)
    mean_a, var_x, var_p = quadrature_moments(out)

    assert mean_a == pytest.approx(0.84, abs=1e-8)
    assert var_x == pytest.approx(0.5, abs=1e-8)
    assert var_p == pytest.approx(0.5, abs=1e-8)


def test_added_noise_widens_quadratures():
    out = gaussian_channel_apply(qutip.fock_dm(DIM, 0), 1.0, 0.05)
    mean_a, var_x, var_p = quadrature_moments(out)

    assert abs(mean_a) < 1e-10
    assert var_x == pytest.approx(0.55, abs=1e-6)
    assert var_p == pytest.approx(0.55, abs=1e-6)
    assert out.tr() == pytest.approx(1.0, abs=1e-8)
    assert tail_population(out) < 1e-8


def test_accepts_plain_arrays():
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = 1.0
    out = gaussian_channel_apply(rho, 0.5, 0.0)
    assert out.full()[1, 1].real == pytest.approx(0.25)
    assert out.full()[0, 0].real == pytest.approx(0.75)


@pytest.mark.parametrize("gain, v_add", [(1.5, 0.0), (-0.1, 0.0), (0.5, -0.01)])
def test_rejects_unphysical_channels(gain: float, v_add: float):
    with pytest.raises(ChannelError):
        gaussian_channel_apply(qutip.fock_dm(4, 0), gain, v_add)
