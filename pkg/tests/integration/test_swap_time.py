import math

import pytest

from spinmem.model import EnsembleModel, PhysicalParams
from spinmem.protocol import ExperimentSetup, optimize_tswap, swap_residual

IDEAL_SWAP_S = 71.4e-9


@pytest.mark.integration_test
def test_lossless_single_class_swap():
    params = PhysicalParams.reference(kappa_min=1.0)
    model = EnsembleModel.from_arrays(
        params, [params.g_bar], [0.0], [params.n_total]
    )
    setup = ExperimentSetup(model, mode="means_only")

    t_swap = optimize_tswap(setup)

    assert t_swap == pytest.approx(math.pi / (2 * params.gens), abs=0.2e-9)
    assert t_swap == pytest.approx(IDEAL_SWAP_S, abs=0.2e-9)
    assert abs(swap_residual(setup, t_swap)) < 1e-2


@pytest.mark.integration_test
def test_reference_swap(reference_config):
    setup = reference_config.experiment_setup().replace(mode="means_only")

    t_swap = optimize_tswap(setup)
    residual = abs(swap_residual(setup, t_swap))

    assert t_swap == pytest.approx(73.7e-9, abs=1e-9)
    # about 14 % of the field stays behind, 2 % of the energy
    assert residual == pytest.approx(0.14, abs=0.05)
