"""Tests for the ensemble model and the moment state."""
import math

import numpy as np
import pytest

from spinmem.errors import ModelError
from spinmem.model import (
    N_CAVITY,
    SQRT2,
    TWO_PI,
    EnsembleModel,
    MomentState,
    PhysicalParams,
    init_state,
    kappa_from_q,
    spin_index,
    spin_slice,
    sub_ensemble_of,
    weighted_spin_observables,
    weighted_spin_variance,
)


def test_kappa_from_q():
    assert kappa_from_q(TWO_PI * 2.9e9, 1e4) == pytest.approx(TWO_PI * 2.9e9 / 2e4)
    with pytest.raises(ModelError):
        kappa_from_q(1.0, 0.0)


def test_reference_params(params: PhysicalParams):
    assert params.g_bar == pytest.approx(TWO_PI * 12.5)
    assert params.kappa_min < params.kappa_max
    assert params.photon_energy > 0


@pytest.mark.parametrize("field", ["gens", "w", "gamma_perp", "p_peak"])
def test_params_reject_negative(params: PhysicalParams, field: str):
    with pytest.raises(ModelError) as excinfo:
        params.replace(**{field: -1.0})
    assert field in excinfo.value.details


def test_params_reject_inverted_kappa_range(params: PhysicalParams):
    with pytest.raises(ModelError):
        params.replace(kappa_min=params.kappa_max * 2)


def test_params_reject_nan(params: PhysicalParams):
    with pytest.raises(ModelError):
        params.replace(w=math.nan)


def test_sum_rules(three_spin_model: EnsembleModel):
    assert three_spin_model.size == 3
    assert three_spin_model.dim == N_CAVITY + 9
    assert three_spin_model.n_total == pytest.approx(3.0)


def test_sum_rule_violation(params: PhysicalParams):
    with pytest.raises(ModelError, match="n_total"):
        EnsembleModel.from_arrays(params, [params.g_bar], [0.0], [params.n_total / 2])
    with pytest.raises(ModelError, match="gens"):
        EnsembleModel.from_arrays(
            params, [2 * params.g_bar], [0.0], [params.n_total]
        )


def test_empty_model_rejected(params: PhysicalParams):
    with pytest.raises(ModelError):
        EnsembleModel([], params)


def test_decoupled_keeps_couplings(three_spin_model: EnsembleModel):
    decoupled = three_spin_model.decoupled()
    assert np.all(decoupled.g == three_spin_model.g)
    assert np.all(decoupled.g_dynamic == 0.0)
    assert np.all(three_spin_model.g_dynamic == three_spin_model.g)


def test_model_arrays_are_read_only(three_spin_model: EnsembleModel):
    with pytest.raises(ValueError):
        three_spin_model.g[0] = 0.0


def test_index_helpers():
    assert spin_slice(0) == slice(2, 5)
    assert spin_index(1, 2) == 7
    assert sub_ensemble_of(7) == (1, 2)
    with pytest.raises(IndexError):
        spin_index(0, 3)
    with pytest.raises(IndexError):
        sub_ensemble_of(1)


def test_init_state_ground(three_spin_model: EnsembleModel):
    state = init_state(three_spin_model, 1 + 2j)
    assert state.cavity_amplitude == pytest.approx(1 + 2j)
    assert state.var_sum == pytest.approx(1.0)
    assert np.all(state.spins[:, 2] == -1.0)
    assert weighted_spin_variance(state.cov, three_spin_model) == pytest.approx(1.0)

    obs = weighted_spin_observables(state, three_spin_model)
    assert obs.sx_eff == 0.0
    assert obs.p_exc == pytest.approx(0.0)
    assert obs.p_exc_eff == pytest.approx(0.0)


def test_means_only_state(three_spin_model: EnsembleModel):
    state = init_state(three_spin_model, 0.5, means_only=True)
    assert state.cov is None
    assert math.isnan(state.var_sum)
    assert state.cavity_block is None
    assert math.isnan(state.min_eigenvalue_ratio())


def test_replaced_cavity_clears_correlations(three_spin_model: EnsembleModel):
    state = init_state(three_spin_model)
    cov = np.array(state.cov)
    cov[0, 3] = cov[3, 0] = 0.3
    cov[2, 5] = cov[5, 2] = 0.1
    replaced = MomentState(state.means, cov, 2.0).with_replaced_cavity(0.25j)

    assert replaced.means[1] == pytest.approx(SQRT2 * 0.25)
    assert replaced.cov[0, 3] == 0.0
    assert replaced.cov[2, 5] == pytest.approx(0.1)
    assert replaced.time == 2.0


def test_state_rejects_bad_covariance():
    with pytest.raises(ModelError):
        MomentState(np.zeros(5), np.zeros((4, 4)))


def test_state_is_immutable(three_spin_model: EnsembleModel):
    state = init_state(three_spin_model)
    with pytest.raises(ValueError):
        state.means[0] = 1.0


def test_observables_reject_foreign_state(
    three_spin_model: EnsembleModel, resonant_model: EnsembleModel
):
    with pytest.raises(ModelError):
        weighted_spin_observables(init_state(resonant_model), three_spin_model)
