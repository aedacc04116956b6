"""Post-processing of trajectories and analytic cross-checks."""
from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy import optimize

from spinmem.distributions.lineshape import FrequencyLine
from spinmem.dynamics.integrator import Trajectory
from spinmem.errors import MetricsError
from spinmem.metrics.channel import qubit_fidelity
from spinmem.model import (
    N_CAVITY,
    N_SPIN,
    EnsembleModel,
    MomentState,
    weighted_spin_series,
)
from spinmem.protocol.timing import ProtocolTiming

CLASSICAL_FIDELITY = 2.0 / 3.0
SWAP_ABSORPTION_TIME = 0.7e-6


@dataclasses.dataclass(frozen=True)
class FidComparison:
    times: np.ndarray
    simulated: np.ndarray
    analytic: np.ndarray

    @property
    def max_error(self) -> float:
        return float(np.max(np.abs(self.simulated - self.analytic)))


@dataclasses.dataclass(frozen=True)
class GainDecomposition:
    gain: float
    kappa_factor: float
    gamma_factor: float

    @property
    def intrinsic_gain(self) -> float:
        """Gain left after removing cavity and spin decay."""
        return self.gain / (self.kappa_factor * self.gamma_factor)

    def to_dict(self) -> dict:
        return {
            "gain": self.gain,
            "kappa_factor": self.kappa_factor,
            "gamma_factor": self.gamma_factor,
            "g0": self.intrinsic_gain,
        }


def fid_initial_state(model: EnsembleModel) -> MomentState:
    """Every sub-ensemble polarized along x, empty cavity, means only."""
    means = np.zeros(model.dim)
    means[N_CAVITY::N_SPIN] = model.n
    return MomentState(means, None, 0.0)


def total_lowering(trajectory: Trajectory) -> np.ndarray:
    """Unweighted ``<S_->`` summed over sub-ensembles."""
    spins = trajectory.means[:, N_CAVITY:].reshape(len(trajectory.times), -1, N_SPIN)
    return 0.5 * (spins[:, :, 0] - 1j * spins[:, :, 1]).sum(axis=1)


def fid_analytic_compare(
    trajectory: Trajectory,
    model: EnsembleModel,
    line: FrequencyLine,
    t_end: float | None = None,
) -> FidComparison:
    """Simulated free-induction decay against the closed-form triplet envelope.

    Errors are relative to ``|<S_-(0)>|`` over ``[0, t_end]``, by default five
    dephasing times ``2/w``.
    """
    if model.cavity_coupling:
        raise MetricsError("the free-induction check needs a cavity-decoupled model")
    s_minus = total_lowering(trajectory)
    if abs(s_minus[0]) == 0:
        raise MetricsError("the free-induction run starts without spin coherence")
    t_end = 5.0 * 2.0 / line.w if t_end is None else t_end
    keep = trajectory.times <= t_end * (1.0 + 1e-12)
    times = trajectory.times[keep]
    ratio = s_minus[keep] / s_minus[0]
    return FidComparison(times, ratio, line.fid_envelope(times).astype(complex))


def excess_noise_series(trajectory: Trajectory) -> dict[str, np.ndarray]:
    """Cavity ``var_sum`` and g-weighted spin variance over time (vacuum = 1)."""
    if trajectory.means_only:
        raise MetricsError("noise series need a run with covariances")
    return {
        "t_s": trajectory.times,
        "var_sum": trajectory.var_sum,
        "spin_var": trajectory.spin_var,
    }


def inversion_summary(
    trajectory: Trajectory, model: EnsembleModel, timing: ProtocolTiming
) -> dict[str, float]:
    """Effective excitation probability between the pulses and at the end."""
    p_eff = weighted_spin_series(trajectory.means, model)[:, 3]
    mid = trajectory.index_at(timing.primary_echo_time)
    return {"p_exc_eff_mid": float(p_eff[mid]), "p_exc_eff_end": float(p_eff[-1])}


def gain_decomposition(
    gain: float,
    kappa_min: float,
    gens: float,
    gamma_perp: float,
    t_mem: float,
    t_chirp: float,
) -> GainDecomposition:
    """Split the gain into cavity decay during transfers and spin decoherence."""
    kappa_factor = math.exp(-kappa_min * (math.pi / (2.0 * gens) + 2.0 * t_chirp))
    gamma_factor = math.exp(-gamma_perp * (t_mem - SWAP_ABSORPTION_TIME))
    return GainDecomposition(gain, kappa_factor, gamma_factor)


def extrapolate_gain(gain: float, delta_t: float, t2: float) -> float:
    """Gain after holding the excitation ``delta_t`` longer."""
    return gain * math.exp(-delta_t / t2)


def max_nonclassical_time(
    gain: float, var_sum: float, t_mem: float, t2: float, **fidelity_kwargs
) -> float:
    """Longest memory time whose extrapolated fidelity still beats 2/3."""

    def excess(delta_t: float) -> float:
        g = extrapolate_gain(gain, delta_t, t2)
        return qubit_fidelity(g, var_sum, **fidelity_kwargs) - CLASSICAL_FIDELITY

    if excess(0.0) <= 0:
        raise MetricsError(
            "the channel is already classical at this memory time",
            gain=gain,
            var_sum=var_sum,
        )
    hi = t2 * math.log(gain / 1e-3)
    if excess(hi) >= 0:
        raise MetricsError(
            "fidelity stays non-classical for vanishing gain", var_sum=var_sum
        )
    return t_mem + optimize.brentq(excess, 0.0, hi, xtol=1e-9)
