"""Input/output figures of merit of the memory channel."""
from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np
import qutip

from spinmem.errors import ChannelError
from spinmem.logs import logger
from spinmem.oracle.gaussian_channel import (
    DEFAULT_DIM,
    DEFAULT_POINTS,
    gaussian_channel_apply,
    tail_population,
)

VAR_SUM_SLACK = 1e-3
TAIL_TOLERANCE = 1e-8


@dataclasses.dataclass(frozen=True)
class GainFit:
    gain: float
    phase: float
    linearity_residual: float
    offset: complex


@dataclasses.dataclass(frozen=True)
class ChannelMetrics:
    gain: float
    phase: float
    var_sum: float
    fq: float
    fq_haar: float
    linearity_residual: float
    offset: complex = 0j

    def to_dict(self) -> dict:
        return {
            "gain": self.gain,
            "phase": self.phase,
            "var_sum": self.var_sum,
            "fq": self.fq,
            "fq_haar": self.fq_haar,
            "linearity_residual": self.linearity_residual,
            "offset": self.offset,
        }


def fit_gain(inputs: Sequence[complex], outputs: Sequence[complex]) -> GainFit:
    """Least-squares scalar map ``out = c * in``; gain ``|c|``, phase ``arg c``."""
    x = np.asarray(inputs, dtype=complex)
    y = np.asarray(outputs, dtype=complex)
    if x.shape != y.shape:
        raise ChannelError(
            "inputs and outputs differ in length", n_in=len(x), n_out=len(y)
        )
    distinct = np.unique(np.round(x, 12))
    if len(distinct) < 3 or not np.any(np.abs(x) == 0):
        raise ChannelError(
            "gain fit needs at least 3 distinct inputs including vacuum",
            n_distinct=len(distinct),
        )
    c = complex(np.vdot(x, y) / np.vdot(x, x).real)
    design = np.column_stack([x, np.ones_like(x)])
    (_, offset), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.max(np.abs(y - c * x)))
    return GainFit(abs(c), float(np.angle(c)), residual, complex(offset))


def added_noise(var_sum: float) -> float:
    """Per-quadrature added variance implied by the retrieved ``var_sum``."""
    if var_sum < 1.0 - VAR_SUM_SLACK:
        raise ChannelError(
            "retrieved variance is below the vacuum level", var_sum=var_sum
        )
    return max(var_sum - 1.0, 0.0) / 2.0


def _qubit_state(theta: float, phi: float, dim: int) -> qutip.Qobj:
    return (
        math.cos(theta / 2) * qutip.basis(dim, 0)
        + np.exp(1j * phi) * math.sin(theta / 2) * qutip.basis(dim, 1)
    )


def cardinal_states(dim: int) -> list[qutip.Qobj]:
    """The six Bloch-axis states in the span of zero and one photon."""
    zero, one = qutip.basis(dim, 0), qutip.basis(dim, 1)
    r = 1.0 / math.sqrt(2.0)
    return [
        zero,
        one,
        r * (zero + one),
        r * (zero - one),
        r * (zero + 1j * one),
        r * (zero - 1j * one),
    ]


def _state_fidelity(psi: qutip.Qobj, gain: float, v_add: float, points: int) -> float:
    rho = gaussian_channel_apply(qutip.ket2dm(psi), gain, v_add, points)
    tail = tail_population(rho)
    if tail > TAIL_TOLERANCE:
        logger.warn(f"Fock truncation holds {tail:.2e} population in the top level")
    return float(np.real(qutip.expect(rho, psi)))


def qubit_fidelity(
    gain: float, var_sum: float, dim: int = DEFAULT_DIM, points: int = DEFAULT_POINTS
) -> float:
    """Average fidelity of the six cardinal Fock-qubit states through the channel."""
    if not 0.0 < gain <= 1.0 + 1e-12:
        raise ChannelError("gain must lie in (0, 1]", gain=gain)
    v_add = added_noise(var_sum)
    values = [_state_fidelity(psi, gain, v_add, points) for psi in cardinal_states(dim)]
    return float(np.mean(values))


def fq_haar(
    gain: float,
    var_sum: float,
    dim: int = DEFAULT_DIM,
    points: int = DEFAULT_POINTS,
    n_theta: int = 8,
    n_phi: int = 8,
) -> float:
    """Fidelity averaged uniformly over the Bloch sphere."""
    if not 0.0 < gain <= 1.0 + 1e-12:
        raise ChannelError("gain must lie in (0, 1]", gain=gain)
    v_add = added_noise(var_sum)
    nodes, weights = np.polynomial.legendre.leggauss(n_theta)
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    total = 0.0
    for cos_theta, w in zip(nodes, weights):
        theta = math.acos(cos_theta)
        for phi in phis:
            psi = _qubit_state(theta, phi, dim)
            total += w / (2.0 * n_phi) * _state_fidelity(psi, gain, v_add, points)
    return float(total)


def channel_metrics(
    inputs: Sequence[complex],
    outputs: Sequence[complex],
    var_sum: float,
    dim: int = DEFAULT_DIM,
    points: int = DEFAULT_POINTS,
) -> ChannelMetrics:
    fit = fit_gain(inputs, outputs)
    gain = min(fit.gain, 1.0)
    return ChannelMetrics(
        gain=fit.gain,
        phase=fit.phase,
        var_sum=var_sum,
        fq=qubit_fidelity(gain, var_sum, dim, points),
        fq_haar=fq_haar(gain, var_sum, dim, points),
        linearity_residual=fit.linearity_residual,
        offset=fit.offset,
    )
