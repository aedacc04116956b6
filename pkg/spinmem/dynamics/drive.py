"""Drive fields that produce a prescribed hyperbolic-secant cavity field.

The cavity equation is inverted for the external drive:
``beta = [da/dt + (kappa + i delta_cs) a + i sum_m g_m S_-^(m)] / sqrt(2 kappa)``,
where the spin term comes from integrating the spin equations under the
prescribed field first.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Literal

import numpy as np
from scipy import optimize

from spinmem.dynamics.blocks import MomentEquations
from spinmem.dynamics.controls import DriveWaveform, aligned_step
from spinmem.errors import CalibrationError, PowerConstraintError, ScheduleError
from spinmem.logs import logger
from spinmem.model import N_CAVITY, N_SPIN, SQRT2, ControlSample, EnsembleModel

Sign = Literal["from_ground", "from_excited"]
DEFAULT_DT = 5e-11
POWER_RTOL = 1e-3
MAX_DOUBLINGS = 20


@dataclasses.dataclass(frozen=True)
class SechPulse:
    """``a_max sech(beta t)^(1 + i mu)`` on ``[-duration/2, duration/2]``."""

    a_max: float
    beta_sech: float
    mu: float
    duration: float
    sign: Sign = "from_ground"

    def __post_init__(self) -> None:
        if self.beta_sech <= 0 or self.duration <= 0:
            raise ValueError("sech pulse needs beta_sech > 0 and duration > 0")
        if self.sign not in ("from_ground", "from_excited"):
            raise ValueError(f"unknown pulse sign {self.sign!r}")

    @classmethod
    def from_chirp(
        cls, mu: float, mu_beta: float, duration: float, sign: Sign = "from_ground"
    ) -> "SechPulse":
        """Unit-amplitude pulse whose chirp satisfies ``mu * beta_sech = mu_beta``."""
        return cls(1.0, mu_beta / mu, mu, duration, sign)

    def with_amplitude(self, a_max: float) -> "SechPulse":
        return dataclasses.replace(self, a_max=a_max)

    def field(self, t_local) -> np.ndarray:
        """Cavity amplitude at time ``t_local`` from the pulse start."""
        bt = self.beta_sech * (np.asarray(t_local, float) - self.duration / 2.0)
        log_sech = -np.logaddexp(bt, -bt) + math.log(2.0)
        return self.a_max * np.exp((1.0 + 1j * self.mu) * log_sech)

    def field_derivative(self, t_local) -> np.ndarray:
        bt = self.beta_sech * (np.asarray(t_local, float) - self.duration / 2.0)
        rate = (1.0 + 1j * self.mu) * self.beta_sech
        return -self.field(t_local) * rate * np.tanh(bt)


def _spin_trajectory(
    pulse: SechPulse, ctrl: ControlSample, model: EnsembleModel, times: np.ndarray
) -> np.ndarray:
    """Spin means at ``times`` (uniform grid) under the prescribed cavity field."""
    equations = MomentEquations(model)
    spins = np.zeros(N_SPIN * model.size)
    spins[2::N_SPIN] = -model.n if pulse.sign == "from_ground" else model.n
    y = np.concatenate([np.zeros(N_CAVITY), spins])

    def rhs(t: float, state: np.ndarray) -> np.ndarray:
        a = complex(pulse.field(t))
        state[0], state[1] = SQRT2 * a.real, SQRT2 * a.imag
        out = equations.mean_rhs(state, None, ctrl)
        out[:N_CAVITY] = 0.0
        return out

    h = times[1] - times[0]
    out = np.empty((len(times), len(spins)))
    out[0] = spins
    for k, t in enumerate(times[:-1]):
        k1 = rhs(t, y.copy())
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y[N_CAVITY:]
    return out


def _drive_samples(
    pulse: SechPulse, ctrl: ControlSample, model: EnsembleModel, dt: float
) -> DriveWaveform:
    if ctrl.kappa <= 0:
        raise ScheduleError("drive synthesis needs kappa > 0", kappa=ctrl.kappa)
    n_steps, h = aligned_step(pulse.duration, dt)
    spacing = h / 2.0
    times = spacing * np.arange(2 * n_steps + 1)

    a = pulse.field(times)
    beta = pulse.field_derivative(times) + (ctrl.kappa + 1j * ctrl.delta_cs) * a
    if np.any(model.n > 0) and np.any(model.g_dynamic > 0):
        spins = _spin_trajectory(pulse, ctrl, model, times)
        spins = spins.reshape(len(times), -1, N_SPIN)
        s_minus = 0.5 * (spins[:, :, 0] - 1j * spins[:, :, 1])
        beta = beta + 1j * (s_minus @ model.g_dynamic)
    return DriveWaveform(spacing, beta / math.sqrt(2.0 * ctrl.kappa))


def synthesize_drive(
    pulse: SechPulse,
    ctrl_base: ControlSample,
    model: EnsembleModel,
    dt: float = DEFAULT_DT,
    check_power: bool = True,
) -> DriveWaveform:
    """Drive samples on the stage grid (spacing ``h/2``) of a pulse segment."""
    drive = _drive_samples(pulse, ctrl_base, model, dt)
    if check_power:
        power = drive.peak_power(model.params.photon_energy)
        if power > model.params.p_peak * (1.0 + POWER_RTOL):
            raise PowerConstraintError(
                "drive exceeds the peak power",
                peak_power_w=power,
                p_peak_w=model.params.p_peak,
            )
    return drive


def calibrate_pulse_amplitude(
    p_peak: float,
    pulse_shape: SechPulse,
    ctrl: ControlSample,
    model: EnsembleModel,
    dt: float = DEFAULT_DT,
) -> float:
    """Amplitude ``a_max`` whose synthesized drive peaks at ``p_peak`` watts."""
    if p_peak <= 0:
        raise CalibrationError("p_peak must be positive", p_peak_w=p_peak)
    energy = model.params.photon_energy

    def power(a_max: float) -> float:
        drive = _drive_samples(pulse_shape.with_amplitude(a_max), ctrl, model, dt)
        return drive.peak_power(energy)

    # without spins the drive is linear in a_max
    free = _drive_samples(pulse_shape.with_amplitude(1.0), ctrl, model.decoupled(), dt)
    hi = math.sqrt(p_peak / free.peak_power(energy))
    for _ in range(MAX_DOUBLINGS):
        if power(hi) > p_peak:
            break
        hi *= 2.0
    else:
        raise CalibrationError(
            "could not bracket the peak power", p_peak_w=p_peak, a_max=hi
        )

    a_max = optimize.bisect(lambda a: power(a) - p_peak, 0.0, hi, xtol=hi * 1e-4)
    logger.info(
        f"a_max={a_max:.6g} for P_peak={p_peak * 1e6:.4g} uW ({pulse_shape.sign})",
        title="Pulse calibration",
    )
    return float(a_max)
