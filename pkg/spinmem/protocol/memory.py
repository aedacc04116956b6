"""Single-mode storage and retrieval, with the tuning steps it depends on."""
from __future__ import annotations

import dataclasses
import math
from typing import Literal

import numpy as np
from scipy import optimize

from spinmem.dynamics.controls import ControlSchedule, DriveWaveform
from spinmem.dynamics.drive import (
    SechPulse,
    calibrate_pulse_amplitude,
    synthesize_drive,
)
from spinmem.dynamics.integrator import Trajectory, integrate
from spinmem.errors import OptimizationError, RevivalNotFoundError
from spinmem.logs import logger
from spinmem.model import ControlSample, EnsembleModel, init_state, weighted_spin_series
from spinmem.protocol.schedule import (
    StepTiers,
    build_schedule,
    revival_schedule,
    storage_schedule,
)
from spinmem.protocol.timing import ProtocolTiming, TimingConstants, solve_timing

REVIVAL_MARGIN = 0.2e-6
T_CAV_TOLERANCE = 1e-9
MAX_T_CAV_ITERATIONS = 3
SWAP_XATOL = 0.1e-9


@dataclasses.dataclass(frozen=True)
class ExperimentSetup:
    """Everything a protocol run needs besides the input field and memory time.

    ``t_swap``, ``t_cav_eff`` and ``a_max`` are tuned on demand when left unset.
    """

    model: EnsembleModel
    constants: TimingConstants = TimingConstants()
    pulse_shape: SechPulse = SechPulse.from_chirp(3.5, 2 * math.pi * 7.5e6, 1e-6)
    steps: StepTiers = StepTiers()
    mode: Literal["full", "means_only"] = "full"
    covariance_coupling: bool = False
    sample_stride: float = 1e-9
    field_limit: float = 10.0
    t_swap: float | None = None
    t_cav_eff: float | None = None
    a_max: tuple[float, float] | None = None

    def replace(self, **changes) -> "ExperimentSetup":
        return dataclasses.replace(self, **changes)

    @property
    def pulse_control(self) -> ControlSample:
        """Controls during the inversion pulses: resonant cavity at low Q."""
        return ControlSample(0.0, self.model.params.kappa_max)


@dataclasses.dataclass(frozen=True)
class PreparedProtocol:
    timing: ProtocolTiming
    drives: tuple[DriveWaveform, DriveWaveform]
    schedule: ControlSchedule
    a_max: tuple[float, float]


@dataclasses.dataclass(frozen=True)
class MemoryResult:
    trajectory: Trajectory
    alpha_in: complex
    alpha_out: complex
    cov_out: np.ndarray | None
    timing: ProtocolTiming

    @property
    def var_sum(self) -> float:
        if self.cov_out is None:
            return math.nan
        return 0.5 * float(self.cov_out[0, 0] + self.cov_out[1, 1])


def swap_residual(
    setup: ExperimentSetup, t_swap: float, alpha: complex = 1.0
) -> complex:
    """Cavity amplitude left after parts 1-3 for an input ``alpha``."""
    model = setup.model
    schedule = storage_schedule(t_swap, model.params, setup.constants, setup.steps)
    trajectory = integrate(
        init_state(model, alpha, means_only=True),
        schedule,
        model,
        mode="means_only",
        sample_stride=schedule.duration or 1.0,
    )
    return trajectory.final_state.cavity_amplitude


def optimize_tswap(setup: ExperimentSetup) -> float:
    """Swap duration that empties the cavity best after the storage chirp."""
    gens = setup.model.params.gens
    t_ideal = math.pi / (2.0 * gens)
    lo, hi = 0.5 * t_ideal, 1.5 * t_ideal

    def residual_energy(t_swap: float) -> float:
        return abs(swap_residual(setup, t_swap)) ** 2

    result = optimize.minimize_scalar(
        residual_energy,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": SWAP_XATOL},
    )
    t_swap = float(result.x)
    if min(t_swap - lo, hi - t_swap) < 2 * SWAP_XATOL:
        raise OptimizationError(
            "swap-time minimum sits on the search bracket",
            t_swap_s=t_swap,
            bracket_s=[lo, hi],
        )
    logger.info(
        f"T_swap={t_swap * 1e9:.2f} ns (pi/2gens={t_ideal * 1e9:.2f} ns),"
        f" residual energy {result.fun:.3%}",
        title="Swap optimization",
    )
    return t_swap


def calibrate_pulses(setup: ExperimentSetup) -> tuple[float, float]:
    """Amplitudes of the two inversion pulses at the configured peak power."""
    params = setup.model.params
    amplitudes = []
    for sign in ("from_ground", "from_excited"):
        shape = dataclasses.replace(setup.pulse_shape, sign=sign)
        amplitudes.append(
            calibrate_pulse_amplitude(
                params.p_peak, shape, setup.pulse_control, setup.model, setup.steps.fine
            )
        )
    return amplitudes[0], amplitudes[1]


def pulse_drives(
    setup: ExperimentSetup, a_max: tuple[float, float]
) -> tuple[DriveWaveform, DriveWaveform]:
    drives = []
    for sign, amplitude in zip(("from_ground", "from_excited"), a_max):
        shape = dataclasses.replace(setup.pulse_shape, sign=sign, a_max=amplitude)
        drives.append(
            synthesize_drive(shape, setup.pulse_control, setup.model, setup.steps.fine)
        )
    return drives[0], drives[1]


def locate_revival(
    times: np.ndarray, signal: np.ndarray, t_lo: float, t_hi: float
) -> float:
    """Time of the signal maximum inside ``[t_lo, t_hi]``, refined by a parabola."""
    inside = np.flatnonzero((times >= t_lo) & (times <= t_hi))
    if len(inside) < 3:
        raise RevivalNotFoundError(
            "revival window holds too few samples", t_lo=t_lo, t_hi=t_hi
        )
    window = signal[inside]
    peak = int(np.argmax(window))
    spread = float(window.max() - window.min())
    if spread <= 1e-12 * max(float(np.abs(window).max()), 1e-300):
        raise RevivalNotFoundError(
            "no spin revival in the window", t_lo=t_lo, t_hi=t_hi
        )
    if peak == 0 or peak == len(window) - 1:
        raise RevivalNotFoundError(
            "spin coherence peaks at the window edge",
            t_lo=t_lo,
            t_hi=t_hi,
            t_peak=float(times[inside[peak]]),
        )
    t = times[inside[peak - 1 : peak + 2]]
    y = window[peak - 1 : peak + 2]
    coeffs = np.polyfit(t - t[1], y, 2)
    if coeffs[0] >= 0:
        return float(t[1])
    return float(t[1] - coeffs[1] / (2.0 * coeffs[0]))


def observed_revival(
    setup: ExperimentSetup,
    timing: ProtocolTiming,
    drives: tuple[DriveWaveform, DriveWaveform],
) -> float:
    """Peak time of the stored coherence with the cavity kept parked."""
    model = setup.model
    c = timing.constants
    extension = timing.t_swap + c.t_delta_t + c.t_delta_p + REVIVAL_MARGIN
    schedule = revival_schedule(timing, drives, model.params, setup.steps, extension)

    series = []
    for alpha in (1.0, 0.0):
        trajectory = integrate(
            init_state(model, alpha, means_only=True),
            schedule,
            model,
            mode="means_only",
            sample_stride=setup.sample_stride,
        )
        series.append(trajectory)
    # subtract the spin response to the pulses alone
    diff = series[0].means - series[1].means
    spin = weighted_spin_series(diff, model)
    coherence = np.hypot(spin[:, 0], spin[:, 1])
    part18 = schedule.segment("part18")
    return locate_revival(series[0].times, coherence, part18.t_start, part18.t_end)


def fix_t_cav_eff(
    setup: ExperimentSetup,
    t_mem: float,
    t_swap: float,
    drives: tuple[DriveWaveform, DriveWaveform],
    guess: float | None = None,
) -> float:
    """Effective cavity time consistent with the observed spin revival."""
    t_cav = t_swap / 2.0 if guess is None else guess
    for iteration in range(1, MAX_T_CAV_ITERATIONS + 1):
        timing = solve_timing(t_mem, t_swap, t_cav, setup.constants)
        t_peak = observed_revival(setup, timing, drives)
        t_new = t_peak - timing.t_echo
        logger.info(
            f"iteration {iteration}: T_cav_eff {t_cav * 1e9:.2f}"
            f" -> {t_new * 1e9:.2f} ns",
            title="Echo timing",
        )
        converged = abs(t_new - t_cav) < T_CAV_TOLERANCE
        t_cav = t_new
        if converged:
            break
    else:
        logger.warn(
            f"T_cav_eff still moving after {MAX_T_CAV_ITERATIONS} iterations,"
            f" keeping {t_cav * 1e9:.2f} ns",
            title="Echo timing",
        )
    return t_cav


def prepare_protocol(setup: ExperimentSetup, t_mem: float) -> PreparedProtocol:
    """Tune whatever the setup leaves open and build the schedule."""
    t_swap = setup.t_swap if setup.t_swap is not None else optimize_tswap(setup)
    a_max = setup.a_max if setup.a_max is not None else calibrate_pulses(setup)
    drives = pulse_drives(setup, a_max)
    t_cav = setup.t_cav_eff
    if t_cav is None:
        t_cav = fix_t_cav_eff(setup, t_mem, t_swap, drives)
    timing = solve_timing(t_mem, t_swap, t_cav, setup.constants)
    schedule = build_schedule(timing, drives, setup.model.params, setup.steps)
    return PreparedProtocol(timing, drives, schedule, a_max)


def run_memory(
    alpha_in: complex,
    t_mem: float,
    setup: ExperimentSetup,
    prepared: PreparedProtocol | None = None,
) -> MemoryResult:
    """Store ``alpha_in``, hold it for ``t_mem`` and read the cavity back."""
    if prepared is None:
        prepared = prepare_protocol(setup, t_mem)
    model = setup.model
    means_only = setup.mode == "means_only"
    trajectory = integrate(
        init_state(model, alpha_in, means_only=means_only),
        prepared.schedule,
        model,
        mode=setup.mode,
        covariance_coupling=setup.covariance_coupling,
        sample_stride=setup.sample_stride,
        field_limit=setup.field_limit,
        check_psd=not means_only,
    )
    final = trajectory.final_state
    result = MemoryResult(
        trajectory=trajectory,
        alpha_in=complex(alpha_in),
        alpha_out=final.cavity_amplitude,
        cov_out=final.cavity_block,
        timing=prepared.timing,
    )
    logger.info(
        f"alpha_in={complex(alpha_in):.3g} -> alpha_out={result.alpha_out:.4g},"
        f" var_sum={result.var_sum:.4g}",
        title="Memory run",
    )
    return result
