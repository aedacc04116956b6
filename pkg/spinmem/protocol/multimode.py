"""Several coherent fields stored one after another and retrieved first-in first-out.

The storage of ``K`` modes spaced by ``s`` replaces parts 1-3 of the protocol;
the retrieval mirrors it in parts 19-21. Seen from the echo timing, the whole
train acts like one long swap of ``T_swap + (K-1)s`` whose effective cavity
time sits ``(K-1)s/2`` later than a single mode's, so every mode is held for
the same memory time.
"""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from spinmem.dynamics.controls import (
    ControlSchedule,
    DriveWaveform,
    SegmentEvent,
    SegmentSpec,
)
from spinmem.dynamics.integrator import Readout, Trajectory, integrate
from spinmem.errors import ScheduleError, TimingInfeasibleError
from spinmem.logs import logger
from spinmem.model import PhysicalParams, init_state, kappa_from_q
from spinmem.protocol.memory import (
    ExperimentSetup,
    calibrate_pulses,
    fix_t_cav_eff,
    optimize_tswap,
    pulse_drives,
)
from spinmem.protocol.schedule import StepTiers, build_schedule
from spinmem.protocol.timing import ProtocolTiming, TimingConstants, solve_timing

MAX_MODES = 10_000


@dataclasses.dataclass(frozen=True)
class MultimodePlan:
    """Tuned inputs shared by every run of one multi-mode configuration."""

    timing: ProtocolTiming
    drives: tuple[DriveWaveform, DriveWaveform]
    n_modes: int
    spacing: float
    kappa_between: float
    t_swap: float
    t_cav_eff: float


@dataclasses.dataclass(frozen=True)
class MultimodeResult:
    alphas_in: tuple[complex, ...]
    alphas_out: tuple[complex, ...]
    var_sums: tuple[float, ...]
    response: np.ndarray
    trajectory: Trajectory
    timing: ProtocolTiming

    @property
    def gains(self) -> np.ndarray:
        return np.abs(np.diag(self.response))

    @property
    def cross_talk(self) -> float:
        """Largest response of one mode to a unit input on another."""
        off = np.abs(self.response) * (1.0 - np.eye(len(self.response)))
        return float(off.max()) if off.size else 0.0


def extended_timing(
    t_mem: float,
    n_modes: int,
    spacing: float,
    t_swap: float,
    t_cav_eff: float,
    constants: TimingConstants = TimingConstants(),
) -> ProtocolTiming:
    extra = (n_modes - 1) * spacing
    return solve_timing(
        t_mem + extra, t_swap + extra, t_cav_eff + extra / 2.0, constants
    )


def mode_wait(
    spacing: float, t_swap: float, params: PhysicalParams, constants
) -> float:
    """Parked time between consecutive modes, with the cavity retuned inside it."""
    t_retune = (params.delta_cs_target - params.delta_cs_parked) / params.chirp_rate
    return spacing - (constants.t_delta_t + t_swap + constants.t_delta_p + t_retune)


def _wait_specs(
    prefix: str, wait: float, kappa_between: float, params, constants, steps
):
    parked, lo = params.delta_cs_parked, params.kappa_min
    t_k = constants.t_kappa
    return [
        SegmentSpec(
            f"{prefix}_ramp_up",
            t_k,
            (parked, parked),
            (lo, kappa_between),
            steps.coarse,
        ),
        SegmentSpec(
            f"{prefix}_hold",
            wait - 2 * t_k,
            (parked, parked),
            (kappa_between, kappa_between),
            steps.coarse,
        ),
        SegmentSpec(
            f"{prefix}_ramp_down",
            t_k,
            (parked, parked),
            (kappa_between, lo),
            steps.coarse,
        ),
    ]


def mode_trains(
    alphas: Sequence[complex],
    spacing: float,
    t_swap: float,
    kappa_between: float,
    params: PhysicalParams,
    constants: TimingConstants = TimingConstants(),
    steps: StepTiers = StepTiers(),
) -> tuple[list[SegmentSpec], list[SegmentSpec]]:
    """Segments replacing parts 1-3 (storage) and 19-21 (retrieval)."""
    n_modes = len(alphas)
    target, parked = params.delta_cs_target, params.delta_cs_parked
    lo = params.kappa_min
    t_retune = (target - parked) / params.chirp_rate
    wait = mode_wait(spacing, t_swap, params, constants)
    if n_modes > 1 and wait < 2 * constants.t_kappa:
        raise ScheduleError(
            "mode spacing too short: consecutive modes overlap",
            spacing_s=spacing,
            wait_s=wait,
        )
    c = constants

    storage = []
    for k, alpha in enumerate(alphas):
        storage += [
            SegmentSpec(
                f"store{k}_chirp",
                c.t_delta_t,
                (target, 0.0),
                (lo, lo),
                steps.fine,
                event=SegmentEvent("replace_cavity", k, complex(alpha)),
            ),
            SegmentSpec(f"store{k}_swap", t_swap, (0.0, 0.0), (lo, lo), steps.coarse),
            SegmentSpec(
                f"store{k}_park", c.t_delta_p, (0.0, parked), (lo, lo), steps.fine
            ),
        ]
        if k < n_modes - 1:
            storage += _wait_specs(f"store{k}", wait, kappa_between, params, c, steps)
            storage.append(
                SegmentSpec(
                    f"store{k}_retune", t_retune, (parked, target), (lo, lo), steps.fine
                )
            )

    retrieval = []
    for j in range(n_modes):
        retrieval += [
            SegmentSpec(
                f"read{j}_chirp", c.t_delta_p, (parked, 0.0), (lo, lo), steps.fine
            ),
            SegmentSpec(f"read{j}_swap", t_swap, (0.0, 0.0), (lo, lo), steps.coarse),
            SegmentSpec(
                f"read{j}_detune", c.t_delta_t, (0.0, target), (lo, lo), steps.fine
            ),
        ]
        readout = SegmentEvent("readout", j)
        if j < n_modes - 1:
            retrieval.append(
                SegmentSpec(
                    f"read{j}_park",
                    t_retune,
                    (target, parked),
                    (lo, lo),
                    steps.fine,
                    event=readout,
                )
            )
            retrieval += _wait_specs(f"read{j}", wait, kappa_between, params, c, steps)
        else:
            retrieval.append(
                SegmentSpec(
                    f"read{j}_out",
                    0.0,
                    (target, target),
                    (lo, lo),
                    steps.fine,
                    event=readout,
                )
            )
    return storage, retrieval


def plan_multimode(
    setup: ExperimentSetup,
    t_mem: float,
    n_modes: int,
    spacing: float,
    q_between: float = 1e3,
) -> MultimodePlan:
    if n_modes < 1:
        raise ValueError("at least one mode is needed")
    t_swap = setup.t_swap if setup.t_swap is not None else optimize_tswap(setup)
    a_max = setup.a_max if setup.a_max is not None else calibrate_pulses(setup)
    drives = pulse_drives(setup, a_max)
    t_cav = setup.t_cav_eff
    if t_cav is None:
        t_cav = fix_t_cav_eff(setup, t_mem, t_swap, drives)
    timing = extended_timing(t_mem, n_modes, spacing, t_swap, t_cav, setup.constants)
    kappa_between = kappa_from_q(setup.model.params.omega_c, q_between)
    return MultimodePlan(timing, drives, n_modes, spacing, kappa_between, t_swap, t_cav)


def multimode_schedule(
    alphas: Sequence[complex], plan: MultimodePlan, setup: ExperimentSetup
) -> ControlSchedule:
    params = setup.model.params
    storage, retrieval = mode_trains(
        alphas,
        plan.spacing,
        plan.t_swap,
        plan.kappa_between,
        params,
        setup.constants,
        setup.steps,
    )
    return build_schedule(
        plan.timing, plan.drives, params, setup.steps, storage, retrieval
    )


def _run_train(
    setup: ExperimentSetup, plan: MultimodePlan, alphas: tuple[complex, ...], mode: str
) -> Trajectory:
    schedule = multimode_schedule(alphas, plan, setup)
    model = setup.model
    means_only = mode == "means_only"
    return integrate(
        init_state(model, 0j, means_only=means_only),
        schedule,
        model,
        mode=mode,
        covariance_coupling=setup.covariance_coupling,
        sample_stride=setup.sample_stride,
        field_limit=setup.field_limit,
        check_psd=not means_only,
    )


def _readout_values(readouts: Sequence[Readout], n_modes: int) -> np.ndarray:
    values = np.zeros(n_modes, dtype=complex)
    for readout in readouts:
        values[readout.mode] = readout.alpha
    return values


def run_multimode(
    alphas: Sequence[complex],
    spacing: float,
    t_mem: float,
    setup: ExperimentSetup,
    q_between: float = 1e3,
    workers: int = 1,
    plan: MultimodePlan | None = None,
) -> MultimodeResult:
    """Store ``alphas`` in sequence and retrieve them in the same order.

    Besides the run with the requested inputs, one means-only run per mode
    with a unit input on that mode (and one with all modes empty) yields the
    linear response matrix used for the cross-talk.
    """
    alphas = tuple(complex(a) for a in alphas)
    n_modes = len(alphas)
    if plan is None:
        plan = plan_multimode(setup, t_mem, n_modes, spacing, q_between)

    one_hot = [
        tuple(1.0 + 0j if j == k else 0j for j in range(n_modes))
        for k in range(n_modes)
    ]
    jobs = [(alphas, setup.mode), ((0j,) * n_modes, "means_only")]
    jobs += [(inputs, "means_only") for inputs in one_hot]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_train, setup, plan, a, m) for a, m in jobs]
            trajectories = [f.result() for f in futures]
    else:
        trajectories = [_run_train(setup, plan, a, m) for a, m in jobs]

    main, vacuum, *responses = trajectories
    base = _readout_values(vacuum.readouts, n_modes)
    response = np.column_stack(
        [_readout_values(t.readouts, n_modes) - base for t in responses]
    )
    outputs = _readout_values(main.readouts, n_modes)
    var_sums = [math.nan] * n_modes
    for readout in main.readouts:
        var_sums[readout.mode] = readout.var_sum

    result = MultimodeResult(
        alphas_in=alphas,
        alphas_out=tuple(complex(v) for v in outputs),
        var_sums=tuple(var_sums),
        response=response,
        trajectory=main,
        timing=plan.timing,
    )
    logger.info(
        f"{n_modes} modes, gains {np.round(result.gains, 4).tolist()},"
        f" cross-talk {result.cross_talk:.3%}",
        title="Multi-mode run",
    )
    return result


def capacity(
    t_mem: float,
    spacing: float,
    t_swap: float,
    t_cav_eff: float,
    params: PhysicalParams,
    constants: TimingConstants = TimingConstants(),
) -> int:
    """Largest number of modes the echo timing can hold at this spacing.

    The extended part 18 must stay nonnegative, and the spread of primary
    echoes, ``(K-1)s``, must fit in the parked part 11.
    """
    limit = MAX_MODES
    if mode_wait(spacing, t_swap, params, constants) < 2 * constants.t_kappa:
        limit = 1
    count = 0
    for n_modes in range(1, limit + 1):
        try:
            timing = extended_timing(
                t_mem, n_modes, spacing, t_swap, t_cav_eff, constants
            )
        except TimingInfeasibleError:
            break
        if (n_modes - 1) * spacing > timing.duration(11):
            break
        count = n_modes
    return count
