"""Cavity detuning, decay rate and drive for every part of the protocol."""
from __future__ import annotations

import dataclasses
import math
from typing import Sequence

from spinmem.dynamics.controls import ControlSchedule, DriveWaveform, SegmentSpec
from spinmem.errors import ScheduleError
from spinmem.model import PhysicalParams
from spinmem.protocol.timing import ProtocolTiming, TimingConstants

CHIRP_PARTS = frozenset({1, 3, 6, 9, 13, 16, 19, 21})
PULSE_PARTS = frozenset({7, 14})
PARKED_PARTS = frozenset({4, 18})
STORAGE_PARTS = (1, 2, 3)
RETRIEVAL_PARTS = (19, 20, 21)


@dataclasses.dataclass(frozen=True)
class StepTiers:
    """Integration steps for chirps and pulses, long parked holds, and the rest."""

    fine: float = 5e-11
    coarse: float = 2e-10
    parked: float = 1e-9

    def for_part(self, part: int) -> float:
        if part in CHIRP_PARTS or part in PULSE_PARTS:
            return self.fine
        if part in PARKED_PARTS:
            return self.parked
        return self.coarse

    def scaled(self, factor: float) -> "StepTiers":
        return StepTiers(self.fine * factor, self.coarse * factor, self.parked * factor)


def part_label(part: int) -> str:
    return f"part{part:02d}"


def _detuning_profile(params: PhysicalParams) -> dict[int, tuple[float, float]]:
    target, parked = params.delta_cs_target, params.delta_cs_parked
    at = {
        "t": (target, target),
        "0": (0.0, 0.0),
        "p": (parked, parked),
        "t0": (target, 0.0),
        "0p": (0.0, parked),
        "p0": (parked, 0.0),
        "0t": (0.0, target),
    }
    # fmt: off
    pattern = (
        "t0", "0", "0p", "p", "p", "p0", "0", "0", "0p", "p", "p",
        "p", "p0", "0", "0", "0p", "p", "p", "p0", "0", "0t",
    )
    # fmt: on
    return {part: at[key] for part, key in enumerate(pattern, start=1)}


def _kappa_profile(params: PhysicalParams) -> dict[int, tuple[float, float]]:
    lo, hi = params.kappa_min, params.kappa_max
    profile = {}
    for part in range(1, 22):
        if part in (5, 12):
            profile[part] = (lo, hi)
        elif part in (10, 17):
            profile[part] = (hi, lo)
        elif 6 <= part <= 9 or 13 <= part <= 16:
            profile[part] = (hi, hi)
        else:
            profile[part] = (lo, lo)
    return profile


def part_specs(
    timing: ProtocolTiming,
    params: PhysicalParams,
    steps: StepTiers,
    drives: tuple[DriveWaveform | None, DriveWaveform | None] = (None, None),
    parts: Sequence[int] = range(1, 22),
) -> list[SegmentSpec]:
    detuning, kappa = _detuning_profile(params), _kappa_profile(params)
    pulse_drive = {7: drives[0], 14: drives[1]}
    specs = []
    for part in parts:
        drive = pulse_drive.get(part)
        duration = timing.duration(part)
        if drive is not None and not math.isclose(
            drive.duration, duration, rel_tol=1e-9
        ):
            raise ScheduleError(
                f"drive of {part_label(part)} does not match the pulse duration",
                drive_s=drive.duration,
                duration_s=duration,
            )
        specs.append(
            SegmentSpec(
                part_label(part),
                duration,
                detuning[part],
                kappa[part],
                steps.for_part(part),
                drive,
            )
        )
    return specs


def check_schedule(schedule: ControlSchedule, params: PhysicalParams) -> None:
    schedule.check_chirp_rate(params.chirp_rate)
    schedule.check_kappa_range(params.kappa_min, params.kappa_max)


def build_schedule(
    timing: ProtocolTiming,
    drives: tuple[DriveWaveform | None, DriveWaveform | None],
    params: PhysicalParams,
    steps: StepTiers = StepTiers(),
    storage_train: Sequence[SegmentSpec] | None = None,
    retrieval_train: Sequence[SegmentSpec] | None = None,
) -> ControlSchedule:
    """The full 21-part schedule.

    ``storage_train`` and ``retrieval_train`` replace parts 1-3 and 19-21
    (multi-mode runs); they must span the same time as the parts they replace.
    """
    specs = []
    if storage_train is None:
        specs += part_specs(timing, params, steps, drives, STORAGE_PARTS)
    else:
        _check_train(storage_train, timing, STORAGE_PARTS)
        specs += storage_train
    specs += part_specs(timing, params, steps, drives, range(4, 19))
    if retrieval_train is None:
        specs += part_specs(timing, params, steps, drives, RETRIEVAL_PARTS)
    else:
        _check_train(retrieval_train, timing, RETRIEVAL_PARTS)
        specs += retrieval_train

    schedule = ControlSchedule.from_specs(specs)
    check_schedule(schedule, params)
    return schedule


def _check_train(train: Sequence[SegmentSpec], timing: ProtocolTiming, parts) -> None:
    expected = math.fsum(timing.duration(p) for p in parts)
    actual = math.fsum(spec.duration for spec in train)
    if not math.isclose(actual, expected, rel_tol=1e-9, abs_tol=1e-15):
        raise ScheduleError(
            "mode train does not fill its protocol window",
            expected_s=expected,
            actual_s=actual,
        )


def revival_schedule(
    timing: ProtocolTiming,
    drives: tuple[DriveWaveform | None, DriveWaveform | None],
    params: PhysicalParams,
    steps: StepTiers,
    extension: float,
) -> ControlSchedule:
    """Parts 1-18 with part 18 prolonged by ``extension``.

    The cavity stays parked through the spin revival, so the refocused
    coherence can be observed without being absorbed.
    """
    specs = part_specs(timing, params, steps, drives, range(1, 19))
    specs[-1] = dataclasses.replace(specs[-1], duration=specs[-1].duration + extension)
    schedule = ControlSchedule.from_specs(specs)
    check_schedule(schedule, params)
    return schedule


def storage_schedule(
    t_swap: float,
    params: PhysicalParams,
    constants: TimingConstants = TimingConstants(),
    steps: StepTiers = StepTiers(),
) -> ControlSchedule:
    """Parts 1-3 only: chirp to resonance, swap, chirp to the parked detuning."""
    detuning, kappa = _detuning_profile(params), _kappa_profile(params)
    durations = (constants.t_delta_t, t_swap, constants.t_delta_p)
    specs = [
        SegmentSpec(
            part_label(part),
            duration,
            detuning[part],
            kappa[part],
            steps.for_part(part),
        )
        for part, duration in zip(STORAGE_PARTS, durations)
    ]
    schedule = ControlSchedule.from_specs(specs)
    schedule.check_chirp_rate(params.chirp_rate)
    return schedule
