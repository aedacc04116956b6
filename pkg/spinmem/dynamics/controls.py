"""Piecewise-linear control schedules.

A schedule is a list of contiguous segments. Within a segment the cavity
detuning and decay rate vary linearly in time and the drive is either absent
or given by samples on the segment's stage grid (spacing ``h/2``), so stage
evaluation of a fixed-step RK4 integrator never interpolates across a kink.
"""
from __future__ import annotations

import bisect
import dataclasses
import math
from typing import Iterator, Literal, Sequence

import numpy as np

from spinmem.errors import ScheduleError
from spinmem.model import ControlSample

EventKind = Literal["replace_cavity", "readout"]
TIME_EPS = 1e-15


def aligned_step(duration: float, dt: float) -> tuple[int, float]:
    """Step count and step length that tile ``duration`` with steps <= ``dt``."""
    if duration <= 0:
        return 0, 0.0
    n_steps = max(1, math.ceil(duration / dt * (1.0 - 1e-12)))
    return n_steps, duration / n_steps


@dataclasses.dataclass(frozen=True)
class DriveWaveform:
    """Complex drive samples ``beta(t)`` on a uniform grid starting at 0."""

    spacing: float
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def duration(self) -> float:
        return self.spacing * (len(self.values) - 1)

    @property
    def times(self) -> np.ndarray:
        return self.spacing * np.arange(len(self.values))

    def at(self, t_local: float) -> complex:
        pos = t_local / self.spacing
        k = int(round(pos))
        if abs(pos - k) < 1e-6 and 0 <= k < len(self.values):
            return complex(self.values[k])
        k = min(max(int(math.floor(pos)), 0), len(self.values) - 2)
        frac = min(max(pos - k, 0.0), 1.0)
        return complex(self.values[k] * (1.0 - frac) + self.values[k + 1] * frac)

    def peak_power(self, photon_energy: float) -> float:
        return float(photon_energy * np.max(np.abs(self.values) ** 2))


@dataclasses.dataclass(frozen=True)
class SegmentEvent:
    """Instantaneous action at the start of a segment."""

    kind: EventKind
    mode: int
    alpha: complex = 0j


@dataclasses.dataclass(frozen=True)
class Segment:
    label: str
    t_start: float
    duration: float
    delta_start: float
    delta_end: float
    kappa_start: float
    kappa_end: float
    dt: float
    drive: DriveWaveform | None = None
    event: SegmentEvent | None = None

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration

    @property
    def is_chirp(self) -> bool:
        return self.delta_start != self.delta_end

    @property
    def is_kappa_ramp(self) -> bool:
        return self.kappa_start != self.kappa_end

    def control_at(self, t_local: float) -> ControlSample:
        frac = t_local / self.duration if self.duration > 0 else 0.0
        delta = self.delta_start + (self.delta_end - self.delta_start) * frac
        kappa = self.kappa_start + (self.kappa_end - self.kappa_start) * frac
        beta = self.drive.at(t_local) if self.drive is not None else 0j
        return ControlSample(delta, kappa, beta)

    def chirp_rate(self) -> float:
        if self.duration <= 0:
            return math.inf if self.is_chirp else 0.0
        return abs(self.delta_end - self.delta_start) / self.duration


@dataclasses.dataclass(frozen=True)
class SegmentSpec:
    """Segment description before start times are assigned."""

    label: str
    duration: float
    delta: tuple[float, float]
    kappa: tuple[float, float]
    dt: float
    drive: DriveWaveform | None = None
    event: SegmentEvent | None = None


class ControlSchedule:
    """Contiguous segments from ``t = 0`` to ``duration``."""

    def __init__(self, segments: Sequence[Segment]) -> None:
        self._segments = tuple(segments)
        t = 0.0
        for seg in self._segments:
            if seg.duration < 0:
                raise ScheduleError(
                    f"negative duration in {seg.label}", label=seg.label
                )
            if abs(seg.t_start - t) > 1e-12 * max(1.0, abs(t)) + TIME_EPS:
                raise ScheduleError(
                    f"segment {seg.label} is not contiguous", label=seg.label
                )
            t = seg.t_end
        self._starts = [seg.t_start for seg in self._segments]

    @classmethod
    def from_specs(cls, specs: Sequence[SegmentSpec]) -> "ControlSchedule":
        segments, t = [], 0.0
        for spec in specs:
            segments.append(
                Segment(
                    label=spec.label,
                    t_start=t,
                    duration=spec.duration,
                    delta_start=spec.delta[0],
                    delta_end=spec.delta[1],
                    kappa_start=spec.kappa[0],
                    kappa_end=spec.kappa[1],
                    dt=spec.dt,
                    drive=spec.drive,
                    event=spec.event,
                )
            )
            t += spec.duration
        return cls(segments)

    @classmethod
    def constant(
        cls,
        duration: float,
        delta_cs: float,
        kappa: float,
        dt: float,
        label: str = "hold",
    ) -> "ControlSchedule":
        return cls.from_specs(
            [SegmentSpec(label, duration, (delta_cs, delta_cs), (kappa, kappa), dt)]
        )

    @property
    def segments(self) -> tuple[Segment, ...]:
        return self._segments

    @property
    def duration(self) -> float:
        return self._segments[-1].t_end if self._segments else 0.0

    def __iter__(self) -> Iterator[Segment]:
        return iter(self._segments)

    def __len__(self) -> int:
        return len(self._segments)

    def segment(self, label: str) -> Segment:
        for seg in self._segments:
            if seg.label == label:
                return seg
        raise KeyError(label)

    def segment_at(self, t: float) -> Segment:
        k = bisect.bisect_right(self._starts, t) - 1
        k = min(max(k, 0), len(self._segments) - 1)
        # zero-length segments share their start with the next one
        while self._segments[k].duration == 0 and k + 1 < len(self._segments):
            k += 1
        return self._segments[k]

    def sample(self, t: float) -> ControlSample:
        seg = self.segment_at(t)
        return seg.control_at(min(max(t - seg.t_start, 0.0), seg.duration))

    def truncated(self, t_end: float) -> "ControlSchedule":
        """Segments up to ``t_end``, the last one shortened."""
        out = []
        for seg in self._segments:
            if seg.t_start > t_end + TIME_EPS:
                break
            if seg.t_start >= t_end - TIME_EPS and seg.duration > 0:
                break
            if seg.duration == 0:
                out.append(seg)
                continue
            if seg.t_end > t_end:
                frac = (t_end - seg.t_start) / seg.duration
                d0, k0 = seg.delta_start, seg.kappa_start
                seg = dataclasses.replace(
                    seg,
                    duration=t_end - seg.t_start,
                    delta_end=d0 + (seg.delta_end - d0) * frac,
                    kappa_end=k0 + (seg.kappa_end - k0) * frac,
                )
            out.append(seg)
        return ControlSchedule(out)

    def check_chirp_rate(self, max_rate: float) -> None:
        for seg in self._segments:
            # zero-length segments are ideal jumps and carry no rate
            if seg.duration > 0 and seg.chirp_rate() > max_rate * (1.0 + 1e-9):
                raise ScheduleError(
                    f"chirp in {seg.label} exceeds the maximal rate",
                    label=seg.label,
                    rate=seg.chirp_rate(),
                    max_rate=max_rate,
                )

    def check_kappa_range(self, kappa_min: float, kappa_max: float) -> None:
        tol = 1e-9 * kappa_max
        for seg in self._segments:
            for kappa in (seg.kappa_start, seg.kappa_end):
                if kappa < kappa_min - tol or kappa > kappa_max + tol:
                    raise ScheduleError(
                        f"kappa outside [{kappa_min:.4g}, {kappa_max:.4g}]"
                        f" in {seg.label}",
                        label=seg.label,
                        kappa=kappa,
                    )

    def table(self, stride: float) -> dict[str, np.ndarray]:
        """Controls sampled every ``stride`` seconds (plus the end point)."""
        n = int(math.floor(self.duration / stride + 1e-9))
        times = np.append(stride * np.arange(n + 1), self.duration)
        times = np.unique(times)
        samples = [self.sample(t) for t in times]
        return {
            "t_s": times,
            "delta_cs_hz": np.array([s.delta_cs for s in samples]) / (2 * math.pi),
            "kappa_per_s": np.array([s.kappa for s in samples]),
            "beta_re": np.array([s.beta.real for s in samples]),
            "beta_im": np.array([s.beta.imag for s in samples]),
        }
