"""Fixed-step RK4 integration of the moment equations over a control schedule.

Steps are aligned to segment boundaries, so every stage evaluation sees the
controls of exactly one linear piece. Only reduced quantities are kept per
sample (means, the 2x2 cavity block, the g-weighted spin variance); the full
covariance is available for the final state.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Literal

import numpy as np

from spinmem.dynamics.blocks import MomentEquations
from spinmem.dynamics.controls import TIME_EPS, ControlSchedule, Segment, aligned_step
from spinmem.errors import IntegrationError, ScheduleError
from spinmem.logs import logger
from spinmem.model import (
    N_CAVITY,
    SQRT2,
    EnsembleModel,
    MomentState,
    weighted_spin_series,
    weighted_spin_variance,
)

Mode = Literal["full", "means_only"]
COV_CHECK_EVERY = 64
MAX_STEP_PHASE = 0.5
TRAJECTORY_COLUMNS = (
    "t_s",
    "Xc",
    "Pc",
    "var_sum",
    "Sx_eff",
    "Sy_eff",
    "p_exc",
    "p_exc_eff",
)


@dataclasses.dataclass(frozen=True)
class Readout:
    """Cavity state recorded by a readout event, before the cavity is reset."""

    mode: int
    time: float
    alpha: complex
    cavity_cov: np.ndarray | None

    @property
    def var_sum(self) -> float:
        if self.cavity_cov is None:
            return math.nan
        return 0.5 * float(self.cavity_cov[0, 0] + self.cavity_cov[1, 1])


@dataclasses.dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    means: np.ndarray
    cavity_cov: np.ndarray | None
    spin_var: np.ndarray | None
    final_state: MomentState
    readouts: tuple[Readout, ...] = ()
    psd_ratios: dict = dataclasses.field(default_factory=dict)

    @property
    def means_only(self) -> bool:
        return self.cavity_cov is None

    @property
    def cavity_amplitude(self) -> np.ndarray:
        return (self.means[:, 0] + 1j * self.means[:, 1]) / SQRT2

    @property
    def var_sum(self) -> np.ndarray:
        if self.cavity_cov is None:
            return np.full(len(self.times), math.nan)
        return 0.5 * (self.cavity_cov[:, 0, 0] + self.cavity_cov[:, 1, 1])

    def index_at(self, t: float) -> int:
        """Index of the sample closest to ``t``."""
        return int(np.argmin(np.abs(self.times - t)))

    def observables(self, model: EnsembleModel) -> dict[str, np.ndarray]:
        spin = weighted_spin_series(self.means, model)
        columns = (
            self.times,
            self.means[:, 0],
            self.means[:, 1],
            self.var_sum,
            spin[:, 0],
            spin[:, 1],
            spin[:, 2],
            spin[:, 3],
        )
        return dict(zip(TRAJECTORY_COLUMNS, columns))


class _Recorder:
    def __init__(self, model: EnsembleModel, means_only: bool, stride: float) -> None:
        self.model = model
        self.means_only = means_only
        self.stride = stride
        self.times: list[float] = []
        self.means: list[np.ndarray] = []
        self.cavity: list[np.ndarray] = []
        self.spin_var: list[float] = []
        self.next_time = -math.inf

    def offer(
        self, t: float, y: np.ndarray, cov: np.ndarray | None, force=False
    ) -> None:
        if not force and t < self.next_time - TIME_EPS:
            return
        if self.times and abs(t - self.times[-1]) <= TIME_EPS:
            self.times.pop()
            self.means.pop()
            if not self.means_only:
                self.cavity.pop()
                self.spin_var.pop()
        self.times.append(t)
        self.means.append(y.copy())
        if not self.means_only:
            self.cavity.append(cov[:N_CAVITY, :N_CAVITY].copy())
            self.spin_var.append(weighted_spin_variance(cov, self.model))
        while self.next_time <= t + TIME_EPS:
            if self.next_time == -math.inf:
                self.next_time = t + self.stride
            else:
                self.next_time += self.stride

    def build(self, final_state, readouts, psd_ratios) -> Trajectory:
        return Trajectory(
            times=np.array(self.times),
            means=np.array(self.means),
            cavity_cov=None if self.means_only else np.array(self.cavity),
            spin_var=None if self.means_only else np.array(self.spin_var),
            final_state=final_state,
            readouts=tuple(readouts),
            psd_ratios=dict(psd_ratios),
        )


def _check_means(y: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite mean values", time_s=t)


def _check_cov(cov: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(cov)):
        raise IntegrationError("non-finite covariance", time_s=t)


def _apply_event(seg: Segment, y, cov, t: float, readouts: list):
    state = MomentState(y, cov, t)
    if seg.event.kind == "readout":
        readouts.append(
            Readout(seg.event.mode, t, state.cavity_amplitude, state.cavity_block)
        )
        logger.debug(f"readout of mode {seg.event.mode} at t={t * 1e9:.3f} ns")
        state = state.with_replaced_cavity(0j)
    else:
        logger.debug(f"cavity replaced by mode {seg.event.mode} at t={t * 1e9:.3f} ns")
        state = state.with_replaced_cavity(complex(seg.event.alpha))
    new_cov = None if cov is None else np.array(state.cov)
    return np.array(state.means), new_cov


def _step_phase(seg: Segment, h: float, equations: MomentEquations) -> float:
    rate = max(
        abs(seg.delta_start),
        abs(seg.delta_end),
        seg.kappa_start,
        seg.kappa_end,
        float(np.sqrt(np.dot(equations.n, equations.g**2))),
        float(np.max(np.abs(equations.delta))),
    )
    return h * rate


def integrate(
    state: MomentState,
    schedule: ControlSchedule,
    model: EnsembleModel,
    t0: float | None = None,
    t1: float | None = None,
    dt: float | None = None,
    mode: Mode = "full",
    covariance_coupling: bool = False,
    sample_stride: float = 1e-9,
    dt_scale: float = 1.0,
    field_limit: float | None = None,
    check_psd: bool = False,
) -> Trajectory:
    """Integrate ``state`` from ``t0`` to ``t1`` under ``schedule``.

    ``dt`` overrides the per-segment step; ``dt_scale`` multiplies whichever
    step applies. Segment events fire when their segment starts inside
    ``[t0, t1]``, zero-length segments included. With ``field_limit`` set,
    a kappa ramp while ``|<a_c>|`` exceeds the limit raises ScheduleError.
    """
    if mode not in ("full", "means_only"):
        raise ValueError(f"unknown integration mode {mode!r}")
    if state.dim != model.dim:
        raise IntegrationError("state does not belong to this model", time_s=state.time)
    means_only = mode == "means_only"
    if not means_only and state.cov is None:
        raise IntegrationError("full integration needs a covariance", time_s=state.time)

    t0 = state.time if t0 is None else t0
    t1 = schedule.duration if t1 is None else t1
    if t1 < t0:
        raise IntegrationError("end time precedes start time", time_s=t0)

    equations = MomentEquations(model, covariance_coupling)
    y = np.array(state.means, dtype=float)
    cov = None if means_only else np.array(state.cov, dtype=float)
    recorder = _Recorder(model, means_only, sample_stride)
    readouts: list[Readout] = []
    psd_ratios: dict[str, float] = {}
    recorder.offer(t0, y, cov)

    for seg in schedule:
        if seg.t_start > t1 + TIME_EPS:
            break
        if seg.t_end < t0 - TIME_EPS:
            continue
        if seg.event is not None and seg.t_start >= t0 - TIME_EPS:
            y, cov = _apply_event(seg, y, cov, seg.t_start, readouts)
            recorder.offer(seg.t_start, y, cov, force=True)

        lo, hi = max(seg.t_start, t0), min(seg.t_end, t1)
        if hi - lo <= TIME_EPS:
            continue
        step = (dt if dt is not None else seg.dt) * dt_scale
        n_steps, h = aligned_step(hi - lo, step)
        if _step_phase(seg, h, equations) > MAX_STEP_PHASE:
            raise IntegrationError(
                f"step of {h * 1e9:.3g} ns is too coarse in {seg.label}",
                time_s=lo,
                step_s=h,
            )
        guard_field = field_limit is not None and seg.is_kappa_ramp
        y, cov = _integrate_segment(
            seg, y, cov, lo, n_steps, h, equations, recorder, guard_field, field_limit
        )
        recorder.offer(hi, y, cov, force=True)

        if cov is not None:
            _check_cov(cov, hi)
            if check_psd:
                psd_ratios[seg.label] = MomentState(y, cov, hi).min_eigenvalue_ratio()
        logger.debug(
            f"segment {seg.label}: t={lo * 1e9:.3f}..{hi * 1e9:.3f} ns"
            f" dt={h * 1e9:.4g} ns"
        )

    final_state = MomentState(y, cov, t1)
    return recorder.build(final_state, readouts, psd_ratios)


def _integrate_segment(
    seg: Segment,
    y: np.ndarray,
    cov: np.ndarray | None,
    lo: float,
    n_steps: int,
    h: float,
    equations: MomentEquations,
    recorder: _Recorder,
    guard_field: bool,
    field_limit: float | None,
):
    half = 0.5 * h
    offset = lo - seg.t_start
    for k in range(n_steps):
        t_local = offset + k * h
        c_start = seg.control_at(t_local)
        c_mid = seg.control_at(t_local + half)
        c_end = seg.control_at(t_local + h)

        if cov is None:
            k1 = equations.mean_rhs(y, None, c_start)
            k2 = equations.mean_rhs(y + half * k1, None, c_mid)
            k3 = equations.mean_rhs(y + half * k2, None, c_mid)
            k4 = equations.mean_rhs(y + h * k3, None, c_end)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            k1 = equations.mean_rhs(y, cov, c_start)
            l1 = equations.cov_rhs(y, cov, c_start)
            y2, c2 = y + half * k1, cov + half * l1
            k2 = equations.mean_rhs(y2, c2, c_mid)
            l2 = equations.cov_rhs(y2, c2, c_mid)
            y3, c3 = y + half * k2, cov + half * l2
            k3 = equations.mean_rhs(y3, c3, c_mid)
            l3 = equations.cov_rhs(y3, c3, c_mid)
            y4, c4 = y + h * k3, cov + h * l3
            k4 = equations.mean_rhs(y4, c4, c_end)
            l4 = equations.cov_rhs(y4, c4, c_end)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            cov = cov + (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
            cov = 0.5 * (cov + cov.T)

        t = seg.t_start + t_local + h
        _check_means(y, t)
        if cov is not None and (k + 1) % COV_CHECK_EVERY == 0:
            _check_cov(cov, t)
        if guard_field and math.hypot(y[0], y[1]) / SQRT2 > field_limit:
            raise ScheduleError(
                f"kappa changes in {seg.label} while the cavity field is above"
                f" {field_limit:g}",
                label=seg.label,
                time_s=t,
                field=math.hypot(y[0], y[1]) / SQRT2,
            )
        recorder.offer(t, y, cov)
    return y, cov
