import math

import numpy as np
import pytest

from spinmem.dynamics import (
    ControlSchedule,
    DriveWaveform,
    SegmentEvent,
    SegmentSpec,
    aligned_step,
)
from spinmem.dynamics.controls import Segment
from spinmem.errors import ScheduleError
from spinmem.model import TWO_PI

MHZ = TWO_PI * 1e6


@pytest.fixture
def schedule() -> ControlSchedule:
    return ControlSchedule.from_specs(
        [
            SegmentSpec("hold", 10e-9, (0.0, 0.0), (1e6, 1e6), 1e-9),
            SegmentSpec("chirp", 10e-9, (0.0, 100 * MHZ), (1e6, 1e6), 1e-10),
            SegmentSpec(
                "jump",
                0.0,
                (100 * MHZ, 100 * MHZ),
                (1e6, 1e8),
                1e-9,
                event=SegmentEvent("readout", 0),
            ),
            SegmentSpec("ramp", 20e-9, (100 * MHZ, 100 * MHZ), (1e8, 1e6), 1e-9),
        ]
    )


@pytest.mark.parametrize(
    "duration, dt, expected",
    [(10e-9, 1e-9, 10), (10.5e-9, 1e-9, 11), (1e-9, 5e-9, 1), (0.0, 1e-9, 0)],
)
def test_aligned_step(duration, dt, expected):
    n_steps, h = aligned_step(duration, dt)
    assert n_steps == expected
    assert h <= dt
    if n_steps:
        assert n_steps * h == pytest.approx(duration)


def test_drive_waveform_interpolates():
    drive = DriveWaveform(1e-9, [0.0, 1.0, 1j])
    assert drive.duration == pytest.approx(2e-9)
    assert drive.at(1e-9) == 1.0
    assert drive.at(0.5e-9) == pytest.approx(0.5)
    assert drive.at(1.5e-9) == pytest.approx(0.5 + 0.5j)
    assert drive.at(5e-9) == pytest.approx(1j)
    assert drive.peak_power(2.0) == pytest.approx(2.0)


def test_schedule_layout(schedule: ControlSchedule):
    assert len(schedule) == 4
    assert schedule.duration == pytest.approx(40e-9)
    assert schedule.segment("ramp").t_start == pytest.approx(20e-9)
    with pytest.raises(KeyError):
        schedule.segment("missing")


def test_zero_length_segment_is_skipped_by_lookup(schedule: ControlSchedule):
    assert schedule.segment_at(20e-9).label == "ramp"
    assert schedule.segment_at(5e-9).label == "hold"
    assert schedule.segment_at(1.0).label == "ramp"


def test_sample_is_piecewise_linear(schedule: ControlSchedule):
    assert schedule.sample(15e-9).delta_cs == pytest.approx(50 * MHZ)
    assert schedule.sample(30e-9).kappa == pytest.approx(0.5 * (1e8 + 1e6))
    assert schedule.sample(0.0).beta == 0j


def test_truncated_schedule(schedule: ControlSchedule):
    short = schedule.truncated(15e-9)
    assert [seg.label for seg in short] == ["hold", "chirp"]
    assert short.duration == pytest.approx(15e-9)
    assert short.segment("chirp").delta_end == pytest.approx(50 * MHZ)


def test_chirp_rate_check(schedule: ControlSchedule):
    schedule.check_chirp_rate(100 * MHZ / 10e-9)
    with pytest.raises(ScheduleError) as excinfo:
        schedule.check_chirp_rate(10 * MHZ / 10e-9)
    assert excinfo.value.details["label"] == "chirp"


def test_kappa_range_check(schedule: ControlSchedule):
    schedule.check_kappa_range(1e6, 1e8)
    with pytest.raises(ScheduleError):
        schedule.check_kappa_range(1e6, 5e7)


def test_segments_must_be_contiguous():
    first = Segment("a", 0.0, 1e-9, 0.0, 0.0, 1.0, 1.0, 1e-10)
    gap = Segment("b", 2e-9, 1e-9, 0.0, 0.0, 1.0, 1.0, 1e-10)
    with pytest.raises(ScheduleError):
        ControlSchedule([first, gap])


def test_negative_duration_rejected():
    with pytest.raises(ScheduleError):
        ControlSchedule.constant(-1e-9, 0.0, 1.0, 1e-10)


def test_table_columns(schedule: ControlSchedule):
    table = schedule.table(3e-9)
    assert list(table) == ["t_s", "delta_cs_hz", "kappa_per_s", "beta_re", "beta_im"]
    assert table["t_s"][-1] == pytest.approx(40e-9)
    assert np.all(np.diff(table["t_s"]) > 0)
    assert table["delta_cs_hz"][-1] == pytest.approx(100e6)


def test_constant_schedule():
    schedule = ControlSchedule.constant(1e-6, MHZ, 2e6, 1e-9, label="swap")
    sample = schedule.sample(0.3e-6)
    assert schedule.segments[0].label == "swap"
    assert sample.delta_cs == MHZ
    assert sample.kappa == 2e6
    assert math.isclose(schedule.duration, 1e-6)
