"""Moment equations, control schedules, integration and drive synthesis."""
from spinmem.dynamics.blocks import (
    DriftBlocks,
    MomentEquations,
    NoiseBlocks,
    covariance_derivative,
    mean_derivative,
)
from spinmem.dynamics.controls import (
    ControlSchedule,
    DriveWaveform,
    Segment,
    SegmentEvent,
    SegmentSpec,
    aligned_step,
)
from spinmem.dynamics.drive import (
    SechPulse,
    calibrate_pulse_amplitude,
    synthesize_drive,
)
from spinmem.dynamics.integrator import Readout, Trajectory, integrate

__all__ = [
    "ControlSchedule",
    "DriftBlocks",
    "DriveWaveform",
    "MomentEquations",
    "NoiseBlocks",
    "Readout",
    "SechPulse",
    "Segment",
    "SegmentEvent",
    "SegmentSpec",
    "Trajectory",
    "aligned_step",
    "calibrate_pulse_amplitude",
    "covariance_derivative",
    "integrate",
    "mean_derivative",
    "synthesize_drive",
]
