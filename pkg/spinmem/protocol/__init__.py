"""Timing, control schedules and memory runs."""
from spinmem.protocol.memory import (
    ExperimentSetup,
    MemoryResult,
    PreparedProtocol,
    calibrate_pulses,
    fix_t_cav_eff,
    locate_revival,
    optimize_tswap,
    prepare_protocol,
    run_memory,
    swap_residual,
)
from spinmem.protocol.multimode import (
    MultimodePlan,
    MultimodeResult,
    capacity,
    plan_multimode,
    run_multimode,
)
from spinmem.protocol.schedule import StepTiers, build_schedule, storage_schedule
from spinmem.protocol.timing import ProtocolTiming, TimingConstants, solve_timing

__all__ = [
    "ExperimentSetup",
    "MemoryResult",
    "MultimodePlan",
    "MultimodeResult",
    "PreparedProtocol",
    "ProtocolTiming",
    "StepTiers",
    "TimingConstants",
    "build_schedule",
    "calibrate_pulses",
    "capacity",
    "fix_t_cav_eff",
    "locate_revival",
    "optimize_tswap",
    "plan_multimode",
    "prepare_protocol",
    "run_memory",
    "run_multimode",
    "solve_timing",
    "storage_schedule",
    "swap_residual",
]
