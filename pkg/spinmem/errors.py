"""Exception hierarchy for spinmem.

Every error carries a short machine-readable ``code`` and a ``details`` dict so
the CLI can write it to ``error.json`` unchanged.
"""
from __future__ import annotations

from typing import Any


class SpinMemError(Exception):
    """Base class for all domain errors."""

    code = "spinmem_error"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {"error": self.code, "message": self.message, "details": self.details}


class ModelError(SpinMemError):
    code = "model_error"


class DistributionError(SpinMemError):
    code = "distribution_error"


class IntegrationError(SpinMemError):
    code = "integration_error"

    def __init__(self, message: str, time_s: float, **details: Any) -> None:
        super().__init__(message, time_s=time_s, **details)
        self.time_s = time_s


class PowerConstraintError(SpinMemError):
    code = "power_constraint"


class CalibrationError(SpinMemError):
    code = "calibration_error"


class TimingInfeasibleError(SpinMemError):
    code = "timing_infeasible"

    def __init__(self, message: str, constraint: str, t_mem_min_s: float) -> None:
        super().__init__(message, constraint=constraint, t_mem_min_s=t_mem_min_s)
        self.constraint = constraint
        self.t_mem_min_s = t_mem_min_s


class ScheduleError(SpinMemError):
    code = "schedule_error"


class RevivalNotFoundError(SpinMemError):
    code = "revival_not_found"


class OptimizationError(SpinMemError):
    code = "optimization_error"


class ChannelError(SpinMemError):
    code = "channel_error"


class MetricsError(SpinMemError):
    code = "metrics_error"


class OracleError(SpinMemError):
    code = "oracle_error"


class ConfigError(SpinMemError):
    code = "config_error"
