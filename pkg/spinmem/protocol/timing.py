"""Durations of the 21 parts of the memory protocol.

Parts 11 and 18 absorb the free time. They are fixed by requiring the primary
echo in the middle of the memory time and the refocused spin coherence at
``T_mem - T_cav_eff``, which mirrors the effective storage instant.
"""
from __future__ import annotations

import dataclasses
import math

from spinmem.errors import TimingInfeasibleError

N_PARTS = 21


@dataclasses.dataclass(frozen=True)
class TimingConstants:
    """Fixed part durations (seconds)."""

    t_delta_p: float = 5e-9
    t_delta_t: float = 10e-9
    t_kappa: float = 10e-9
    t_pi: float = 1e-6
    t_res: float = 1e-6

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            if getattr(self, field.name) < 0:
                raise ValueError(f"{field.name} must be nonnegative")

    @classmethod
    def from_rates(
        cls,
        delta_target: float,
        delta_parked: float,
        chirp_rate: float,
        t_kappa: float = 10e-9,
        t_pi: float = 1e-6,
        t_res: float = 1e-6,
    ) -> "TimingConstants":
        """Chirp durations that keep the chirp rate at its maximum."""
        return cls(
            t_delta_p=abs(delta_parked) / chirp_rate,
            t_delta_t=abs(delta_target) / chirp_rate,
            t_kappa=t_kappa,
            t_pi=t_pi,
            t_res=t_res,
        )

    def t11_offset(self, t_cav_eff: float) -> float:
        return (
            2 * self.t_delta_p + 2 * self.t_kappa + self.t_pi + self.t_res + t_cav_eff
        )

    def t18_offset(self, t_swap: float, t_cav_eff: float) -> float:
        return (
            self.t_delta_t
            + 2 * self.t_delta_p
            + self.t_kappa
            + self.t_pi / 2
            + self.t_res
            + t_swap
            - t_cav_eff / 2
        )

    def t_mem_min(self, t_swap: float, t_cav_eff: float) -> float:
        return max(
            2.0 * self.t11_offset(t_cav_eff),
            4.0 * self.t18_offset(t_swap, t_cav_eff),
            0.0,
        )


@dataclasses.dataclass(frozen=True)
class ProtocolTiming:
    durations: tuple[float, ...]
    t_mem: float
    t_swap: float
    t_cav_eff: float
    constants: TimingConstants

    def __post_init__(self) -> None:
        if len(self.durations) != N_PARTS:
            raise ValueError(f"expected {N_PARTS} durations, got {len(self.durations)}")

    def duration(self, part: int) -> float:
        """Duration of part ``part`` (1-based)."""
        return self.durations[part - 1]

    def start(self, part: int) -> float:
        return math.fsum(self.durations[: part - 1])

    def end(self, part: int) -> float:
        return math.fsum(self.durations[:part])

    @property
    def t_echo(self) -> float:
        return self.t_mem - 2.0 * self.t_cav_eff

    @property
    def primary_echo_time(self) -> float:
        return self.t_mem / 2.0

    @property
    def revival_time(self) -> float:
        return self.t_echo + self.t_cav_eff

    @property
    def pi_pulse_centers(self) -> tuple[float, float]:
        half = self.constants.t_pi / 2
        return self.start(7) + half, self.start(14) + half

    def to_dict(self) -> dict:
        return {
            "T": list(self.durations),
            "T_echo": self.t_echo,
            "T_cav_eff": self.t_cav_eff,
            "T_mem": self.t_mem,
            "T_swap": self.t_swap,
        }


def solve_timing(
    t_mem: float,
    t_swap: float,
    t_cav_eff: float,
    constants: TimingConstants = TimingConstants(),
) -> ProtocolTiming:
    """Fill in the free parts 4, 11 and 18 for a memory time ``t_mem``."""
    c = constants
    t11 = t_mem / 2 - c.t11_offset(t_cav_eff)
    t18 = t_mem / 4 - c.t18_offset(t_swap, t_cav_eff)
    t4 = c.t_res + t18

    for name, value in (("T11", t11), ("T18", t18), ("T4", t4)):
        if value < 0:
            t_min = c.t_mem_min(t_swap, t_cav_eff)
            raise TimingInfeasibleError(
                f"memory time {t_mem * 1e6:.4g} us is too short: {name} < 0"
                f" (need at least {t_min * 1e6:.4g} us)",
                constraint=name,
                t_mem_min_s=t_min,
            )

    p, k, t, sw = c.t_delta_p, c.t_kappa, c.t_delta_t, t_swap
    # fmt: off
    durations = (
        t, sw, p, t4, k, p, c.t_pi, c.t_res, p, k, t11,
        k, p, c.t_pi, c.t_res, p, k, t18, p, sw, t,
    )
    # fmt: on
    return ProtocolTiming(durations, t_mem, t_swap, t_cav_eff, constants)
