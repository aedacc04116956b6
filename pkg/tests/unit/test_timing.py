import pytest

from spinmem.errors import TimingInfeasibleError
from spinmem.model import TWO_PI
from spinmem.protocol import TimingConstants, solve_timing

T_SWAP = 73.7e-9
T_CAV_EFF = 40e-9


@pytest.fixture
def constants() -> TimingConstants:
    return TimingConstants()


def test_constants_from_rates(params):
    constants = TimingConstants.from_rates(
        params.delta_cs_target, params.delta_cs_parked, params.chirp_rate
    )
    assert constants.t_delta_t == pytest.approx(10e-9)
    assert constants.t_delta_p == pytest.approx(5e-9)


def test_constants_reject_negative():
    with pytest.raises(ValueError):
        TimingConstants(t_pi=-1e-6)


def test_free_parts(constants: TimingConstants):
    timing = solve_timing(20e-6, T_SWAP, T_CAV_EFF, constants)

    assert len(timing.durations) == 21
    assert timing.duration(11) == pytest.approx(10e-6 - constants.t11_offset(T_CAV_EFF))
    assert timing.duration(18) == pytest.approx(
        5e-6 - constants.t18_offset(T_SWAP, T_CAV_EFF)
    )
    assert timing.duration(4) == pytest.approx(constants.t_res + timing.duration(18))
    assert timing.duration(2) == timing.duration(20) == T_SWAP
    assert timing.duration(7) == timing.duration(14) == constants.t_pi


def test_pulse_spacing(constants: TimingConstants):
    timing = solve_timing(20e-6, T_SWAP, T_CAV_EFF, constants)
    first, second = timing.pi_pulse_centers
    assert second - first == pytest.approx(10e-6 - T_CAV_EFF)
    assert timing.start(8) == pytest.approx(timing.end(7))


def test_echo_times(constants: TimingConstants):
    timing = solve_timing(20e-6, T_SWAP, T_CAV_EFF, constants)
    assert timing.primary_echo_time == pytest.approx(10e-6)
    assert timing.t_echo == pytest.approx(20e-6 - 2 * T_CAV_EFF)
    assert timing.revival_time == pytest.approx(20e-6 - T_CAV_EFF)
    assert set(timing.to_dict()) == {"T", "T_echo", "T_cav_eff", "T_mem", "T_swap"}


def test_too_short_memory_time(constants: TimingConstants):
    with pytest.raises(TimingInfeasibleError) as excinfo:
        solve_timing(1e-6, T_SWAP, T_CAV_EFF, constants)
    error = excinfo.value
    assert error.constraint in {"T11", "T18", "T4"}
    assert error.t_mem_min_s == pytest.approx(
        constants.t_mem_min(T_SWAP, T_CAV_EFF)
    )
    assert error.to_dict()["error"] == "timing_infeasible"

    solve_timing(error.t_mem_min_s * (1 + 1e-9), T_SWAP, T_CAV_EFF, constants)


def test_chirp_constants_match_reference_rate(params):
    assert params.delta_cs_target / params.chirp_rate == pytest.approx(10e-9)
    assert TWO_PI * 100e6 == pytest.approx(params.delta_cs_target)
