import math

import numpy as np
import pytest
from scipy import integrate

from spinmem.distributions import (
    FrequencyLine,
    characteristic_width,
    frequency_bins,
    lorentzian_triplet,
)
from spinmem.errors import DistributionError
from spinmem.model import TWO_PI

MHZ = TWO_PI * 1e6


@pytest.fixture
def line() -> FrequencyLine:
    return FrequencyLine(w=2 * MHZ, delta_hfs=2.2 * MHZ, gamma_perp=1e4)


def test_density_is_normalized(line: FrequencyLine):
    total, _ = integrate.quad(line.density, -np.inf, np.inf, limit=200)
    assert total == pytest.approx(1.0, rel=1e-6)


def test_triplet_peaks_at_hyperfine_centers(line: FrequencyLine):
    peaks = lorentzian_triplet(line.centers, line)
    assert peaks[0] == pytest.approx(peaks[2])
    assert peaks[1] > peaks[0] > lorentzian_triplet(0.5 * line.delta_hfs, line)


def test_cdf_matches_density(line: FrequencyLine):
    partial, _ = integrate.quad(line.density, -5 * MHZ, 1 * MHZ, limit=200)
    assert line.cdf(1 * MHZ) - line.cdf(-5 * MHZ) == pytest.approx(partial, rel=1e-8)
    assert line.cdf(0.0) == pytest.approx(0.5)


def test_fid_envelope_starts_at_one(line: FrequencyLine):
    assert line.fid_envelope(0.0) == pytest.approx(1.0)
    assert abs(line.fid_envelope(2e-6)) < 1e-3


def test_characteristic_width_without_splitting():
    line = FrequencyLine(w=2 * MHZ, delta_hfs=0.0, gamma_perp=0.0)
    assert characteristic_width(line) == pytest.approx(MHZ)


def test_frequency_bins_are_symmetric(line: FrequencyLine):
    bins = frequency_bins(line, 101, 12 * MHZ, max_tail_mass=0.1)
    weights = np.array([b.weight for b in bins])
    deltas = np.array([b.delta for b in bins])

    assert len(bins) == 101
    assert weights.sum() == pytest.approx(1.0)
    assert np.allclose(weights, weights[::-1])
    assert np.allclose(deltas, -deltas[::-1])
    assert deltas[50] == pytest.approx(0.0, abs=1.0)


def test_single_bin_is_unbroadened(line: FrequencyLine):
    assert frequency_bins(line, 1, 0.0) == [(0.0, 1.0)]


@pytest.mark.parametrize("n_bins", [0, 4, -3])
def test_bin_count_must_be_odd(line: FrequencyLine, n_bins: int):
    with pytest.raises(DistributionError):
        frequency_bins(line, n_bins, 12 * MHZ)


def test_span_too_small(line: FrequencyLine):
    with pytest.raises(DistributionError) as excinfo:
        frequency_bins(line, 11, 1 * MHZ, max_tail_mass=1e-2)
    assert excinfo.value.details["tail_mass"] > 1e-2
    assert excinfo.value.details["span_hz"] == pytest.approx(1e6)


def test_negative_width_rejected():
    with pytest.raises(DistributionError):
        FrequencyLine(w=-1.0, delta_hfs=0.0)


def test_bins_need_positive_width():
    with pytest.raises(DistributionError):
        frequency_bins(FrequencyLine(w=0.0, delta_hfs=MHZ), 3, MHZ)


def test_two_pi_constant():
    assert MHZ == pytest.approx(2 * math.pi * 1e6)
