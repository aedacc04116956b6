import math

import numpy as np
import pytest

from spinmem.distributions import (
    CouplingBin,
    WaveguideGeometry,
    coupling_constant,
    coupling_histogram_from_geometry,
    read_coupling_csv,
    waveguide_field,
    write_coupling_csv,
)
from spinmem.distributions.waveguide import (
    histogram_couplings,
    series_terms,
    zero_point_voltage,
)
from spinmem.errors import DistributionError
from spinmem.model import TWO_PI

OMEGA_C = TWO_PI * 2.9e9


@pytest.fixture
def geometry() -> WaveguideGeometry:
    return WaveguideGeometry()


def test_geometry_ratios(geometry: WaveguideGeometry):
    assert geometry.delta == pytest.approx(5 / 300)
    assert geometry.delta_bar == pytest.approx(15 / 300)
    assert geometry.epsilon_eff == pytest.approx(6.35)
    assert geometry.half_width == pytest.approx(150e-6)


@pytest.mark.parametrize(
    "changes",
    [{"w_gap": 0.0}, {"b": 10e-6}, {"epsilon_r": 0.5}, {"y_min": 50e-6}],
)
def test_geometry_rejects_invalid(changes: dict):
    with pytest.raises(DistributionError):
        WaveguideGeometry(**changes)


def test_series_terms_grow_near_surface(geometry: WaveguideGeometry):
    assert series_terms(0.5e-6, geometry) > series_terms(20e-6, geometry)


def test_field_needs_positive_height(geometry: WaveguideGeometry):
    v0 = zero_point_voltage(geometry, OMEGA_C)
    with pytest.raises(DistributionError):
        waveguide_field(0.0, 0.0, geometry, v0, OMEGA_C)
    with pytest.raises(DistributionError):
        waveguide_field(0.0, 1e-6, geometry, v0, OMEGA_C, n_terms=0)


def test_coupling_is_mirror_symmetric(geometry: WaveguideGeometry):
    xs = np.array([-20e-6, -7.5e-6, 7.5e-6, 20e-6])
    g = coupling_constant(xs, 2e-6, geometry, OMEGA_C)
    assert np.all(g > 0)
    assert g[0] == pytest.approx(g[3], rel=1e-9)
    assert g[1] == pytest.approx(g[2], rel=1e-9)


def test_coupling_falls_off_with_height(geometry: WaveguideGeometry):
    g = coupling_constant(7.5e-6, np.array([1e-6, 10e-6, 35e-6]), geometry, OMEGA_C)
    assert g[0] > g[1] > g[2]


def test_coupling_outside_crystal(geometry: WaveguideGeometry):
    with pytest.raises(DistributionError):
        coupling_constant(0.0, 60e-6, geometry, OMEGA_C)


def test_histogram_from_geometry(geometry: WaveguideGeometry):
    bins = coupling_histogram_from_geometry(geometry, OMEGA_C, n_g_bins=5, n_grid=24)
    masses = np.array([b.mass for b in bins])
    g2 = np.array([b.g2_mass for b in bins])

    assert 1 <= len(bins) <= 5
    assert masses.sum() == pytest.approx(1.0)
    assert g2.sum() == pytest.approx(1.0)
    assert all(a.g < b.g for a, b in zip(bins, bins[1:]))


def test_monte_carlo_histogram_is_seeded(geometry: WaveguideGeometry):
    first = coupling_histogram_from_geometry(
        geometry, OMEGA_C, n_g_bins=4, monte_carlo_samples=300, seed=7
    )
    second = coupling_histogram_from_geometry(
        geometry, OMEGA_C, n_g_bins=4, monte_carlo_samples=300, seed=7
    )
    assert first == second


def test_histogram_of_identical_couplings():
    assert histogram_couplings(np.full(10, 3.0), 7) == [CouplingBin(3.0, 1.0, 1.0)]
    with pytest.raises(DistributionError):
        histogram_couplings(np.zeros(4), 3)


def test_coupling_csv(tmp_path):
    bins = [CouplingBin(TWO_PI * 5.0, 0.25), CouplingBin(TWO_PI * 20.0, 0.75)]
    path = write_coupling_csv(tmp_path / "coupling_bins.csv", bins)
    read = read_coupling_csv(path)

    assert [b.mass for b in read] == [0.25, 0.75]
    assert read[1].g == pytest.approx(TWO_PI * 20.0)
    assert math.isnan(read[0].g2_mass)


def test_coupling_csv_needs_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("g,weight\n1,1\n")
    with pytest.raises(DistributionError):
        read_coupling_csv(path)
