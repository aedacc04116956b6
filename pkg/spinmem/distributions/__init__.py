"""Coupling-strength and frequency distributions of the spin ensemble."""
from spinmem.distributions.ensemble import HOMOGENEOUS, build_model
from spinmem.distributions.lineshape import (
    FrequencyBin,
    FrequencyLine,
    characteristic_width,
    frequency_bins,
    lorentzian_triplet,
)
from spinmem.distributions.waveguide import (
    CouplingBin,
    WaveguideGeometry,
    coupling_constant,
    coupling_histogram_from_geometry,
    read_coupling_csv,
    waveguide_field,
    write_coupling_csv,
)

__all__ = [
    "HOMOGENEOUS",
    "CouplingBin",
    "FrequencyBin",
    "FrequencyLine",
    "WaveguideGeometry",
    "build_model",
    "characteristic_width",
    "coupling_constant",
    "coupling_histogram_from_geometry",
    "frequency_bins",
    "lorentzian_triplet",
    "read_coupling_csv",
    "waveguide_field",
    "write_coupling_csv",
]
