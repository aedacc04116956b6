"""Gain, noise and fidelity of stored and retrieved fields."""
from spinmem.metrics.analysis import (
    CLASSICAL_FIDELITY,
    FidComparison,
    GainDecomposition,
    excess_noise_series,
    extrapolate_gain,
    fid_analytic_compare,
    fid_initial_state,
    gain_decomposition,
    inversion_summary,
    max_nonclassical_time,
)
from spinmem.metrics.channel import (
    ChannelMetrics,
    GainFit,
    channel_metrics,
    fit_gain,
    fq_haar,
    qubit_fidelity,
)

__all__ = [
    "CLASSICAL_FIDELITY",
    "ChannelMetrics",
    "FidComparison",
    "GainDecomposition",
    "GainFit",
    "channel_metrics",
    "excess_noise_series",
    "extrapolate_gain",
    "fid_analytic_compare",
    "fid_initial_state",
    "fit_gain",
    "fq_haar",
    "gain_decomposition",
    "inversion_summary",
    "max_nonclassical_time",
    "qubit_fidelity",
]
