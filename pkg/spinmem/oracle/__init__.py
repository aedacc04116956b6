"""Small-system reference solutions."""
from spinmem.oracle.gaussian_channel import (
    gaussian_channel_apply,
    loss_kraus,
    quadrature_moments,
    tail_population,
)
from spinmem.oracle.lindblad import (
    LindbladTrajectory,
    OracleComparison,
    SmallSystem,
    compare_with_moments,
    initial_density,
    lindblad_evolve,
    spin_fid_check,
)

__all__ = [
    "LindbladTrajectory",
    "OracleComparison",
    "SmallSystem",
    "compare_with_moments",
    "gaussian_channel_apply",
    "initial_density",
    "lindblad_evolve",
    "loss_kraus",
    "quadrature_moments",
    "spin_fid_check",
    "tail_population",
]
