"""Discretize coupling and frequency distributions into an EnsembleModel."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from spinmem.distributions.lineshape import FrequencyLine, frequency_bins
from spinmem.distributions.waveguide import CouplingBin
from spinmem.errors import DistributionError
from spinmem.logs import logger
from spinmem.model import EnsembleModel, PhysicalParams, SubEnsemble

HOMOGENEOUS = None


def build_model(
    params: PhysicalParams,
    coupling_bins: Sequence[CouplingBin | tuple[float, float]] | None,
    line: FrequencyLine,
    n_freq_bins: int,
    freq_half_span: float = 2 * math.pi * 12e6,
    max_tail_mass: float = 1e-2,
) -> EnsembleModel:
    """Cartesian product of coupling bins and frequency bins.

    ``coupling_bins=None`` puts every spin at ``g_bar``. Couplings are rescaled
    as a whole so that ``sum(n g**2) = gens**2``.
    """
    if coupling_bins is HOMOGENEOUS:
        coupling_bins = [CouplingBin(params.g_bar, 1.0)]
    if len(coupling_bins) == 0:
        raise DistributionError("no coupling bins given")

    g_values = np.array([float(b[0]) for b in coupling_bins])
    masses = np.array([float(b[1]) for b in coupling_bins])
    if np.any(masses < 0) or np.any(g_values < 0):
        raise DistributionError("coupling bins need g >= 0 and mass >= 0")
    if not math.isclose(masses.sum(), 1.0, rel_tol=1e-6):
        raise DistributionError(
            "coupling masses must sum to 1", total=float(masses.sum())
        )
    keep = (masses > 0) & (g_values > 0)
    if not np.any(keep):
        raise DistributionError("every coupling bin is empty")
    uncoupled = float(masses[(g_values == 0) & (masses > 0)].sum())
    if uncoupled > 0:
        logger.warn(
            f"dropping spin mass {uncoupled:.4g} in coupling bins with g = 0;"
            " the coupled bins are renormalized",
            title="Coupling histogram",
        )
    if not np.all(keep):
        logger.debug(f"dropping {int((~keep).sum())} empty coupling bins")
    g_values, masses = g_values[keep], masses[keep] / masses[keep].sum()

    fbins = frequency_bins(line, n_freq_bins, freq_half_span, max_tail_mass)
    fbins = [fb for fb in fbins if fb.weight > 0]

    n_total = params.n_total
    g_grid, d_grid = np.meshgrid(g_values, [fb.delta for fb in fbins], indexing="ij")
    n_grid = n_total * np.outer(masses, [fb.weight for fb in fbins])
    n_flat = n_grid.ravel()
    # normalize so the weights add up to n_total exactly
    n_flat *= n_total / n_flat.sum()

    scale = params.gens / math.sqrt(float(np.dot(n_flat, g_grid.ravel() ** 2)))
    subs = [
        SubEnsemble(g * scale, d, n)
        for g, d, n in zip(g_grid.ravel(), d_grid.ravel(), n_flat)
    ]
    model = EnsembleModel(subs, params)
    logger.debug(
        f"built {model!r} from {len(g_values)} coupling x {len(fbins)} frequency bins"
        f" (g rescale {scale:.6f})"
    )
    return model
