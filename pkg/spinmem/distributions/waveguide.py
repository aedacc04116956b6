"""Coplanar-waveguide vacuum field and the single-spin coupling it implies.

The field of the quasi-TEM mode is evaluated from its Fourier series over the
ground-plane period; the zero-point voltage at the resonator midpoint sets the
field scale for a single photon.
"""
from __future__ import annotations

import dataclasses
import math
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import constants

from spinmem.errors import DistributionError
from spinmem.export import read_csv, write_csv
from spinmem.logs import logger

ETA = 376.7
G_NV = 2.0028
MU_B = constants.physical_constants["Bohr magneton"][0]
SERIES_TOLERANCE = 1e-8
DEFAULT_TERMS = 500
MAX_TERMS = 20000


@dataclasses.dataclass(frozen=True)
class WaveguideGeometry:
    """Cross-section of the resonator and of the crystal on top of it (meters)."""

    s_center: float = 10e-6
    w_gap: float = 5e-6
    b: float = 300e-6
    epsilon_r: float = 11.7
    z0_ohms: float = 50.0
    length_l: float = 0.02
    y_min: float = 0.5e-6
    y_max: float = 40e-6
    crystal_half_width: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.delta < 1 or not 0 < self.delta_bar < 1:
            raise DistributionError(
                "waveguide geometry needs 0 < W/b < 1 and 0 < (S+W)/b < 1",
                delta=self.delta,
                delta_bar=self.delta_bar,
            )
        if self.epsilon_r < 1:
            raise DistributionError("epsilon_r must be >= 1", epsilon_r=self.epsilon_r)
        if not 0 < self.y_min < self.y_max:
            raise DistributionError(
                "crystal cutoffs need 0 < y_min < y_max",
                y_min=self.y_min,
                y_max=self.y_max,
            )

    @property
    def delta(self) -> float:
        return self.w_gap / self.b

    @property
    def delta_bar(self) -> float:
        return (self.s_center + self.w_gap) / self.b

    @property
    def epsilon_eff(self) -> float:
        return (self.epsilon_r + 1.0) / 2.0

    @property
    def half_width(self) -> float:
        if self.crystal_half_width is None:
            return self.b / 2.0
        return self.crystal_half_width


class FieldResult(NamedTuple):
    bx: np.ndarray
    by: np.ndarray
    converged: bool


class CouplingBin(NamedTuple):
    g: float
    mass: float
    g2_mass: float = math.nan


def zero_point_voltage(geom: WaveguideGeometry, omega_c: float) -> float:
    """RMS vacuum voltage at the resonator end, ``omega_c sqrt(hbar Z0 / pi)``."""
    return omega_c * math.sqrt(constants.hbar * geom.z0_ohms / math.pi)


def series_terms(y, geom: WaveguideGeometry) -> int:
    """Number of terms for which ``exp(-gamma_n y)`` drops below the tolerance."""
    y = float(np.min(y))
    needed = math.ceil(geom.b * math.log(1.0 / SERIES_TOLERANCE) / (math.pi * y)) + 1
    return int(min(max(DEFAULT_TERMS, needed), MAX_TERMS))


def _gamma_n(n: np.ndarray, geom: WaveguideGeometry, omega_c: float) -> np.ndarray:
    transverse = n * math.pi / geom.b
    dielectric = (
        4.0 * math.pi * constants.c * geom.b * math.sqrt(geom.epsilon_eff - 1.0)
        / (n * omega_c)
    )
    return np.sqrt(transverse**2 + dielectric**2)


def waveguide_field(
    x,
    y,
    geom: WaveguideGeometry,
    v0: float,
    omega_c: float,
    n_terms: int = DEFAULT_TERMS,
) -> FieldResult:
    """Partial sums of the Bx, By series at points ``(x, y)`` (broadcast)."""
    if n_terms < 1:
        raise DistributionError("n_terms must be >= 1", n_terms=n_terms)
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if np.any(y <= 0):
        raise DistributionError("field series needs y > 0")

    n = np.arange(1, n_terms + 1, dtype=float)
    gamma = _gamma_n(n, geom, omega_c)
    f_n = geom.b * gamma / (n * math.pi)
    half_arg = n * math.pi * geom.delta / 2.0
    shape = np.sin(half_arg) / half_arg * np.sin(n * math.pi * geom.delta_bar / 2.0)
    prefactor = (
        -2.0 * constants.mu_0 * v0 / (ETA * geom.b) * math.sqrt(geom.epsilon_eff)
    )

    phase = n * math.pi * x[..., None] / geom.b
    decay = np.exp(-gamma * y[..., None])
    terms_x = prefactor * (shape / f_n) * np.cos(phase) * decay
    terms_y = prefactor * shape * np.sin(phase) * decay
    bx = terms_x.sum(axis=-1)
    by = terms_y.sum(axis=-1)

    last = np.hypot(terms_x[..., -1], terms_y[..., -1])
    total = np.hypot(bx, by)
    converged = bool(np.all(last <= SERIES_TOLERANCE * np.maximum(total, 1e-300)))
    if not converged:
        logger.debug(f"field series not converged with {n_terms} terms")
    return FieldResult(bx, by, converged)


def coupling_from_field(b_perp) -> np.ndarray:
    """Single-spin coupling (rad/s) for a transverse vacuum field (tesla)."""
    return G_NV * MU_B * np.asarray(b_perp) / (math.sqrt(2.0) * constants.hbar)


def coupling_constant(x, y, geom: WaveguideGeometry, omega_c: float) -> np.ndarray:
    """Coupling of a spin at ``(x, y)`` in the middle of the resonator."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if np.any(y < geom.y_min) or np.any(y > geom.y_max):
        raise DistributionError(
            "point outside the crystal cutoffs",
            y_min=geom.y_min,
            y_max=geom.y_max,
        )
    v0 = zero_point_voltage(geom, omega_c)
    bx, by, converged = waveguide_field(x, y, geom, v0, omega_c, series_terms(y, geom))
    if not converged:
        logger.warn("waveguide field series did not reach its tolerance")
    return coupling_from_field(np.hypot(bx, by))


def _grid_couplings(geom: WaveguideGeometry, omega_c: float, n_grid: int) -> np.ndarray:
    hw = geom.half_width
    dx = 2.0 * hw / n_grid
    dy = (geom.y_max - geom.y_min) / n_grid
    xs = -hw + dx * (np.arange(n_grid) + 0.5)
    ys = geom.y_min + dy * (np.arange(n_grid) + 0.5)
    return np.concatenate([coupling_constant(xs, y, geom, omega_c) for y in ys])


def _sampled_couplings(
    geom: WaveguideGeometry, omega_c: float, samples: int, seed: int, chunk: int = 1000
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-geom.half_width, geom.half_width, samples)
    ys = rng.uniform(geom.y_min, geom.y_max, samples)
    order = np.argsort(ys)
    xs, ys = xs[order], ys[order]
    return np.concatenate(
        [
            coupling_constant(xs[i : i + chunk], ys[i : i + chunk], geom, omega_c)
            for i in range(0, samples, chunk)
        ]
    )


def histogram_couplings(g_values: np.ndarray, n_bins: int) -> list[CouplingBin]:
    """Log-spaced histogram; each bin carries its spin fraction and rms coupling."""
    g_values = np.asarray(g_values, float)
    g_values = g_values[g_values > 0]
    if g_values.size == 0:
        raise DistributionError("no spins with nonzero coupling")
    lo, hi = float(g_values.min()), float(g_values.max())
    if math.isclose(lo, hi):
        return [CouplingBin(lo, 1.0, 1.0)]
    edges = np.geomspace(lo, hi, n_bins + 1)
    counts, _ = np.histogram(g_values, bins=edges)
    g2_sums, _ = np.histogram(g_values, bins=edges, weights=g_values**2)
    bins = []
    for count, g2 in zip(counts, g2_sums):
        if count == 0:
            continue
        bins.append(
            CouplingBin(
                g=math.sqrt(g2 / count),
                mass=count / g_values.size,
                g2_mass=g2 / g2_sums.sum(),
            )
        )
    return bins


def coupling_histogram_from_geometry(
    geom: WaveguideGeometry,
    omega_c: float,
    n_g_bins: int = 7,
    n_grid: int = 400,
    monte_carlo_samples: int = 0,
    seed: int = 0,
) -> list[CouplingBin]:
    """Coupling distribution of a uniformly filled crystal cross-section.

    Uses a midpoint grid unless ``monte_carlo_samples`` is positive.
    """
    if monte_carlo_samples > 0:
        g_values = _sampled_couplings(geom, omega_c, monte_carlo_samples, seed)
    else:
        g_values = _grid_couplings(geom, omega_c, n_grid)
    bins = histogram_couplings(g_values, n_g_bins)
    logger.debug(
        f"coupling histogram: {len(bins)} bins, g/2pi in"
        f" [{bins[0].g / (2 * math.pi):.3g}, {bins[-1].g / (2 * math.pi):.3g}] Hz"
    )
    return bins


def write_coupling_csv(path: str | Path, bins: Sequence[CouplingBin]) -> Path:
    rows = [(b.g / (2 * math.pi), b.mass, b.g2_mass) for b in bins]
    return write_csv(path, ["g_hz", "mass", "g2_mass"], rows)


def read_coupling_csv(path: str | Path) -> list[CouplingBin]:
    header, data = read_csv(path)
    if header[:2] != ["g_hz", "mass"]:
        raise DistributionError(
            "coupling histogram needs columns g_hz,mass", header=header, path=str(path)
        )
    bins = [CouplingBin(row[0] * 2 * math.pi, row[1]) for row in data]
    if not bins:
        raise DistributionError("coupling histogram is empty", path=str(path))
    return bins
