"""Hyperfine-split spin resonance line and its discretization."""
from __future__ import annotations

import dataclasses
import math
from typing import NamedTuple

import numpy as np

from spinmem.errors import DistributionError
from spinmem.logs import logger

# Peak positions in units of the hyperfine splitting, equal weights.
PEAK_OFFSETS = (-1.0, 0.0, 1.0)


@dataclasses.dataclass(frozen=True)
class FrequencyLine:
    """Three Lorentzians of FWHM ``w`` spaced by ``delta_hfs`` (all rad/s)."""

    w: float
    delta_hfs: float
    gamma_perp: float = 0.0

    def __post_init__(self) -> None:
        if self.w < 0 or self.delta_hfs < 0 or self.gamma_perp < 0:
            raise DistributionError(
                "line parameters must be nonnegative",
                w=self.w,
                delta_hfs=self.delta_hfs,
                gamma_perp=self.gamma_perp,
            )

    @property
    def centers(self) -> np.ndarray:
        return np.array(PEAK_OFFSETS) * self.delta_hfs

    def density(self, delta) -> np.ndarray:
        """f(delta), normalized to unit integral."""
        delta = np.asarray(delta, dtype=float)
        hw2 = (self.w / 2.0) ** 2
        total = sum(1.0 / ((delta - c) ** 2 + hw2) for c in self.centers)
        return self.w / (6.0 * math.pi) * total

    def cdf(self, delta) -> np.ndarray:
        """Cumulative distribution from the arctangent antiderivative."""
        delta = np.asarray(delta, dtype=float)
        half_width = self.w / 2.0
        parts = [
            0.5 + np.arctan((delta - c) / half_width) / math.pi for c in self.centers
        ]
        return sum(parts) / len(parts)

    def fid_envelope(self, t) -> np.ndarray:
        """Free-induction decay ``<S_-(t)>/<S_-(0)>`` of the full line."""
        t = np.asarray(t, dtype=float)
        return (
            (1.0 + 2.0 * np.cos(self.delta_hfs * t))
            / 3.0
            * np.exp(-(self.gamma_perp + self.w / 2.0) * t)
        )


def lorentzian_triplet(delta, line: FrequencyLine) -> np.ndarray:
    return line.density(delta)


class FrequencyBin(NamedTuple):
    delta: float
    weight: float


def characteristic_width(line: FrequencyLine) -> float:
    """Effective width Gamma of the line entering the cooperativity."""
    a = line.gamma_perp + line.w / 2.0
    d2 = line.delta_hfs**2
    return a * (a**2 + d2) / (a**2 + d2 / 3.0)


def frequency_bins(
    line: FrequencyLine,
    n_bins: int,
    span: float,
    max_tail_mass: float = 1e-2,
) -> list[FrequencyBin]:
    """Equal-width bins over ``[-span, span]`` with exact Lorentzian bin masses.

    Mass outside the span is folded into the outermost bins. A single bin
    stands for a line without inhomogeneous broadening and sits at zero.
    """
    if n_bins < 1 or n_bins % 2 == 0:
        raise DistributionError("n_bins must be a positive odd number", n_bins=n_bins)
    if n_bins == 1:
        return [FrequencyBin(0.0, 1.0)]
    if span <= 0 or line.w <= 0:
        raise DistributionError(
            "binning a line needs a positive span and width", span=span, w=line.w
        )

    edges = np.linspace(-span, span, n_bins + 1)
    cdf = line.cdf(edges)
    weights = np.diff(cdf)
    lower_tail = float(cdf[0])
    upper_tail = float(1.0 - cdf[-1])
    tail_mass = lower_tail + upper_tail
    if tail_mass > max_tail_mass:
        raise DistributionError(
            "frequency span too small for the line shape",
            tail_mass=tail_mass,
            max_tail_mass=max_tail_mass,
            span_hz=span / (2 * math.pi),
        )
    logger.debug(f"folding tail mass {tail_mass:.3e} into the outer frequency bins")
    weights[0] += lower_tail
    weights[-1] += upper_tail
    weights /= weights.sum()

    centers = 0.5 * (edges[:-1] + edges[1:])
    return [FrequencyBin(float(c), float(wt)) for c, wt in zip(centers, weights)]
