"""Domain types shared by every module: physical parameters, the sub-ensemble
model, moment states and control samples.

All frequencies are angular (rad/s) and all times are seconds. The moment
vector is ordered ``(X_c, P_c, Sx_1, Sy_1, Sz_1, Sx_2, ...)`` with
``a_c = (X_c + i P_c)/sqrt(2)`` and ``S_- = (S_x - i S_y)/2``; covariance
entries are ``C(k, l) = 2 Re <dy_k dy_l>`` so a coherent cavity has
``C = 1`` on its diagonal.
"""
from __future__ import annotations

import dataclasses
import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy import constants, linalg

from spinmem.errors import ModelError

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)
N_CAVITY = 2
N_SPIN = 3
REL_TOL = 1e-6


def kappa_from_q(omega_c: float, q: float) -> float:
    """Field decay rate of a cavity with quality factor ``q``."""
    if q <= 0:
        raise ModelError("quality factor must be positive", q=q)
    return omega_c / (2.0 * q)


@dataclasses.dataclass(frozen=True)
class PhysicalParams:
    """Physical constants of one memory configuration (angular units)."""

    gens: float
    w: float
    delta_hfs: float
    gamma_perp: float
    gamma_par: float
    kappa_min: float
    kappa_max: float
    omega_c: float
    delta_cs_target: float
    delta_cs_parked: float
    chirp_rate: float
    p_peak: float
    n_total: float

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not math.isfinite(value) or value < 0:
                raise ModelError(
                    f"{field.name} must be finite and nonnegative",
                    **{field.name: value},
                )
        if not self.kappa_min < self.kappa_max:
            raise ModelError(
                "kappa_min must be below kappa_max",
                kappa_min=self.kappa_min,
                kappa_max=self.kappa_max,
            )
        if self.n_total <= 0:
            raise ModelError("n_total must be positive", n_total=self.n_total)

    @classmethod
    def from_q(
        cls, *, omega_c: float, q_max: float, q_min: float, **kwargs
    ) -> "PhysicalParams":
        """Build params with the cavity decay range given as quality factors."""
        return cls(
            omega_c=omega_c,
            kappa_min=kappa_from_q(omega_c, q_max),
            kappa_max=kappa_from_q(omega_c, q_min),
            **kwargs,
        )

    @classmethod
    def reference(cls, **overrides) -> "PhysicalParams":
        """The NV-diamond parameter set used throughout the reference runs."""
        gens = TWO_PI * 3.5e6
        g_bar = TWO_PI * 12.5
        omega_c = TWO_PI * 2.9e9
        values = dict(
            gens=gens,
            w=TWO_PI * 2.0e6,
            delta_hfs=TWO_PI * 2.2e6,
            gamma_perp=1.0 / 100e-6,
            gamma_par=0.0,
            kappa_min=kappa_from_q(omega_c, 1e4),
            kappa_max=kappa_from_q(omega_c, 1e2),
            omega_c=omega_c,
            delta_cs_target=TWO_PI * 100e6,
            delta_cs_parked=TWO_PI * 50e6,
            chirp_rate=TWO_PI * 10e6 / 1e-9,
            p_peak=100e-6,
            n_total=(gens / g_bar) ** 2,
        )
        values.update(overrides)
        return cls(**values)

    def replace(self, **changes) -> "PhysicalParams":
        return dataclasses.replace(self, **changes)

    @property
    def g_bar(self) -> float:
        """Mean single-spin coupling, ``gens / sqrt(N)``."""
        return self.gens / math.sqrt(self.n_total)

    @property
    def photon_energy(self) -> float:
        """Energy of one cavity photon in joules."""
        return constants.hbar * self.omega_c

    def cooperativity(self, gamma: float) -> float:
        """``gens**2 / (kappa_max * gamma)`` for a line of width ``gamma``."""
        return self.gens**2 / (self.kappa_max * gamma)


@dataclasses.dataclass(frozen=True)
class SubEnsemble:
    g: float
    delta: float
    n: float

    def __post_init__(self) -> None:
        if self.g < 0 or self.n < 0:
            raise ModelError("sub-ensemble needs g >= 0 and n >= 0", g=self.g, n=self.n)


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


class EnsembleModel:
    """Ordered sub-ensembles ``(g_m, delta_m, n_m)`` bound to a parameter set.

    ``cavity_coupling=False`` keeps the couplings for the g-weighted
    observables but removes the spin-cavity interaction from the dynamics.
    """

    def __init__(
        self,
        subs: Sequence[SubEnsemble],
        params: PhysicalParams,
        cavity_coupling: bool = True,
    ) -> None:
        if not subs:
            raise ModelError("an ensemble model needs at least one sub-ensemble")
        self.params = params
        self.cavity_coupling = cavity_coupling
        self.g = _frozen([s.g for s in subs])
        self.delta = _frozen([s.delta for s in subs])
        self.n = _frozen([s.n for s in subs])
        self._check_sum_rules()

    @classmethod
    def from_arrays(
        cls, params: PhysicalParams, g, delta, n, **kwargs
    ) -> "EnsembleModel":
        g, delta, n = np.broadcast_arrays(
            np.asarray(g, float), np.asarray(delta, float), np.asarray(n, float)
        )
        subs = [SubEnsemble(*row) for row in zip(g.ravel(), delta.ravel(), n.ravel())]
        return cls(subs, params, **kwargs)

    def _check_sum_rules(self) -> None:
        n_sum = float(self.n.sum())
        if not math.isclose(n_sum, self.params.n_total, rel_tol=REL_TOL):
            raise ModelError(
                "spin weights do not add up to n_total",
                n_sum=n_sum,
                n_total=self.params.n_total,
            )
        g2_sum = float(np.dot(self.n, self.g**2))
        if not math.isclose(g2_sum, self.params.gens**2, rel_tol=REL_TOL):
            raise ModelError(
                "sum of n*g**2 does not reproduce gens**2",
                g2_sum=g2_sum,
                gens2=self.params.gens**2,
            )

    @property
    def subs(self) -> tuple[SubEnsemble, ...]:
        return tuple(SubEnsemble(*row) for row in zip(self.g, self.delta, self.n))

    @property
    def size(self) -> int:
        return len(self.g)

    @property
    def dim(self) -> int:
        return N_CAVITY + N_SPIN * self.size

    @property
    def n_total(self) -> float:
        return float(self.n.sum())

    @property
    def g_dynamic(self) -> np.ndarray:
        """Couplings entering the equations of motion."""
        return self.g if self.cavity_coupling else np.zeros_like(self.g)

    def decoupled(self) -> "EnsembleModel":
        return EnsembleModel(self.subs, self.params, cavity_coupling=False)

    def with_params(self, params: PhysicalParams) -> "EnsembleModel":
        return EnsembleModel(self.subs, params, cavity_coupling=self.cavity_coupling)

    def __repr__(self) -> str:
        return (
            f"EnsembleModel(M={self.size}, N={self.n_total:.4g}, "
            f"gens/2pi={self.params.gens / TWO_PI:.4g} Hz)"
        )


def spin_slice(m: int) -> slice:
    """Vector slots of sub-ensemble ``m`` (0-based)."""
    start = N_CAVITY + N_SPIN * m
    return slice(start, start + N_SPIN)


def spin_index(m: int, component: int) -> int:
    """Slot of component 0/1/2 (x/y/z) of sub-ensemble ``m``."""
    if not 0 <= component < N_SPIN:
        raise IndexError(f"spin component {component} out of range")
    return N_CAVITY + N_SPIN * m + component


def sub_ensemble_of(index: int) -> tuple[int, int]:
    """Inverse of :func:`spin_index`."""
    if index < N_CAVITY:
        raise IndexError(f"slot {index} belongs to the cavity")
    return divmod(index - N_CAVITY, N_SPIN)


@dataclasses.dataclass(frozen=True)
class ControlSample:
    delta_cs: float
    kappa: float
    beta: complex = 0j


@dataclasses.dataclass(frozen=True, eq=False)
class MomentState:
    """First and second moments at one instant. ``cov`` is None in means-only runs."""

    means: np.ndarray
    cov: np.ndarray | None
    time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", _frozen(self.means))
        if self.cov is not None:
            cov = np.array(self.cov, dtype=float)
            d = len(self.means)
            if cov.shape != (d, d):
                raise ModelError(
                    "covariance shape does not match means", shape=cov.shape
                )
            cov.setflags(write=False)
            object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return len(self.means)

    @property
    def n_sub(self) -> int:
        return (self.dim - N_CAVITY) // N_SPIN

    @property
    def cavity_amplitude(self) -> complex:
        return complex(self.means[0], self.means[1]) / SQRT2

    @property
    def cavity_block(self) -> np.ndarray | None:
        return None if self.cov is None else np.array(self.cov[:N_CAVITY, :N_CAVITY])

    @property
    def var_sum(self) -> float:
        """``<dX^2> + <dP^2>`` of the cavity; 1 for vacuum, NaN without covariance."""
        if self.cov is None:
            return math.nan
        return 0.5 * float(self.cov[0, 0] + self.cov[1, 1])

    @property
    def spins(self) -> np.ndarray:
        return self.means[N_CAVITY:].reshape(-1, N_SPIN)

    def with_replaced_cavity(self, alpha: complex) -> "MomentState":
        """Swap in a fresh coherent cavity state, keeping the spin moments.

        Cavity-spin covariances are cleared and the spin-spin block is kept.
        """
        means = np.array(self.means)
        means[0] = SQRT2 * alpha.real
        means[1] = SQRT2 * alpha.imag
        cov = None
        if self.cov is not None:
            cov = np.array(self.cov)
            cov[:N_CAVITY, :] = 0.0
            cov[:, :N_CAVITY] = 0.0
            cov[0, 0] = cov[1, 1] = 1.0
        return MomentState(means, cov, self.time)

    def min_eigenvalue_ratio(self) -> float:
        """Smallest covariance eigenvalue relative to the trace."""
        if self.cov is None:
            return math.nan
        eigenvalues = linalg.eigvalsh(self.cov)
        return float(eigenvalues[0] / max(np.trace(self.cov), np.finfo(float).tiny))


def init_state(
    model: EnsembleModel, cavity_alpha: complex = 0j, means_only: bool = False
) -> MomentState:
    """Coherent cavity field ``cavity_alpha`` with every spin in its ground state."""
    d = model.dim
    means = np.zeros(d)
    means[0] = SQRT2 * complex(cavity_alpha).real
    means[1] = SQRT2 * complex(cavity_alpha).imag
    means[N_CAVITY + 2 :: N_SPIN] = -model.n
    if means_only:
        return MomentState(means, None, 0.0)
    diag = np.zeros(d)
    diag[:N_CAVITY] = 1.0
    diag[N_CAVITY + 0 :: N_SPIN] = 2.0 * model.n
    diag[N_CAVITY + 1 :: N_SPIN] = 2.0 * model.n
    return MomentState(means, np.diag(diag), 0.0)


class SpinObservables(NamedTuple):
    sx_eff: float
    sy_eff: float
    p_exc: float
    p_exc_eff: float


def spin_weights(model: EnsembleModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-sub-ensemble weights ``g/g_bar`` and ``g**2/g_bar**2``."""
    n_total = model.n_total
    if n_total <= 0:
        raise ModelError("g-weighted observables need N > 0")
    g_bar = model.params.gens / math.sqrt(n_total)
    ratio = model.g / g_bar
    return ratio, ratio**2


def weighted_spin_series(means: np.ndarray, model: EnsembleModel) -> np.ndarray:
    """Vectorized observables for an array of mean vectors, shape ``(T, 4)``."""
    w1, w2 = spin_weights(model)
    n_total = model.n_total
    spins = np.asarray(means)[..., N_CAVITY:].reshape(*np.shape(means)[:-1], -1, N_SPIN)
    sx_eff = spins[..., 0] @ w1
    sy_eff = spins[..., 1] @ w1
    p_exc = (spins[..., 2].sum(axis=-1) + n_total) / (2.0 * n_total)
    p_exc_eff = (spins[..., 2] @ w2 + n_total) / (2.0 * n_total)
    return np.stack([sx_eff, sy_eff, p_exc, p_exc_eff], axis=-1)


def weighted_spin_observables(
    state: MomentState, model: EnsembleModel
) -> SpinObservables:
    """g-weighted transverse spin and (effective) excitation probabilities."""
    if state.dim != model.dim:
        raise ModelError("state does not belong to this model", dim=state.dim)
    values = weighted_spin_series(state.means, model)
    return SpinObservables(*(float(v) for v in values))


def weighted_spin_variance(cov: np.ndarray, model: EnsembleModel) -> float:
    """``[Var(Sx_eff) + Var(Sy_eff)] / (2N)``; 1 for the ground state."""
    w1, _ = spin_weights(model)
    ix = np.arange(N_CAVITY, model.dim, N_SPIN)
    iy = ix + 1
    c_xx = w1 @ cov[np.ix_(ix, ix)] @ w1
    c_yy = w1 @ cov[np.ix_(iy, iy)] @ w1
    return float(c_xx + c_yy) / (4.0 * model.n_total)
