"""Master-equation reference for a cavity coupled to at most three spins.

The density matrix lives on a truncated Fock space times the spin qubits and is
stepped with the same segment-aligned RK4 scheme as the moment equations, so
comparisons isolate the error of the second-order moment closure.
"""
from __future__ import annotations

import dataclasses
import functools
import math
from typing import Sequence

import numpy as np
import qutip

from spinmem.dynamics.controls import TIME_EPS, ControlSchedule, aligned_step
from spinmem.dynamics.integrator import Trajectory, integrate
from spinmem.errors import OracleError
from spinmem.logs import logger
from spinmem.model import (
    N_CAVITY,
    N_SPIN,
    SQRT2,
    ControlSample,
    EnsembleModel,
    PhysicalParams,
    SubEnsemble,
    init_state,
)

MAX_SPINS = 3
TRACE_TOLERANCE = 1e-6
TAIL_TOLERANCE = 1e-6


@dataclasses.dataclass(frozen=True)
class SmallSystem:
    g: tuple[float, ...]
    delta: tuple[float, ...]
    n_max: int
    gamma_perp: float
    gamma_par: float = 0.0

    def __post_init__(self) -> None:
        if not 1 <= len(self.g) <= MAX_SPINS or len(self.g) != len(self.delta):
            raise OracleError(
                f"the oracle handles 1 to {MAX_SPINS} spins", n_spins=len(self.g)
            )
        if self.n_max < 1:
            raise OracleError("photon cutoff must be at least 1", n_max=self.n_max)
        if self.gamma_perp < self.gamma_par / 2:
            raise OracleError(
                "gamma_perp must be at least gamma_par / 2",
                gamma_perp=self.gamma_perp,
                gamma_par=self.gamma_par,
            )

    @property
    def n_spins(self) -> int:
        return len(self.g)

    @property
    def dim(self) -> int:
        return (self.n_max + 1) * 2**self.n_spins

    @classmethod
    def collective(
        cls,
        n_spins: int,
        g_sqrt_n: float,
        n_max: int,
        gamma_perp: float,
        delta_spread: float = 0.0,
        gamma_par: float = 0.0,
    ) -> "SmallSystem":
        """Equal couplings with ``g sqrt(N) = g_sqrt_n``, detunings spread evenly."""
        g = g_sqrt_n / math.sqrt(n_spins)
        if n_spins > 1:
            deltas = np.linspace(-delta_spread, delta_spread, n_spins)
        else:
            deltas = [0.0]
        return cls(
            (g,) * n_spins,
            tuple(float(d) for d in deltas),
            n_max,
            gamma_perp,
            gamma_par,
        )

    def moment_model(self, params: PhysicalParams) -> EnsembleModel:
        """The same system as sub-ensembles of one spin each."""
        gens = math.sqrt(sum(g * g for g in self.g))
        params = params.replace(
            gens=gens,
            n_total=float(self.n_spins),
            gamma_perp=self.gamma_perp,
            gamma_par=self.gamma_par,
        )
        parts = [SubEnsemble(g, d, 1.0) for g, d in zip(self.g, self.delta)]
        return EnsembleModel(parts, params)


class _Operators:
    def __init__(self, system: SmallSystem) -> None:
        nc = system.n_max + 1
        n = system.n_spins
        eye_spins = [qutip.qeye(2)] * n

        def spin_op(op, j):
            factors = [qutip.qeye(nc)] + list(eye_spins)
            factors[1 + j] = op
            return qutip.tensor(factors)

        a = qutip.tensor([qutip.destroy(nc)] + eye_spins)
        self.a = a.full()
        self.n_photon = (a.dag() * a).full()
        self.x = ((a + a.dag()) / SQRT2).full()
        self.p = ((a - a.dag()) / (1j * SQRT2)).full()
        self.sx = [spin_op(qutip.sigmax(), j).full() for j in range(n)]
        self.sy = [spin_op(qutip.sigmay(), j).full() for j in range(n)]
        self.sz = [spin_op(qutip.sigmaz(), j).full() for j in range(n)]
        sm = [spin_op(qutip.sigmam(), j) for j in range(n)]

        h_spin = sum(
            0.5 * d * spin_op(qutip.sigmaz(), j) for j, d in enumerate(system.delta)
        )
        h_spin = h_spin + sum(
            g * (a * sm[j].dag() + a.dag() * sm[j]) for j, g in enumerate(system.g)
        )
        self.h_static = h_spin.full()

        rate_dephase = system.gamma_perp - system.gamma_par / 2.0
        collapse = []
        for j in range(n):
            if system.gamma_par > 0:
                collapse.append(math.sqrt(system.gamma_par) * sm[j].full())
            if rate_dephase > 0:
                collapse.append(math.sqrt(rate_dephase / 2.0) * self.sz[j])
        self.collapse = collapse
        self.collapse_norm = [c.conj().T @ c for c in collapse]
        top = np.zeros(nc)
        top[-1] = 1.0
        self.top_photon = qutip.tensor(
            [qutip.Qobj(np.diag(top))] + eye_spins
        ).full()

        # moment-vector observables: X, P, then (Sx, Sy, Sz) per spin
        self.observables = [self.x, self.p]
        for j in range(n):
            self.observables += [self.sx[j], self.sy[j], self.sz[j]]


@functools.lru_cache(maxsize=4)
def _operators(system: SmallSystem) -> _Operators:
    return _Operators(system)


def initial_density(
    system: SmallSystem,
    alpha: complex = 0j,
    spin_states: Sequence[qutip.Qobj] | None = None,
) -> np.ndarray:
    """Coherent cavity times the given spin kets (ground state by default)."""
    nc = system.n_max + 1
    spins = spin_states or [qutip.basis(2, 1)] * system.n_spins
    psi = qutip.tensor([qutip.coherent(nc, complex(alpha))] + list(spins))
    return qutip.ket2dm(psi).full()


def _rhs(rho: np.ndarray, ops: _Operators, ctrl: ControlSample) -> np.ndarray:
    a = ops.a
    h = ops.h_static + ctrl.delta_cs * ops.n_photon
    if ctrl.beta != 0 and ctrl.kappa > 0:
        field = ctrl.beta * a.conj().T - np.conj(ctrl.beta) * a
        drive = math.sqrt(2.0 * ctrl.kappa) * field
        h = h + 1j * drive
    out = -1j * (h @ rho - rho @ h)
    if ctrl.kappa > 0:
        out += 2.0 * ctrl.kappa * (
            a @ rho @ a.conj().T - 0.5 * (ops.n_photon @ rho + rho @ ops.n_photon)
        )
    for c, cc in zip(ops.collapse, ops.collapse_norm):
        out += c @ rho @ c.conj().T - 0.5 * (cc @ rho + rho @ cc)
    return out


def _moments(rho: np.ndarray, ops: _Operators) -> tuple[np.ndarray, np.ndarray]:
    means = np.array([np.trace(o @ rho).real for o in ops.observables])
    d = len(means)
    cov = np.empty((d, d))
    for k in range(d):
        for l in range(k, d):
            x_k, x_l = ops.observables[k], ops.observables[l]
            sym = x_k @ x_l + x_l @ x_k
            cov[k, l] = cov[l, k] = np.trace(sym @ rho).real - 2.0 * means[k] * means[l]
    return means, cov


@dataclasses.dataclass(frozen=True, eq=False)
class LindbladTrajectory:
    times: np.ndarray
    means: np.ndarray
    cov: np.ndarray
    final_rho: np.ndarray

    @property
    def lowering(self) -> np.ndarray:
        """``<sigma_->`` of every spin over time."""
        spins = self.means[:, N_CAVITY:].reshape(len(self.times), -1, N_SPIN)
        return 0.5 * (spins[:, :, 0] - 1j * spins[:, :, 1])


def lindblad_evolve(
    system: SmallSystem,
    schedule: ControlSchedule,
    rho0: np.ndarray,
    t0: float = 0.0,
    t1: float | None = None,
    dt: float = 1e-10,
    sample_stride: float = 1e-9,
) -> LindbladTrajectory:
    """Integrate the master equation and sample the moment-vector observables."""
    ops = _operators(system)
    t1 = schedule.duration if t1 is None else t1
    rho = np.array(rho0, dtype=complex)
    times, means, covs = [], [], []
    next_time = -math.inf

    def record(t: float) -> None:
        nonlocal next_time
        if t < next_time - TIME_EPS:
            return
        m, c = _moments(rho, ops)
        times.append(t)
        means.append(m)
        covs.append(c)
        next_time = t + sample_stride if next_time == -math.inf else next_time
        while next_time <= t + TIME_EPS:
            next_time += sample_stride

    def check(t: float) -> None:
        drift = abs(np.trace(rho).real - 1.0)
        if drift > TRACE_TOLERANCE:
            raise OracleError("density-matrix trace drifted", time_s=t, drift=drift)
        tail = float(np.trace(ops.top_photon @ rho).real)
        if tail > TAIL_TOLERANCE:
            raise OracleError(
                "photon cutoff too low: top Fock level is populated",
                time_s=t,
                tail=tail,
                n_max=system.n_max,
            )

    record(t0)
    for seg in schedule:
        lo, hi = max(seg.t_start, t0), min(seg.t_end, t1)
        if hi - lo <= TIME_EPS:
            continue
        n_steps, h = aligned_step(hi - lo, dt)
        offset = lo - seg.t_start
        for k in range(n_steps):
            t_local = offset + k * h
            c0 = seg.control_at(t_local)
            c1 = seg.control_at(t_local + h / 2)
            c2 = seg.control_at(t_local + h)
            k1 = _rhs(rho, ops, c0)
            k2 = _rhs(rho + h / 2 * k1, ops, c1)
            k3 = _rhs(rho + h / 2 * k2, ops, c1)
            k4 = _rhs(rho + h * k3, ops, c2)
            rho = rho + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)
            record(seg.t_start + t_local + h)
        check(hi)
    if not times or abs(times[-1] - t1) > TIME_EPS:
        next_time = -math.inf
        record(t1)

    return LindbladTrajectory(np.array(times), np.array(means), np.array(covs), rho)


@dataclasses.dataclass(frozen=True)
class OracleComparison:
    """Largest deviations of the moment code, relative to the scale of each group."""

    mean_errors: dict
    cavity_cov_errors: dict

    @property
    def max_mean_error(self) -> float:
        return max(self.mean_errors.values())

    @property
    def max_cavity_cov_error(self) -> float:
        return max(self.cavity_cov_errors.values())

    def to_dict(self) -> dict:
        return {
            "mean_errors": self.mean_errors,
            "cavity_cov_errors": self.cavity_cov_errors,
            "max_mean_error": self.max_mean_error,
            "max_cavity_cov_error": self.max_cavity_cov_error,
        }


def _relative_error(
    reference: np.ndarray, candidate: np.ndarray, scale: float
) -> float:
    error = float(np.max(np.abs(candidate - reference)))
    return error / scale if scale > 0 else error


def _mean_scales(means: np.ndarray, n_spins: int) -> list[float]:
    """Error scale per observable: the cavity amplitude, each spin's transverse
    length, and each spin's inversion."""
    scales = [float(np.max(np.hypot(means[:, 0], means[:, 1])))] * N_CAVITY
    for j in range(n_spins):
        k = N_CAVITY + N_SPIN * j
        transverse = float(np.max(np.hypot(means[:, k], means[:, k + 1])))
        scales += [transverse, transverse, float(np.max(np.abs(means[:, k + 2])))]
    return scales


def observable_names(n_spins: int) -> list[str]:
    names = ["Xc", "Pc"]
    for j in range(n_spins):
        names += [f"Sx{j}", f"Sy{j}", f"Sz{j}"]
    return names


def compare_with_moments(
    system: SmallSystem,
    schedule: ControlSchedule,
    params: PhysicalParams,
    alpha: complex,
    dt: float = 1e-10,
    sample_stride: float = 1e-9,
) -> tuple[OracleComparison, LindbladTrajectory, Trajectory]:
    """Run the master equation and the moment equations side by side."""
    model = system.moment_model(params)
    reference = lindblad_evolve(
        system,
        schedule,
        initial_density(system, alpha),
        dt=dt,
        sample_stride=sample_stride,
    )
    moments = integrate(
        init_state(model, alpha),
        schedule,
        model,
        dt=dt,
        covariance_coupling=True,
        sample_stride=sample_stride,
    )
    idx = [moments.index_at(t) for t in reference.times]
    scales = _mean_scales(reference.means, system.n_spins)
    mean_errors = {
        name: _relative_error(reference.means[:, k], moments.means[idx, k], scales[k])
        for k, name in enumerate(observable_names(system.n_spins))
    }
    # covariances relative to the larger quadrature variance
    cov_scale = float(np.max(np.abs(reference.cov[:, [0, 1], [0, 1]])))
    cov_errors = {
        name: _relative_error(
            reference.cov[:, i, j], moments.cavity_cov[idx, i, j], cov_scale
        )
        for name, (i, j) in {"XX": (0, 0), "PP": (1, 1), "XP": (0, 1)}.items()
    }
    comparison = OracleComparison(mean_errors, cov_errors)
    logger.info(
        f"max mean error {comparison.max_mean_error:.2e},"
        f" max cavity covariance error {comparison.max_cavity_cov_error:.2e}",
        title="Oracle",
    )
    return comparison, reference, moments


def spin_fid_check(
    system: SmallSystem, t_end: float, dt: float = 1e-10, sample_stride: float = 1e-9
) -> float:
    """Decoupled spins in an equal superposition.

    Each coherence is compared against ``exp(-(gamma_perp + i delta) t)``.
    """
    if any(g != 0 for g in system.g):
        raise OracleError("the spin decay check needs g = 0")
    plus = (qutip.basis(2, 0) + qutip.basis(2, 1)).unit()
    rho0 = initial_density(system, 0j, [plus] * system.n_spins)
    # an idle, empty cavity
    schedule = ControlSchedule.constant(t_end, 0.0, 0.0, dt)
    trajectory = lindblad_evolve(
        system, schedule, rho0, dt=dt, sample_stride=sample_stride
    )
    lowering = trajectory.lowering
    expected = lowering[0][None, :] * np.exp(
        -np.outer(trajectory.times, system.gamma_perp + 1j * np.asarray(system.delta))
    )
    return float(np.max(np.abs(lowering - expected)) / np.max(np.abs(lowering[0])))
