"""Mean-value and covariance derivatives of the cavity plus sub-ensembles.

The drift matrix has block-arrow structure: a 2x2 cavity block ``A``, cavity
rows ``B_m`` (2x3), spin rows ``C_m`` (3x2) and spin blocks ``D_m`` (3x3), with
no coupling between distinct sub-ensembles. Products with the covariance are
evaluated block-wise so the cost stays linear in M per covariance column.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from spinmem.model import (
    N_CAVITY,
    N_SPIN,
    SQRT2,
    ControlSample,
    EnsembleModel,
    MomentState,
)

INV_SQRT2 = 1.0 / SQRT2


@dataclasses.dataclass(frozen=True)
class DriftBlocks:
    a_block: np.ndarray
    b_blocks: np.ndarray
    c_blocks: np.ndarray
    d_blocks: np.ndarray

    def assemble(self) -> np.ndarray:
        """Dense drift matrix (for checks on small models)."""
        m_count = len(self.d_blocks)
        d = N_CAVITY + N_SPIN * m_count
        out = np.zeros((d, d))
        out[:N_CAVITY, :N_CAVITY] = self.a_block
        for m in range(m_count):
            s = slice(N_CAVITY + N_SPIN * m, N_CAVITY + N_SPIN * (m + 1))
            out[:N_CAVITY, s] = self.b_blocks[m]
            out[s, :N_CAVITY] = self.c_blocks[m]
            out[s, s] = self.d_blocks[m]
        return out


@dataclasses.dataclass(frozen=True)
class NoiseBlocks:
    v_block: np.ndarray
    u_blocks: np.ndarray

    def assemble(self) -> np.ndarray:
        m_count = len(self.u_blocks)
        d = N_CAVITY + N_SPIN * m_count
        out = np.zeros((d, d))
        out[:N_CAVITY, :N_CAVITY] = self.v_block
        for m in range(m_count):
            s = slice(N_CAVITY + N_SPIN * m, N_CAVITY + N_SPIN * (m + 1))
            out[s, s] = self.u_blocks[m]
        return out


class MomentEquations:
    """Right-hand sides for one model, with per-model constants precomputed."""

    def __init__(self, model: EnsembleModel, covariance_coupling: bool = False) -> None:
        self.model = model
        self.covariance_coupling = covariance_coupling
        params = model.params
        self.gamma_perp = params.gamma_perp
        self.gamma_par = params.gamma_par
        self.m_count = model.size
        self.dim = model.dim
        self.g = np.array(model.g_dynamic)
        self.g_half = self.g * INV_SQRT2
        self.g_root2 = self.g * SQRT2
        self.delta = np.array(model.delta)
        self.n = np.array(model.n)

        idx = N_CAVITY + N_SPIN * np.arange(self.m_count)
        rows = idx[:, None, None] + np.arange(N_SPIN)[None, :, None]
        cols = idx[:, None, None] + np.arange(N_SPIN)[None, None, :]
        self._block_rows = np.broadcast_to(rows, (self.m_count, N_SPIN, N_SPIN)).ravel()
        self._block_cols = np.broadcast_to(cols, (self.m_count, N_SPIN, N_SPIN)).ravel()
        self._ix = idx
        self._iy = idx + 1
        self._iz = idx + 2

    # -- blocks -----------------------------------------------------------------

    def drift_blocks(self, means: np.ndarray, ctrl: ControlSample) -> DriftBlocks:
        x_c, p_c = means[0], means[1]
        spins = means[N_CAVITY:].reshape(-1, N_SPIN)
        sx, sy, sz = spins[:, 0], spins[:, 1], spins[:, 2]
        a_block = np.array(
            [[-ctrl.kappa, ctrl.delta_cs], [-ctrl.delta_cs, -ctrl.kappa]], dtype=float
        )

        m_count = self.m_count
        b_blocks = np.zeros((m_count, N_CAVITY, N_SPIN))
        b_blocks[:, 0, 1] = -self.g_half
        b_blocks[:, 1, 0] = -self.g_half

        c_blocks = np.zeros((m_count, N_SPIN, N_CAVITY))
        c_blocks[:, 0, 1] = -self.g_root2 * sz
        c_blocks[:, 1, 0] = -self.g_root2 * sz
        c_blocks[:, 2, 0] = self.g_root2 * sy
        c_blocks[:, 2, 1] = self.g_root2 * sx

        d_blocks = np.zeros((m_count, N_SPIN, N_SPIN))
        d_blocks[:, 0, 0] = -self.gamma_perp
        d_blocks[:, 0, 1] = -self.delta
        d_blocks[:, 0, 2] = -self.g_root2 * p_c
        d_blocks[:, 1, 0] = self.delta
        d_blocks[:, 1, 1] = -self.gamma_perp
        d_blocks[:, 1, 2] = -self.g_root2 * x_c
        d_blocks[:, 2, 0] = self.g_root2 * p_c
        d_blocks[:, 2, 1] = self.g_root2 * x_c
        d_blocks[:, 2, 2] = -self.gamma_par
        return DriftBlocks(a_block, b_blocks, c_blocks, d_blocks)

    def noise_blocks(self, means: np.ndarray, ctrl: ControlSample) -> NoiseBlocks:
        spins = means[N_CAVITY:].reshape(-1, N_SPIN)
        v_block = np.diag([2.0 * ctrl.kappa, 2.0 * ctrl.kappa])
        u_blocks = np.zeros((self.m_count, N_SPIN, N_SPIN))
        u_blocks[:, 0, 0] = 4.0 * self.gamma_perp * self.n
        u_blocks[:, 1, 1] = 4.0 * self.gamma_perp * self.n
        u_blocks[:, 0, 2] = u_blocks[:, 2, 0] = 2.0 * self.gamma_par * spins[:, 0]
        u_blocks[:, 1, 2] = u_blocks[:, 2, 1] = 2.0 * self.gamma_par * spins[:, 1]
        u_blocks[:, 2, 2] = 4.0 * self.gamma_par * (spins[:, 2] + self.n)
        return NoiseBlocks(v_block, u_blocks)

    # -- derivatives ------------------------------------------------------------

    def mean_rhs(
        self, means: np.ndarray, cov: np.ndarray | None, ctrl: ControlSample
    ) -> np.ndarray:
        x_c, p_c = means[0], means[1]
        spins = means[N_CAVITY:].reshape(-1, N_SPIN)
        sx, sy, sz = spins[:, 0], spins[:, 1], spins[:, 2]
        kappa, delta_cs = ctrl.kappa, ctrl.delta_cs
        drive = 2.0 * math.sqrt(kappa) * ctrl.beta

        # products of operators: <A B> = A B + <dA dB>, with <dA dB> = C/2
        sz_p, sz_x = sz * p_c, sz * x_c
        sx_p, sy_x = sx * p_c, sy * x_c
        if self.covariance_coupling and cov is not None:
            sz_p = sz_p + 0.5 * cov[self._iz, 1]
            sz_x = sz_x + 0.5 * cov[self._iz, 0]
            sx_p = sx_p + 0.5 * cov[self._ix, 1]
            sy_x = sy_x + 0.5 * cov[self._iy, 0]

        out = np.empty_like(means)
        out[0] = -kappa * x_c + delta_cs * p_c - self.g_half @ sy + drive.real
        out[1] = -kappa * p_c - delta_cs * x_c - self.g_half @ sx + drive.imag
        d_spins = out[N_CAVITY:].reshape(-1, N_SPIN)
        d_spins[:, 0] = -self.gamma_perp * sx - self.delta * sy - self.g_root2 * sz_p
        d_spins[:, 1] = -self.gamma_perp * sy + self.delta * sx - self.g_root2 * sz_x
        d_spins[:, 2] = self.g_root2 * (sx_p + sy_x) - self.gamma_par * (sz + self.n)
        return out

    def cov_rhs(
        self, means: np.ndarray, cov: np.ndarray, ctrl: ControlSample
    ) -> np.ndarray:
        """``M cov + cov M^T + N`` using the block structure of ``M``."""
        blocks = self.drift_blocks(means, ctrl)
        cov_c = cov[:N_CAVITY]
        cov_s = cov[N_CAVITY:].reshape(self.m_count, N_SPIN, self.dim)

        product = np.empty_like(cov)
        product[:N_CAVITY] = blocks.a_block @ cov_c
        product[0] -= self.g_half @ cov_s[:, 1, :]
        product[1] -= self.g_half @ cov_s[:, 0, :]
        spin_rows = product[N_CAVITY:].reshape(self.m_count, N_SPIN, self.dim)
        np.matmul(blocks.c_blocks, cov_c, out=spin_rows)
        spin_rows += np.matmul(blocks.d_blocks, cov_s)

        out = product + product.T
        noise = self.noise_blocks(means, ctrl)
        out[0, 0] += noise.v_block[0, 0]
        out[1, 1] += noise.v_block[1, 1]
        out[self._block_rows, self._block_cols] += noise.u_blocks.ravel()
        return out


def mean_derivative(
    state: MomentState,
    ctrl: ControlSample,
    model: EnsembleModel,
    include_covariance_coupling: bool = False,
) -> np.ndarray:
    """d(means)/dt for one state."""
    equations = MomentEquations(model, include_covariance_coupling)
    return equations.mean_rhs(np.asarray(state.means), state.cov, ctrl)


def covariance_derivative(
    state: MomentState, ctrl: ControlSample, model: EnsembleModel
) -> np.ndarray:
    """d(cov)/dt for one state; symmetric for symmetric input."""
    if state.cov is None:
        raise ValueError("covariance derivative needs a full-moment state")
    return MomentEquations(model).cov_rhs(np.asarray(state.means), state.cov, ctrl)
