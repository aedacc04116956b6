"""Phase-insensitive Gaussian channel on a truncated Fock space.

Loss of transmissivity ``G**2`` is applied through its operator-sum form,
then classical noise as an average over random displacements on a
Gauss-Hermite grid. ``v_add`` is the added variance per quadrature in units
where the vacuum has 1/2.
"""
from __future__ import annotations

import functools
import math

import numpy as np
import qutip
from scipy import special

from spinmem.errors import ChannelError

DEFAULT_DIM = 20
DEFAULT_POINTS = 16


def loss_kraus(eta: float, dim: int) -> list[np.ndarray]:
    """Kraus operators ``E_k`` of a pure-loss channel with transmissivity ``eta``."""
    ops = []
    for k in range(dim):
        op = np.zeros((dim, dim))
        for n in range(k, dim):
            op[n - k, n] = math.sqrt(
                special.comb(n, k) * eta ** (n - k) * (1.0 - eta) ** k
            )
        ops.append(op)
    return ops


@functools.lru_cache(maxsize=8)
def _displacements(dim: int, points: int, v_add: float):
    nodes, weights = np.polynomial.hermite.hermgauss(points)
    scale = math.sqrt(v_add)
    ops, probs = [], []
    for u, wu in zip(nodes, weights):
        for v, wv in zip(nodes, weights):
            beta = scale * complex(u, v)
            # build in a larger space so the truncated block is accurate
            full = qutip.displace(2 * dim, beta).full()
            ops.append(full[:dim, :dim])
            probs.append(wu * wv / math.pi)
    return ops, np.array(probs)


def _as_array(rho) -> np.ndarray:
    if isinstance(rho, qutip.Qobj):
        return rho.full()
    return np.asarray(rho, dtype=complex)


def gaussian_channel_apply(
    rho_in, gain: float, v_add: float, points: int = DEFAULT_POINTS
) -> qutip.Qobj:
    """Amplitude gain ``gain`` (loss ``gain**2``) followed by added noise ``v_add``."""
    if v_add < 0:
        raise ChannelError("added noise must be nonnegative", v_add=v_add)
    if not 0.0 <= gain <= 1.0 + 1e-12:
        raise ChannelError("a passive channel needs 0 <= gain <= 1", gain=gain)
    rho = _as_array(rho_in)
    dim = rho.shape[0]

    eta = min(gain, 1.0) ** 2
    lossy = sum(op @ rho @ op.T for op in loss_kraus(eta, dim))
    if v_add == 0:
        return qutip.Qobj(lossy)

    ops, probs = _displacements(dim, points, float(v_add))
    out = np.zeros_like(lossy)
    for op, p in zip(ops, probs):
        out += p * (op @ lossy @ op.conj().T)
    return qutip.Qobj(out)


def tail_population(rho) -> float:
    """Population of the highest Fock level."""
    rho = _as_array(rho)
    return float(rho[-1, -1].real)


def quadrature_moments(rho) -> tuple[complex, float, float]:
    """``<a>``, ``Var(X)`` and ``Var(P)`` with vacuum variance 1/2."""
    rho = qutip.Qobj(_as_array(rho))
    a = qutip.destroy(rho.shape[0])
    x = (a + a.dag()) / math.sqrt(2.0)
    p = (a - a.dag()) / (1j * math.sqrt(2.0))
    mean_a = complex(qutip.expect(a, rho))
    var_x = float(np.real(qutip.expect(x * x, rho) - qutip.expect(x, rho) ** 2))
    var_p = float(np.real(qutip.expect(p * p, rho) - qutip.expect(p, rho) ** 2))
    return mean_a, var_x, var_p
