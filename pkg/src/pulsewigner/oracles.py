"""Independent numeric reference computations.

Everything in this module recomputes a closed-form result from first
principles (matrix exponentials through an eigendecomposition, panel
Gauss-Legendre quadrature, dense convolution) without reusing the printed
coefficient algebra it is meant to check.  Test suites compare the closed
forms in :mod:`pulsewigner.engines` against these.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .pulses import TemporalPulse
from .systems import CavityModel, DpaModel

__all__ = [
    "gl_panel_nodes",
    "cavity_output_pulse_numeric",
    "dpa_output_pulses_numeric",
    "dpa_vacuum_covariance_numeric",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def gl_panel_nodes(lo: float, hi: float, max_panel: float):
    """Gauss-Legendre nodes and weights on [lo, hi] split into panels."""
    if hi <= lo:
        return np.empty(0), np.empty(0)
    m = max(1, int(np.ceil((hi - lo) / max_panel)))
    edges = np.linspace(lo, hi, m + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


class _ExpmKernel:
    """Vectorized e^{A u} for a real symmetric 2x2 drift, via eigh."""

    def __init__(self, drift: np.ndarray):
        self.lam, self.q = np.linalg.eigh(drift)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        # shape (..., 2, 2)
        e = np.exp(np.multiply.outer(np.asarray(u, float), self.lam))
        return np.einsum("ij,...j,kj->...ik", self.q, e, self.q)


def cavity_output_pulse_numeric(m: CavityModel, pulse: TemporalPulse, t_eval) -> np.ndarray:
    """Convolution of the cavity impulse response with ``pulse``."""
    t_eval = np.asarray(t_eval, dtype=float)
    rate = m.kappa / 2 + 1j * m.omega0
    out = np.empty(t_eval.shape, dtype=complex)
    panel = min(0.25, 2.0 / max(m.kappa / 2, abs(m.omega0), 1.0))
    for k, t in enumerate(t_eval):
        s, w = gl_panel_nodes(0.0, t, panel)
        conv = np.sum(w * np.exp(-rate * (t - s)) * pulse(s)) if s.size else 0.0
        out[k] = pulse(np.array([t]))[0] - m.kappa * conv
    return out


def dpa_output_pulses_numeric(m: DpaModel, pulse: TemporalPulse, t_eval) -> np.ndarray:
    """Doubled convolution ``h * (pulse, 0)`` with ``h = delta I - kappa e^{A u}``.

    Returns an array of shape ``(len(t_eval), 2)`` holding the minus and
    plus components.
    """
    m.require_stable()
    t_eval = np.asarray(t_eval, dtype=float)
    kernel = _ExpmKernel(m.drift())
    panel = min(0.25, 2.0 / (0.5 * (m.kappa + m.epsilon)))
    out = np.empty(t_eval.shape + (2,), dtype=complex)
    e1 = np.array([1.0, 0.0])
    for k, t in enumerate(t_eval):
        s, w = gl_panel_nodes(0.0, t, panel)
        if s.size:
            mats = kernel(t - s)  # (n, 2, 2)
            conv = np.einsum("n,nij,j,n->i", w, mats, e1, pulse(s))
        else:
            conv = np.zeros(2, dtype=complex)
        out[k] = pulse(np.array([t]))[0] * e1 - m.kappa * conv
    return out


def dpa_vacuum_covariance_numeric(m: DpaModel, t: float, r: float,
                                  decay_depth: float = 40.0) -> np.ndarray:
    """Regular part of the vacuum-driven output covariance at ``(t, r)``.

    Double-quadrature form: ``kappa^2 int h N0 h^T`` over the shared past
    plus the two delta-pairing cross terms, with ``N0 = [[1, 0], [0, 0]]``.
    The equal-time value is the average of the two one-sided limits.
    """
    m.require_stable()
    if t < 0 or r < 0:
        raise DomainError("covariance oracle defined for non-negative times")
    kernel = _ExpmKernel(m.drift())
    n0 = np.array([[1.0, 0.0], [0.0, 0.0]])
    v = abs(t - r)
    slow = (m.kappa - m.epsilon) / 2
    length = decay_depth / slow
    u, w = gl_panel_nodes(0.0, length, min(0.25, 2.0 / (0.5 * (m.kappa + m.epsilon))))
    if t >= r:
        big, small = kernel(u + v), kernel(u)
    else:
        big, small = kernel(u), kernel(u + v)
    integral = m.kappa**2 * np.einsum("n,nij,jk,nlk->il", w, big, n0, small)
    ev = kernel(np.array([v]))[0]
    if t > r:
        cross = -m.kappa * ev @ n0
    elif r > t:
        cross = -m.kappa * n0 @ ev
    else:
        cross = -0.5 * m.kappa * (ev @ n0 + n0 @ ev)
    return integral + cross
