"""Linear quantum system models: damped cavity and degenerate parametric
amplifier, with impulse responses, transfer functions and stability checks.

Sign convention for the field coupling, shared by every model here so that
transfer functions compose without per-model audits:

    da/dt = -(kappa/2 + i w0) a - sqrt(kappa) b_in
    b_out = sqrt(kappa) a + b_in
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, StabilityError
from .pulses import ExpTerm

__all__ = [
    "CavityModel",
    "DpaModel",
    "DoubledTransfer",
    "cavity_impulse_response",
    "cavity_transfer",
    "dpa_doubled_transfer",
    "stability_check",
    "parse_system",
]


@dataclass(frozen=True)
class CavityModel:
    """Single-mode cavity with decay rate ``kappa`` and de-tuning ``omega0``.

    ``omega0`` doubles as the de-tuning of the open-loop system inside the
    pulse-shaping networks (written ``omega1`` there); both are the same
    physical parameter.
    """

    kappa: float
    omega0: float = 0.0

    def __post_init__(self):
        if self.kappa < 0:
            raise DomainError(f"cavity decay rate must be >= 0, got {self.kappa}")

    def drift(self) -> complex:
        return -(self.kappa / 2 + 1j * self.omega0)


@dataclass(frozen=True)
class DpaModel:
    """Degenerate parametric amplifier with pump coefficient ``epsilon``.

    Stable only for ``0 < epsilon < kappa``; marginal or unstable parameter
    sets can be constructed (so they can be queried) but every output
    computation refuses them with :class:`StabilityError`.
    """

    kappa: float
    epsilon: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise DomainError(f"DPA decay rate must be > 0, got {self.kappa}")
        if self.epsilon <= 0:
            raise DomainError(f"DPA pump coefficient must be > 0, got {self.epsilon}")

    def require_stable(self) -> None:
        if not stability_check(self):
            raise StabilityError(
                f"DPA stability requires 0 < epsilon < kappa, "
                f"got epsilon={self.epsilon}, kappa={self.kappa}"
            )

    def drift(self) -> np.ndarray:
        return -0.5 * np.array(
            [[self.kappa, -self.epsilon], [-self.epsilon, self.kappa]], dtype=float
        )

    def drift_eigenvalues(self) -> tuple[float, float]:
        return (-(self.kappa - self.epsilon) / 2, -(self.kappa + self.epsilon) / 2)


@dataclass(frozen=True)
class DoubledTransfer:
    """Frequency response of a doubled-up (mode, conjugate-mode) system."""

    matrix: Callable[[np.ndarray], np.ndarray]

    def __call__(self, w):
        return self.matrix(w)


def cavity_impulse_response(m: CavityModel) -> tuple[float, ExpTerm | None]:
    """Distributional kernel ``delta(t) - kappa exp(-(kappa/2 + i w0) t)``.

    Returned as the delta coefficient plus the regular exponential term
    (``None`` at ``kappa = 0``, where the channel is the identity).
    """
    if m.kappa == 0:
        return 1.0, None
    return 1.0, ExpTerm(-m.kappa, m.kappa / 2 + 1j * m.omega0)


def cavity_transfer(m: CavityModel) -> Callable[[np.ndarray], np.ndarray]:
    """All-pass response ``1 - kappa / (i w + i w0 + kappa/2)``."""

    def transfer(w):
        w = np.asarray(w, dtype=float)
        if m.kappa == 0:
            return np.ones(w.shape, dtype=complex)
        return 1.0 - m.kappa / (1j * w + 1j * m.omega0 + m.kappa / 2)

    return transfer


def dpa_doubled_transfer(m: DpaModel) -> DoubledTransfer:
    """``Xi(w) = I - kappa (i w I - A)^{-1}`` for the DPA drift ``A``.

    ``A = -(kappa/2) I + (epsilon/2) X`` diagonalizes in the hyperbolic
    basis ``(1, 1)/sqrt2``, ``(1, -1)/sqrt2`` (the same decomposition that
    gives ``e^{At} = e^{-kappa t/2} [cosh(eps t/2) I + sinh(eps t/2) X]``),
    so the resolvent splits over the two projectors.
    """
    m.require_stable()
    lam_plus, lam_minus = m.drift_eigenvalues()
    p_plus = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])
    p_minus = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])

    def matrix(w):
        w = np.asarray(w, dtype=float)
        eye = np.eye(2)
        resolvent = (
            p_plus[None, :, :] / (1j * w.ravel()[:, None, None] - lam_plus)
            + p_minus[None, :, :] / (1j * w.ravel()[:, None, None] - lam_minus)
        )
        out = eye[None, :, :] - m.kappa * resolvent
        return out.reshape(w.shape + (2, 2))

    return DoubledTransfer(matrix)


def stability_check(m) -> bool:
    """True iff every drift eigenvalue has strictly negative real part."""
    if isinstance(m, CavityModel):
        return m.kappa > 0
    if isinstance(m, DpaModel):
        return max(m.drift_eigenvalues()) < 0
    raise DomainError(f"unknown model type {type(m).__name__}")


def parse_system(doc: dict):
    """Build a model from a scenario config dict.

    Accepted forms:
        {"system": "cavity", "kappa": 3, "omega0": 0}
        {"system": "dpa", "kappa": 4, "epsilon": 1}
    """
    kind = doc.get("system")
    if kind == "cavity":
        return CavityModel(float(doc["kappa"]), float(doc.get("omega0", 0.0)))
    if kind == "dpa":
        return DpaModel(float(doc["kappa"]), float(doc["epsilon"]))
    raise DomainError(f"unknown system kind: {kind!r}")
