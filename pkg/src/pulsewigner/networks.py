"""Control structures around the open-loop cavity: direct coupling to an
auxiliary mode and beamsplitter coherent feedback.

Every structure here is lossless, so its frequency response multiplies the
input spectrum by a unit-modulus factor on the real axis.  The multipliers
are kept as explicit rational functions; polynomial coefficient forms are
exposed alongside the callables so output pulses can be recovered in closed
form by partial fractions.

The beamsplitter parameter is called ``reflectivity`` everywhere (never
``gamma``) to keep it apart from pulse damping rates in configs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, EvaluationError
from .systems import CavityModel

__all__ = [
    "DirectCoupling",
    "BeamSplitter",
    "SlhTriple",
    "direct_coupling_transfer",
    "direct_coupling_rational",
    "feedback_transfer",
    "feedback_multiplier",
    "feedback_rational",
    "cavity_rational",
    "feedback_slh_reduce",
    "cavity_slh",
    "slh_cavity_transfer",
    "parse_network",
]

_POLE_GUARD = 1e-14


@dataclass(frozen=True)
class DirectCoupling:
    """Open-loop cavity ``g`` exchanging energy with a lossless mode.

    The auxiliary mode has de-tuning ``omega2`` and couples through the
    interaction ``conj(alpha) a1† a2 + alpha a1 a2†``.
    """

    g: CavityModel
    omega2: float
    alpha: complex

    def __post_init__(self):
        if self.g.kappa <= 0:
            raise DomainError("direct coupling needs a dissipative cavity (kappa > 0)")


@dataclass(frozen=True)
class BeamSplitter:
    """2x2 splitter [[sqrt(r), e^{-i phi} sqrt(1-r)], [-e^{i phi} sqrt(1-r), sqrt(r)]]."""

    reflectivity: float
    phase: float = 0.0

    def __post_init__(self):
        if not 0 < self.reflectivity < 1:
            raise DomainError(
                f"beamsplitter reflectivity must lie in (0, 1), got {self.reflectivity}"
            )
        u = self.matrix()
        if not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-12):
            raise DomainError("beamsplitter matrix failed the unitarity check")

    def matrix(self) -> np.ndarray:
        r = self.reflectivity
        s, c = np.sqrt(r), np.sqrt(1.0 - r)
        e = np.exp(-1j * self.phase)
        return np.array([[s, e * c], [-np.conj(e) * c, s]], dtype=complex)

    def loop_ratio(self) -> float:
        """q = (1 - sqrt(r)) / (1 + sqrt(r)), the loop's rate-compression factor."""
        s = np.sqrt(self.reflectivity)
        return float((1.0 - s) / (1.0 + s))


@dataclass(frozen=True)
class SlhTriple:
    """Scattering / coupling / Hamiltonian parameters of a one-mode system.

    ``coupling_gain`` is the real coefficient of the mode operator in the
    coupling (so the decay rate is its square); the Hamiltonian is kept as
    a symbolic tag since no computation here consumes it.
    """

    scattering: complex
    coupling_gain: float
    hamiltonian_tag: str

    def __post_init__(self):
        if abs(abs(self.scattering) - 1.0) > 1e-12:
            raise DomainError("SLH scattering must have unit modulus")
        if self.coupling_gain < 0:
            raise DomainError("SLH coupling gain must be >= 0")

    @property
    def decay_rate(self) -> float:
        return float(self.coupling_gain**2)


def _guarded_ratio(num: np.ndarray, den: np.ndarray, scale: float) -> np.ndarray:
    bad = np.abs(den) < _POLE_GUARD * max(scale, 1.0)
    if np.any(bad):
        raise EvaluationError("multiplier evaluated at (or too close to) a pole")
    return num / den


def direct_coupling_transfer(dc: DirectCoupling) -> Callable[[np.ndarray], np.ndarray]:
    """Unit-modulus multiplier of the input spectrum for the coupled pair."""
    kappa, w1, w2 = dc.g.kappa, dc.g.omega0, dc.omega2
    a2 = abs(dc.alpha) ** 2

    def transfer(w):
        w = np.asarray(w, dtype=float)
        common = -(w + w1) * (w + w2) + a2
        num = -0.5 * kappa * (w + w2) * 1j + common
        den = +0.5 * kappa * (w + w2) * 1j + common
        return _guarded_ratio(num, den, float(np.max(np.abs(w)) + abs(w1) + abs(w2) + a2 + kappa) ** 2)

    return transfer


def direct_coupling_rational(dc: DirectCoupling) -> tuple[np.ndarray, np.ndarray]:
    """(numerator, denominator) polynomial coefficients in ``w``, highest first."""
    kappa, w1, w2 = dc.g.kappa, dc.g.omega0, dc.omega2
    a2 = abs(dc.alpha) ** 2
    num = np.array([-1.0, -(w1 + w2) - 0.5j * kappa, a2 - w1 * w2 - 0.5j * kappa * w2])
    den = np.array([-1.0, -(w1 + w2) + 0.5j * kappa, a2 - w1 * w2 + 0.5j * kappa * w2])
    return num, den


def feedback_multiplier(kappa: float, omega1: float, q: float) -> Callable[[np.ndarray], np.ndarray]:
    """Loop multiplier at compression factor ``q``.

    ``q -> 0`` (reflectivity -> 1) bypasses the system and the multiplier is
    the identity; ``q = 1`` (reflectivity -> 0) is the bare-cavity response
    up to a global sign.
    """
    if kappa <= 0:
        raise DomainError("feedback loop needs kappa > 0")

    def transfer(w):
        w = np.asarray(w, dtype=float)
        num = -q * (w + omega1) * 1j + kappa / 2
        den = +q * (w + omega1) * 1j + kappa / 2
        return _guarded_ratio(num, den, float(np.max(np.abs(w)) + abs(omega1)) * q + kappa)

    return transfer


def feedback_transfer(m: CavityModel, bs: BeamSplitter) -> Callable[[np.ndarray], np.ndarray]:
    """Multiplier of the input spectrum for the beamsplitter feedback loop."""
    return feedback_multiplier(m.kappa, m.omega0, bs.loop_ratio())


def feedback_rational(m: CavityModel, bs: BeamSplitter) -> tuple[np.ndarray, np.ndarray]:
    q = bs.loop_ratio()
    num = np.array([-1j * q, -1j * q * m.omega0 + m.kappa / 2])
    den = np.array([+1j * q, +1j * q * m.omega0 + m.kappa / 2])
    return num, den


def cavity_rational(m: CavityModel) -> tuple[np.ndarray, np.ndarray]:
    num = np.array([1j, 1j * m.omega0 - m.kappa / 2])
    den = np.array([1j, 1j * m.omega0 + m.kappa / 2])
    return num, den


def cavity_slh(m: CavityModel) -> SlhTriple:
    return SlhTriple(1.0, float(np.sqrt(m.kappa)), f"omega1 * adag a (omega1={m.omega0})")


def feedback_slh_reduce(sys: SlhTriple, bs: BeamSplitter) -> SlhTriple:
    """Fold the beamsplitter loop into the system parameters.

    The scattering flips sign, the decay rate is boosted by
    ``(1 + sqrt(r)) / (1 - sqrt(r))`` and the Hamiltonian is untouched.
    """
    boost = 1.0 / bs.loop_ratio()
    return SlhTriple(
        -sys.scattering,
        sys.coupling_gain * float(np.sqrt(boost)),
        sys.hamiltonian_tag,
    )


def slh_cavity_transfer(sys: SlhTriple, omega1: float) -> Callable[[np.ndarray], np.ndarray]:
    """Transfer of a one-mode SLH triple with cavity-type coupling."""
    base = cavity_transfer_from_rate(sys.decay_rate, omega1)

    def transfer(w):
        return sys.scattering * base(w)

    return transfer


def cavity_transfer_from_rate(kappa: float, omega1: float) -> Callable[[np.ndarray], np.ndarray]:
    from .systems import cavity_transfer

    return cavity_transfer(CavityModel(kappa, omega1))


def parse_network(doc: dict, g: CavityModel):
    """Build a network from a scenario config dict.

    Accepted forms:
        {"network": "direct", "alpha": {"re": 1, "im": 0}, "omega2": 1}
        {"network": "feedback", "reflectivity": 0.5, "phase": 0.0}
    """
    kind = doc.get("network")
    if kind == "direct":
        alpha = doc.get("alpha", 0.0)
        if isinstance(alpha, dict):
            alpha = complex(alpha.get("re", 0.0), alpha.get("im", 0.0))
        else:
            alpha = complex(alpha)
        return DirectCoupling(g, float(doc.get("omega2", 0.0)), alpha)
    if kind == "feedback":
        return BeamSplitter(float(doc["reflectivity"]), float(doc.get("phase", 0.0)))
    raise DomainError(f"unknown network kind: {kind!r}")
