"""Continuous-mode field states built on pulse shapes.

States are represented purely by their pulse data; first and second moments
and the Gaussian characteristic functional are the only quantities computed,
so no operator algebra is needed.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .covariance import TwoTimeCovariance, covariance_to_dict
from .errors import DomainError
from .pulses import (
    SpectralPulse,
    TemporalPulse,
    inner_product,
    pulse_from_dict,
    pulse_to_dict,
    to_time_analytic,
)

__all__ = [
    "FockState1",
    "CoherentContState",
    "PhotonGaussianState",
    "mean_amplitude",
    "photon_number",
    "annihilation_overlap",
    "coherent_characteristic",
    "state_to_dict",
    "state_from_dict",
]

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class FockState1:
    """One photon spread over the normalized wave packet ``shape``."""

    shape: TemporalPulse
    _normalize: bool = True

    def __post_init__(self):
        if self._normalize:
            n = self.shape.norm()
            if n == 0.0:
                raise DomainError("single-photon state needs a non-zero pulse shape")
            if abs(n - 1.0) > _NORM_TOL:
                object.__setattr__(self, "shape", self.shape.scaled(1.0 / n))

    @classmethod
    def unnormalized(cls, shape: TemporalPulse) -> "FockState1":
        """Bypass normalization (testing hook for moment formulas)."""
        return cls(shape, _normalize=False)


@dataclass(frozen=True)
class CoherentContState:
    """Continuous-mode coherent state with unit-modulus amplitude ``alpha``."""

    alpha: complex
    shape: TemporalPulse

    def __post_init__(self):
        if abs(abs(self.alpha) - 1.0) > _NORM_TOL:
            raise DomainError("coherent amplitude must satisfy |alpha| = 1")
        n = self.shape.norm()
        if abs(n - 1.0) > _NORM_TOL:
            if n == 0.0:
                raise DomainError("coherent state needs a non-zero pulse shape")
            object.__setattr__(self, "shape", self.shape.scaled(1.0 / n))

    @classmethod
    def from_phase(cls, theta: float, shape: TemporalPulse) -> "CoherentContState":
        return cls(cmath.exp(1j * theta), shape)

    def displacement(self) -> TemporalPulse:
        """The field displacement ``alpha * shape``."""
        return self.shape.scaled(self.alpha)


@dataclass(frozen=True)
class PhotonGaussianState:
    """Photon pulse pair riding on a Gaussian two-time background.

    The output class of a pumped (non-passive) linear system driven by a
    single photon: a pair ``(minus, plus)`` of wave packets plus a Gaussian
    covariance part.
    """

    pulse_pair: tuple[TemporalPulse, TemporalPulse]
    gaussian_part: TwoTimeCovariance


def mean_amplitude(s) -> complex:
    """First moment of the matched-mode annihilation operator.

    Zero for a single-photon state, ``alpha`` for a coherent state.
    """
    if isinstance(s, FockState1):
        return 0.0 + 0.0j
    if isinstance(s, CoherentContState):
        return complex(s.alpha)
    raise DomainError(f"mean_amplitude undefined for {type(s).__name__}")


def photon_number(s) -> float:
    """Second moment ``<Bdag B>`` of the matched mode."""
    if isinstance(s, FockState1):
        return float(s.shape.norm() ** 2)
    if isinstance(s, CoherentContState):
        return float(abs(s.alpha) ** 2 * s.shape.norm() ** 2)
    raise DomainError(f"photon_number undefined for {type(s).__name__}")


def annihilation_overlap(s: FockState1, zeta: TemporalPulse) -> complex:
    """``<1_xi| Bdag(zeta) B(xi) |1_xi>`` as inner products.

    With ``B(xi)|1_xi> = ||xi||^2 |0>`` and ``B(zeta)|1_xi> = <zeta, xi>|0>``
    this is ``<zeta, xi> ||xi||^2`` under the convention
    ``<f, g> = int conj(f) g``.
    """
    xi = s.shape
    return inner_product(zeta, xi) * xi.norm() ** 2


def coherent_characteristic(s: CoherentContState, mu) -> complex:
    """Gaussian characteristic functional of a coherent state.

    ``E[exp(i int mu bdag + conj(mu) b)] = exp(-||mu||^2 / 2
    + i (<conj(eta)|mu> + <eta|conj(mu)>))`` with ``eta = alpha * shape``.
    The two bracket terms are conjugates, so the phase is
    ``2 Re int eta(t) mu(t) dt``.
    """
    if isinstance(mu, SpectralPulse):
        if not mu.is_analytic:
            raise DomainError("sampled-only spectral argument; convert with to_time first")
        mu = to_time_analytic(mu)
    if not isinstance(mu, TemporalPulse):
        raise DomainError("argument must be a TemporalPulse or analytic SpectralPulse")
    if not (mu.is_analytic or mu.grid is not None):
        return 1.0 + 0.0j
    eta = s.displacement()
    mu_norm_sq = mu.norm() ** 2
    z = inner_product(eta.conjugate(), mu)  # int eta(t) mu(t) dt
    return cmath.exp(-0.5 * mu_norm_sq + 2j * z.real)


# -- serialization -------------------------------------------------------


def state_to_dict(s) -> dict:
    if isinstance(s, FockState1):
        return {"kind": "fock1", "shape": pulse_to_dict(s.shape)}
    if isinstance(s, CoherentContState):
        return {
            "kind": "coherent",
            "shape": pulse_to_dict(s.shape),
            "alpha": {"re": float(s.alpha.real), "im": float(s.alpha.imag)},
        }
    if isinstance(s, PhotonGaussianState):
        return {
            "kind": "photon_gaussian",
            "shape": {
                "minus": pulse_to_dict(s.pulse_pair[0]),
                "plus": pulse_to_dict(s.pulse_pair[1]),
            },
            "gaussian_part": covariance_to_dict(s.gaussian_part),
        }
    raise DomainError(f"cannot serialize {type(s).__name__}")


def state_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind == "fock1":
        return FockState1(pulse_from_dict(doc["shape"]))
    if kind == "coherent":
        a = doc.get("alpha", {"re": 1.0, "im": 0.0})
        alpha = complex(a.get("re", 0.0), a.get("im", 0.0)) if isinstance(a, dict) else complex(a)
        return CoherentContState(alpha, pulse_from_dict(doc["shape"]))
    if kind == "photon_gaussian":
        raise DomainError("photon_gaussian states deserialize through their producing model")
    raise DomainError(f"unknown state kind: {kind!r}")
