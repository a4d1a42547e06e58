"""End results: output pulse shapes, output covariances, output Wigner
spectra and detection probabilities, in closed form.

Every closed form here has an independent numeric counterpart (convolution
against matrix-exponential kernels, vacuum quadrature, or the generic
numeric spectrum in :mod:`pulsewigner.covariance`); the verification suite
compares the two routes.

The printed coefficient tables accept an optional ``mutate`` hook,
``mutate(name, value) -> value``, used by the mutation-sensitivity tests to
flip individual coefficients and prove the oracle comparisons would catch a
transcription error.  Passing ``None`` leaves every coefficient as derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .covariance import (
    ClosedFormSpectrum,
    SeparableTerm,
    StationaryExpTerm,
    TwoTimeCovariance,
    passive_output_covariance,
)
from .errors import DomainError, EvaluationError
from .pulses import (
    ExpTerm,
    SpectralPulse,
    TemporalPulse,
    _fft_window_inverse,
    _interp_complex,
    convolve_exp_terms,
    to_frequency,
)
from .states import PhotonGaussianState
from .systems import CavityModel, DpaModel

__all__ = [
    "OutputPhotonResult",
    "input_wigner_spectrum",
    "cavity_output_pulse",
    "cavity_output_covariance",
    "cavity_s11",
    "cavity_s22",
    "cavity_output_wigner",
    "dpa_output_pulses",
    "dpa_output_covariance",
    "dpa_output_wigner",
    "dpa_output_state",
    "cavity_photon_output",
    "dpa_photon_output",
    "network_output_pulse",
    "passive_pulse_partial_fractions",
    "detection_probability",
    "MUTATION_TARGETS",
]

SQRT2PI = np.sqrt(2.0 * np.pi)

_CONFLUENCE_TOL = 1e-8

Mutator = Callable[[str, complex], complex]


def _m(mutate: Mutator | None, name: str, value: complex) -> complex:
    return value if mutate is None else mutate(name, value)


@dataclass(frozen=True)
class OutputPhotonResult:
    """A scenario's output field data.

    ``pulse`` is set for passive (single-photon preserving) cases and
    ``pulse_pair`` for the pumped amplifier, never both.
    """

    covariance: TwoTimeCovariance
    source: dict
    pulse: TemporalPulse | None = None
    pulse_pair: tuple[TemporalPulse, TemporalPulse] | None = None

    def __post_init__(self):
        if (self.pulse is None) == (self.pulse_pair is None):
            raise DomainError("exactly one of pulse / pulse_pair must be set")


# -- input field ---------------------------------------------------------


def input_wigner_spectrum(gamma: float, mutate: Mutator | None = None) -> ClosedFormSpectrum:
    """Wigner spectrum of the single-photon input with damping ``gamma``.

    Entry (1,1) is ``(1/sqrt2pi) [e^{-iwt} + (2 gamma / (gamma + i w))
    e^{-gamma t}]``; entry (2,2) carries the same regular term without the
    delta contribution.
    """
    if gamma <= 0:
        raise DomainError("input damping rate must be positive")
    reg = _m(mutate, "in.reg", 2.0 * gamma)

    def regular(t, w):
        return (reg / (gamma + 1j * np.asarray(w))) * np.exp(-gamma * np.asarray(t))

    def e11(t, w):
        return (np.exp(-1j * np.asarray(w) * np.asarray(t)) + regular(t, w)) / SQRT2PI

    def e22(t, w):
        return regular(t, w) / SQRT2PI

    return ClosedFormSpectrum({(1, 1): e11, (2, 2): e22})


# -- cavity --------------------------------------------------------------


def _single_exp_term(pulse: TemporalPulse) -> ExpTerm | None:
    if len(pulse.terms) == 1 and pulse.terms[0].power == 0:
        return pulse.terms[0]
    return None


def cavity_output_pulse(m: CavityModel, input_pulse: TemporalPulse,
                        t_grid=None) -> TemporalPulse:
    """Steady-state output wave packet of the cavity.

    For an exponential input ``a e^{-g t}`` the closed form is

        a e^{-g t} - [kappa a / (kappa/2 + i w0 - g)]
                     (e^{-g t} - e^{-(kappa/2 + i w0) t})

    degenerating to ``a e^{-g t} - kappa a t e^{-g t}`` at the confluent
    parameter point.  Analytic multi-term inputs go through the exact
    impulse-response convolution; sampled inputs fall back to the
    frequency-domain multiply.
    """
    if m.kappa == 0:
        return input_pulse
    pole = m.kappa / 2 + 1j * m.omega0
    term = _single_exp_term(input_pulse)
    if term is not None:
        a, g = term.amplitude, term.rate
        if abs(pole - g) < _CONFLUENCE_TOL:
            terms = (ExpTerm(a, g), ExpTerm(-m.kappa * a, g, power=1))
        else:
            c = m.kappa * a / (pole - g)
            terms = (ExpTerm(a - c, g), ExpTerm(c, pole))
        return TemporalPulse(terms=terms)
    if input_pulse.is_analytic:
        extra = convolve_exp_terms((ExpTerm(-m.kappa, pole),), input_pulse.terms,
                                   confluence_tol=_CONFLUENCE_TOL)
        return TemporalPulse(terms=input_pulse.terms + extra)
    from .networks import cavity_rational

    num, den = cavity_rational(m)
    mult = lambda w: np.polyval(num, w) / np.polyval(den, w)
    grid = t_grid if t_grid is not None else np.linspace(0.0, 20.0, 20001)
    return network_output_pulse(mult, to_frequency(input_pulse), grid)


def cavity_output_covariance(m: CavityModel, gamma: float) -> TwoTimeCovariance:
    """Covariance of the cavity output driven by the exponential photon."""
    eta = cavity_output_pulse(m, _exp_input(gamma))
    return passive_output_covariance(eta)


def _exp_input(gamma: float) -> TemporalPulse:
    if gamma <= 0:
        raise DomainError("input damping rate must be positive")
    return TemporalPulse(terms=(ExpTerm(math.sqrt(2.0 * gamma), float(gamma)),))


def cavity_s11(m: CavityModel, gamma: float, mutate: Mutator | None = None):
    """Printed spectral quotient multiplying ``eta(t)`` in the output (1,1)."""
    k, w0, g = m.kappa, m.omega0, gamma
    pref = math.sqrt(2.0 * g)
    c1 = _m(mutate, "s11.c1", -0.25 * k * k)
    c2 = _m(mutate, "s11.c2", 0.5 * k * g)
    c3 = _m(mutate, "s11.c3", -w0 * w0)
    c4 = _m(mutate, "s11.c4", w0)
    c5 = _m(mutate, "s11.c5", g * w0)
    c6 = _m(mutate, "s11.c6", 0.5 * k)
    c7 = _m(mutate, "s11.c7", -g)

    def s11(w):
        w = np.asarray(w, dtype=float)
        num = c1 + c2 + c3 + c4 * w + 1j * (c5 + (c6 + c7) * w)
        den = (g + 1j * w) * (k / 2 - 1j * w0 - g) * (k / 2 - 1j * w0 + 1j * w)
        return pref * num / den

    return s11


def cavity_s22(m: CavityModel, gamma: float, mutate: Mutator | None = None):
    """Printed spectral quotient multiplying ``conj(eta)(t)`` in entry (2,2)."""
    k, w0, g = m.kappa, m.omega0, gamma
    pref = math.sqrt(2.0 * g)
    c1 = _m(mutate, "s22.c1", -0.25 * k * k)
    c2 = _m(mutate, "s22.c2", 0.5 * k * g)
    c3 = _m(mutate, "s22.c3", -w0 * w0)
    c4 = _m(mutate, "s22.c4", -w0)
    c5 = _m(mutate, "s22.c5", -g * w0)
    c6 = _m(mutate, "s22.c6", 0.5 * k)
    c7 = _m(mutate, "s22.c7", -g)

    def s22(w):
        w = np.asarray(w, dtype=float)
        num = c1 + c2 + c3 + c4 * w + 1j * (c5 + (c6 + c7) * w)
        den = (g + 1j * w) * (k / 2 + 1j * w0 - g) * (k / 2 + 1j * w0 + 1j * w)
        return pref * num / den

    return s22


def cavity_output_wigner(m: CavityModel, gamma: float,
                         mutate: Mutator | None = None) -> ClosedFormSpectrum:
    """Output spectrum ``(1/sqrt2pi) diag(e^{-iwt} + eta S11, conj(eta) S22)``.

    ``kappa = 0`` decouples the cavity, so the input spectrum object itself
    is returned; this also keeps the identity exact in floating point (the
    printed quotients are 0/0 there).  The confluent parameter point routes
    through the generic term rules applied to the limit-form covariance.
    """
    if m.kappa == 0:
        return input_wigner_spectrum(gamma, mutate=mutate)
    if abs(m.kappa / 2 + 1j * m.omega0 - gamma) < _CONFLUENCE_TOL:
        from .covariance import wigner_closed_form

        return wigner_closed_form(cavity_output_covariance(m, gamma))
    eta = cavity_output_pulse(m, _exp_input(gamma))
    eta_conj = eta.conjugate()
    s11 = cavity_s11(m, gamma, mutate)
    s22 = cavity_s22(m, gamma, mutate)

    def e11(t, w):
        t = np.asarray(t, dtype=float)
        return (np.exp(-1j * np.asarray(w) * t) + eta(t) * s11(w)) / SQRT2PI

    def e22(t, w):
        return eta_conj(np.asarray(t)) * s22(w) / SQRT2PI

    return ClosedFormSpectrum({(1, 1): e11, (2, 2): e22})


def cavity_photon_output(m: CavityModel, gamma: float) -> OutputPhotonResult:
    eta = cavity_output_pulse(m, _exp_input(gamma))
    return OutputPhotonResult(
        covariance=passive_output_covariance(eta),
        source={"system": "cavity", "kappa": m.kappa, "omega0": m.omega0, "gamma": gamma},
        pulse=eta,
    )


# -- degenerate parametric amplifier --------------------------------------


def _dpa_kernel_terms(m: DpaModel) -> tuple[tuple[ExpTerm, ...], tuple[ExpTerm, ...]]:
    """Regular kernel rows of ``h(u) = delta(u) I - kappa e^{A u}``."""
    r_slow = (m.kappa - m.epsilon) / 2
    r_fast = (m.kappa + m.epsilon) / 2
    half = m.kappa / 2
    k_same = (ExpTerm(-half, r_slow), ExpTerm(-half, r_fast))
    k_cross = (ExpTerm(-half, r_slow), ExpTerm(half, r_fast))
    return k_same, k_cross


def dpa_output_pulses(m: DpaModel, gamma: float,
                      mutate: Mutator | None = None) -> tuple[TemporalPulse, TemporalPulse]:
    """Output wave-packet pair ``(minus, plus)`` for the exponential photon.

    Both are sums of three causal exponentials with rates ``gamma``,
    ``(kappa + epsilon)/2`` and ``(kappa - epsilon)/2``.  At the degenerate
    damping values ``gamma = (kappa +- epsilon)/2`` the printed coefficients
    blow up pairwise and the exact symbolic convolution (which produces the
    ``t e^{-gamma t}`` limit terms) is used instead; ``mutate`` only applies
    to the printed route.
    """
    m.require_stable()
    if gamma <= 0:
        raise DomainError("input damping rate must be positive")
    s2g = math.sqrt(2.0 * gamma)
    d1 = m.kappa + m.epsilon - 2.0 * gamma
    d2 = m.epsilon - m.kappa + 2.0 * gamma
    if min(abs(d1), abs(d2)) < _CONFLUENCE_TOL:
        k_same, k_cross = _dpa_kernel_terms(m)
        nu = (ExpTerm(s2g, gamma),)
        minus = TemporalPulse(terms=nu + convolve_exp_terms(k_same, nu))
        plus = TemporalPulse(terms=convolve_exp_terms(k_cross, nu))
        return minus, plus
    r_fast = (m.kappa + m.epsilon) / 2
    r_slow = (m.kappa - m.epsilon) / 2
    minus = TemporalPulse(terms=(
        ExpTerm(_m(mutate, "xi-.gamma", (m.epsilon**2 + m.kappa**2 - 4 * gamma**2) * s2g / (d1 * d2)), gamma),
        ExpTerm(_m(mutate, "xi-.fast", m.kappa * s2g / d1), r_fast),
        ExpTerm(_m(mutate, "xi-.slow", -m.kappa * s2g / d2), r_slow),
    ))
    plus = TemporalPulse(terms=(
        ExpTerm(_m(mutate, "xi+.gamma", 2 * m.kappa * m.epsilon * s2g / (d1 * d2)), gamma),
        ExpTerm(_m(mutate, "xi+.fast", -m.kappa * s2g / d1), r_fast),
        ExpTerm(_m(mutate, "xi+.slow", -m.kappa * s2g / d2), r_slow),
    ))
    return minus, plus


def _chi_terms(m: DpaModel, mutate: Mutator | None) -> tuple[StationaryExpTerm, ...]:
    """Stationary squeezing kernel of the vacuum-driven output.

    Entry (1,1) carries ``-ke/(4(k+e))`` on the fast rate and
    ``+ke/(4(k-e))`` on the slow rate; entry (1,2) carries both with plus
    signs; (2,1) and (2,2) mirror (1,2) and (1,1).  All terms are two-sided
    symmetric, so equal-time values are the branch limits.
    """
    k, e = m.kappa, m.epsilon
    r_fast = (k + e) / 2
    r_slow = (k - e) / 2
    a11f = _m(mutate, "chi11.fast", -k * e / (4 * (k + e)))
    a11s = _m(mutate, "chi11.slow", k * e / (4 * (k - e)))
    a12f = _m(mutate, "chi12.fast", k * e / (4 * (k + e)))
    a12s = _m(mutate, "chi12.slow", k * e / (4 * (k - e)))
    out = []
    for entry, af, as_ in (((1, 1), a11f, a11s), ((1, 2), a12f, a12s),
                           ((2, 1), a12f, a12s), ((2, 2), a11f, a11s)):
        out.append(StationaryExpTerm(entry, af, af, r_fast))
        out.append(StationaryExpTerm(entry, as_, as_, r_slow))
    return tuple(out)


def dpa_output_covariance(m: DpaModel, gamma: float,
                          mutate: Mutator | None = None) -> TwoTimeCovariance:
    """Vacuum squeezing kernel plus the doubled photon pair product.

    The photon part is ``Delta(p)(t) Delta(p)(r)^dagger`` for the doubled
    pair matrix ``Delta(a, b) = [[a, b], [conj(b), conj(a)]]``, whose (1,1)
    entry is ``a(t) conj(a)(r) + b(t) conj(b)(r)``.
    """
    m.require_stable()
    minus, plus = dpa_output_pulses(m, gamma, mutate)
    minus_c, plus_c = minus.conjugate(), plus.conjugate()
    separable = (
        SeparableTerm((1, 1), minus, minus_c),
        SeparableTerm((1, 1), plus, plus_c),
        SeparableTerm((1, 2), minus, plus),
        SeparableTerm((1, 2), plus, minus),
        SeparableTerm((2, 1), plus_c, minus_c),
        SeparableTerm((2, 1), minus_c, plus_c),
        SeparableTerm((2, 2), plus_c, plus),
        SeparableTerm((2, 2), minus_c, minus),
    )
    return TwoTimeCovariance(
        delta_coeff=np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
        separable=separable,
        stationary=_chi_terms(m, mutate),
    )


def dpa_output_wigner(m: DpaModel, gamma: float,
                      mutate: Mutator | None = None) -> ClosedFormSpectrum:
    """The four printed output-spectrum entries of the pumped amplifier.

    Entries (2,1) and (2,2) are printed as ``S21 = S12`` and
    ``S22 = S11 - (1/sqrt2pi) e^{-iwt}``; the identity tests compare these
    against the independently assembled term-rule spectrum.
    """
    m.require_stable()
    minus, plus = dpa_output_pulses(m, gamma, mutate)
    ft_minus = to_frequency(minus)
    ft_plus = to_frequency(plus)
    k, e = m.kappa, m.epsilon
    r_fast, r_slow = (k + e) / 2, (k - e) / 2
    a11f = _m(mutate, "chi11.fast", -k * e / (4 * (k + e)))
    a11s = _m(mutate, "chi11.slow", k * e / (4 * (k - e)))
    a12f = _m(mutate, "chi12.fast", k * e / (4 * (k + e)))
    a12s = _m(mutate, "chi12.slow", k * e / (4 * (k - e)))

    def lobes(af, as_, w):
        return (af / (r_fast - 1j * w) + af / (r_fast + 1j * w)
                + as_ / (r_slow - 1j * w) + as_ / (r_slow + 1j * w))

    def s11(t, w):
        t, w = np.asarray(t, float), np.asarray(w, float)
        phase = np.exp(-1j * w * t)
        return (phase * (1.0 + lobes(a11f, a11s, w))
                + minus(t) * ft_minus(w) + plus(t) * ft_plus(w)) / SQRT2PI

    def s12(t, w):
        t, w = np.asarray(t, float), np.asarray(w, float)
        phase = np.exp(-1j * w * t)
        return (phase * lobes(a12f, a12s, w)
                + minus(t) * ft_plus(w) + plus(t) * ft_minus(w)) / SQRT2PI

    def s22(t, w):
        t, w = np.asarray(t, float), np.asarray(w, float)
        return s11(t, w) - np.exp(-1j * w * t) / SQRT2PI

    return ClosedFormSpectrum({(1, 1): s11, (1, 2): s12, (2, 1): s12, (2, 2): s22})


def dpa_output_state(m: DpaModel, gamma: float) -> PhotonGaussianState:
    pair = dpa_output_pulses(m, gamma)
    vacuum_part = TwoTimeCovariance(
        delta_coeff=np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
        stationary=_chi_terms(m, None),
    )
    return PhotonGaussianState(pulse_pair=pair, gaussian_part=vacuum_part)


def dpa_photon_output(m: DpaModel, gamma: float) -> OutputPhotonResult:
    pair = dpa_output_pulses(m, gamma)
    return OutputPhotonResult(
        covariance=dpa_output_covariance(m, gamma),
        source={"system": "dpa", "kappa": m.kappa, "epsilon": m.epsilon, "gamma": gamma},
        pulse_pair=pair,
    )


# -- pulse-shaping networks ----------------------------------------------


def network_output_pulse(multiplier: Callable, input_spectrum: SpectralPulse,
                         t_grid, tail_tol: float = 2e-5) -> TemporalPulse:
    """Pointwise spectral multiply followed by the numeric inverse transform.

    ``tail_tol`` bounds the neglected L2 mass outside the frequency window,
    so unit-modulus multipliers preserve the pulse norm to about that mass.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    probe = np.linspace(-300.0, 300.0, 4001)
    mvals = np.abs(multiplier(probe))
    if not np.all(np.isfinite(mvals)) or mvals.max() > 1e3:
        raise DomainError("multiplier is not bounded on the real axis")
    if input_spectrum.is_analytic:
        coeff = sum(abs(t.coefficient) for t in input_spectrum.terms if t.multiplicity == 1)
        W = max(coeff**2 / (np.pi * tail_tol), 50.0 * max(abs(t.rate) for t in input_spectrum.terms))
        tail = coeff**2 / (np.pi * W)
    else:
        W = float(min(abs(input_spectrum.grid[0]), abs(input_spectrum.grid[-1])))
        edge = float(max(abs(input_spectrum.values[0]), abs(input_spectrum.values[-1])))
        tail = edge**2 * W / np.pi
        if tail > tail_tol:
            raise EvaluationError(
                f"sampled input window gives tail mass {tail:.3g} > {tail_tol:g}"
            )

    def product(w):
        inside = np.abs(w) <= W
        out = np.zeros(w.shape, complex)
        out[inside] = multiplier(w[inside]) * input_spectrum(w[inside])
        return out

    tn, f, _ = _fft_window_inverse(product, W, float(t_grid[-1]) + 12.0)
    vals = _interp_complex(t_grid, tn, f)
    vals[t_grid < 0] = 0.0
    return TemporalPulse(grid=t_grid, values=vals,
                         meta={"omega_window": float(W), "tail_mass": float(tail)})


def _polyval(coeffs: np.ndarray, z: complex) -> complex:
    out = 0.0 + 0.0j
    for c in coeffs:
        out = out * z + c
    return out


def passive_pulse_partial_fractions(num: np.ndarray, den: np.ndarray,
                                    input_pulse: TemporalPulse,
                                    collision_tol: float = 1e-9) -> TemporalPulse:
    """Exact output pulse of ``(num/den)(w) * input[w]`` by residue calculus.

    All poles must be simple and strictly inside the upper half plane
    (stable causal response); confluent pole pairs raise
    :class:`EvaluationError` so callers can fall back to the numeric route.
    """
    if not input_pulse.is_analytic or any(t.power for t in input_pulse.terms):
        raise EvaluationError("partial fractions need a power-0 analytic input")
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    mult_poles = np.roots(den) if den.size > 1 else np.empty(0, complex)
    input_poles = np.array([1j * t.rate for t in input_pulse.terms])
    all_poles = np.concatenate([mult_poles, input_poles])
    scale = max(1.0, float(np.abs(all_poles).max()))
    for i in range(all_poles.size):
        for j in range(i + 1, all_poles.size):
            if abs(all_poles[i] - all_poles[j]) < collision_tol * scale:
                raise EvaluationError("confluent poles; use the numeric inverse")
    dden = np.polyder(den)
    spectrum = to_frequency(input_pulse)

    def xi_at(z: complex) -> complex:
        return sum(t.coefficient / (1j * z + t.rate) ** t.multiplicity
                   for t in spectrum.terms)

    terms = []
    for p in mult_poles:
        if p.imag <= 0:
            raise EvaluationError("multiplier pole not in the upper half plane")
        res = _polyval(num, p) / _polyval(dden, p) * xi_at(p)
        terms.append(ExpTerm(1j * res, -1j * p))
    for t, p in zip(input_pulse.terms, input_poles):
        res = _polyval(num, p) / _polyval(den, p) * t.amplitude / 1j
        terms.append(ExpTerm(1j * res, -1j * p))
    return TemporalPulse(terms=tuple(terms))


def detection_probability(pulse: TemporalPulse, grid) -> np.ndarray:
    """``|pulse(t)|^2`` on the grid; integrates to one for unit-norm pulses."""
    grid = np.asarray(grid, dtype=float)
    return np.abs(pulse(grid)) ** 2


MUTATION_TARGETS = (
    "in.reg",
    "s11.c1", "s11.c2", "s11.c3", "s11.c4", "s11.c5", "s11.c6", "s11.c7",
    "s22.c1", "s22.c2", "s22.c3", "s22.c4", "s22.c5", "s22.c6", "s22.c7",
    "chi11.fast", "chi11.slow", "chi12.fast", "chi12.slow",
    "xi-.gamma", "xi-.fast", "xi-.slow",
    "xi+.gamma", "xi+.fast", "xi+.slow",
)
