"""Photon pulse shapes as causal sums of complex exponentials.

A temporal pulse is a finite sum of terms ``a * t**p * exp(-r*t)`` supported
on ``t >= 0`` with ``Re(r) > 0``, optionally accompanied by samples on a
uniform time grid.  The matching frequency representation is a sum of pole
terms ``c / (i*w + r)**m``.

Transform convention, used consistently across the package:

    forward   F(w) = int_0^inf f(t) exp(-i w t) dt
    inverse   f(t) = (1/2pi) int F(w) exp(i w t) dw

The forward transform carries no ``1/sqrt(2pi)`` prefactor; the prefactor of
the Wigner-spectrum definition is applied once, by the spectrum rules in
:mod:`pulsewigner.covariance`, never by the pulse transforms.  With this
pairing a unit-norm temporal pulse has spectral norm ``sqrt(2pi)``, so the
spectral inner product below carries an explicit ``1/(2pi)`` weight and the
pair is norm preserving (Parseval).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EvaluationError

__all__ = [
    "ExpTerm",
    "PoleTerm",
    "TemporalPulse",
    "SpectralPulse",
    "make_exp_pulse",
    "inner_product",
    "to_frequency",
    "to_time",
    "to_time_analytic",
    "convolve_exp_terms",
    "pulse_to_csv",
    "pulse_to_dict",
    "pulse_from_dict",
]

_SAMPLE_AGREEMENT_TOL = 1e-6


@dataclass(frozen=True)
class ExpTerm:
    """One causal term ``amplitude * t**power * exp(-rate*t)`` on ``t >= 0``."""

    amplitude: complex
    rate: complex
    power: int = 0

    def __post_init__(self):
        if not np.real(self.rate) > 0:
            raise DomainError(f"ExpTerm rate must have Re > 0, got {self.rate}")
        if self.power < 0:
            raise DomainError("ExpTerm power must be a non-negative integer")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        live = t >= 0
        out = np.zeros(t.shape, dtype=complex)
        tt = np.where(live, t, 0.0)
        out[live] = (self.amplitude * tt**self.power * np.exp(-self.rate * tt))[live]
        return out

    def conjugate(self) -> "ExpTerm":
        return ExpTerm(np.conj(self.amplitude), np.conj(self.rate), self.power)


@dataclass(frozen=True)
class PoleTerm:
    """One spectral term ``coefficient / (i*w + rate)**multiplicity``."""

    coefficient: complex
    rate: complex
    multiplicity: int = 1

    def __post_init__(self):
        if not np.real(self.rate) > 0:
            raise DomainError(f"PoleTerm rate must have Re > 0, got {self.rate}")
        if self.multiplicity < 1:
            raise DomainError("PoleTerm multiplicity must be >= 1")

    def value(self, w):
        w = np.asarray(w, dtype=float)
        return self.coefficient / (1j * w + self.rate) ** self.multiplicity


def _check_uniform(grid: np.ndarray) -> float:
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("sample grid must be 1-d with at least two points")
    steps = np.diff(grid)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise DomainError("sample grid must be uniform")
    return float(dt)


def _interp_complex(x, xp, fp):
    return np.interp(x, xp, fp.real) + 1j * np.interp(x, xp, fp.imag)


@dataclass(frozen=True)
class TemporalPulse:
    """A pulse shape in the time domain.

    ``terms`` is the analytic representation (may be empty for sampled-only
    pulses).  ``grid``/``values`` hold optional uniform samples.  When both
    are present they must agree at the grid points to within
    ``_SAMPLE_AGREEMENT_TOL`` of the peak.
    """

    terms: tuple[ExpTerm, ...] = ()
    grid: np.ndarray | None = None
    values: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.grid is None) != (self.values is None):
            raise DomainError("grid and values must be given together")
        if self.grid is not None:
            grid = np.asarray(self.grid, dtype=float)
            values = np.asarray(self.values, dtype=complex)
            if grid.shape != values.shape:
                raise DomainError("grid and values must have matching shapes")
            _check_uniform(grid)
            object.__setattr__(self, "grid", grid)
            object.__setattr__(self, "values", values)
            if self.terms:
                ref = _eval_terms(self.terms, grid)
                scale = max(np.abs(ref).max(), 1.0)
                dev = np.abs(ref - values).max()
                if dev > _SAMPLE_AGREEMENT_TOL * scale:
                    raise DomainError(
                        f"samples disagree with analytic terms by {dev:.3g} "
                        f"(tolerance {_SAMPLE_AGREEMENT_TOL:g} of peak)"
                    )

    # -- basic queries -------------------------------------------------

    @property
    def is_analytic(self) -> bool:
        return bool(self.terms)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.terms:
            return _eval_terms(self.terms, t)
        if self.grid is None:
            return np.zeros(t.shape, dtype=complex)
        inside = (t >= self.grid[0]) & (t <= self.grid[-1])
        out = np.zeros(t.shape, dtype=complex)
        out[inside] = _interp_complex(t[inside], self.grid, self.values)
        return out

    def min_decay_rate(self) -> float:
        if not self.terms:
            raise EvaluationError("sampled-only pulse has no analytic decay rate")
        return min(float(np.real(term.rate)) for term in self.terms)

    # -- algebra -------------------------------------------------------

    def conjugate(self) -> "TemporalPulse":
        return TemporalPulse(
            terms=tuple(term.conjugate() for term in self.terms),
            grid=None if self.grid is None else self.grid.copy(),
            values=None if self.values is None else np.conj(self.values),
        )

    def scaled(self, c: complex) -> "TemporalPulse":
        return TemporalPulse(
            terms=tuple(replace(t, amplitude=t.amplitude * c) for t in self.terms),
            grid=None if self.grid is None else self.grid.copy(),
            values=None if self.values is None else c * self.values,
        )

    def norm(self) -> float:
        if self.terms:
            return math.sqrt(max(inner_product(self, self).real, 0.0))
        if self.grid is None:
            return 0.0
        return math.sqrt(
            max(float(np.trapezoid(np.abs(self.values) ** 2, self.grid)), 0.0)
        )

    def normalized(self) -> "TemporalPulse":
        n = self.norm()
        if n == 0.0:
            raise DomainError("cannot normalize the zero pulse")
        return self.scaled(1.0 / n)

    def sampled_on(self, grid: np.ndarray) -> "TemporalPulse":
        grid = np.asarray(grid, dtype=float)
        return TemporalPulse(terms=self.terms, grid=grid, values=self(grid), meta=dict(self.meta))


def _eval_terms(terms: Sequence[ExpTerm], t: np.ndarray) -> np.ndarray:
    out = np.zeros(np.shape(t), dtype=complex)
    for term in terms:
        out = out + term.value(t)
    return out


@dataclass(frozen=True)
class SpectralPulse:
    """A pulse shape in the frequency domain (pole-term list and/or samples)."""

    terms: tuple[PoleTerm, ...] = ()
    grid: np.ndarray | None = None
    values: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.grid is None) != (self.values is None):
            raise DomainError("grid and values must be given together")
        if self.grid is not None:
            grid = np.asarray(self.grid, dtype=float)
            values = np.asarray(self.values, dtype=complex)
            if grid.shape != values.shape:
                raise DomainError("grid and values must have matching shapes")
            object.__setattr__(self, "grid", grid)
            object.__setattr__(self, "values", values)

    @property
    def is_analytic(self) -> bool:
        return bool(self.terms)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.terms:
            out = np.zeros(w.shape, dtype=complex)
            for term in self.terms:
                out = out + term.value(w)
            return out
        if self.grid is None:
            return np.zeros(w.shape, dtype=complex)
        return _interp_complex(w, self.grid, self.values)

    def inner(self, other: "SpectralPulse") -> complex:
        """Spectral inner product with the 1/(2pi) weight of the convention."""
        if self.terms and other.terms:
            total = 0.0 + 0.0j
            for a in self.terms:
                for b in other.terms:
                    total += _pole_pair_integral(a, b)
            return total / (2 * np.pi)
        grid, vals_a, vals_b = _common_spectral_samples(self, other)
        return complex(np.trapezoid(np.conj(vals_a) * vals_b, grid) / (2 * np.pi))

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))


def _common_spectral_samples(a: SpectralPulse, b: SpectralPulse):
    for s in (a, b):
        if s.grid is None and not s.terms:
            grid = np.linspace(-1.0, 1.0, 3)
            return grid, np.zeros(3, complex), np.zeros(3, complex)
    grid = a.grid if a.grid is not None else b.grid
    if grid is None:
        raise EvaluationError("no sample grid available for spectral quadrature")
    return grid, a(grid), b(grid)


def _pole_pair_integral(a: PoleTerm, b: PoleTerm) -> complex:
    """int conj(a(w)) b(w) dw over the real line, via the time domain.

    conj(c1/(iw+r1)**m1) is the forward transform of the conjugated time
    term, so the frequency integral equals 2pi times the time-domain
    overlap integral of the corresponding exponential terms.
    """
    ta = ExpTerm(a.coefficient / math.factorial(a.multiplicity - 1), a.rate, a.multiplicity - 1)
    tb = ExpTerm(b.coefficient / math.factorial(b.multiplicity - 1), b.rate, b.multiplicity - 1)
    return 2 * np.pi * _term_overlap(ta, tb)


def _term_overlap(a: ExpTerm, b: ExpTerm) -> complex:
    """int_0^inf conj(a(t)) b(t) dt in closed form."""
    p = a.power + b.power
    r = np.conj(a.rate) + b.rate
    return np.conj(a.amplitude) * b.amplitude * math.factorial(p) / r ** (p + 1)


# -- constructors and operations ----------------------------------------


def make_exp_pulse(rate: float) -> TemporalPulse:
    """Unit-norm decaying exponential ``sqrt(2*rate) * exp(-rate*t)``."""
    if not (np.isrealobj(rate) and rate > 0):
        raise DomainError(f"pulse rate must be a positive real number, got {rate}")
    return TemporalPulse(terms=(ExpTerm(math.sqrt(2.0 * rate), float(rate)),))


def inner_product(p: TemporalPulse, q: TemporalPulse) -> complex:
    """``int conj(p(t)) q(t) dt``, closed form for analytic pairs."""
    if p.terms and q.terms:
        total = 0.0 + 0.0j
        for a in p.terms:
            for b in q.terms:
                total += _term_overlap(a, b)
        return total
    if not p.terms and p.grid is None:
        return 0.0 + 0.0j
    if not q.terms and q.grid is None:
        return 0.0 + 0.0j
    grid = p.grid if p.grid is not None else q.grid
    return complex(np.trapezoid(np.conj(p(grid)) * q(grid), grid))


def to_frequency(p: TemporalPulse) -> SpectralPulse:
    """Forward transform.

    Analytic terms map exactly onto pole terms,
    ``a t**p e^{-rt} -> a p! / (iw + r)**(p+1)``.  Sampled-only pulses are
    transformed numerically on the FFT frequency grid of their time grid
    (trapezoid-corrected, so the error is second order in the step).
    """
    if p.terms:
        poles = tuple(
            PoleTerm(t.amplitude * math.factorial(t.power), t.rate, t.power + 1)
            for t in p.terms
        )
        return SpectralPulse(terms=poles)
    if p.grid is None:
        return SpectralPulse()
    grid, values = p.grid, p.values
    dt = grid[1] - grid[0]
    n = grid.size
    spec = np.fft.fft(values) * dt
    w = 2 * np.pi * np.fft.fftfreq(n, d=dt)
    # trapezoid end correction for the one-sided integral
    spec -= 0.5 * dt * (values[0] + values[-1] * np.exp(-1j * w * (n - 1) * dt))
    spec *= np.exp(-1j * w * grid[0])
    order = np.argsort(w)
    return SpectralPulse(grid=w[order], values=spec[order], meta={"dt": float(dt)})


def to_time_analytic(s: SpectralPulse) -> TemporalPulse:
    """Exact inverse of a pole-term spectrum."""
    if not s.terms:
        raise EvaluationError("analytic inversion needs pole terms")
    return TemporalPulse(
        terms=tuple(
            ExpTerm(t.coefficient / math.factorial(t.multiplicity - 1), t.rate, t.multiplicity - 1)
            for t in s.terms
        )
    )


def _tail_mass(coeff_sum: float, window: float) -> float:
    # L2 mass of a 1/w spectral tail beyond the window, Parseval weighted
    return coeff_sum**2 / (np.pi * max(window, 1e-300))


def to_time(
    s: SpectralPulse,
    grid: np.ndarray,
    tail_tol: float = 1e-6,
    window: float | None = None,
) -> TemporalPulse:
    """Numeric inverse transform onto ``grid`` over a truncated window.

    The truncation window and the estimated tail mass (L2, relative to a
    unit-norm pulse) are recorded in the result's ``meta``.  For pole-term
    spectra the leading ``1/(iw)`` asymptote is removed analytically before
    the FFT, which keeps the truncation error well below ``tail_tol`` even
    at the jump at ``t = 0``.
    """
    grid = np.asarray(grid, dtype=float)
    if s.terms:
        return _to_time_rational(s, grid, tail_tol, window)
    if s.grid is None:
        return TemporalPulse(grid=grid, values=np.zeros(grid.shape, complex))
    return _to_time_sampled(s, grid, tail_tol, window)


def _fft_window_inverse(sample_fn: Callable, W: float, t_span: float):
    """(1/2pi) int_{-W}^{W} F(w) e^{iwt} dw for all FFT times at once."""
    t_per = max(2.2 * t_span + 25.0, 40.0)
    n = int(2 ** np.ceil(np.log2(max(W * t_per / np.pi, 1024.0))))
    dw = 2 * np.pi / t_per
    half = n // 2
    w = (np.arange(n) - half) * dw
    vals = sample_fn(w)
    tn = 2 * np.pi * np.arange(n) / (n * dw)
    # f(t_n) = (dw/2pi) sum_m F(w_m) e^{i w_m t_n}, w_m = (m - half) dw
    f = np.fft.ifft(vals) * n * dw / (2 * np.pi)
    f *= np.exp(1j * (-half) * dw * tn)
    return tn, f, w[-1]


def _to_time_rational(s, grid, tail_tol, window):
    rates = np.array([t.rate for t in s.terms])
    simple = [t for t in s.terms if t.multiplicity == 1]
    c_total = sum(t.coefficient for t in simple)
    # reference pole carrying the 1/(iw) asymptote; offset keeps it distinct
    r_ref = float(np.max(np.real(rates))) * 2.0 + 0.8190462514
    residual_terms = list(s.terms) + ([PoleTerm(-c_total, r_ref)] if simple else [])

    def residual(w):
        out = np.zeros(w.shape, complex)
        for t in residual_terms:
            out = out + t.value(w)
        return out

    min_rate = float(np.min(np.real(rates)))
    coeff_scale = sum(abs(t.coefficient) for t in s.terms) + abs(c_total)
    # residual decays like 1/w^2; window set by its L2 tail mass
    W = window if window is not None else max(
        60.0 * max(np.max(np.abs(rates)), r_ref),
        (coeff_scale * max(np.max(np.abs(rates)), r_ref)) ** (2 / 3) / tail_tol ** (1 / 3),
    )
    t_span = grid[-1] + 36.0 / min_rate
    tn, f, w_edge = _fft_window_inverse(residual, W, t_span)
    vals = _interp_complex(grid, tn, f)
    if simple:
        vals = vals + c_total * np.exp(-r_ref * np.maximum(grid, 0.0)) * (grid >= 0)
    vals[grid < 0] = 0.0
    tail = coeff_scale**2 * max(np.max(np.abs(rates)), r_ref) ** 2 / (3 * np.pi * W**3)
    return TemporalPulse(grid=grid, values=vals, meta={"omega_window": float(W), "tail_mass": float(tail)})


def _to_time_sampled(s, grid, tail_tol, window):
    wgrid, svals = s.grid, s.values
    W_avail = float(min(abs(wgrid[0]), abs(wgrid[-1])))
    peak = float(np.abs(svals).max())
    if peak == 0.0:
        return TemporalPulse(grid=grid, values=np.zeros(grid.shape, complex))
    edge = float(max(abs(svals[0]), abs(svals[-1])))
    if edge > 0.05 * peak:
        raise DomainError(
            "spectrum does not decay enough over its sample window for inversion"
        )
    tail = edge**2 * W_avail / np.pi  # 1/w decay assumed beyond the window
    W = min(window, W_avail) if window is not None else W_avail
    if window is not None and window > W_avail:
        raise EvaluationError(
            f"requested window {window:g} exceeds sampled support {W_avail:g}"
        )
    if tail > tail_tol:
        suggested = edge**2 * W_avail / (np.pi * tail_tol) * W_avail
        raise EvaluationError(
            f"tail mass estimate {tail:.3g} exceeds tolerance {tail_tol:g}; "
            f"sample the spectrum out to about |w| = {suggested:.3g}"
        )

    def sample_fn(w):
        out = np.zeros(w.shape, complex)
        inside = np.abs(w) <= W
        out[inside] = _interp_complex(w[inside], wgrid, svals)
        return out

    tn, f, _ = _fft_window_inverse(sample_fn, W, grid[-1])
    vals = _interp_complex(grid, tn, f)
    vals[grid < 0] = 0.0
    return TemporalPulse(grid=grid, values=vals, meta={"omega_window": float(W), "tail_mass": float(tail)})


def convolve_exp_terms(kernel: Sequence[ExpTerm], pulse: Sequence[ExpTerm],
                       confluence_tol: float = 1e-8) -> tuple[ExpTerm, ...]:
    """Causal convolution of two exponential-term sums, exact.

    Handles coinciding rates by promoting the polynomial power, which is the
    analytic limit of the generic two-pole formula.  Only power-0 inputs are
    supported (all uses in this package).
    """
    out: list[ExpTerm] = []
    for k in kernel:
        for p in pulse:
            if k.power or p.power:
                raise EvaluationError("convolution implemented for power-0 terms only")
            amp = k.amplitude * p.amplitude
            if abs(k.rate - p.rate) < confluence_tol:
                out.append(ExpTerm(amp, (k.rate + p.rate) / 2.0, 1))
            else:
                d = p.rate - k.rate
                out.append(ExpTerm(amp / d, k.rate))
                out.append(ExpTerm(-amp / d, p.rate))
    return tuple(out)


# -- serialization -------------------------------------------------------


def pulse_to_csv(p: TemporalPulse, path, grid: np.ndarray | None = None) -> None:
    """Write samples as CSV with header ``t,re,im`` (UTF-8, LF, %.12e)."""
    if grid is not None:
        p = p.sampled_on(grid)
    if p.grid is None:
        raise DomainError("pulse has no samples; pass a grid to sample on")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,re,im\n")
        for t, v in zip(p.grid, p.values):
            fh.write(f"{t:.12e},{v.real:.12e},{v.imag:.12e}\n")


def _c2d(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _d2c(d) -> complex:
    if isinstance(d, dict):
        return complex(d.get("re", 0.0), d.get("im", 0.0))
    return complex(d)


def pulse_to_dict(p: TemporalPulse) -> dict:
    doc = {
        "terms": [
            {"amplitude": _c2d(t.amplitude), "rate": _c2d(t.rate), "power": t.power}
            for t in p.terms
        ]
    }
    if p.grid is not None:
        doc["samples"] = {
            "t0": float(p.grid[0]),
            "dt": float(p.grid[1] - p.grid[0]),
            "re": [float(v) for v in p.values.real],
            "im": [float(v) for v in p.values.imag],
        }
    return doc


def pulse_from_dict(doc: dict) -> TemporalPulse:
    terms = tuple(
        ExpTerm(_d2c(t["amplitude"]), _d2c(t["rate"]), int(t.get("power", 0)))
        for t in doc.get("terms", [])
    )
    grid = values = None
    if "samples" in doc:
        s = doc["samples"]
        n = len(s["re"])
        grid = s["t0"] + s["dt"] * np.arange(n)
        values = np.array(s["re"], dtype=float) + 1j * np.array(s["im"], dtype=float)
    return TemporalPulse(terms=terms, grid=grid, values=values)
