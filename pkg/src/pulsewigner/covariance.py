"""Two-time covariance functions and their Wigner spectra.

A covariance here is a 2x2 matrix kernel ``R(t, r)`` made of three parts:

* a Dirac-singular part ``delta_coeff * delta(t - r)``,
* separable terms ``f(t) h(r)`` on a named matrix entry (no implicit
  conjugation; constructors pass pre-conjugated pulses),
* stationary two-sided exponential terms ``c_plus e^{-rate (t-r)}`` for
  ``t > r`` and ``c_minus e^{-rate (r-t)}`` for ``t < r``.

The Wigner spectrum is the Fourier transform of ``R(t, tau)`` over the
second time argument,

    S(t, w) = (1/sqrt(2pi)) int R(t, tau) exp(-i w tau) dtau,

and the Dirac part is always transformed analytically, never discretized.
Evaluating the regular part at ``t = r`` returns the average of the two
one-sided limits; the delta weight is reported separately through
``delta_coeff``.  Equal-time point values of a stationary kernel therefore
follow the branch limits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EvaluationError
from .pulses import TemporalPulse, to_frequency

__all__ = [
    "SeparableTerm",
    "StationaryExpTerm",
    "TwoTimeCovariance",
    "WignerSpectrumGrid",
    "ClosedFormSpectrum",
    "input_covariance",
    "passive_output_covariance",
    "wigner_closed_form",
    "wigner_numeric",
    "grid_eval",
    "covariance_to_dict",
]

SQRT2PI = np.sqrt(2.0 * np.pi)

_ENTRIES = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True)
class SeparableTerm:
    """Contributes ``f(t) * h(r)`` to matrix entry ``(row, col)``."""

    entry: tuple[int, int]
    f: TemporalPulse
    h: TemporalPulse

    def __post_init__(self):
        if self.entry not in _ENTRIES:
            raise DomainError(f"entry must be one of {_ENTRIES}, got {self.entry}")


@dataclass(frozen=True)
class StationaryExpTerm:
    """Two-sided exponential in ``t - r`` on a named matrix entry."""

    entry: tuple[int, int]
    c_plus: complex
    c_minus: complex
    rate: complex

    def __post_init__(self):
        if self.entry not in _ENTRIES:
            raise DomainError(f"entry must be one of {_ENTRIES}, got {self.entry}")
        if not np.real(self.rate) > 0:
            raise DomainError("stationary term rate must have Re > 0")

    def value(self, t, r):
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        d = t - r
        mag = np.exp(-self.rate * np.abs(d))
        avg = 0.5 * (self.c_plus + self.c_minus)
        return np.where(d > 0, self.c_plus * mag, np.where(d < 0, self.c_minus * mag, avg * mag))


@dataclass(frozen=True)
class TwoTimeCovariance:
    delta_coeff: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), complex))
    separable: tuple[SeparableTerm, ...] = ()
    stationary: tuple[StationaryExpTerm, ...] = ()

    def __post_init__(self):
        m = np.asarray(self.delta_coeff, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError("delta_coeff must be a 2x2 matrix")
        object.__setattr__(self, "delta_coeff", m)

    @property
    def is_analytic(self) -> bool:
        return all(t.f.is_analytic and t.h.is_analytic for t in self.separable)

    def value(self, t, r) -> np.ndarray:
        """Regular (delta-free) part at ``(t, r)``; ``t = r`` uses branch limits."""
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        out = np.zeros(np.broadcast_shapes(t.shape, r.shape) + (2, 2), dtype=complex)
        for term in self.separable:
            i, j = term.entry
            out[..., i - 1, j - 1] += term.f(t) * term.h(r)
        for term in self.stationary:
            i, j = term.entry
            out[..., i - 1, j - 1] += term.value(t, r)
        return out

    def entry_value(self, row: int, col: int, t, r):
        return self.value(t, r)[..., row - 1, col - 1]


def input_covariance(state) -> TwoTimeCovariance:
    """Covariance of a single-photon field over the vacuum-plus-photon split.

    The (1,1) entry is ``delta(t-r) + nu(t) conj(nu)(r)`` and the (2,2)
    entry is ``conj(nu)(t) nu(r)``; off-diagonals vanish.
    """
    shape = getattr(state, "shape", None)
    if shape is None or not isinstance(shape, TemporalPulse):
        raise DomainError("input_covariance expects a state carrying a pulse shape")
    nu = shape
    return TwoTimeCovariance(
        delta_coeff=np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
        separable=(
            SeparableTerm((1, 1), nu, nu.conjugate()),
            SeparableTerm((2, 2), nu.conjugate(), nu),
        ),
    )


def passive_output_covariance(eta: TemporalPulse) -> TwoTimeCovariance:
    """Covariance of a passive single-photon output with pulse ``eta``."""
    return TwoTimeCovariance(
        delta_coeff=np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
        separable=(
            SeparableTerm((1, 1), eta, eta.conjugate()),
            SeparableTerm((2, 2), eta.conjugate(), eta),
        ),
    )


# -- closed form ---------------------------------------------------------


class ClosedFormSpectrum:
    """Analytic Wigner spectrum, evaluable at arbitrary ``(t, w)``.

    ``entry_funcs[(row, col)]`` maps broadcastable ``(t, w)`` arrays to the
    complex spectrum value of that entry (delta contribution included).
    """

    def __init__(self, entry_funcs: dict, provenance: str = "closed_form"):
        self.entry_funcs = dict(entry_funcs)
        self.provenance = provenance

    def entry(self, row: int, col: int, t, w):
        t = np.asarray(t, dtype=float)
        w = np.asarray(w, dtype=float)
        fn = self.entry_funcs.get((row, col))
        if fn is None:
            return np.zeros(np.broadcast_shapes(t.shape, w.shape), dtype=complex)
        return fn(t, w)

    def matrix(self, t, w) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        w = np.asarray(w, dtype=float)
        base = np.broadcast_shapes(t.shape, w.shape)
        out = np.zeros(base + (2, 2), dtype=complex)
        for (i, j), fn in self.entry_funcs.items():
            out[..., i - 1, j - 1] = fn(t, w)
        return out


def _delta_rule(coeff: complex) -> Callable:
    return lambda t, w: (coeff / SQRT2PI) * np.exp(-1j * np.asarray(w) * np.asarray(t))


def _separable_rule(f: TemporalPulse, h: TemporalPulse) -> Callable:
    H = to_frequency(h)

    def rule(t, w):
        return (1.0 / SQRT2PI) * f(np.asarray(t)) * H(np.asarray(w))

    return rule


def _stationary_rule(term: StationaryExpTerm) -> Callable:
    def rule(t, w):
        w = np.asarray(w, dtype=float)
        lobes = term.c_plus / (term.rate - 1j * w) + term.c_minus / (term.rate + 1j * w)
        return (1.0 / SQRT2PI) * np.exp(-1j * w * np.asarray(t)) * lobes

    return rule


def wigner_closed_form(cov: TwoTimeCovariance) -> ClosedFormSpectrum:
    """Apply the term rules to an analytic covariance.

    delta part ``M``            -> ``(1/sqrt(2pi)) M exp(-i w t)``
    separable ``f(t) h(r)``     -> ``(1/sqrt(2pi)) f(t) H(w)`` with
                                   ``H(w) = int h(tau) exp(-i w tau) dtau``
    stationary ``(c+, c-, a)``  -> ``(1/sqrt(2pi)) exp(-i w t)
                                   [c+/(a - i w) + c-/(a + i w)]``
    """
    if not cov.is_analytic:
        raise EvaluationError(
            "covariance contains sampled-only pulses; use wigner_numeric"
        )
    funcs: dict[tuple[int, int], list[Callable]] = {}

    def add(entry, fn):
        funcs.setdefault(entry, []).append(fn)

    for i in (1, 2):
        for j in (1, 2):
            coeff = cov.delta_coeff[i - 1, j - 1]
            if coeff != 0:
                add((i, j), _delta_rule(coeff))
    for term in cov.separable:
        add(term.entry, _separable_rule(term.f, term.h))
    for term in cov.stationary:
        add(term.entry, _stationary_rule(term))

    def combine(fns):
        def total(t, w):
            t = np.asarray(t, dtype=float)
            w = np.asarray(w, dtype=float)
            out = np.zeros(np.broadcast_shapes(t.shape, w.shape), dtype=complex)
            for fn in fns:
                out = out + fn(t, w)
            return out

        return total

    return ClosedFormSpectrum({e: combine(fns) for e, fns in funcs.items()})


# -- grids ---------------------------------------------------------------


@dataclass(frozen=True)
class WignerSpectrumGrid:
    """Sampled 2x2 spectrum over a ``(t, w)`` grid with provenance tag."""

    t_grid: np.ndarray
    omega_grid: np.ndarray
    values: np.ndarray  # shape (nt, nw, 2, 2)
    provenance: str

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        w = np.asarray(self.omega_grid, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        for g, name in ((t, "t_grid"), (w, "omega_grid")):
            if g.size > 1 and not np.all(np.diff(g) > 0):
                raise DomainError(f"{name} must be strictly increasing")
        if v.shape != (t.size, w.size, 2, 2):
            raise DomainError("values must have shape (nt, nw, 2, 2)")
        if v.size and not np.all(np.isfinite(v)):
            raise DomainError("spectrum values must be finite")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "omega_grid", w)
        object.__setattr__(self, "values", v)

    def entry(self, row: int, col: int) -> np.ndarray:
        return self.values[:, :, row - 1, col - 1]

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    # -- exports ---------------------------------------------------

    def write_csv(self, path) -> None:
        """Long-format CSV, one row per grid point per entry.

        Entry blocks are separated by two blank lines and time scans by one,
        so gnuplot can address entries with ``index`` and render surfaces
        without reshaping.  The header line is ``#``-commented for the same
        reason.
        """
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# t,omega,entry,re,im\n")
            for k, (i, j) in enumerate(_ENTRIES):
                if k:
                    fh.write("\n\n")
                tag = 10 * i + j
                block = self.values[:, :, i - 1, j - 1]
                for a, t in enumerate(self.t_grid):
                    if a:
                        fh.write("\n")
                    for b, w in enumerate(self.omega_grid):
                        v = block[a, b]
                        fh.write(f"{t:.12e},{w:.12e},{tag},{v.real:.12e},{v.imag:.12e}\n")

    def write_json(self, path) -> None:
        doc = {
            "provenance": self.provenance,
            "t": [float(x) for x in self.t_grid],
            "omega": [float(x) for x in self.omega_grid],
            "entries": {
                f"{i}{j}": {
                    "re": self.values[:, :, i - 1, j - 1].real.tolist(),
                    "im": self.values[:, :, i - 1, j - 1].imag.tolist(),
                }
                for (i, j) in _ENTRIES
            },
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def write_gnuplot(self, path, csv_name: str, title: str = "Wigner spectrum") -> None:
        lines = [
            "set datafile separator ','",
            "set pm3d map",
            "set xlabel 't'",
            "set ylabel 'omega'",
            "set term pngcairo size 1200,900",
        ]
        for k, (i, j) in enumerate(_ENTRIES):
            lines += [
                f"set output 'entry{i}{j}_re.png'",
                f"set title '{title}, Re entry ({i},{j})'",
                f"splot '{csv_name}' index {k} using 1:2:4 with pm3d notitle",
            ]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def grid_eval(spectrum, t_grid, omega_grid, provenance: str | None = None) -> WignerSpectrumGrid:
    """Dense evaluation of a closed-form spectrum on a ``(t, w)`` grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    omega_grid = np.asarray(omega_grid, dtype=float)
    values = np.zeros((t_grid.size, omega_grid.size, 2, 2), dtype=complex)
    if t_grid.size and omega_grid.size:
        tt = t_grid[:, None]
        ww = omega_grid[None, :]
        if hasattr(spectrum, "matrix"):
            values = spectrum.matrix(tt, ww)
            tag = provenance or getattr(spectrum, "provenance", "closed_form")
        else:
            for a, t in enumerate(t_grid):
                for b, w in enumerate(omega_grid):
                    values[a, b] = np.asarray(spectrum(t, w), dtype=complex)
            tag = provenance or "closed_form"
    else:
        tag = provenance or "closed_form"
    return WignerSpectrumGrid(t_grid, omega_grid, values, tag)


# -- numeric oracle ------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)

# decay depth for truncation windows; exp(-36) ~ 2e-16 of the local scale
_DECAY_DEPTH = 36.0


def _pulse_support(p: TemporalPulse) -> float:
    if p.is_analytic:
        return _DECAY_DEPTH / p.min_decay_rate()
    if p.grid is not None:
        return float(p.grid[-1])
    return 0.0


def _max_rate(cov: TwoTimeCovariance) -> float:
    rates = [1.0]
    for term in cov.separable:
        for p in (term.f, term.h):
            if p.is_analytic:
                rates += [abs(t.rate) for t in p.terms]
    rates += [abs(t.rate) for t in cov.stationary]
    return float(max(rates))


def wigner_numeric(
    cov: TwoTimeCovariance,
    t_grid,
    omega_grid,
    tail_tol: float = 1e-6,
    window: float | None = None,
) -> WignerSpectrumGrid:
    """Numeric Wigner spectrum of the regular part plus analytic delta part.

    For each ``t`` the regular kernel is integrated over ``tau`` with
    panel-wise Gauss-Legendre quadrature.  Panels are split at the kernel's
    kinks (``tau = 0`` for causal separable terms, ``tau = t`` for
    stationary ones) and their length resolves both the fastest decay rate
    and the largest requested frequency, so the quadrature error sits far
    below the truncation tolerance.  The Dirac part is added in closed form
    and never discretized.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    omega_grid = np.asarray(omega_grid, dtype=float)
    values = np.zeros((t_grid.size, omega_grid.size, 2, 2), dtype=complex)
    if not (t_grid.size and omega_grid.size):
        return WignerSpectrumGrid(t_grid, omega_grid, values, "numeric_oracle")

    sep_support = max((_pulse_support(t.h) for t in cov.separable), default=0.0)
    stat_rates = [float(np.real(t.rate)) for t in cov.stationary]
    stat_reach = _DECAY_DEPTH / min(stat_rates) if stat_rates else 0.0
    if window is not None:
        needed = max(sep_support, stat_reach)
        if window < needed:
            raise EvaluationError(
                f"tau window {window:g} too small for tail tolerance {tail_tol:g}; "
                f"use at least {needed:.3g}"
            )
        sep_support = min(sep_support, window)
        stat_reach = min(stat_reach, window)

    wmax = float(np.abs(omega_grid).max())
    h = min(0.35, 3.0 / max(wmax, 1e-9), 3.0 / _max_rate(cov))

    have_regular = bool(cov.separable or cov.stationary)
    for a, t in enumerate(t_grid):
        if not have_regular:
            break
        lo = min(0.0, t - stat_reach) if stat_rates else 0.0
        hi = max(sep_support, t + stat_reach if stat_rates else 0.0)
        if hi <= lo:
            continue
        cuts = sorted({lo, hi} | {c for c in (0.0, t) if lo < c < hi})
        nodes = []
        weights = []
        for left, right in zip(cuts[:-1], cuts[1:]):
            m = max(1, int(np.ceil((right - left) / h)))
            edges = np.linspace(left, right, m + 1)
            half = 0.5 * (edges[1:] - edges[:-1])
            mid = 0.5 * (edges[1:] + edges[:-1])
            nodes.append((mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel())
            weights.append((half[:, None] * _GL_WEIGHTS[None, :]).ravel())
        tau = np.concatenate(nodes)
        wts = np.concatenate(weights)
        kernel = cov.value(np.full(tau.shape, t), tau)  # (n, 2, 2)
        phase = np.exp(-1j * omega_grid[:, None] * tau[None, :])
        values[a] = np.einsum("wn,n,nij->wij", phase, wts, kernel)
    values /= SQRT2PI

    delta = cov.delta_coeff
    if np.any(delta != 0):
        phase = np.exp(-1j * t_grid[:, None] * omega_grid[None, :]) / SQRT2PI
        values += phase[:, :, None, None] * delta[None, None, :, :]
    return WignerSpectrumGrid(t_grid, omega_grid, values, "numeric_oracle")


def covariance_to_dict(cov: TwoTimeCovariance) -> dict:
    from .pulses import pulse_to_dict

    return {
        "delta_coeff": {
            "re": cov.delta_coeff.real.tolist(),
            "im": cov.delta_coeff.imag.tolist(),
        },
        "separable": [
            {"entry": list(t.entry), "f": pulse_to_dict(t.f), "h": pulse_to_dict(t.h)}
            for t in cov.separable
        ],
        "stationary": [
            {
                "entry": list(t.entry),
                "c_plus": {"re": float(np.real(t.c_plus)), "im": float(np.imag(t.c_plus))},
                "c_minus": {"re": float(np.real(t.c_minus)), "im": float(np.imag(t.c_minus))},
                "rate": {"re": float(np.real(t.rate)), "im": float(np.imag(t.rate))},
            }
            for t in cov.stationary
        ],
    }
