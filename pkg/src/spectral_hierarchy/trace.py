"""Harmonic staircase expansions and eigenvalue reconstruction.

An expansion is ``N(k) = Nbar(k) + Im sum_p A_p exp(i L_p k)``.  Because every
term is a pure exponential, integrals over an interval are done term by
term in closed form; only the smooth average needs its own antiderivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import (
    CountingModel,
    RiemannVonMangoldt,
    SpectralSequence,
    WeylLinear,
    evaluate_average,
    model_from_dict,
    validate_sequence,
)
from .errors import NotRegular, OutOfDomain, TooShort
from .hierarchy import HierarchyLevel

CHUNK = 4096


@dataclass(frozen=True)
class Harmonic:
    amplitude: complex
    length: float

    def __post_init__(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ValueError("harmonic length must be positive and finite")
        if not np.isfinite(self.amplitude):
            raise ValueError("harmonic amplitude must be finite")


class StaircaseExpansion:
    """Average counting model plus a finite set of harmonics.

    Harmonics are held as parallel arrays sorted by length.  ``damping``
    (a length scale) multiplies every amplitude by ``exp(-(L / damping)**2)``;
    it is off by default.
    """

    def __init__(self, average: CountingModel, amplitudes=(), lengths=(), truncation=None, damping=None):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        lens = np.asarray(lengths, dtype=float).ravel()
        if amps.shape != lens.shape:
            raise ValueError("amplitudes and lengths differ in size")
        if lens.size and not (np.all(lens > 0) and np.all(np.isfinite(lens))):
            raise ValueError("harmonic lengths must be positive and finite")
        if not np.all(np.isfinite(amps)):
            raise ValueError("harmonic amplitudes must be finite")
        order = np.argsort(lens, kind="stable")
        self.average = average
        self.amplitudes = amps[order]
        self.lengths = lens[order]
        self.truncation = dict(truncation or {})
        self.damping = damping

    @classmethod
    def from_harmonics(cls, average, harmonics: Iterable[Harmonic], truncation=None, damping=None):
        harmonics = list(harmonics)
        return cls(
            average,
            [h.amplitude for h in harmonics],
            [h.length for h in harmonics],
            truncation,
            damping,
        )

    def __len__(self):
        return self.lengths.size

    @property
    def harmonics(self):
        return [Harmonic(complex(a), float(l)) for a, l in zip(self.amplitudes, self.lengths)]

    def effective_amplitudes(self):
        if self.damping is None:
            return self.amplitudes
        return self.amplitudes * np.exp(-((self.lengths / self.damping) ** 2))

    def with_damping(self, damping):
        return StaircaseExpansion(self.average, self.amplitudes, self.lengths, self.truncation, damping)

    def truncated(self, max_length):
        keep = self.lengths <= max_length
        trunc = dict(self.truncation, length_cutoff=float(max_length))
        return StaircaseExpansion(self.average, self.amplitudes[keep], self.lengths[keep], trunc, self.damping)

    def __call__(self, k):
        return staircase_eval(self, k)

    def oscillating(self, k):
        return _harmonic_sum(self.effective_amplitudes(), self.lengths, np.asarray(k, dtype=float), _phase_term)

    def integrate(self, a, b):
        """Integral of N(k) dk over [a, b] (elementwise for arrays)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        smooth = self.average._primitive(b) - self.average._primitive(a)
        osc = _harmonic_sum(self.effective_amplitudes(), self.lengths, (a, b), _integral_term)
        return smooth + osc

    def to_dict(self):
        return {
            "average": self.average.to_dict(),
            "harmonics": [
                {"re": float(a.real), "im": float(a.imag), "length": float(l)}
                for a, l in zip(self.amplitudes, self.lengths)
            ],
            "truncation": self.truncation,
            "damping": self.damping,
        }

    @classmethod
    def from_dict(cls, d):
        hs = d.get("harmonics", [])
        return cls(
            model_from_dict(d["average"]),
            [complex(h["re"], h["im"]) for h in hs],
            [h["length"] for h in hs],
            d.get("truncation"),
            d.get("damping"),
        )


def _phase_term(amps, lens, k):
    return np.imag(amps[None, :] * np.exp(1j * np.multiply.outer(k, lens)))


def _integral_term(amps, lens, ab):
    a, b = ab
    ea = np.exp(1j * np.multiply.outer(a, lens))
    eb = np.exp(1j * np.multiply.outer(b, lens))
    return np.imag(amps[None, :] * (eb - ea) / (1j * lens[None, :]))


def _harmonic_sum(amps, lens, arg, term):
    """Sum ``term`` over harmonics in ascending length with Neumaier compensation.

    Chunks of harmonics are summed pairwise by numpy; the chunk partial sums
    are then accumulated with a running compensation term.
    """
    if isinstance(arg, tuple):
        shape = np.broadcast(*arg).shape
        flat = tuple(np.broadcast_to(x, shape).ravel() for x in arg)
    else:
        shape = np.shape(arg)
        flat = np.ravel(arg)
    size = flat[0].size if isinstance(flat, tuple) else flat.size
    total = np.zeros(size)
    comp = np.zeros(size)
    for start in range(0, lens.size, CHUNK):
        part = term(amps[start : start + CHUNK], lens[start : start + CHUNK], flat).sum(axis=1)
        t = total + part
        big = np.abs(total) >= np.abs(part)
        comp += np.where(big, (total - t) + part, (part - t) + total)
        total = t
    out = (total + comp).reshape(shape)
    return float(out) if out.ndim == 0 else out


def staircase_eval(x: StaircaseExpansion, k):
    smooth = evaluate_average(x.average, k)
    return smooth + x.oscillating(k)


# --------------------------------------------------------------------------
# Riemann zeros


def primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=int)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(math.isqrt(n)) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0]


def riemann_expansion(prime_cutoff: int, m_max: int, damping=None) -> StaircaseExpansion:
    """Prime-power sum for the zeta zero staircase.

    Each prime power ``p**m`` contributes a harmonic of length ``m ln p`` and
    amplitude ``-1 / (pi m p**(m/2))``.
    """
    if prime_cutoff < 2 or m_max < 1:
        raise ValueError("need prime_cutoff >= 2 and m_max >= 1")
    ps = primes_upto(prime_cutoff).astype(float)
    m = np.arange(1, m_max + 1, dtype=float)
    P, M = np.meshgrid(ps, m, indexing="ij")
    lengths = (M * np.log(P)).ravel()
    amps = (-1.0 / (math.pi * M * P ** (M / 2))).ravel()
    trunc = {"prime_cutoff": int(prime_cutoff), "m_max": int(m_max)}
    return StaircaseExpansion(RiemannVonMangoldt(), amps, lengths, trunc, damping)


# --------------------------------------------------------------------------
# reconstruction


class ExactStaircase:
    """Piecewise-constant counting function of a known eigenvalue list."""

    def __init__(self, eigenvalues, multiplicity=None):
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.weights = np.ones_like(self.eigenvalues) if multiplicity is None else np.asarray(multiplicity, float)
        self._cum = np.concatenate([[0.0], np.cumsum(self.weights)])

    def __call__(self, k):
        idx = np.searchsorted(self.eigenvalues, np.asarray(k, dtype=float), side="right")
        out = self._cum[idx]
        return float(out) if np.ndim(out) == 0 else out

    def integrate(self, a, b):
        def prim(x):
            x = np.asarray(x, dtype=float)
            # integral_0^x N = sum over eigenvalues e <= x of w * (x - e)
            idx = np.searchsorted(self.eigenvalues, x, side="right")
            wx = np.concatenate([[0.0], np.cumsum(self.weights * self.eigenvalues)])
            return self._cum[idx] * x - wx[idx]

        return prim(b) - prim(a)


def integral_k_dN(x, a, b):
    """Stieltjes integral of ``k dN(k)`` over ``[a, b]``.

    Integration by parts: ``b N(b) - a N(a) - integral_a^b N(k) dk``.  ``x`` is a
    :class:`StaircaseExpansion` or :class:`ExactStaircase`.
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(a_arr >= b_arr):
        raise ValueError("integration bounds must satisfy a < b")
    if isinstance(x, StaircaseExpansion):
        lo, hi = x.average.domain
        for v in (a_arr, b_arr):
            if np.any((v < lo) | (v > hi)):
                raise OutOfDomain(float(np.ravel(v)[0]), x.average.domain)
    out = b_arr * x(b_arr) - a_arr * x(a_arr) - x.integrate(a_arr, b_arr)
    return float(out) if np.ndim(out) == 0 else out


def _separator_values(separators):
    if isinstance(separators, HierarchyLevel):
        return np.asarray(separators.values, dtype=float)
    if isinstance(separators, SpectralSequence):
        return np.asarray(separators.values, dtype=float)
    return np.asarray(separators, dtype=float)


def level_in_interval(x, a, b):
    """Position of the single level in ``[a, b]``, ``c + integral (k - c) dN``.

    With exactly one level between the separators this equals
    ``integral k dN``.  Centering at ``c = (a + b) / 2`` means errors in the
    approximate staircase are weighted by the half-width of the interval
    rather than by ``k`` itself.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a >= b):
        raise ValueError("integration bounds must satisfy a < b")
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    out = c + h * (x(b) + x(a)) - x.integrate(a, b)
    return float(out) if np.ndim(out) == 0 else out


def reconstruct_spectrum(x, separators, label="reconstructed", centered=True) -> SpectralSequence:
    """One eigenvalue per adjacent separator pair.

    Separators are in the same (physical) units as the expansion.
    ``centered=False`` uses the plain ``integral k dN``.
    """
    s = _separator_values(separators)
    if s.size < 2:
        raise TooShort(s.size)
    if centered:
        vals = level_in_interval(x, s[:-1], s[1:])
    else:
        vals = integral_k_dN(x, s[:-1], s[1:])
    return SpectralSequence(np.atleast_1d(vals), label)


def periodic_separators(L0: float, gamma: float, n_lo: int, n_hi: int) -> np.ndarray:
    """``pi (n + gamma) / L0`` for ``n = n_lo - 1 .. n_hi``."""
    n = np.arange(n_lo - 1, n_hi + 1, dtype=float)
    return math.pi * (n + gamma) / L0


def _separator_fit(x, L0, gamma, n_lo, n_hi):
    sep = periodic_separators(L0, gamma, n_lo, n_hi)
    if sep[0] <= 0:
        return math.inf, sep
    counts = x(sep)
    want = np.arange(n_lo - 1, n_hi + 1)
    return float(np.max(np.abs(counts - want))), sep


def regular_graph_spectrum(x: StaircaseExpansion, L0: float, n_range, gamma: Optional[float] = None,
                           gamma_grid: int = 200) -> SpectralSequence:
    """Constructive spectrum of a regular graph, ``k_n`` for ``n`` in ``n_range``.

    Level ``n`` is isolated in ``[pi (n - 1 + gamma) / L0, pi (n + gamma) / L0]``.
    With ``gamma=None`` the shift is chosen from the expansion alone: the grid
    value in [0, 1) whose separators come closest to integer counts.  The
    separators are rejected (``NotRegular``) if the expansion does not count
    exactly ``n`` levels below the ``n``-th one.
    """
    n_lo, n_hi = int(n_range[0]), int(n_range[-1])
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError("n_range must be a nonempty range of positive integers")
    if gamma is None:
        best = (math.inf, None)
        for g in (np.arange(gamma_grid) + 0.5) / gamma_grid:
            score, _ = _separator_fit(x, L0, g, n_lo, n_hi)
            if score < best[0]:
                best = (score, g)
        gamma = best[1]
    score, sep = _separator_fit(x, L0, gamma, n_lo, n_hi)
    if not score < 0.5:
        raise NotRegular(score)
    vals = level_in_interval(x, sep[:-1], sep[1:])
    return validate_sequence(np.atleast_1d(vals), f"regular graph spectrum (gamma={gamma:.6g})")


def graph_weyl_average(L0, offset=0.0):
    return WeylLinear(L0, offset, domain=(0.0, math.inf))
