"""Fluctuation statistics and difference-operator complexity of finite sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyInput, RequiresModulus, TooShort
from .hierarchy import HierarchyLevel


def _values(level):
    if isinstance(level, HierarchyLevel):
        return level.values
    return np.asarray(getattr(level, "values", level), dtype=float)


def spacings(level) -> np.ndarray:
    k = _values(level)
    if k.size < 2:
        raise TooShort(k.size)
    return np.diff(k)


def xi_statistic(level) -> np.ndarray:
    """Average of adjacent fluctuations, ``(delta_{n+1} + delta_n) / 2``."""
    k = _values(level)
    if k.size < 2:
        raise TooShort(k.size)
    d = k - np.arange(1, k.size + 1)
    return 0.5 * (d[1:] + d[:-1])


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    normalized_density: np.ndarray

    @property
    def widths(self):
        return np.diff(self.bin_edges)

    @property
    def mass(self):
        return float(np.sum(self.normalized_density * self.widths))


def histogram(values, bins: int = 50, range: Optional[Tuple[float, float]] = None) -> Histogram:
    """Uniform-bin histogram.

    The density is normalised by the total number of samples, so samples
    outside ``range`` are lost mass and the density integrates to less than 1.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("histogram of an empty sample")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if range is None:
        lo, hi = float(v.min()), float(v.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        range = (lo, hi)
    counts, edges = np.histogram(v, bins=bins, range=range)
    density = counts / (v.size * np.diff(edges))
    return Histogram(edges, counts, density)


def wigner_reference(s):
    """Wigner surmise ``(pi s / 2) exp(-pi s^2 / 4)`` (s >= 0)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacing must be non-negative")
    out = 0.5 * math.pi * s * np.exp(-0.25 * math.pi * s * s)
    return float(out) if out.ndim == 0 else out


def sup_distance(h: Histogram, reference=wigner_reference) -> float:
    """Largest gap between a histogram's density and a reference curve at bin centres."""
    centres = 0.5 * (h.bin_edges[1:] + h.bin_edges[:-1])
    return float(np.max(np.abs(h.normalized_density - reference(np.clip(centres, 0, None)))))


# --------------------------------------------------------------------------
# finite sequences


@dataclass(frozen=True)
class FiniteSymbolSequence:
    """Integer sequence, optionally over ``Z_M`` and then read cyclically."""

    symbols: Tuple[int, ...]
    modulus: Optional[int] = None

    def __post_init__(self):
        syms = tuple(int(s) for s in self.symbols)
        if self.modulus is not None:
            if self.modulus < 1:
                raise ValueError("modulus must be positive")
            if any(not 0 <= s < self.modulus for s in syms):
                raise ValueError(f"symbols must lie in [0, {self.modulus})")
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def from_string(cls, text: str, modulus: Optional[int] = 2):
        return cls(tuple(int(c) for c in text.strip()), modulus)

    def __len__(self):
        return len(self.symbols)

    @property
    def cyclic(self):
        return self.modulus is not None

    def is_zero(self):
        return all(s == 0 for s in self.symbols)


def difference(x: FiniteSymbolSequence) -> FiniteSymbolSequence:
    """``y(n) = x(n) - x(n + 1)``; cyclic and reduced mod M when a modulus is set."""
    if len(x) < 2:
        raise TooShort(len(x))
    s = np.asarray(x.symbols, dtype=np.int64)
    if x.cyclic:
        return FiniteSymbolSequence(tuple(np.mod(s - np.roll(s, -1), x.modulus)), x.modulus)
    return FiniteSymbolSequence(tuple(s[:-1] - s[1:]))


def poly_degree(x: FiniteSymbolSequence, l_max: int = 64) -> Optional[int]:
    """Degree ``l - 1`` for the least ``l`` with ``Delta^l x = 0``; ``None`` if not polynomial.

    The zero sequence has degree -1.  Without a modulus the sequence shrinks
    by one element per difference, and ``l`` may not exceed ``len(x) - 1``.
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    y = x
    for l in range(0, l_max + 1):
        if y.is_zero():
            return l - 1
        if l == l_max or len(y) < 2 or (not x.cyclic and len(y) <= 1):
            return None
        y = difference(y)
    return None


def exp_order(x: FiniteSymbolSequence, q_max: int = 64) -> Optional[int]:
    """Least ``q <= q_max`` with ``Delta^q x = x``; ``None`` if there is none."""
    if not x.cyclic:
        raise RequiresModulus("exponential order needs a modulus (cyclic sequence)")
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    y = x
    for q in range(1, q_max + 1):
        y = difference(y)
        if y.symbols == x.symbols:
            return q
    return None


@dataclass(frozen=True)
class DeltaClass:
    """Eventual behaviour of ``x, Delta x, Delta^2 x, ...`` on a cyclic sequence.

    ``preperiod`` steps lead into a cycle of length ``period``.  Polynomials
    of degree m end in the zero fixed point (period 1, preperiod m + 1);
    exponentials are pure cycles (preperiod 0).
    """

    preperiod: int
    period: int

    def key(self):
        """Sort key, order first and degree second."""
        return (self.period, self.preperiod)


def delta_class(x: FiniteSymbolSequence, max_steps: int = 1 << 16) -> DeltaClass:
    if not x.cyclic:
        raise RequiresModulus("Delta classification needs a modulus (cyclic sequence)")
    seen = {x.symbols: 0}
    y = x
    for step in range(1, max_steps + 1):
        y = difference(y)
        if y.symbols in seen:
            first = seen[y.symbols]
            return DeltaClass(first, step - first)
        seen[y.symbols] = step
    raise RuntimeError(f"no cycle within {max_steps} steps")


def quantize(values: Sequence[float], scale: float = 1.0, modulus: Optional[int] = None) -> FiniteSymbolSequence:
    """``floor(values * scale)`` as symbols, reduced mod ``modulus`` if given.

    An exploratory discretisation for running real sequences (e.g. level
    fluctuations) through the difference operator.
    """
    q = np.floor(np.asarray(values, dtype=float) * scale).astype(np.int64)
    if modulus is not None:
        q = np.mod(q, modulus)
    return FiniteSymbolSequence(tuple(q), modulus)
