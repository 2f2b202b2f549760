"""Hierarchy of separating sequences and the irregularity degree.

Level ``j + 1`` point ``n`` is placed between level-``j`` points ``n`` and
``n + 1``::

    k[j+1][n] = alpha[n] * k[j][n+1] + (1 - alpha[n]) * k[j][n]

and every level's fluctuations are measured on the same 1-based grid,
``delta[j][n] = k[j][n] - n``.  A level is regular when a periodic sequence
``n + gamma`` interlaces it, which happens exactly when the fluctuation
spread ``max(delta) - min(delta)`` is at most one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import UnfoldedSequence
from .errors import TooShort, ZeroSpacing

ALPHA_EPS = 1e-12
SPREAD_SLACK = 1e-12
DEFAULT_MAX_DEPTH = 32


@dataclass(frozen=True, eq=False)
class HierarchyLevel:
    j: int
    values: np.ndarray
    alphas: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self):
        return len(self.values)

    @property
    def deltas(self):
        return self.values - np.arange(1, len(self.values) + 1)

    @property
    def spacings(self):
        return np.diff(self.values)


# --------------------------------------------------------------------------
# alpha strategies


@dataclass(frozen=True)
class Midpoint:
    kind = "midpoint"

    def alphas(self, level):
        return np.full(len(level) - 1, 0.5)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Optimal:
    """Variational alphas; ``anchor`` is a number, ``"first-element"`` or ``"mean"``."""

    anchor: Union[float, str] = "first-element"
    kind = "optimal"

    def resolve_anchor(self, level):
        if self.anchor == "first-element":
            return float(level.deltas[0])
        if self.anchor == "mean":
            return float(np.mean(level.deltas))
        return float(self.anchor)

    def alphas(self, level):
        return optimal_alphas(level, self.resolve_anchor(level))

    def to_dict(self):
        return {"kind": self.kind, "anchor": self.anchor}


@dataclass(frozen=True)
class FixedList:
    """The same alpha list reused at every level (truncated to fit)."""

    values: tuple = field(default_factory=tuple)
    kind = "fixed"

    def alphas(self, level):
        need = len(level) - 1
        a = np.asarray(self.values, dtype=float)
        if a.size < need:
            raise ValueError(f"fixed alpha list has {a.size} entries, level needs {need}")
        return np.clip(a[:need], 0.0, 1.0)

    def to_dict(self):
        return {"kind": self.kind, "values": list(self.values)}


AlphaStrategy = Union[Midpoint, Optimal, FixedList]


def strategy_from_name(name, anchor="first-element") -> AlphaStrategy:
    if name == "midpoint":
        return Midpoint()
    if name == "optimal":
        return Optimal(anchor)
    raise ValueError(f"unknown strategy {name!r}")


# --------------------------------------------------------------------------
# operations


def optimal_alphas(level: HierarchyLevel, anchor: float) -> np.ndarray:
    """``clamp((anchor - delta_n) / s_n, 0, 1)`` for every gap of ``level``."""
    s = level.spacings
    zero = np.nonzero(s <= 0)[0]
    if zero.size:
        raise ZeroSpacing(int(zero[0]))
    d = level.deltas[:-1]
    return np.clip((anchor - d) / s, 0.0, 1.0)


def separating_sequence(level: HierarchyLevel, strategy: AlphaStrategy) -> HierarchyLevel:
    """Next level of the hierarchy.

    Alphas at 0 or 1 would reproduce a parent point and could duplicate a
    neighbour, so every child point is kept at least ``1e-12`` of its gap (or
    two ulps, whichever is larger) inside the parent interval.
    """
    if len(level) < 2:
        raise TooShort(len(level))
    k = level.values
    s = np.diff(k)
    if np.any(s <= 0):
        raise ZeroSpacing(int(np.nonzero(s <= 0)[0][0]))
    alphas = np.clip(np.asarray(strategy.alphas(level), dtype=float), 0.0, 1.0)
    child = k[:-1] + alphas * s
    margin = np.maximum(ALPHA_EPS * s, 2.0 * np.spacing(np.maximum(np.abs(k[:-1]), np.abs(k[1:]))))
    margin = np.minimum(margin, 0.25 * s)
    child = np.minimum(np.maximum(child, k[:-1] + margin), k[1:] - margin)
    return HierarchyLevel(level.j + 1, child, alphas)


def roughness_functional(level: HierarchyLevel, T: float = 1.0) -> float:
    """Sum of squared deviations of the level's spacings from the period ``T``."""
    if len(level) < 2:
        raise TooShort(len(level))
    if not T > 0:
        raise ValueError("period T must be positive")
    dev = np.diff(level.values) - T
    return float(np.dot(dev, dev))


@dataclass(frozen=True)
class Regularity:
    passed: bool
    spread: float
    gamma: Optional[float] = None

    def __bool__(self):
        return self.passed


def regularity_test(level: HierarchyLevel, criterion: str = "interval") -> Regularity:
    """Check whether ``n - 1 + gamma <= k_n <= n + gamma`` for some constant gamma.

    ``criterion="spacing"`` is the looser alternative that only requires every
    nearest-neighbour spacing to deviate from 1 by at most 1.
    """
    if len(level) == 0:
        raise TooShort(0, 1)
    d = level.deltas
    hi, lo = float(d.max()), float(d.min())
    spread = hi - lo
    if criterion == "interval":
        if spread <= 1.0 + SPREAD_SLACK:
            return Regularity(True, spread, 0.5 * (hi + lo + 1.0))
        return Regularity(False, spread)
    if criterion == "spacing":
        dev = float(np.max(np.abs(level.spacings - 1.0))) if len(level) > 1 else 0.0
        if dev <= 1.0 + SPREAD_SLACK:
            return Regularity(True, dev, 0.5 * (hi + lo + 1.0) if spread <= 1 + SPREAD_SLACK else None)
        return Regularity(False, dev)
    raise ValueError(f"unknown regularity criterion {criterion!r}")


@dataclass(frozen=True, eq=False)
class BootstrapHierarchy:
    levels: list
    degree: Optional[int]
    gamma_reg: Optional[float]
    strategy: AlphaStrategy
    spreads: list
    roughness: list
    criterion: str = "interval"

    @property
    def terminated(self):
        return self.degree is not None

    def level_summary(self):
        rows = []
        for lvl, spread, F in zip(self.levels, self.spreads, self.roughness):
            row = {
                "j": lvl.j,
                "count": len(lvl),
                "spread": spread,
                "F": F,
                "std_delta": float(np.std(lvl.deltas)),
            }
            if self.degree is not None and lvl.j == self.degree:
                row["gamma"] = self.gamma_reg
            rows.append(row)
        return rows

    def to_dict(self):
        return {
            "degree": self.degree,
            "terminated": self.terminated,
            "strategy": self.strategy.to_dict(),
            "criterion": self.criterion,
            "levels": self.level_summary(),
        }


def build_hierarchy(
    u: Union[UnfoldedSequence, Sequence[float]],
    strategy: AlphaStrategy = Midpoint(),
    max_depth: int = DEFAULT_MAX_DEPTH,
    criterion: str = "interval",
    T: float = 1.0,
) -> BootstrapHierarchy:
    """Add separating levels until one is regular or ``max_depth`` is reached.

    The degree is the index of the first regular level, i.e. the number of
    auxiliary sequences that were needed.  ``degree is None`` means the
    construction did not terminate within ``max_depth`` levels.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    values = u.values if isinstance(u, UnfoldedSequence) else np.asarray(u, dtype=float)
    if len(values) < 2:
        raise TooShort(len(values))
    level = HierarchyLevel(0, values)
    levels, spreads, roughness = [level], [], [roughness_functional(level, T)]
    while True:
        reg = regularity_test(level, criterion)
        spreads.append(reg.spread)
        if reg.passed:
            return BootstrapHierarchy(levels, level.j, reg.gamma, strategy, spreads, roughness, criterion)
        if level.j >= max_depth or len(level) < 2:
            return BootstrapHierarchy(levels, None, None, strategy, spreads, roughness, criterion)
        level = separating_sequence(level, strategy)
        levels.append(level)
        roughness.append(roughness_functional(level, T) if len(level) >= 2 else math.nan)


def irregularity_degree(h: BootstrapHierarchy) -> Optional[int]:
    return h.degree
