"""Spectral sequences, smooth counting models and unfolding.

Indexing convention: eigenvalue ``n`` is 1-based everywhere in formulas.
Arrays are stored 0-based, so ``values[i]`` is eigenvalue ``n = i + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    Degenerate,
    NoConvergence,
    NonFinite,
    NonMonotone,
    OutOfDomain,
    OutOfRange,
    TooShort,
)

TWO_PI = 2.0 * math.pi
MAX_BISECTION_STEPS = 200
INVERSION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpectralSequence:
    """Strictly increasing eigenvalues (momenta or scaled energies).

    ``multiplicity`` is only set for spectra with degenerate levels; in that
    case ``values`` holds each distinct level once.
    """

    values: np.ndarray
    label: str = ""
    multiplicity: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.values)

    @property
    def is_simple(self):
        return self.multiplicity is None or bool(np.all(self.multiplicity == 1))


def validate_sequence(raw, label="", *, sort=False, multiplicity=None) -> SpectralSequence:
    values = np.array(raw, dtype=float).ravel()
    if values.size < 2:
        raise TooShort(values.size)
    bad = np.nonzero(~np.isfinite(values))[0]
    if bad.size:
        raise NonFinite(int(bad[0]))
    if sort:
        order = np.argsort(values, kind="stable")
        values = values[order]
        if multiplicity is not None:
            multiplicity = np.asarray(multiplicity)[order]
    steps = np.diff(values)
    bad = np.nonzero(steps <= 0)[0]
    if bad.size:
        raise NonMonotone(int(bad[0]) + 1)
    if multiplicity is not None:
        multiplicity = np.asarray(multiplicity, dtype=int)
        if multiplicity.shape != values.shape or np.any(multiplicity < 1):
            raise ValueError("multiplicity must be a positive integer per value")
    values.setflags(write=False)
    return SpectralSequence(values, label, multiplicity)


def flatten_multiplicity(seq: SpectralSequence, offset=1e-9) -> SpectralSequence:
    """Expand degenerate levels into ``m`` copies spaced by ``offset``."""
    if seq.is_simple:
        return seq
    out = []
    for v, m in zip(seq.values, seq.multiplicity):
        out.extend(v + offset * i for i in range(int(m)))
    return validate_sequence(out, seq.label + " (flattened)")


# --------------------------------------------------------------------------
# counting models


class CountingModel:
    """Smooth, strictly increasing approximation to a spectral staircase."""

    kind = "abstract"
    domain = (-math.inf, math.inf)

    def _evaluate(self, x):
        raise NotImplementedError

    def _primitive(self, x):
        """Antiderivative of the model (used for closed-form integrals)."""
        raise NotImplementedError

    def __call__(self, x):
        return evaluate_average(self, x)

    def integral(self, a, b):
        """Integral of the average over [a, b]."""
        self._check_domain(np.array([a, b], dtype=float))
        return self._primitive(b) - self._primitive(a)

    def to_dict(self):
        raise NotImplementedError

    def _check_domain(self, x):
        lo, hi = self.domain
        x = np.asarray(x, dtype=float)
        bad = np.flatnonzero(~((x >= lo) & (x <= hi)))
        if bad.size:
            i = int(bad[0])
            raise OutOfDomain(float(x.flat[i]), self.domain, index=i if x.ndim else None)


class RiemannVonMangoldt(CountingModel):
    """Average count of zeta zeros below height E, truncated after the 7/8 term.

    The closed form decreases below E = 2*pi, so the domain starts there.
    """

    kind = "riemann"
    domain = (TWO_PI, math.inf)

    def _evaluate(self, x):
        u = x / TWO_PI
        return u * (np.log(u) - 1.0) + 7.0 / 8.0

    def _primitive(self, x):
        u = x / TWO_PI
        return TWO_PI * (0.5 * u * u * np.log(u) - 0.75 * u * u) + 7.0 / 8.0 * x

    def density(self, x):
        return np.log(np.asarray(x, dtype=float) / TWO_PI) / TWO_PI

    def to_dict(self):
        return {"kind": self.kind}

    def __repr__(self):
        return "RiemannVonMangoldt()"


class LocalSpacing(RiemannVonMangoldt):
    """Riemann local-density unfolding.

    Evaluates like :class:`RiemannVonMangoldt`, but :func:`unfold` builds the
    sequence from locally rescaled gaps, ``s_n = (g_{n+1} - g_n) ln(g_n / 2pi) / 2pi``,
    anchored at the first element.
    """

    kind = "local_spacing"

    def __repr__(self):
        return "LocalSpacing()"


class WeylLinear(CountingModel):
    """Weyl law of a metric graph: ``L0 * k / pi + offset``."""

    kind = "weyl"

    def __init__(self, L0, offset=0.0, domain=(-math.inf, math.inf)):
        if not (L0 > 0 and math.isfinite(L0)):
            raise ValueError("L0 must be positive and finite")
        self.L0 = float(L0)
        self.offset = float(offset)
        self.domain = tuple(domain)

    @property
    def slope(self):
        return self.L0 / math.pi

    def _evaluate(self, x):
        return self.slope * x + self.offset

    def _primitive(self, x):
        return 0.5 * self.slope * x * x + self.offset * x

    def to_dict(self):
        return {"kind": self.kind, "L0": self.L0, "offset": self.offset}

    def __repr__(self):
        return f"WeylLinear(L0={self.L0!r}, offset={self.offset!r})"


class PolynomialFit(CountingModel):
    """Polynomial average, coefficients lowest order first."""

    kind = "polynomial"

    def __init__(self, coefficients, domain):
        self.poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
        lo, hi = map(float, domain)
        if not (lo < hi and math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("polynomial model needs a finite domain")
        self.domain = (lo, hi)
        grid = np.linspace(lo, hi, 1001)
        if np.any(np.diff(self.poly(grid)) <= 0):
            raise Degenerate("polynomial average is not strictly increasing on its domain")

    @classmethod
    def fit(cls, seq: SpectralSequence, degree=3):
        n = np.arange(1, len(seq) + 1) - 0.5
        lo, hi = float(seq.values[0]), float(seq.values[-1])
        poly = np.polynomial.Polynomial.fit(seq.values, n, degree).convert()
        return cls(poly.coef, (lo, hi))

    def _evaluate(self, x):
        return self.poly(x)

    def _primitive(self, x):
        return self.poly.integ()(x)

    def to_dict(self):
        return {"kind": self.kind, "coefficients": self.poly.coef.tolist(), "domain": list(self.domain)}

    def __repr__(self):
        return f"PolynomialFit({self.poly.coef.tolist()!r}, {self.domain!r})"


def model_from_dict(d) -> CountingModel:
    kind = d["kind"]
    if kind == "riemann":
        return RiemannVonMangoldt()
    if kind == "local_spacing":
        return LocalSpacing()
    if kind == "weyl":
        return WeylLinear(d["L0"], d.get("offset", 0.0))
    if kind == "polynomial":
        return PolynomialFit(d["coefficients"], d["domain"])
    raise ValueError(f"unknown counting model kind {kind!r}")


def evaluate_average(model: CountingModel, x):
    arr = np.asarray(x, dtype=float)
    model._check_domain(arr)
    out = model._evaluate(arr)
    return float(out) if np.ndim(out) == 0 else out


def invert_average(model: CountingModel, y, tol=INVERSION_TOL, max_steps=MAX_BISECTION_STEPS):
    """Solve ``model(x) = y`` by bracketing and bisection.

    Works elementwise on arrays.  Stops once ``|model(x) - y| <= tol`` or the
    bracket has shrunk to neighbouring floats.
    """
    target = np.atleast_1d(np.asarray(y, dtype=float))
    lo_dom, hi_dom = model.domain
    lo = np.full_like(target, lo_dom if math.isfinite(lo_dom) else -1.0)
    hi = np.full_like(target, hi_dom if math.isfinite(hi_dom) else max(lo_dom + 1.0, 1.0))

    f_lo = model._evaluate(lo)
    if math.isfinite(lo_dom):
        below = np.nonzero(target < f_lo)[0]
        if below.size:
            raise OutOfRange(float(target[below[0]]), (float(f_lo[0]), math.inf))
    else:
        for _ in range(2048):
            need = target < f_lo
            if not need.any():
                break
            lo = np.where(need, 2.0 * lo - 1.0, lo)
            f_lo = model._evaluate(lo)
        else:
            raise OutOfRange(float(target[0]), model.domain)

    f_hi = model._evaluate(hi)
    for _ in range(2048):
        need = f_hi < target
        if not need.any():
            break
        if math.isfinite(hi_dom):
            raise OutOfRange(float(target[np.nonzero(need)[0][0]]), (None, float(f_hi[0])))
        hi = np.where(need, 2.0 * hi + 1.0, hi)
        f_hi = model._evaluate(hi)
    else:
        raise OutOfRange(float(target[0]), model.domain)

    best = np.where(np.abs(f_lo - target) < np.abs(f_hi - target), lo, hi)
    err = np.minimum(np.abs(f_lo - target), np.abs(f_hi - target))
    for _ in range(max_steps):
        active = (err > tol) & (np.nextafter(lo, hi) < hi)
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        f_mid = model._evaluate(mid)
        e_mid = np.abs(f_mid - target)
        better = active & (e_mid < err)
        best = np.where(better, mid, best)
        err = np.where(better, e_mid, err)
        go_right = f_mid < target
        lo = np.where(active & go_right, mid, lo)
        hi = np.where(active & ~go_right, mid, hi)
    else:
        if np.any((err > tol) & (np.nextafter(lo, hi) < hi)):
            raise NoConvergence(max_steps)
    return float(best[0]) if np.ndim(y) == 0 else best


# --------------------------------------------------------------------------
# unfolding


@dataclass(frozen=True, eq=False)
class UnfoldedSequence:
    """Unit-density sequence ``k_n = n + delta_n`` (n = 1, 2, ...)."""

    values: np.ndarray
    deltas: np.ndarray
    source: Optional[SpectralSequence] = None
    model: Optional[CountingModel] = field(default=None, repr=False)

    def __len__(self):
        return len(self.values)

    @property
    def mean_delta(self):
        return float(np.mean(self.deltas))

    @classmethod
    def from_values(cls, values, source=None, model=None):
        values = np.asarray(values, dtype=float)
        return cls(values, values - np.arange(1, len(values) + 1), source, model)


def unfold(seq: SpectralSequence, model: CountingModel) -> UnfoldedSequence:
    """Map eigenvalues to unit mean density.

    ``N(E_n)`` sits near ``n - 1/2`` (the staircase midpoint), so half a unit is
    added to make the fluctuations average to zero.
    """
    x = np.asarray(seq.values, dtype=float)
    try:
        model._check_domain(x)
    except OutOfDomain as exc:
        raise OutOfDomain(exc.value, exc.domain, exc.index) from None
    if isinstance(model, LocalSpacing):
        gaps = np.diff(x) * model.density(x[:-1])
        values = np.empty_like(x)
        values[0] = model._evaluate(x[0]) + 0.5
        values[1:] = values[0] + np.cumsum(gaps)
    else:
        values = model._evaluate(x) + 0.5
    if np.any(np.diff(values) <= 0):
        i = int(np.nonzero(np.diff(values) <= 0)[0][0]) + 1
        raise NonMonotone(i, "unfolded sequence lost monotonicity")
    return UnfoldedSequence.from_values(values, seq, model)


def refold(u: UnfoldedSequence, model: CountingModel):
    """Inverse of :func:`unfold` for continuous models."""
    return invert_average(model, np.asarray(u.values) - 0.5)


def fit_linear_average(seq: SpectralSequence) -> WeylLinear:
    """Least-squares line through the staircase midpoints ``(E_n, n - 1/2)``."""
    x = np.asarray(seq.values, dtype=float)
    if x.size < 10:
        raise TooShort(x.size, 10)
    if np.ptp(x) == 0:
        raise Degenerate("zero-variance input")
    n = np.arange(1, x.size + 1) - 0.5
    xm = x.mean()
    slope = np.dot(x - xm, n - n.mean()) / np.dot(x - xm, x - xm)
    offset = n.mean() - slope * xm
    return WeylLinear(math.pi * slope, offset)
