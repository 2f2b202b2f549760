"""Metric quantum graphs with Kirchhoff (Neumann) vertices.

Each undirected bond ``b`` gives two directed bonds: ``2b`` runs
``from -> to`` and ``2b + 1`` runs back.  ``U(k) = S D(k)`` acts on amplitudes
indexed by directed bond, with ``S[c, b]`` the vertex scattering amplitude for
leaving bond ``b`` into bond ``c`` and ``D(k) = diag(exp(i k L_b))``.

Eigenvalues are the ``k > 0`` where ``U(k)`` has eigenvalue 1.  All
eigenphases of ``U(k)`` increase with ``k`` (their velocities are expectation
values of the positive length matrix), and the product of eigenvalues is
``det S * exp(2 i L0 k)``, so the number of eigenphases that wrapped through
zero on ``(0, k]`` follows from the sum of the wrapped phases alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import SpectralSequence, WeylLinear, validate_sequence
from .errors import CutoffTooLarge, GraphSpecError, TrackingLoss
from .trace import StaircaseExpansion

TWO_PI = 2.0 * math.pi
ROOT_TOL = 1e-10
DEFAULT_ORBIT_CAP = 10**7
DEFAULT_LATTICE_CAP = 5 * 10**7


@dataclass(frozen=True)
class Bond:
    tail: int
    head: int
    length: float


class QuantumGraph:
    def __init__(self, vertex_count: int, bonds: Sequence, boundary: str = "kirchhoff"):
        if boundary.lower() not in ("kirchhoff", "neumann"):
            raise GraphSpecError(f"unsupported vertex condition {boundary!r}")
        bonds = [b if isinstance(b, Bond) else Bond(int(b[0]), int(b[1]), float(b[2])) for b in bonds]
        if vertex_count < 1 or not bonds:
            raise GraphSpecError("graph needs at least one vertex and one bond")
        for b in bonds:
            if not (0 <= b.tail < vertex_count and 0 <= b.head < vertex_count):
                raise GraphSpecError(f"bond {b} references a missing vertex")
            if not (b.length > 0 and math.isfinite(b.length)):
                raise GraphSpecError(f"bond {b} has a non-positive length")
        self.vertex_count = int(vertex_count)
        self.bonds: Tuple[Bond, ...] = tuple(bonds)
        self.boundary = "kirchhoff"
        if not self._connected():
            raise GraphSpecError("graph is not connected")

        nb = 2 * len(self.bonds)
        self.tails = np.empty(nb, dtype=int)
        self.heads = np.empty(nb, dtype=int)
        self.lengths = np.empty(nb)
        for i, b in enumerate(self.bonds):
            self.tails[2 * i], self.heads[2 * i] = b.tail, b.head
            self.tails[2 * i + 1], self.heads[2 * i + 1] = b.head, b.tail
            self.lengths[2 * i] = self.lengths[2 * i + 1] = b.length
        self.valence = np.bincount(self.tails, minlength=self.vertex_count)
        if np.any(self.valence == 0):
            raise GraphSpecError("isolated vertex")
        self.scattering = self._scattering_matrix()
        self.lengths.setflags(write=False)
        self.scattering.setflags(write=False)

    @property
    def L0(self) -> float:
        return math.fsum(b.length for b in self.bonds)

    @property
    def n_directed(self) -> int:
        return 2 * len(self.bonds)

    def _connected(self):
        seen = {0}
        stack = [0]
        adj = {v: set() for v in range(self.vertex_count)}
        for b in self.bonds:
            adj[b.tail].add(b.head)
            adj[b.head].add(b.tail)
        while stack:
            v = stack.pop()
            for w in adj[v] - seen:
                seen.add(w)
                stack.append(w)
        return len(seen) == self.vertex_count

    def _scattering_matrix(self):
        nb = self.n_directed
        S = np.zeros((nb, nb))
        for b in range(nb):
            v = self.heads[b]
            sigma = 2.0 / self.valence[v]
            for c in np.nonzero(self.tails == v)[0]:
                S[c, b] = sigma - (1.0 if c == (b ^ 1) else 0.0)
        return S

    def successors(self):
        """Nonzero-amplitude transitions as ``{b: [c, ...]}`` (sorted)."""
        return {b: sorted(int(c) for c in np.nonzero(self.scattering[:, b])[0]) for b in range(self.n_directed)}

    def to_dict(self):
        return {
            "vertices": self.vertex_count,
            "bonds": [{"from": b.tail, "to": b.head, "length": b.length} for b in self.bonds],
            "boundary": self.boundary,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            bonds = [(int(b["from"]), int(b["to"]), float(b["length"])) for b in d["bonds"]]
            return cls(int(d["vertices"]), bonds, d.get("boundary", "kirchhoff"))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphSpecError(f"malformed graph spec: {exc}") from exc

    def __repr__(self):
        return f"QuantumGraph(V={self.vertex_count}, B={len(self.bonds)}, L0={self.L0:.6g})"


def complete_graph(lengths: Sequence[float]) -> QuantumGraph:
    """Fully connected graph on V vertices; ``lengths`` in (0,1), (0,2), ... order."""
    n_bonds = len(lengths)
    V = int(round((1 + math.sqrt(1 + 8 * n_bonds)) / 2))
    if V * (V - 1) // 2 != n_bonds:
        raise GraphSpecError(f"{n_bonds} lengths do not fit a complete graph")
    pairs = [(i, j) for i in range(V) for j in range(i + 1, V)]
    return QuantumGraph(V, [(i, j, L) for (i, j), L in zip(pairs, lengths)])


# --------------------------------------------------------------------------
# operators


def vertex_scattering(valence: int) -> np.ndarray:
    if valence < 1:
        raise ValueError("valence must be >= 1")
    return np.full((valence, valence), 2.0 / valence) - np.eye(valence)


def bond_evolution(g: QuantumGraph, k) -> np.ndarray:
    """``U(k)``; a stack of matrices when ``k`` is an array."""
    k = np.asarray(k, dtype=float)
    phases = np.exp(1j * np.multiply.outer(k, g.lengths))
    return g.scattering * phases[..., None, :]


def _wrapped_phase_sum(g, k):
    ev = np.linalg.eigvals(bond_evolution(g, k))
    ph = np.mod(np.angle(ev), TWO_PI)
    return ph.sum(axis=-1)


def _zero_offset(g):
    ev = np.linalg.eigvals(g.scattering.astype(complex))
    ph = np.mod(np.angle(ev), TWO_PI)
    ph[np.abs(ph - TWO_PI) < 1e-9] = 0.0
    ph[np.abs(ph) < 1e-9] = 0.0
    return float(ph.sum())


def _raw_count(g, k, offset):
    return (2.0 * g.L0 * np.asarray(k) - _wrapped_phase_sum(g, k) + offset) / TWO_PI


def counting_function(g: QuantumGraph, k):
    """Number of eigenvalues in ``(0, k]``."""
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0):
        raise ValueError("counting function needs k >= 0")
    raw = _raw_count(g, k_arr, _zero_offset(g))
    out = np.rint(raw).astype(int)
    out = np.where(k_arr == 0, 0, out)
    return int(out) if out.ndim == 0 else out


def weyl_offset(g: QuantumGraph) -> float:
    """Constant term of the mean staircase: minus half the multiplicity of eigenvalue 1 of ``S``."""
    ev = np.linalg.eigvals(g.scattering)
    return -0.5 * int(np.sum(np.abs(ev - 1.0) < 1e-9))


def weyl_average(g: QuantumGraph) -> WeylLinear:
    return WeylLinear(g.L0, weyl_offset(g), domain=(0.0, math.inf))


def compute_spectrum(g: QuantumGraph, k_max: float, tol: float = ROOT_TOL) -> SpectralSequence:
    """Eigenvalues in ``(0, k_max]`` with multiplicities.

    Scans a grid of step ``pi / (8 L_max)``; inside every step where the count
    increases, the jump points are isolated by bisection on the count.
    """
    if not k_max > 0:
        raise ValueError("k_max must be positive")
    offset = _zero_offset(g)
    h = math.pi / (8.0 * float(g.lengths.max()))
    n_steps = max(1, int(math.ceil(k_max / h)))
    grid = np.linspace(0.0, k_max, n_steps + 1)
    counts = np.rint(_raw_count(g, grid[1:], offset)).astype(int)
    counts = np.concatenate([[0], counts])
    if np.any(np.diff(counts) < 0):
        raise TrackingLoss("eigenphase count decreased along the grid")

    # batched bisection: every bracket holds at least one jump of the count
    idx = np.nonzero(np.diff(counts))[0]
    lo, hi = grid[idx], grid[idx + 1]
    n_lo, n_hi = counts[idx], counts[idx + 1]
    roots, mults = [], []
    for _ in range(200):
        done = hi - lo <= tol
        roots.extend(0.5 * (lo[done] + hi[done]))
        mults.extend(n_hi[done] - n_lo[done])
        lo, hi, n_lo, n_hi = lo[~done], hi[~done], n_lo[~done], n_hi[~done]
        if lo.size == 0:
            break
        mid = 0.5 * (lo + hi)
        n_mid = np.rint(_raw_count(g, mid, offset)).astype(int)
        if np.any((n_mid < n_lo) | (n_mid > n_hi)):
            raise TrackingLoss("non-monotone eigenphase count during bisection")
        left = n_mid > n_lo
        right = n_hi > n_mid
        lo = np.concatenate([lo[left], mid[right]])
        hi = np.concatenate([mid[left], hi[right]])
        n_lo, n_hi = np.concatenate([n_lo[left], n_mid[right]]), np.concatenate([n_mid[left], n_hi[right]])
    else:
        raise TrackingLoss("bisection did not isolate all roots")
    order = np.argsort(roots)
    roots = np.asarray(roots)[order]
    mults = np.asarray(mults)[order]
    mult = mults
    return validate_sequence(
        roots,
        f"quantum graph spectrum (V={g.vertex_count}, B={len(g.bonds)})",
        multiplicity=None if np.all(mult == 1) else mult,
    )


def first_eigenvalues(g: QuantumGraph, count: int) -> SpectralSequence:
    """At least ``count`` eigenvalues (counted with multiplicity), trimmed to ``count`` levels."""
    k_max = math.pi * (count + 2 + len(g.bonds)) / g.L0
    while True:
        seq = compute_spectrum(g, k_max)
        total = len(seq) if seq.multiplicity is None else int(seq.multiplicity.sum())
        if total >= count:
            break
        k_max *= 1.25
    vals = seq.values[:count]
    mult = None if seq.multiplicity is None else seq.multiplicity[:count]
    return SpectralSequence(vals, seq.label, mult)


def weyl_slope_check(seq: SpectralSequence, L0: float) -> float:
    """Relative deviation of the least-squares slope of ``n`` versus ``k_n`` from ``L0 / pi``."""
    k = np.asarray(seq.values)
    n = np.arange(1, k.size + 1)
    slope = np.polyfit(k, n, 1)[0]
    return abs(slope / (L0 / math.pi) - 1.0)


# --------------------------------------------------------------------------
# periodic orbits


@dataclass(frozen=True)
class PeriodicOrbit:
    """Primitive directed-bond code traversed ``repetition`` times."""

    code: Tuple[int, ...]
    length: float
    amplitude: complex
    repetition: int = 1

    @property
    def directed_bond_cycle(self):
        return list(self.code) * self.repetition

    @property
    def primitive_length(self):
        return self.length / self.repetition


def _orbit_count_lower_bound(g, cutoff):
    """Lower bound on the number of orbits with length ``<= cutoff``.

    On a length lattice the walk recursion with unit weights gives
    ``sum 1 / r`` over all orbit classes, which is tight.  Otherwise primitive
    closed walks with at most ``cutoff / L_max`` bonds are counted.
    """
    try:
        unit, ell = lattice_unit(g)
    except GraphSpecError:
        unit = None
    if unit is not None and cutoff / unit <= DEFAULT_LATTICE_CAP:
        T = (g.scattering != 0).astype(float)
        return float(_lattice_closed_sums(g, T, ell, int(math.floor(cutoff / unit + 1e-9))).sum())
    A = (g.scattering != 0).astype(float)
    n_max = int(cutoff // float(g.lengths.max()))
    total = 0.0
    tr = {}
    P = np.eye(g.n_directed)
    for n in range(1, n_max + 1):
        P = P @ A
        tr[n] = float(np.trace(P))
        prim = tr[n] - sum(tr[d] for d in range(1, n) if n % d == 0)
        total += max(prim, 0.0) / n
        if total > 1e18:
            break
    return total


def enumerate_orbits(g: QuantumGraph, length_cutoff: float, max_orbits: int = DEFAULT_ORBIT_CAP) -> List[PeriodicOrbit]:
    """All periodic orbits with length ``<= length_cutoff``.

    Primitive orbits are enumerated once each as Lyndon words (the
    lexicographically least rotation of their directed-bond code) with a
    depth-first prenecklace search; repetitions are appended afterwards.
    Transitions with zero amplitude (backscattering at a valence-2 vertex) are
    never taken.
    """
    if not length_cutoff > 0:
        raise ValueError("length_cutoff must be positive")
    estimate = _orbit_count_lower_bound(g, length_cutoff)
    if estimate > max_orbits:
        raise CutoffTooLarge(estimate, max_orbits)

    succ = g.successors()
    S = g.scattering
    lens = g.lengths
    primitive = []

    for s in range(g.n_directed):
        word = [s]
        # stack entries: (next candidates iterator state) handled recursively below
        def extend(total, p, amp):
            last = word[-1]
            t = len(word)
            if S[s, last] != 0 and p == t:
                primitive.append((tuple(word), total, amp * S[s, last]))
                if len(primitive) > max_orbits:
                    raise CutoffTooLarge(len(primitive), max_orbits)
            for c in succ[last]:
                if c < s:
                    continue
                new_total = total + lens[c]
                if new_total > length_cutoff * (1 + 1e-12):
                    continue
                ref = word[t - p]
                if c < ref:
                    continue
                word.append(c)
                extend(new_total, p if c == ref else t + 1, amp * S[c, last])
                word.pop()

        extend(float(lens[s]), 1, 1.0)

    orbits = []
    for code, length, amp in primitive:
        r = 1
        while r * length <= length_cutoff * (1 + 1e-12):
            orbits.append(PeriodicOrbit(code, r * length, complex(amp) ** r, r))
            r += 1
            if len(orbits) > max_orbits:
                raise CutoffTooLarge(len(orbits), max_orbits)
    orbits.sort(key=lambda o: (o.length, o.code, o.repetition))
    return orbits


def graph_expansion(g: QuantumGraph, orbits: Sequence[PeriodicOrbit], normalization: float = 1.0 / math.pi,
                    length_cutoff: Optional[float] = None) -> StaircaseExpansion:
    """Staircase expansion with one harmonic ``normalization * A_p / m`` per orbit."""
    amps = [normalization * o.amplitude / o.repetition for o in orbits]
    lens = [o.length for o in orbits]
    trunc = {"method": "orbits", "orbit_count": len(orbits), "normalization": normalization}
    if length_cutoff is not None:
        trunc["length_cutoff"] = float(length_cutoff)
    return StaircaseExpansion(weyl_average(g), amps, lens, trunc)


# --------------------------------------------------------------------------
# length-lattice resummation


def lattice_unit(g: QuantumGraph, max_decimals: int = 6) -> Tuple[float, np.ndarray]:
    """Common length unit of the bonds and the integer bond lengths in that unit.

    Uses the shortest decimal representation of each length; fails if any
    length needs more than ``max_decimals`` decimals.
    """
    exps = []
    for b in g.bonds:
        d = Decimal(repr(float(b.length))).normalize()
        exps.append(-d.as_tuple().exponent)
    digits = max(0, max(exps))
    if digits > max_decimals:
        raise GraphSpecError(f"bond lengths need {digits} decimals; lattice resummation limited to {max_decimals}")
    scale = 10**digits
    ints = np.array([int(Decimal(repr(float(L))) * scale) for L in g.lengths], dtype=np.int64)
    gcd = int(np.gcd.reduce(ints))
    return gcd / scale, ints // gcd


def _lattice_closed_sums(g: QuantumGraph, T: np.ndarray, ell: np.ndarray, M: int) -> np.ndarray:
    """``c[m]``: closed walks of lattice length ``m`` weighted by ``T`` and ``length(start) / m``.

    ``F_m[b, s]`` is the summed weight of walks that start on bond ``s``, end
    on bond ``b`` and have length ``m``; only the last ``l_max + l_min`` slices
    are kept.
    """
    nb = g.n_directed
    l_min, l_max = int(ell.min()), int(ell.max())
    ring = l_max + l_min
    dtype = np.result_type(T.dtype, float)
    F = np.zeros((ring, nb, nb), dtype=dtype)
    coeff = np.zeros(M + 1, dtype=dtype)
    weights = ell.astype(float)
    eye = np.eye(nb)

    m0 = 1
    while m0 <= M:
        m1 = min(m0 + l_min, M + 1)
        ms = np.arange(m0, m1)
        block = np.zeros((ms.size, nb, nb), dtype=dtype)
        for b in range(nb):
            src = np.mod(ms - ell[b], ring)
            valid = (ms - ell[b]) >= 1
            prev = F[src]
            prev[~valid] = 0.0
            block[:, b, :] = np.einsum("c,mcs->ms", T[b], prev)
            block[ms == ell[b], b, :] += eye[b]
        F[np.mod(ms, ring)] = block
        closed = np.einsum("sb,mbs->ms", T, block)
        coeff[m0:m1] = closed @ weights / ms
        m0 = m1
    return coeff


def graph_expansion_lattice(g: QuantumGraph, length_cutoff: float, normalization: float = 1.0 / math.pi,
                            max_steps: int = DEFAULT_LATTICE_CAP) -> StaircaseExpansion:
    """Same harmonics as :func:`graph_expansion` over *all* orbits up to ``length_cutoff``.

    Orbits are never listed.  With bond lengths on a common lattice, a
    recursion over the total length ``m`` (in lattice units) accumulates
    walk amplitudes.  Marked closed walks weighted by ``length(start bond) / m``
    sum to ``A_p**r / r`` over each orbit class, so the result equals the
    orbit-by-orbit expansion with equal-length harmonics merged.
    """
    unit, ell = lattice_unit(g)
    M = int(math.floor(length_cutoff / unit + 1e-9))
    if M > max_steps:
        raise CutoffTooLarge(M, max_steps)
    coeff = _lattice_closed_sums(g, g.scattering.astype(complex), ell, M)
    nz = np.nonzero(np.abs(coeff) > 0)[0]
    trunc = {
        "method": "lattice",
        "length_cutoff": float(length_cutoff),
        "unit": unit,
        "normalization": normalization,
    }
    return StaircaseExpansion(weyl_average(g), normalization * coeff[nz], nz * unit, trunc)
