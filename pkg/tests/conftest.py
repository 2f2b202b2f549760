from __future__ import annotations

import gzip
from pathlib import Path

import numpy as np
import pytest

from spectral_hierarchy.graph import complete_graph

ROOT = Path(__file__).resolve().parents[1]
ZEROS = ROOT / "data" / "zeros_100k.txt.gz"
K4_LENGTHS = [1.0, 1.137, 0.871, 1.291, 0.944, 1.067]
K4_BONDS = [(0, 1, 1.0), (0, 2, 1.137), (0, 3, 0.871), (1, 2, 1.291), (1, 3, 0.944), (2, 3, 1.067)]

_cache = {}


def zeta_zeros(count=None):
    if "zeros" not in _cache:
        with gzip.open(ZEROS, "rt") as fh:
            _cache["zeros"] = np.array([float(l) for l in fh if l.strip() and not l.startswith("#")])
    z = _cache["zeros"]
    return z if count is None else z[:count]


def gaussian_delta_level(seed, size=400, sigma=0.35):
    """``n + N(0, sigma)`` sorted; the synthetic Gaussian-delta family."""
    from spectral_hierarchy.hierarchy import HierarchyLevel

    rng = np.random.default_rng(seed)
    return HierarchyLevel(0, np.sort(np.arange(1, size + 1) + rng.normal(0, sigma, size)))


def poisson_level(seed, size=400):
    """Unit-mean exponential gaps (uncorrelated levels)."""
    from spectral_hierarchy.hierarchy import HierarchyLevel

    rng = np.random.default_rng(seed)
    return HierarchyLevel(0, np.cumsum(rng.exponential(1.0, size)) + 0.5)


def synthetic_level(seed, size=120):
    """Seed-indexed random sequence: Gaussian-delta for odd seeds, Poisson for even."""
    return gaussian_delta_level(seed, size) if seed % 2 else poisson_level(seed, size)


@pytest.fixture(scope="session")
def zeros():
    return zeta_zeros()


@pytest.fixture(scope="session")
def k4():
    return complete_graph(K4_LENGTHS)


@pytest.fixture(scope="session")
def k4_spectrum(k4):
    from spectral_hierarchy.graph import first_eigenvalues

    return first_eigenvalues(k4, 500)


@pytest.fixture(scope="session")
def k4_lattice(k4):
    """Lattice expansions of the test graph keyed by cutoff in units of L0."""
    from spectral_hierarchy.graph import graph_expansion_lattice

    cache = {}

    def get(multiple):
        if multiple not in cache:
            cache[multiple] = graph_expansion_lattice(k4, multiple * k4.L0)
        return cache[multiple]

    return get


def midpoint_separators(eigenvalues):
    """``0`` followed by midpoints of consecutive eigenvalues: one level per interval."""
    k = np.concatenate([[0.0], np.asarray(eigenvalues, dtype=float)])
    return 0.5 * (k[1:] + k[:-1])


@pytest.fixture(scope="session")
def k4_secular_roots(k4_spectrum):
    """Oracle roots of the real secular function over the span of the first 500 levels."""
    from .oracles import secular_roots

    k = k4_spectrum.values
    k_max = k[-1] + 0.25 * (k[-1] - k[-2])
    return secular_roots(K4_BONDS, 4, k_max)


# --------------------------------------------------------------------------
# acceptance reporting: one line per criterion in the terminal summary

ACCEPTANCE = {}


def record(number, passed, detail):
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
