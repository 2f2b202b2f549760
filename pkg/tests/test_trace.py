from __future__ import annotations

import json
import math

import numpy as np
import pytest

from spectral_hierarchy.core import RiemannVonMangoldt, WeylLinear, evaluate_average, invert_average
from spectral_hierarchy.errors import NotRegular, OutOfDomain
from spectral_hierarchy.graph import QuantumGraph, first_eigenvalues, graph_expansion, graph_expansion_lattice
from spectral_hierarchy.hierarchy import HierarchyLevel
from spectral_hierarchy.trace import (
    ExactStaircase,
    Harmonic,
    StaircaseExpansion,
    integral_k_dN,
    level_in_interval,
    primes_upto,
    reconstruct_spectrum,
    regular_graph_spectrum,
    riemann_expansion,
    staircase_eval,
)

from .conftest import midpoint_separators, zeta_zeros

RVM = RiemannVonMangoldt()


def trial_division_primes(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, int(p**0.5) + 1))]


def test_empty_expansion_is_the_average():
    x = StaircaseExpansion(RVM)
    ks = np.linspace(20, 500, 17)
    np.testing.assert_array_equal(staircase_eval(x, ks), evaluate_average(RVM, ks))


def test_single_harmonic_phase_pi():
    x = StaircaseExpansion.from_harmonics(WeylLinear(math.pi), [Harmonic(1.0, math.pi)])
    # Im(exp(i pi)) = 0, so only the Weyl part k = 1 is left
    assert staircase_eval(x, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert staircase_eval(x, 0.5) == pytest.approx(1.5)


def test_riemann_expansion_between_fifth_and_sixth_zero():
    z = zeta_zeros(6)
    x = riemann_expansion(100, 2)
    assert abs(x(0.5 * (z[4] + z[5])) - 5) < 1


def test_riemann_expansion_harmonics():
    x = riemann_expansion(2, 1)
    assert len(x) == 1
    assert x.lengths[0] == pytest.approx(math.log(2))
    assert x.amplitudes[0] == pytest.approx(-1 / (math.pi * math.sqrt(2)))

    x = riemann_expansion(3, 2)
    want = sorted(
        (m * math.log(p), -1 / (math.pi * m * p ** (m / 2))) for p in (2, 3) for m in (1, 2)
    )
    np.testing.assert_allclose(x.lengths, [w[0] for w in want])
    np.testing.assert_allclose(x.amplitudes.real, [w[1] for w in want])

    assert len(riemann_expansion(1000, 3)) == len(trial_division_primes(1000)) * 3 == 168 * 3
    assert list(primes_upto(1000)) == trial_division_primes(1000)


def test_harmonics_sorted_and_validated():
    x = StaircaseExpansion(RVM, [1.0, 2.0, 3.0], [3.0, 1.0, 2.0])
    assert list(x.lengths) == [1.0, 2.0, 3.0]
    assert list(x.amplitudes.real) == [2.0, 3.0, 1.0]
    with pytest.raises(ValueError):
        Harmonic(1.0, 0.0)
    with pytest.raises(ValueError):
        StaircaseExpansion(RVM, [complex("nan")], [1.0])


def test_exact_step_integral_returns_the_jump():
    assert integral_k_dN(ExactStaircase([3.7]), 3.2, 4.4) == pytest.approx(3.7, abs=1e-14)
    assert level_in_interval(ExactStaircase([3.7]), 3.2, 4.4) == pytest.approx(3.7, abs=1e-14)


def test_weyl_only_integral():
    x = StaircaseExpansion(WeylLinear(math.pi))
    assert integral_k_dN(x, 1.0, 2.0) == pytest.approx(1.5, abs=1e-14)


def test_integral_bounds():
    x = riemann_expansion(100, 2)
    with pytest.raises(ValueError):
        integral_k_dN(x, 30.0, 20.0)
    with pytest.raises(OutOfDomain):
        integral_k_dN(x, 1.0, 20.0)


def test_harmonic_integral_against_quadrature():
    from scipy.integrate import quad

    x = riemann_expansion(50, 2)
    a, b = 40.0, 43.5
    ref, _ = quad(lambda k: float(x.oscillating(k)), a, b, epsabs=1e-13, limit=200)
    smooth = RVM.integral(a, b)
    assert x.integrate(a, b) == pytest.approx(smooth + ref, abs=1e-10)


def test_integral_is_additive():
    x = riemann_expansion(1000, 3)
    for a, b, c in [(20.0, 31.7, 55.2), (100.0, 100.5, 140.0), (14.0, 900.0, 1000.0)]:
        whole = integral_k_dN(x, a, c)
        parts = integral_k_dN(x, a, b) + integral_k_dN(x, b, c)
        assert whole == pytest.approx(parts, abs=1e-9 * max(1.0, abs(whole)))


def test_zero_harmonics_unit_separators():
    x = StaircaseExpansion(WeylLinear(math.pi))
    rec = reconstruct_spectrum(x, np.arange(0.0, 11.0))
    np.testing.assert_allclose(rec.values, np.arange(1, 11) - 0.5, atol=1e-13)
    # plain form is exact here too
    rec = reconstruct_spectrum(x, np.arange(0.0, 11.0), centered=False)
    np.testing.assert_allclose(rec.values, np.arange(1, 11) - 0.5, atol=1e-12)


def test_exact_staircase_reconstructs_exactly():
    eig = np.array([0.7, 1.9, 2.2, 5.0, 6.1])
    rec = reconstruct_spectrum(ExactStaircase(eig), midpoint_separators(np.append(eig, 7.0)))
    np.testing.assert_allclose(rec.values, eig, atol=1e-13)


def test_separators_as_hierarchy_level():
    eig = np.array([1.0, 2.0, 3.0])
    rec = reconstruct_spectrum(ExactStaircase(eig), HierarchyLevel(1, np.array([0.5, 1.5, 2.5, 3.5])))
    np.testing.assert_allclose(rec.values, eig, atol=1e-14)


def test_riemann_reconstruction_converges_with_damping():
    # raw truncated prime sums ring without converging; a length damping of
    # 0.4 ln(cutoff) makes the first 20 heights converge (calibrated value)
    z = zeta_zeros(20)
    sep = invert_average(RVM, np.arange(0.0, 21.0))
    errors = []
    for cutoff in (100, 1000, 10_000):
        x = riemann_expansion(cutoff, 3, damping=0.4 * math.log(cutoff))
        errors.append(np.max(np.abs(reconstruct_spectrum(x, sep).values - z)))
    assert errors[1] < 0.5
    assert errors[0] > errors[1] > errors[2]


def test_k4_single_level(k4, k4_spectrum, k4_lattice):
    k = k4_spectrum.values
    a, b = 0.5 * (k[3] + k[4]), 0.5 * (k[4] + k[5])
    err = {c: abs(level_in_interval(k4_lattice(c), a, b) - k[4]) for c in (10, 20, 40)}
    assert err[20] < 1e-2 and err[40] < 1e-2
    assert err[20] < err[10] and err[40] < err[10]


def test_single_bond_regular_spectrum():
    g = QuantumGraph(2, [(0, 1, 1.3)])
    want = np.arange(1, 21) * math.pi / 1.3
    rec = regular_graph_spectrum(graph_expansion(g, []), g.L0, range(1, 21), gamma=0.5)
    np.testing.assert_allclose(rec.values, want, atol=1e-12)
    rec = regular_graph_spectrum(graph_expansion_lattice(g, 30 * g.L0), g.L0, range(1, 21), gamma=0.5)
    np.testing.assert_allclose(rec.values, want, atol=1e-12)
    # gamma chosen from the expansion itself
    rec = regular_graph_spectrum(graph_expansion_lattice(g, 30 * g.L0), g.L0, range(1, 21))
    np.testing.assert_allclose(rec.values, want, atol=1e-3)


def test_two_bond_chain_regular_spectrum():
    g = QuantumGraph(3, [(0, 1, 1.0), (1, 2, 0.62)])
    exact = first_eigenvalues(g, 60).values
    rec = regular_graph_spectrum(graph_expansion_lattice(g, 30 * g.L0), g.L0, range(1, 51))
    assert np.max(np.abs(rec.values - exact[:50])) < 1e-3


def test_irregular_graph_is_rejected(k4, k4_lattice):
    with pytest.raises(NotRegular):
        regular_graph_spectrum(k4_lattice(10), k4.L0, range(1, 101), gamma=0.5)


def test_expansion_json_round_trip():
    x = riemann_expansion(30, 2, damping=4.0)
    text = json.dumps(x.to_dict())
    y = StaircaseExpansion.from_dict(json.loads(text))
    assert y.to_dict() == x.to_dict()
    ks = np.linspace(20, 80, 9)
    np.testing.assert_array_equal(y(ks), x(ks))


def test_damping_and_truncation():
    x = riemann_expansion(100, 2)
    d = x.with_damping(2.0)
    np.testing.assert_allclose(np.abs(d.effective_amplitudes()), np.abs(x.amplitudes) * np.exp(-((x.lengths / 2.0) ** 2)))
    t = x.truncated(3.0)
    assert np.all(t.lengths <= 3.0) and t.truncation["length_cutoff"] == 3.0


def test_evaluation_independent_of_chunking(monkeypatch):
    import spectral_hierarchy.trace as trace

    x = riemann_expansion(20_000, 2)
    ks = np.linspace(100, 200, 7)
    ref = x(ks)
    monkeypatch.setattr(trace, "CHUNK", 97)
    np.testing.assert_allclose(x(ks), ref, rtol=0, atol=1e-12)
