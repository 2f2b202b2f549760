from __future__ import annotations

import math

import numpy as np
import pytest

from spectral_hierarchy.core import RiemannVonMangoldt, UnfoldedSequence, unfold, validate_sequence
from spectral_hierarchy.errors import TooShort, ZeroSpacing
from spectral_hierarchy.graph import weyl_average
from spectral_hierarchy.hierarchy import (
    FixedList,
    HierarchyLevel,
    Midpoint,
    Optimal,
    build_hierarchy,
    irregularity_degree,
    optimal_alphas,
    regularity_test,
    roughness_functional,
    separating_sequence,
    strategy_from_name,
)

from .conftest import gaussian_delta_level, synthetic_level, zeta_zeros


def level(values, j=0):
    return HierarchyLevel(j, np.asarray(values, dtype=float))


def riemann_level(count):
    return level(unfold(validate_sequence(zeta_zeros(count)), RiemannVonMangoldt()).values)


def feasible_gamma_scan(k, step=1e-3):
    """Brute force: does some gamma on a grid satisfy n - 1 + gamma <= k_n <= n + gamma?"""
    d = np.asarray(k) - np.arange(1, len(k) + 1)
    for g in np.arange(d.min(), d.max() + 1 + step, step):
        if np.all(d <= g + 1e-12) and np.all(d >= g - 1 - 1e-12):
            return True
    return False


def test_midpoint_averages_neighbours():
    child = separating_sequence(level([1.0, 2.0, 4.0]), Midpoint())
    np.testing.assert_allclose(child.values, [1.5, 3.0])
    assert child.j == 1 and len(child) == 2


def test_fixed_boundary_alphas_are_nudged_inside():
    child = separating_sequence(level([1.0, 2.0, 4.0]), FixedList((0.0, 1.0)))
    assert child.values[0] == pytest.approx(1.0 + 1e-12, abs=1e-15)
    assert child.values[1] == pytest.approx(4.0 - 2e-12, abs=1e-15)
    assert 1.0 < child.values[0] < 2.0 < child.values[1] < 4.0


def test_optimal_toy_by_hand():
    # deltas -0.1, 0.3, -0.2; anchor -0.1; spacings 1.4, 0.5
    # alpha_1 = 0 / 1.4 = 0, alpha_2 = (-0.1 - 0.3) / 0.5 clamps to 0
    parent = level([0.9, 2.3, 2.8])
    np.testing.assert_allclose(optimal_alphas(parent, -0.1), [0.0, 0.0], atol=1e-15)
    child = separating_sequence(parent, Optimal())
    np.testing.assert_allclose(child.values, [0.9, 2.3], atol=1e-11)
    assert child.values[0] > 0.9 and child.values[1] > 2.3


def test_optimal_alpha_examples():
    parent = level([1.25, 2.25, 3.25, 4.25])
    np.testing.assert_array_equal(optimal_alphas(parent, 0.25), [0, 0, 0])
    p = level([1.0, 2.5, 3.0])
    s = np.diff(p.values)
    # delta_1 = 0, anchor = delta_1 + s_1 gives exactly alpha_1 = 1
    assert optimal_alphas(p, 0.0 + s[0])[0] == 1.0
    with pytest.raises(ZeroSpacing):
        optimal_alphas(HierarchyLevel(0, np.array([1.0, 1.0, 2.0])), 0.0)


def test_optimal_alphas_on_first_hundred_zeros():
    parent = riemann_level(100)
    d, s = parent.deltas, np.diff(parent.values)
    alphas = optimal_alphas(parent, d[0])
    assert alphas.shape == (99,) and np.all((alphas >= 0) & (alphas <= 1))
    # direct evaluation, one gap at a time
    for n in range(99):
        assert alphas[n] == min(1.0, max(0.0, (d[0] - d[n]) / s[n]))
    child = separating_sequence(parent, Optimal())
    free = (alphas > 0) & (alphas < 1)
    # unclamped children land exactly on n + anchor
    np.testing.assert_allclose(child.deltas[free], d[0], atol=1e-12)


def test_roughness_examples():
    assert roughness_functional(level([1.0, 2.0, 3.0, 4.0])) == 0.0
    assert roughness_functional(level([0.0, 0.5, 2.0]), T=1.0) == pytest.approx(0.5)
    with pytest.raises(TooShort):
        roughness_functional(level([1.0]))


def test_regularity_examples():
    n = np.arange(1, 21)
    r = regularity_test(level(n - 0.5))
    assert r.passed and r.spread == 0.0 and r.gamma == pytest.approx(0.0)
    r = regularity_test(level(n + (-1.0) ** n))
    assert not r.passed and r.spread == pytest.approx(2.0)


def test_riemann_level_zero_is_not_regular():
    r = regularity_test(riemann_level(10_000))
    assert not r.passed and r.spread > 1


def test_spacing_criterion_is_looser():
    k = level([1.0, 2.6, 4.2, 5.8])
    assert not regularity_test(k, "interval").passed
    assert regularity_test(k, "spacing").passed
    with pytest.raises(ValueError):
        regularity_test(k, "other")


def test_periodic_input_has_degree_zero():
    u = UnfoldedSequence.from_values(np.arange(1, 51) + 0.3)
    h = build_hierarchy(u, Optimal())
    assert irregularity_degree(h) == 0 and len(h.levels) == 1
    assert h.gamma_reg == pytest.approx(0.8)


def test_small_case_matches_brute_force():
    k = [0.5, 2.4, 2.6, 4.5]
    # oracle: midpoints by hand and the gamma grid scan at each level
    levels = [k]
    while not feasible_gamma_scan(levels[-1]):
        prev = levels[-1]
        levels.append([(prev[i] + prev[i + 1]) / 2 for i in range(len(prev) - 1)])
    h = build_hierarchy(UnfoldedSequence.from_values(k), Midpoint())
    assert h.degree == len(levels) - 1 == 0


def test_small_case_needing_one_level():
    k = [0.4, 2.4, 2.6, 4.6]
    assert not feasible_gamma_scan(k)
    mid = [(k[i] + k[i + 1]) / 2 for i in range(3)]
    assert feasible_gamma_scan(mid)
    h = build_hierarchy(UnfoldedSequence.from_values(k), Midpoint())
    assert h.degree == 1
    np.testing.assert_allclose(h.levels[1].values, mid)


def test_not_terminated_is_a_value():
    u = UnfoldedSequence.from_values(riemann_level(2000).values)
    h = build_hierarchy(u, Midpoint(), max_depth=1)
    assert h.degree is None and not h.terminated and len(h.levels) == 2


def test_hierarchy_report_shape():
    h = build_hierarchy(UnfoldedSequence.from_values(riemann_level(1000).values), Optimal())
    d = h.to_dict()
    assert set(d) >= {"degree", "strategy", "levels"}
    assert [row["j"] for row in d["levels"]] == list(range(len(h.levels)))
    assert "gamma" in d["levels"][-1] and all("gamma" not in r for r in d["levels"][:-1])


def test_strategy_names():
    assert strategy_from_name("midpoint") == Midpoint()
    assert strategy_from_name("optimal", "mean").anchor == "mean"
    with pytest.raises(ValueError):
        strategy_from_name("random")


# --------------------------------------------------------------------------
# invariants over fixed and synthetic datasets


def fixed_datasets(k4, k4_spectrum):
    yield "riemann-1e4", riemann_level(10_000)
    yield "k4-graph", level(unfold(k4_spectrum, weyl_average(k4)).values)
    yield "gaussian-delta", gaussian_delta_level(2024)


def check_invariants(root):
    for strategy in (Optimal(), Optimal("mean"), Midpoint()):
        h = build_hierarchy(UnfoldedSequence.from_values(root.values), strategy, max_depth=12)
        for parent, child in zip(h.levels, h.levels[1:]):
            assert len(child) == len(parent) - 1
            assert np.all(np.diff(child.values) > 0)
            assert np.all(parent.values[:-1] <= child.values)
            assert np.all(child.values <= parent.values[1:])
        if isinstance(strategy, Optimal):
            assert all(b <= a + 1e-9 for a, b in zip(h.spreads, h.spreads[1:]))
        if h.degree is not None:
            assert regularity_test(h.levels[h.degree]).passed
            assert not any(regularity_test(l).passed for l in h.levels[: h.degree])


def test_invariants_on_fixed_datasets(k4, k4_spectrum):
    for name, root in fixed_datasets(k4, k4_spectrum):
        check_invariants(root)


@pytest.mark.parametrize("seed", range(50))
def test_invariants_on_random_sequences(seed):
    root = synthetic_level(seed)
    check_invariants(root)


@pytest.mark.parametrize("seed", range(20))
def test_regularity_matches_gamma_scan(seed):
    rng = np.random.default_rng(1000 + seed)
    size = int(rng.integers(3, 12))
    while True:
        d = rng.uniform(-1, 1, size) * rng.uniform(0.3, 1.1)
        spread = d.max() - d.min()
        if abs(spread - 1) > 2e-3:
            break
    k = np.arange(1, size + 1) + d
    assert regularity_test(level(k)).passed == feasible_gamma_scan(k) == (spread <= 1)


def test_riemann_fluctuations_shrink_along_the_optimal_hierarchy():
    h = build_hierarchy(UnfoldedSequence.from_values(riemann_level(10_000).values), Optimal())
    stds = [float(np.std(l.deltas)) for l in h.levels]
    assert h.degree is not None
    assert all(b < a for a, b in zip(stds, stds[1:]))
