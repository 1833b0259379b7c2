"""Tests for the critical branching core: exact laws and samplers."""

from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from cdt_ising.branching import (
    FiniteTree,
    LevelForest,
    SpineForest,
    level_size_pmf,
    offspring_gf,
    offspring_pmf,
    psi_n,
    sample_gw_tree,
    sample_spine_forest,
    size_biased_pmf,
)
from cdt_ising.rng import stream


def psi_n_series_coefficients(n: int, k_max: int) -> list[Fraction]:
    """Independent oracle: power-series coefficients of (n-(n-1)s)/(n+1-ns)
    by exact long division with rationals."""
    num = [Fraction(n), Fraction(-(n - 1))]
    den = [Fraction(n + 1), Fraction(-n)]
    coeffs = []
    rem = list(num) + [Fraction(0)] * k_max
    for k in range(k_max + 1):
        c = rem[k] / den[0]
        coeffs.append(c)
        rem[k + 1] -= c * den[1]
    return coeffs


def test_offspring_pmf_values():
    assert offspring_pmf(0) == 0.5
    assert offspring_pmf(1) == 0.25
    assert abs(sum(offspring_pmf(k) for k in range(61)) - 1.0) < 1e-12


def test_offspring_pmf_mean_is_one():
    mean = sum(k * offspring_pmf(k) for k in range(200))
    assert abs(mean - 1.0) < 1e-12


def test_offspring_pmf_rejects_negative():
    with pytest.raises(ValueError):
        offspring_pmf(-1)


def test_offspring_gf_matches_series():
    for s in (0.0, 0.3, 0.9, 1.0):
        series = sum(offspring_pmf(k) * s**k for k in range(400))
        assert abs(offspring_gf(s) - series) < 1e-12


def test_psi_n_examples():
    assert abs(psi_n(3, 0.0) - 0.75) < 1e-15
    assert psi_n(5, 1.0) == 1.0
    # direct series at n=1: sum_k (1/2)^(k+1) (1/2)^k = 2/3
    series = sum(offspring_pmf(k) * 0.5**k for k in range(200))
    assert abs(series - 2.0 / 3.0) < 1e-13
    assert abs(psi_n(1, 0.5) - 2.0 / 3.0) < 1e-15


def test_psi_n_two_generation_composition():
    # brute-force two-generation transform: sum_k p_k * (sum_j p_j s^j)^k
    s = 0.4
    inner = sum(offspring_pmf(j) * s**j for j in range(200))
    outer = sum(offspring_pmf(k) * inner**k for k in range(400))
    assert abs(psi_n(2, s) - outer) < 1e-12


def test_psi_n_domain():
    with pytest.raises(ValueError):
        psi_n(1, -0.1)
    with pytest.raises(ValueError):
        psi_n(1, 1.1)
    with pytest.raises(ValueError):
        psi_n(0, 0.5)


def test_psi_n_semigroup():
    grid = [0.0, 0.17, 0.5, 0.83, 1.0]
    for n in range(1, 11):
        for m in range(1, 11):
            for s in grid:
                assert abs(psi_n(n + m, s) - psi_n(n, psi_n(m, s))) < 1e-12


def test_level_size_pmf_small_values():
    # oracle: coefficients of s * psi_n'(s) are k * [s^k] psi_n(s)
    assert abs(level_size_pmf(1, 1) - 0.25) < 1e-15
    assert abs(level_size_pmf(1, 2) - 0.25) < 1e-15


def test_level_size_pmf_matches_series_coefficients():
    for n in range(1, 11):
        coeffs = psi_n_series_coefficients(n, 50)
        for k in range(1, 51):
            expected = float(k * coeffs[k])
            assert abs(level_size_pmf(n, k) - expected) < 1e-12, (n, k)


def test_level_size_pmf_normalizes():
    total = sum(level_size_pmf(5, k) for k in range(1, 401))
    assert abs(total - 1.0) < 1e-10


def test_level_size_pmf_rejects_zero():
    with pytest.raises(ValueError):
        level_size_pmf(3, 0)


def test_size_biased_pmf():
    assert size_biased_pmf(1) == 0.25
    assert size_biased_pmf(2) == 0.25
    assert abs(sum(size_biased_pmf(k) for k in range(1, 61)) - 1.0) < 1e-12
    for k in range(1, 40):
        assert size_biased_pmf(k) == k * offspring_pmf(k)
    with pytest.raises(ValueError):
        size_biased_pmf(0)


def test_finite_tree_validation():
    FiniteTree((2, 0, 0), (0, 1, 1))
    with pytest.raises(ValueError):
        FiniteTree((2, 0, 0), (0, 1, 2))  # bad height
    with pytest.raises(ValueError):
        FiniteTree((2, 0), (0, 1))  # truncated encoding


def test_sample_gw_tree_height_cap_zero():
    t = sample_gw_tree(stream(0, 0), 0)
    assert t.node_count == 1
    assert t.out_degrees == (0,)


def test_sample_gw_tree_truncation():
    for i in range(50):
        t = sample_gw_tree(stream(1, i), 3)
        assert t.max_height <= 3


def test_sample_gw_tree_extinction_probability():
    # P(no level-3 descendants) = psi_3(0) = 3/4
    rng = stream(12)
    trials = 100000
    extinct = 0
    for _ in range(trials):
        t = sample_gw_tree(rng, 3)
        if t.max_height < 3:
            extinct += 1
    assert abs(extinct / trials - 0.75) < 0.005


def test_sample_gw_tree_mean_offspring():
    rng = stream(13)
    trials = 100000
    total = sum(sample_gw_tree(rng, 1).node_count - 1 for _ in range(trials))
    assert abs(total / trials - 1.0) < 0.01


def test_spine_forest_structure():
    for i in range(100):
        sf = sample_spine_forest(stream(2, i), 4)
        sizes = sf.level_sizes
        assert sizes[0] == 1
        assert len(sf.spine_positions) == 5
        for n in range(5):
            assert 0 <= sf.spine_positions[n] < sizes[n]
        # flattened forest is valid and matches the spine child counts
        forest = sf.to_forest()
        assert forest.level_sizes == sizes
        for n in range(4):
            assert forest.out_degrees[n][sf.spine_positions[n]] == sf.spine_child_count(n)


def test_spine_forest_single_spine_child_case():
    # whenever both side-tree lists are empty the spine vertex has one child
    found = False
    for i in range(200):
        sf = sample_spine_forest(stream(3, i), 1)
        if sf.spine_child_count(0) == 1:
            assert sf.level_sizes[1] >= 1
            assert sf.to_forest().out_degrees[0] == (1,)
            found = True
    assert found


def test_spine_forest_level_size_law():
    # goodness of fit against the conditioned level-size law at n = 3
    trials = 20000
    counts = Counter()
    for i in range(trials):
        sf = sample_spine_forest(stream(4, i), 3)
        counts[sf.level_sizes[3]] += 1
    tv = 0.5 * sum(
        abs(counts.get(k, 0) / trials - level_size_pmf(3, k)) for k in range(1, 200)
    )
    assert tv < 0.03


def test_level_forest_rejects_bad_input():
    with pytest.raises(ValueError):
        LevelForest(((2,), (0, 0)))  # empty level above
    with pytest.raises(ValueError):
        LevelForest(((1, 1),))  # two roots
    with pytest.raises(ValueError):
        LevelForest(((1,), (2, 1)))  # wrong list length
