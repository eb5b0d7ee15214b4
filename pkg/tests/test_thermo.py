"""Maximal-entropy Markov data and the level-k pressure function."""

from __future__ import annotations

import math

import numpy as np
import pytest

from fibspec.bands import compute_bands
from fibspec.errors import NotApplicable, NotTransitive
from fibspec.thermo import (
    GOLDEN_MEAN_MATRIX,
    equidistribution_check,
    level_words,
    parry_measure,
    pressure_curve,
    pressure_rows,
    top_entropy,
)
from fibspec.trace import PHI, fibonacci

from _oracles import parry_probabilities

LOG_PHI = math.log(PHI)


@pytest.fixture(scope="module")
def h8():
    return compute_bands(8.0, 12)


@pytest.fixture(scope="module")
def model():
    return parry_measure(GOLDEN_MEAN_MATRIX)


def test_perron_value_is_golden_ratio(model):
    assert model.perron_value == pytest.approx(PHI, abs=1e-12)
    assert top_entropy(GOLDEN_MEAN_MATRIX) == pytest.approx(LOG_PHI, abs=1e-12)


def test_stationary_probabilities_closed_form(model):
    p0, p1 = parry_probabilities()
    assert model.stationary[0] == pytest.approx(p0, abs=1e-10)
    assert model.stationary[1] == pytest.approx(p1, abs=1e-10)
    assert model.stationary.sum() == pytest.approx(1.0, abs=1e-12)


def test_transition_matrix_is_stochastic(model):
    P = model.transition_matrix
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)
    assert P[1, 1] == 0.0  # the forbidden transition stays forbidden
    # stationary vector is invariant under P
    pi = model.stationary
    assert np.allclose(pi @ P, pi, atol=1e-12)


def test_cylinder_measures_tile_the_space(model):
    # admissible words of length 4 (no '11' factor) partition measure one
    words = []
    for bits in range(16):
        w = [(bits >> i) & 1 for i in range(4)]
        if all(not (a == 1 and b == 1) for a, b in zip(w, w[1:])):
            words.append(w)
    total = sum(model.cylinder_measure(w) for w in words)
    assert total == pytest.approx(1.0, abs=1e-10)
    assert model.cylinder_measure([1, 1, 0]) == 0.0  # forbidden factor


def test_transitivity_is_required():
    with pytest.raises(NotTransitive):
        parry_measure(((1, 0), (0, 1)))
    with pytest.raises(ValueError):
        parry_measure(((2, 1), (1, 0)))


def test_entropy_at_zero_is_exact(h8):
    curve = pressure_curve(8.0, 12, np.linspace(-1.0, 2.0, 31), h8)
    assert curve.entropy_at_zero == math.log(fibonacci(12)) / 12
    assert curve.pressure(0.0) == pytest.approx(curve.entropy_at_zero, abs=1e-12)


def test_pressure_is_decreasing_and_convex(h8):
    curve = pressure_curve(8.0, 12, np.linspace(-1.0, 2.0, 61), h8)
    values = curve.values
    diffs = np.diff(values)
    assert np.all(diffs < 0.0)
    second = np.diff(values, 2)
    assert np.all(second > -1e-12)


def test_bowen_root_solves_the_equation(h8):
    curve = pressure_curve(8.0, 12, [0.0, 1.0], h8)
    assert 0.0 < curve.bowen_root < 1.0
    assert curve.pressure(curve.bowen_root) == pytest.approx(0.0, abs=1e-10)


def test_tangent_intercept_matches_root_derivative_estimator(h8):
    from fibspec.report import level_stats

    curve = pressure_curve(8.0, 12, [0.0], h8)
    stats = level_stats(h8, 12)
    assert curve.tangent_intercept == pytest.approx(stats.dim_nu, abs=1e-10)


def test_entropy_approaches_log_phi():
    # (1/k) log F_k -> log(phi); at k = 20 the gap is below 0.02
    assert abs(math.log(fibonacci(20)) / 20 - LOG_PHI) < 0.02


def test_level_words_follow_golden_mean_grammar(h8):
    words = level_words(h8, 10)
    assert len(words) == fibonacci(10)
    assert all(set(w) <= {"a", "b"} for w in words)
    assert all("bb" not in w for w in words)


def test_lineage_statistics_near_parry_measure(h8):
    l1 = equidistribution_check(8.0, 12, 3, h8)
    assert l1 < 0.2


def test_equidistribution_needs_strong_coupling():
    with pytest.raises(NotApplicable):
        equidistribution_check(2.0, 8, 3)


def test_pressure_rows_round_trip(h8):
    curve = pressure_curve(8.0, 10, [-0.5, 0.0, 0.5], h8)
    rows = list(pressure_rows(curve))
    assert [r[0] for r in rows] == [-0.5, 0.0, 0.5]
    assert rows[1][1] == pytest.approx(curve.entropy_at_zero)
