"""Finite operator cross-checks: words, eigenvalue counting, gaps, transport."""

from __future__ import annotations

import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from fibspec.bands import compute_bands
from fibspec.errors import (
    BoundaryContamination,
    CoverageFailure,
    DimensionTooLarge,
    DomainError,
    StructureViolation,
)
from fibspec.operator import (
    dos_scaling_probe,
    exponential_average,
    fibonacci_word,
    gap_labels,
    generate_potential,
    ids_finite,
    quadrature_nodes,
    transport_moment_family,
    transport_moments,
)
from fibspec.trace import PHI, fibonacci

from _oracles import (
    circle_potential,
    dense_eigen_count,
    exponential_moment,
    substitution_word,
)


def test_word_prefix_and_example():
    assert fibonacci_word(5) == "abaab"
    potential = generate_potential(1.0, 0.0, 5)
    assert tuple(potential.values) == (1.0, 0.0, 1.0, 1.0, 0.0)


@pytest.mark.parametrize("length", [13, 89, 610])
def test_circle_word_is_the_substitution_fixed_point(length):
    potential = generate_potential(2.0, 0.0, length)
    word = "".join("a" if v > 0 else "b" for v in potential.values)
    assert word == substitution_word(length)


def test_potential_matches_circle_definition_at_generic_offset():
    potential = generate_potential(3.0, 0.37, 200)
    assert np.array_equal(potential.values, circle_potential(3.0, 0.37, 200))


def test_potential_domain_validation():
    with pytest.raises(DomainError):
        generate_potential(1.0, -0.1, 10)
    with pytest.raises(DomainError):
        generate_potential(1.0, 1.0, 10)
    with pytest.raises(DomainError):
        generate_potential(1.0, 0.0, 0)


@pytest.mark.parametrize("lam", [0.0, 2.0, 8.0])
def test_sturm_counts_match_dense_diagonalization(lam):
    length = 233
    potential = generate_potential(lam, 0.0, length)
    # the small offset keeps the probe grid off exact eigenvalues (the
    # free chain has one at E = 0), where "strictly below" is ill-posed
    for energy in np.linspace(-2.5, 2.5 + lam, 23) + 0.0061803:
        counted = ids_finite(potential, float(energy))
        assert counted.denominator in (1, length) or length % counted.denominator == 0
        dense = dense_eigen_count(potential.values, float(energy))
        assert counted == Fraction(dense, length)


def test_eigenvalue_hit_retries_with_a_warning(caplog):
    # Free chain: the first LDL pivot is v_1 - E, so E = 0 hits it head on.
    potential = generate_potential(0.0, 0.0, 64)
    with caplog.at_level(logging.WARNING):
        value = ids_finite(potential, 0.0)
    assert any("retrying" in r.message for r in caplog.records)
    assert value == Fraction(dense_eigen_count(potential.values, 1e-12), 64)


def test_ids_is_monotone_in_energy():
    potential = generate_potential(4.0, 0.0, 144)
    grid = np.linspace(-3.0, 7.5, 25)
    values = [ids_finite(potential, float(e)) for e in grid]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[0] == 0
    assert values[-1] == 1


@pytest.fixture(scope="module")
def h2():
    return compute_bands(2.0, 12)


def test_gap_labels_structure(h2):
    records = gap_labels(2.0, 12, 20, h2)
    count = fibonacci(12)
    assert len(records) == count - 1
    tolerance = 2.0 / count
    for j, rec in enumerate(records, start=1):
        assert rec.gap_index == j
        assert rec.ids_value == Fraction(j, count)
        assert rec.label_error < tolerance
        # the label reproduces the gap's rotation number within tolerance
        frac = (rec.label_m * PHI) % 1.0
        assert abs(j / count - frac) < tolerance
    # small labels all appear once the level is deep enough
    labels = {rec.label_m for rec in records}
    assert {1, -1, 2, -2, 3, -3} <= labels


def test_gap_label_errors_shrink_with_level(h2):
    shallow = max(r.label_error for r in gap_labels(2.0, 8, 10, h2))
    deep = max(r.label_error for r in gap_labels(2.0, 12, 10, h2))
    assert deep < shallow / 2.0


def test_gap_labels_domain_validation(h2):
    with pytest.raises(DomainError):
        gap_labels(-2.0, 8, 10)


def test_dos_scaling_probe(h2):
    probe = dos_scaling_probe(2.0, 12, 24, h2)
    assert probe.entries
    assert 0.0 < probe.min_band_ratio <= probe.mean_band_ratio
    assert probe.mean_band_ratio < 1.0
    depths = {e.depth for e in probe.entries}
    assert 0 in depths and max(depths) >= 1


def test_quadrature_reproduces_exponential_moments():
    for T in (4.0, 32.0, 200.0):
        nodes = quadrature_nodes(T)
        assert nodes[0] > 0.0
        for q in (0, 1, 2):
            value = exponential_average(nodes**q, T, value_at_zero=0.0 ** q if q else 1.0)
            assert value == pytest.approx(exponential_moment(T, q), rel=1e-8)


def test_free_transport_is_ballistic():
    # T stays small relative to L: the exponential average has slow tails,
    # so the guard-ring mass only clears 1e-8 for T well below L/4.
    run = transport_moments(0.0, 0.0, 512, 2.0, np.geomspace(3.0, 10.0, 4))
    assert run.unitarity_defect < 1e-9
    assert run.outside_prob_max < 1e-8
    assert run.beta == pytest.approx(1.0, abs=0.05)
    # the averaged second moment is T^2 on the nose in the free case
    for row in run.rows:
        assert row.moment == pytest.approx(row.T**2, rel=0.05)


def test_transport_family_shares_the_eigensystem():
    T_grid = np.geomspace(16.0, 64.0, 4)
    family = transport_moment_family(8.0, 0.0, 256, [1.0, 2.0], T_grid)
    single = transport_moments(8.0, 0.0, 256, 2.0, T_grid)
    assert family[2.0].beta == pytest.approx(single.beta, abs=1e-12)
    for run in family.values():
        assert 0.0 < run.beta < 1.0
        assert len(run.rows) == 4
        assert run.unitarity_defect < 1e-9


def test_transport_guards():
    with pytest.raises(DimensionTooLarge):
        transport_moments(1.0, 0.0, 5000, 2.0, [8.0])
    with pytest.raises(DomainError):
        transport_moments(1.0, 0.0, 128, 2.0, [64.0])  # T beyond L/4
    with pytest.raises(BoundaryContamination):
        # ballistic front reaches the guard ring well before T = L/4
        transport_moments(0.0, 0.0, 128, 2.0, [32.0])
