"""Band isolation: counts, nesting, dual root-finding routes, derivative bounds."""

from __future__ import annotations

import math

import numpy as np
import pytest

from fibspec.bands import (
    band_sign_changes,
    compute_bands,
    derivative_log_stats,
    koebe_radius_bounds,
    sandwich_violations,
    trace_values,
    twisted_eigen_roots,
)
from fibspec.errors import BandCountMismatch, DomainError, NotApplicable
from fibspec.logscale import LogScalar
from fibspec.trace import fibonacci, trace_sequence


@pytest.fixture(scope="module")
def h2():
    return compute_bands(2.0, 12)


@pytest.fixture(scope="module")
def h8():
    return compute_bands(8.0, 10)


def test_band_counts_are_fibonacci(h2, h8):
    for h in (h2, h8):
        for k in range(h.k_max + 1):
            assert len(h.bands(k)) == fibonacci(k)


def test_roots_really_are_roots(h2):
    for k in range(1, 13):
        roots = np.array([b.root for b in h2.bands(k)])
        values = trace_values(2.0, roots, k)
        derivs = np.array([b.deriv.to_float() for b in h2.bands(k)])
        # Backward error: |x_k(root)| small relative to |x_k'(root)|.
        assert np.all(np.abs(values) <= 1e-9 * np.maximum(np.abs(derivs), 1.0))


def test_bands_are_disjoint_and_ordered(h2):
    for k in range(h2.k_max + 1):
        bands = h2.bands(k)
        for left, right in zip(bands, bands[1:]):
            assert left.right < right.left
            assert left.root < right.root


def test_trace_magnitude_at_most_one_inside_bands(h2):
    rng = np.random.default_rng(7)
    for k in (6, 9, 12):
        for b in h2.bands(k):
            probes = rng.uniform(b.left, b.right, size=8)
            assert np.all(np.abs(trace_values(2.0, probes, k)) <= 1.0 + 1e-9)


def test_each_band_holds_exactly_one_sign_change(h2):
    for k in (4, 8, 11):
        counts = band_sign_changes(2.0, h2.bands(k), k)
        assert np.all(counts == 1)


def test_bisection_vs_twisted_eigenvalue_routes(h2):
    for k in range(1, 11):
        bis = np.sort(np.array([b.root for b in h2.bands(k)]))
        tw = np.sort(twisted_eigen_roots(2.0, k))
        assert len(bis) == len(tw)
        assert np.max(np.abs(bis - tw)) < 1e-7


def test_derivative_stats_order(h2):
    for k in range(2, 13):
        lo, hi, total = derivative_log_stats(h2, k)
        count = fibonacci(k)
        assert lo <= total / count <= hi
        assert lo > 0.0  # hyperbolicity: every root derivative exceeds 1


def test_derivative_values_match_trace_sequence(h2):
    for b in h2.bands(9):
        seq = trace_sequence(2.0, b.root, 9, with_derivatives=True)
        assert b.deriv.log_mag == pytest.approx(
            seq.derivative(9).log_mag, abs=1e-6
        )


def test_strong_coupling_band_types(h8):
    for k in range(2, h8.k_max + 1):
        types = [b.band_type for b in h8.bands(k)]
        assert set(types) <= {"A", "B"}
        # Type counts follow the two-step structure: B bands carry on the
        # previous level's count, A bands the one before that.
        assert types.count("B") == fibonacci(k - 1)
        assert types.count("A") == fibonacci(k - 2)


def test_visit_counts_positive_and_small(h8):
    for k in range(2, h8.k_max + 1):
        for b in h8.bands(k):
            assert 1 <= b.m_count <= k


def test_derivative_sandwich_no_violations(h8):
    assert sandwich_violations(h8) == []


def test_derivative_sandwich_needs_strong_coupling(h2):
    with pytest.raises(NotApplicable):
        sandwich_violations(h2)


def test_domain_validation():
    with pytest.raises(DomainError):
        compute_bands(-1.0, 4)
    with pytest.raises(DomainError):
        compute_bands(0.0, 4)


def test_count_mismatch_carries_retry_hint():
    exc = BandCountMismatch(7, 12, 13, refinement=2)
    assert exc.level == 7
    assert exc.found == 12
    assert exc.expected == 13
    assert exc.refinement == 2


def test_koebe_bounds_bracket_and_shrink():
    deriv = LogScalar.from_float(100.0)
    lower, upper = koebe_radius_bounds(0.3, deriv, 4.0)
    assert lower <= upper
    assert upper.to_float() <= 4.0 * 100.0 * 1.2  # near 4|x'| for small delta
    with pytest.raises(DomainError):
        koebe_radius_bounds(5.0, deriv, 4.0)  # delta >= lambda^2 / 8
