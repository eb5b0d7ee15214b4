"""Exact band-type counting: recursion vs closed form, aggregates, the limit."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fibspec.combinatorics import (
    build_comb_table,
    closed_form_a,
    comb_limit,
    comb_rows,
)
from fibspec.trace import fibonacci

LIMIT = 4.0 / (5.0 + math.sqrt(5.0))


@pytest.fixture(scope="module")
def table():
    return build_comb_table(60)


def test_row_sums_are_fibonacci(table):
    for k in range(2, 61):
        assert table.a_total(k) == fibonacci(k - 2)
        assert table.b_total(k) == fibonacci(k - 1)


def test_recursion_matches_closed_form_exactly(table):
    # k = 0 is the recursion seed a_{0,0} = 1, outside the closed form's range
    for k in range(1, 61):
        for m, count in table.a[k].items():
            assert count == closed_form_a(k, m)
        # and the closed form vanishes off the table's support
        for m in range(0, k + 2):
            if m not in table.a[k]:
                assert closed_form_a(k, m) == 0


@given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=25))
def test_a_rows_come_from_previous_b_rows(k, m):
    table = build_comb_table(42)
    assert table.a[k].get(m, 0) == table.b[k - 1].get(m - 1, 0)


def test_aggregates_satisfy_independent_recursions(table):
    # A_k = B_{k-1} + F_{k-2}; B_k = A_{k-2} + 2 B_{k-2} + F_{k-1};
    # C_k = C_{k-1} + C_{k-2} + 2 F_{k-2}, re-run here from scratch.
    A = {0: table.A[0], 1: table.A[1]}
    B = {0: table.B[0], 1: table.B[1]}
    C = {0: table.C[0], 1: table.C[1]}
    for k in range(2, 61):
        A[k] = B[k - 1] + fibonacci(k - 2)
        B[k] = A[k - 2] + 2 * B[k - 2] + fibonacci(k - 1)
        C[k] = C[k - 1] + C[k - 2] + 2 * fibonacci(k - 2)
        assert A[k] == table.A[k]
        assert B[k] == table.B[k]
        assert C[k] == table.C[k]


def test_weighted_total_ratio_approaches_limit(table):
    ratio_60 = table.C[60] / (60 * fibonacci(60))
    assert abs(ratio_60 - 0.5527864) < 0.02
    at_kmax, fitted = comb_limit(table)
    assert at_kmax == pytest.approx(ratio_60)
    assert abs(fitted - LIMIT) < 1e-3


def test_ratio_column_is_monotone_in_the_tail(table):
    rows = list(comb_rows(table))
    ratios = [r[7] for r in rows[10:]]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_limit_fit_requires_enough_levels():
    with pytest.raises(ValueError):
        comb_limit(build_comb_table(12))
