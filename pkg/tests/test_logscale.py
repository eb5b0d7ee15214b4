"""Signed-log arithmetic: round trips, field laws, and overflow safety."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibspec.logscale import (
    LogScalar,
    slog_add,
    slog_from_float,
    slog_mul,
    slog_scale,
    slog_to_float,
)

finite_floats = st.floats(
    min_value=-1e12, max_value=1e12, allow_nan=False, allow_infinity=False
)


@given(finite_floats)
def test_roundtrip_through_log_space(value):
    # exp(log(x)) loses ~|log x| * eps relative accuracy, up to ~1e-13
    # at the edges of the double range; never exact.
    back = LogScalar.from_float(value).to_float()
    assert back == pytest.approx(value, rel=1e-12, abs=1e-300)


@given(finite_floats, finite_floats)
@settings(max_examples=200)
def test_multiplication_matches_floats(a, b):
    prod = LogScalar.from_float(a) * LogScalar.from_float(b)
    assert prod.to_float() == pytest.approx(a * b, rel=1e-12, abs=1e-280)


@given(finite_floats, finite_floats)
@settings(max_examples=200)
def test_addition_matches_floats(a, b):
    total = LogScalar.from_float(a) + LogScalar.from_float(b)
    # Addition of opposite signs cancels leading digits, so the tolerance
    # is relative to the inputs, not the output.
    scale = max(abs(a), abs(b), 1e-300)
    assert total.to_float() == pytest.approx(a + b, abs=1e-12 * scale)


def test_zero_element():
    zero = LogScalar.zero()
    five = LogScalar.from_float(5.0)
    assert zero.sign == 0 and zero.to_float() == 0.0
    assert (zero + five).to_float() == pytest.approx(5.0, rel=1e-14)
    assert (zero * five).sign == 0
    with pytest.raises(ZeroDivisionError):
        five / zero


def test_exact_cancellation_gives_zero():
    a = LogScalar.from_float(3.75)
    assert (a - a).sign == 0


def test_magnitudes_beyond_float64_survive():
    huge = LogScalar(1, 500.0)  # e^500 overflows float64
    squared = huge * huge
    assert squared.log_mag == 1000.0
    assert squared.to_float() == math.inf
    ratio = squared / huge
    assert ratio.log_mag == pytest.approx(500.0)


def test_ordering_is_numeric():
    values = [-7.0, -0.25, 0.0, 0.5, 12.0]
    scalars = sorted(LogScalar.from_float(v) for v in values)
    assert [s.to_float() for s in scalars] == pytest.approx(sorted(values), rel=1e-14)


def test_validation_rejects_bad_members():
    with pytest.raises(ValueError):
        LogScalar(2, 0.0)
    with pytest.raises(ValueError):
        LogScalar(0, 0.0)
    with pytest.raises(ValueError):
        LogScalar(1, math.nan)
    with pytest.raises(ValueError):
        LogScalar.from_float(math.inf)


def test_vectorized_ops_match_scalar_ops():
    values = np.array([-3.5, 0.0, 1e-8, 2.0, -7e5])
    other = np.array([2.0, 4.0, -1e-8, 0.0, 1e-3])
    s1, l1 = slog_from_float(values)
    s2, l2 = slog_from_float(other)
    assert np.allclose(slog_to_float(s1, l1), values)

    ms, ml = slog_mul(s1, l1, s2, l2)
    assert np.allclose(slog_to_float(ms, ml), values * other)

    as_, al = slog_add(s1, l1, s2, l2)
    assert np.allclose(slog_to_float(as_, al), values + other, atol=1e-20)

    cs, cl = slog_scale(s1, l1, -2.5)
    assert np.allclose(slog_to_float(cs, cl), values * -2.5)
