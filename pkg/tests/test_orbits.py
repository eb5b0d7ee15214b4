"""Short periodic orbits: multipliers by two routes, closed-form bound curves."""

from __future__ import annotations

import math

import pytest

from fibspec.orbits import (
    PHI4,
    PHI6,
    bound_curve_p4label,
    bound_curve_p6label,
    cohomology_check,
    gamma_closed_form,
    orbit_multiplier_numeric,
    orbit_sweep_rows,
    solve_period2,
    solve_period4,
)
from fibspec.trace import PHI, fricke_vogt, trace_map

LOG_PHI = math.log(PHI)
COUPLINGS = (0.5, 1.0, 2.0, 4.0, 8.0)


def _advance(v, steps):
    for _ in range(steps):
        v = trace_map(v)
    return v


@pytest.mark.parametrize("lam", COUPLINGS)
def test_period2_points_really_have_period_two(lam):
    orbit = solve_period2(lam)
    assert orbit.period == 2
    start = orbit.points[0]
    again = _advance(start, 2)
    assert float(again.x) == pytest.approx(float(start.x), abs=1e-9)
    assert float(again.y) == pytest.approx(float(start.y), abs=1e-9)
    assert float(again.z) == pytest.approx(float(start.z), abs=1e-9)
    # and one step moves the point (genuine period two, not a fixed point)
    once = _advance(start, 1)
    assert abs(float(once.x) - float(start.x)) > 1e-6


@pytest.mark.parametrize("lam", COUPLINGS)
def test_period4_points_really_have_period_four(lam):
    orbit = solve_period4(lam)
    assert orbit.period == 4
    start = orbit.points[0]
    again = _advance(start, 4)
    assert float(again.x) == pytest.approx(float(start.x), abs=1e-9)


@pytest.mark.parametrize("lam", COUPLINGS)
def test_orbits_live_on_the_invariant_surface(lam):
    target = lam * lam / 4.0
    for orbit in (solve_period2(lam), solve_period4(lam)):
        for point in orbit.points:
            assert float(fricke_vogt(point)) == pytest.approx(target, rel=1e-9)


@pytest.mark.parametrize("lam", COUPLINGS)
def test_multiplier_closed_form_vs_numeric_jacobian(lam):
    for orbit in (solve_period2(lam), solve_period4(lam)):
        numeric = orbit_multiplier_numeric(orbit)
        # both routes carry the sign of the expanding eigenvalue
        assert abs(numeric - orbit.multiplier) <= 1e-9 * abs(numeric)
        assert orbit.lyapunov_u == pytest.approx(
            math.log(abs(orbit.multiplier)) / orbit.period, rel=1e-12
        )
        assert abs(orbit.multiplier) > 1.0  # expanding direction


def test_period4_pinned_values_at_coupling_two():
    orbit = solve_period4(2.0)
    assert orbit.parameter == pytest.approx(1.5, abs=1e-10)
    assert abs(orbit.multiplier) == pytest.approx(
        (23.0 + math.sqrt(525.0)) / 2.0, abs=1e-9
    )


def test_golden_power_identities():
    assert math.log(PHI4) == pytest.approx(4.0 * LOG_PHI, abs=1e-12)
    assert math.log(PHI6) == pytest.approx(6.0 * LOG_PHI, abs=1e-12)
    assert PHI4 == pytest.approx((7.0 + math.sqrt(45.0)) / 2.0)
    assert PHI6 == pytest.approx((18.0 + math.sqrt(320.0)) / 2.0)


def test_bound_curves_tend_to_one_at_weak_coupling():
    assert abs(bound_curve_p6label(1e-3) - 1.0) < 1e-3
    assert abs(bound_curve_p4label(1e-3) - 1.0) < 1e-3
    assert abs(gamma_closed_form(1e-3) - 0.5) < 1e-3


def test_bound_curves_decrease_with_coupling():
    grid = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
    for curve in (bound_curve_p6label, bound_curve_p4label, gamma_closed_form):
        values = [curve(lam) for lam in grid]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert all(0.0 < v <= 1.0 for v in values)


def test_gamma_curve_is_entropy_over_period2_rate():
    for lam in COUPLINGS:
        rate = solve_period2(lam).lyapunov_u
        assert gamma_closed_form(lam) == pytest.approx(LOG_PHI / rate, rel=1e-12)


def test_two_families_expand_at_distinct_rates():
    for lam in (0.5, 2.0, 8.0):
        report = cohomology_check(lam)
        assert report.distinct
        assert report.separation > 1e-6
        assert report.cubic_at_a > 0.0


def test_sweep_rows_shape_and_order():
    rows = list(orbit_sweep_rows([0.5, 1.0, 2.0]))
    assert [r[0] for r in rows] == [0.5, 1.0, 2.0]
    for row in rows:
        assert len(row) == 5
        lam, p6, p4, gamma, rate = row
        assert gamma == pytest.approx(LOG_PHI / rate, rel=1e-12)
