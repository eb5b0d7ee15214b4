"""Periodic orbits of the trace map and the closed-form exponent bounds.

Two explicit orbit families live on every invariant surface: the period-2
family P_a = (a, a/(2a-1), a) and the period-4 family Q_b = (-1/2, b, -1/2).
Matching the surface invariant to lambda^2/4 selects the family parameter;
the unstable multiplier then comes from a quadratic, with an independent
numerical route through the ordered Jacobian product.  The module also
evaluates the closed-form bound curves for the Hölder/transport exponents
(verbatim formulas) and their small-coupling limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import BracketFailure, EigenFailure
from .trace import PHI, TraceVector, fricke_vogt, trace_map

__all__ = [
    "PeriodicOrbit",
    "CohomologyReport",
    "solve_period2",
    "solve_period4",
    "orbit_multiplier_numeric",
    "bound_curve_p6label",
    "bound_curve_p4label",
    "gamma_closed_form",
    "cohomology_check",
    "orbit_sweep_rows",
    "PHI4",
    "PHI6",
]

_LOG_PHI = math.log(PHI)

# phi-power identities: (7 + sqrt 45)/2 = phi^4, (18 + sqrt 320)/2 = phi^6
PHI4 = (7.0 + math.sqrt(45.0)) / 2.0
PHI6 = (18.0 + math.sqrt(320.0)) / 2.0


@dataclass
class PeriodicOrbit:
    """A finite cycle of the trace map with its unstable multiplier.

    ``multiplier`` is the largest-modulus eigenvalue of the ordered p-step
    Jacobian product (signed; |multiplier| >= 1);
    ``lyapunov_u = log|multiplier| / period``.
    """

    points: list[TraceVector]
    period: int
    multiplier: float
    lyapunov_u: float
    family: str  # "P_a", "Q_b", or "numeric"
    parameter: Optional[float] = None

    @property
    def family_tag(self) -> str:
        if self.parameter is None:
            return self.family
        return f"{self.family}({self.parameter:.12g})"

    def invariant(self) -> float:
        return float(fricke_vogt(self.points[0]))


def _quadratic_multiplier(c: float) -> float:
    """Largest-modulus root of mu^2 - c*mu + 1 = 0 (needs |c| >= 2)."""
    if abs(c) < 2.0:
        raise EigenFailure(
            f"elliptic multiplier: trace coefficient {c} lies in (-2, 2)"
        )
    s = 1.0 if c >= 0 else -1.0
    return (c + s * math.sqrt(c * c - 4.0)) / 2.0


def _orbit_points(v0: TraceVector, period: int) -> list[TraceVector]:
    pts = [v0]
    for _ in range(period - 1):
        pts.append(trace_map(pts[-1]))
    return pts


def _p2_invariant(a: float) -> float:
    """Surface invariant of P_a = (a, a/(2a-1), a); zero at a = 1."""
    w = a / (2.0 * a - 1.0)
    return 2.0 * a * a + w * w - 2.0 * a * a * w - 1.0


def solve_period2(lambda_: float) -> PeriodicOrbit:
    """Period-2 orbit on the lambda-surface: P_a with invariant lambda^2/4.

    The invariant grows monotonically from 0 at a = 1, so a geometric
    bracket expansion plus bisection pins a; the multiplier solves
    mu^2 - c*mu + 1 = 0 with c = (8a^2 - 2a + 1)/(2a - 1).  At lambda = 0
    the family degenerates to the fixed point (1, 1, 1) with mu = phi^4.
    """
    if lambda_ < 0:
        raise ValueError(f"lambda_ must be >= 0, got {lambda_}")
    target = lambda_ ** 2 / 4.0
    if target == 0.0:
        v = TraceVector(1.0, 1.0, 1.0)
        mu = PHI4
        return PeriodicOrbit(
            points=[v, v], period=2, multiplier=mu,
            lyapunov_u=math.log(mu) / 2.0, family="P_a", parameter=1.0,
        )
    lo, hi = 1.0, 2.0
    grew = False
    for _ in range(60):
        if _p2_invariant(hi) >= target:
            grew = True
            break
        hi *= 2.0
        if hi > 1e6:
            break
    if not grew:
        raise BracketFailure(
            f"period-2 invariant never reached {target} below a = 1e6"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _p2_invariant(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 4e-16 * max(1.0, hi):
            break
    a = 0.5 * (lo + hi)
    c = (8.0 * a * a - 2.0 * a + 1.0) / (2.0 * a - 1.0)
    mu = _quadratic_multiplier(c)
    v0 = TraceVector(a, a / (2.0 * a - 1.0), a)
    return PeriodicOrbit(
        points=_orbit_points(v0, 2), period=2, multiplier=mu,
        lyapunov_u=math.log(abs(mu)) / 2.0, family="P_a", parameter=a,
    )


def solve_period4(lambda_: float) -> PeriodicOrbit:
    """Period-4 orbit Q_b; b is closed-form, b = (1 + sqrt(9 + 4 lambda^2))/4.

    The invariant of Q_b is b^2 - b/2 - 1/2; matching lambda^2/4 is a
    quadratic with the printed positive root.  The multiplier solves
    mu^2 - c*mu + 1 = 0 with c = 8(1 - 2b)b + 1 (c <= -7, so mu < 0).
    """
    if lambda_ < 0:
        raise ValueError(f"lambda_ must be >= 0, got {lambda_}")
    b = (1.0 + math.sqrt(9.0 + 4.0 * lambda_ ** 2)) / 4.0
    c = 8.0 * (1.0 - 2.0 * b) * b + 1.0
    mu = _quadratic_multiplier(c)
    v0 = TraceVector(-0.5, b, -0.5)
    return PeriodicOrbit(
        points=_orbit_points(v0, 4), period=4, multiplier=mu,
        lyapunov_u=math.log(abs(mu)) / 4.0, family="Q_b", parameter=b,
    )


def trace_map_jacobian(v: TraceVector) -> np.ndarray:
    """DT at a point: [[2y, 2x, -1], [1, 0, 0], [0, 1, 0]]; det = -1."""
    return np.array(
        [
            [2.0 * v.y, 2.0 * v.x, -1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        ]
    )


def orbit_multiplier_numeric(orbit: PeriodicOrbit) -> float:
    """Multiplier from the ordered Jacobian product around the orbit.

    Validates closure, |det| = 1, and the expected spectrum pattern
    {mu, ~(+-1), 1/mu} (a neutral direction transverse to the surface
    foliation) before reporting the largest-modulus eigenvalue.
    """
    p = orbit.period
    back = orbit.points[0]
    for _ in range(p):
        back = trace_map(back)
    closure = max(
        abs(back.x - orbit.points[0].x),
        abs(back.y - orbit.points[0].y),
        abs(back.z - orbit.points[0].z),
    )
    if closure > 1e-8:
        raise EigenFailure(f"orbit does not close: defect {closure:.3e}")
    J = np.eye(3)
    for v in orbit.points:
        J = trace_map_jacobian(v) @ J
    det = np.linalg.det(J)
    if abs(abs(det) - 1.0) > 1e-9:
        raise EigenFailure(f"Jacobian product has |det| = {abs(det)}, not 1")
    eig = np.linalg.eigvals(J)
    order = np.argsort(-np.abs(eig))
    eig = eig[order]
    neutral = min(abs(eig[1] - 1.0), abs(eig[1] + 1.0))
    if neutral > 1e-6:
        raise EigenFailure(
            f"no neutral eigenvalue near +-1: middle eigenvalue {eig[1]}"
        )
    mu = eig[0]
    if abs(mu.imag) > 1e-9 * max(1.0, abs(mu.real)):
        raise EigenFailure(f"leading eigenvalue is not real: {mu}")
    return float(mu.real)


def bound_curve_p6label(lambda_: float) -> float:
    """First closed-form exponent bound curve (the "(p=6)"-labeled one).

    4 log(phi) / (log(4 lambda^2 + sqrt(16 lambda^4 + 56 lambda^2 + 45) + 7)
    - log 2); equals 1 at lambda = 0 via (7 + sqrt 45)/2 = phi^4.
    """
    if lambda_ < 0:
        raise ValueError(f"lambda_ must be >= 0, got {lambda_}")
    l2 = lambda_ * lambda_
    inner = 4.0 * l2 + math.sqrt(16.0 * l2 * l2 + 56.0 * l2 + 45.0) + 7.0
    return 4.0 * _LOG_PHI / (math.log(inner) - math.log(2.0))


def bound_curve_p4label(lambda_: float) -> float:
    """Second closed-form exponent bound curve (the "(p=4)"-labeled one).

    6 log(phi) / (log(lambda^4 + sqrt((lambda^4 + 8 lambda^2 + 18)^2 - 4)
    + 8 lambda^2 + 18) - log 2); equals 1 at lambda = 0 via
    (18 + sqrt 320)/2 = phi^6.
    """
    if lambda_ < 0:
        raise ValueError(f"lambda_ must be >= 0, got {lambda_}")
    l2 = lambda_ * lambda_
    l4 = l2 * l2
    s = l4 + 8.0 * l2 + 18.0
    inner = l4 + math.sqrt(s * s - 4.0) + 8.0 * l2 + 18.0
    return 6.0 * _LOG_PHI / (math.log(inner) - math.log(2.0))


def gamma_closed_form(lambda_: float) -> float:
    """Closed-form Hölder exponent of the integrated density of states.

    Printed-formula evaluation with I = lambda^2/4, A = sqrt(16 I + 25),
    B = sqrt(8 I - A + 5); algebraically identical to
    2 log(phi) / log(mu(P_a(lambda))), tending to 1/2 as lambda -> 0.
    The source derivation assumes small coupling; the formula is evaluated
    for any lambda > 0 and the identity with the period-2 multiplier is the
    runtime cross-check.
    """
    if lambda_ < 0:
        raise ValueError(f"lambda_ must be >= 0, got {lambda_}")
    I = lambda_ ** 2 / 4.0
    A = math.sqrt(16.0 * I + 25.0)
    B = math.sqrt(8.0 * I - A + 5.0)
    r2 = math.sqrt(2.0)
    big = (
        256.0 * I * I
        + 16.0 * (2.0 * A + 3.0 * r2 * B + r2 * A * B + 35.0) * I
        + 22.0 * A
        + 75.0 * r2 * B
        + 21.0 * r2 * A * B
        + 250.0
    )
    numer = r2 * math.sqrt(big) + 16.0 * I + A + 2.0 * r2 * B + r2 * A * B + 23.0
    denom = 2.0 * A + 2.0 * r2 * B - 2.0
    return 2.0 * _LOG_PHI / math.log(numer / denom)


@dataclass
class CohomologyReport:
    """Distinctness of the per-step expansion rates of the two families."""

    lambda_: float
    lyapunov_p2: float
    lyapunov_p4: float
    separation: float
    cubic_at_a: float  # 8a^3 - 4a + 1 at the solved period-2 parameter
    distinct: bool


def cohomology_check(lambda_: float) -> CohomologyReport:
    """Verify the two orbit families expand at genuinely different rates.

    The per-step (Lyapunov) rates of P_a and Q_b must differ -- equality
    would make the expansion cocycle cohomologically trivial across the two
    families.  Also evaluates 8a^3 - 4a + 1 (positive and increasing on
    a >= 1, value 5 at a = 1) at the solved parameter.
    """
    p2 = solve_period2(lambda_)
    p4 = solve_period4(lambda_)
    a = p2.parameter if p2.parameter is not None else 1.0
    cubic = 8.0 * a ** 3 - 4.0 * a + 1.0
    sep = abs(p2.lyapunov_u - p4.lyapunov_u)
    return CohomologyReport(
        lambda_=lambda_,
        lyapunov_p2=p2.lyapunov_u,
        lyapunov_p4=p4.lyapunov_u,
        separation=sep,
        cubic_at_a=cubic,
        distinct=sep > 1e-9,
    )


def orbit_sweep_rows(lambdas: Iterable[float]) -> Iterator[tuple]:
    """Rows (lambda, bound_p6label, bound_p4label, gamma_closed_form,
    lyapunov_p2): the two closed-form bound curves plus the period-2
    family's Lyapunov exponent curve."""
    for lam in lambdas:
        yield (
            lam,
            bound_curve_p6label(lam),
            bound_curve_p4label(lam),
            gamma_closed_form(lam),
            solve_period2(lam).lyapunov_u,
        )
