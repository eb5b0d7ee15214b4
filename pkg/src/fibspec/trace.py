"""Trace-map substrate: the map, its invariant, trace recursions, transfer
matrices, and the golden-mean potential.

Everything downstream (band isolation, dimension estimators, thermodynamics,
finite-operator checks) consumes these primitives.  All functions are pure:
no global state, bit-identical results regardless of call order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import TraceOverflow
from .logscale import LogScalar

__all__ = [
    "ALPHA",
    "PHI",
    "CouplingParams",
    "TraceVector",
    "TraceSequence",
    "fibonacci",
    "fibonacci_numbers",
    "fractional_part",
    "potential_value",
    "chi_word",
    "trace_map",
    "fricke_vogt",
    "line_point",
    "trace_sequence",
    "transfer_matrix",
    "a_lambda",
]

_SQRT5 = math.sqrt(5.0)
ALPHA = (_SQRT5 - 1.0) / 2.0  # inverse golden ratio, rotation number
PHI = (_SQRT5 + 1.0) / 2.0  # golden ratio

# Plain-float trace values beyond this bound are meaningless anyway; treat
# them as overflow and point the caller at signed-log mode.
_FLOAT_CAP = 1e300

Real = Union[float, complex]


def fibonacci(k: int) -> int:
    """F_k with F_0 = F_1 = 1 (so F_2 = 2, ..., F_18 = 4181); exact int.

    k = -1 is admitted with F_{-1} = 0, matching x_{-1} = cos(0) in the
    zero-coupling closed form.
    """
    if k < -1:
        raise ValueError(f"k must be >= -1, got {k}")
    a, b = 0, 1
    for _ in range(k + 1):
        a, b = b, a + b
    return a


def fibonacci_numbers(k_max: int) -> list[int]:
    """[F_0, F_1, ..., F_k_max] as exact ints."""
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    out = [1, 1]
    while len(out) <= k_max:
        out.append(out[-1] + out[-2])
    return out[: k_max + 1]


def fractional_part(v: float) -> float:
    """v - floor(v), always in [0, 1) (no negative-mod ambiguity)."""
    return v - math.floor(v)


def potential_value(lambda_: float, omega: float, n: int) -> float:
    """Site-n potential: lambda_ * chi_[1-alpha,1)(n*alpha + omega mod 1)."""
    return lambda_ if fractional_part(n * ALPHA + omega) >= 1.0 - ALPHA else 0.0


def chi_word(omega: float, length: int, start: int = 1) -> tuple[int, ...]:
    """0/1 occupation word of the potential at sites start..start+length-1."""
    return tuple(
        1 if fractional_part(n * ALPHA + omega) >= 1.0 - ALPHA else 0
        for n in range(start, start + length)
    )


@dataclass(frozen=True)
class CouplingParams:
    """Coupling constant and the constants every estimator keeps reaching for.

    ``invariant_level`` is always recomputed from lambda_, never stored.
    """

    lambda_: float

    def __post_init__(self) -> None:
        if self.lambda_ < 0:
            raise ValueError(f"lambda_ must be >= 0, got {self.lambda_}")

    @property
    def invariant_level(self) -> float:
        return self.lambda_ ** 2 / 4.0

    @property
    def alpha(self) -> float:
        return ALPHA

    @property
    def phi(self) -> float:
        return PHI


@dataclass(frozen=True)
class TraceVector:
    """A point of R^3 (or a complexified triple in oracle tests)."""

    x: Real
    y: Real
    z: Real

    def as_tuple(self) -> tuple[Real, Real, Real]:
        return (self.x, self.y, self.z)


def trace_map(v: TraceVector) -> TraceVector:
    """One step of T(x, y, z) = (2xy - z, x, y)."""
    return TraceVector(2.0 * v.x * v.y - v.z, v.x, v.y)


def fricke_vogt(v: TraceVector) -> Real:
    """G(x, y, z) = x^2 + y^2 + z^2 - 2xyz - 1, conserved by the trace map."""
    x, y, z = v.x, v.y, v.z
    return x * x + y * y + z * z - 2.0 * x * y * z - 1.0


def line_point(lambda_: float, E: Real) -> TraceVector:
    """Initial condition ((E - lambda)/2, E/2, 1); lies on G = lambda^2/4."""
    return TraceVector((E - lambda_) / 2.0, E / 2.0, 1.0)


@dataclass
class TraceSequence:
    """Trace values x_{-1}, x_0, ..., x_K along the orbit of a line point.

    ``values[i]`` is x_{i-1}; use :meth:`value` to index by subscript.  In
    ``value_mode='log'`` the values are LogScalar (needed off-spectrum where
    growth is doubly exponential); derivatives are always LogScalar.
    """

    lambda_: float
    energy: Real
    values: list
    derivatives: Optional[list] = None
    value_mode: str = "float"

    def value(self, k: int):
        """x_k for k in [-1, k_max]."""
        return self.values[k + 1]

    def derivative(self, k: int) -> LogScalar:
        """x'_k as a signed-log scalar, for k in [-1, k_max]."""
        if self.derivatives is None:
            raise ValueError("sequence was computed without derivatives")
        return self.derivatives[k + 1]

    @property
    def k_max(self) -> int:
        return len(self.values) - 2


def trace_sequence(
    lambda_: float,
    E: Real,
    k_max: int,
    with_derivatives: bool = False,
    value_mode: str = "float",
) -> TraceSequence:
    """Run x_{k+2} = 2 x_{k+1} x_k - x_{k-1} from x_{-1}=1, x_0=E/2,
    x_1=(E-lambda)/2.

    Parameters
    ----------
    value_mode : {'float', 'log'}
        'float' stores plain reals (or complex for complex E) and raises
        :class:`TraceOverflow` past 1e300; 'log' stores LogScalar values and
        never overflows (log magnitudes stay well below 1e15 for k <= 60).
    with_derivatives : bool
        Also carry x'_k via the differentiated recursion
        x'_{k+2} = 2(x'_{k+1} x_k + x_{k+1} x'_k) - x'_{k-1}, in signed-log
        arithmetic.
    """
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    if value_mode not in ("float", "log"):
        raise ValueError(f"value_mode must be 'float' or 'log', got {value_mode!r}")

    if value_mode == "log":
        if isinstance(E, complex):
            raise ValueError("log mode supports real energies only")
        vals: list = [
            LogScalar.one(),
            LogScalar.from_float(E / 2.0),
            LogScalar.from_float((E - lambda_) / 2.0),
        ]
        two = LogScalar.from_float(2.0)
        for _ in range(k_max - 1):
            vals.append(two * vals[-1] * vals[-2] - vals[-3])
    else:
        one: Real = 1.0 + 0.0j if isinstance(E, complex) else 1.0
        vals = [one, E / 2.0, (E - lambda_) / 2.0]
        for k in range(k_max - 1):
            nxt = 2.0 * vals[-1] * vals[-2] - vals[-3]
            if abs(nxt) > _FLOAT_CAP:
                raise TraceOverflow(
                    f"|x_{k + 2}| exceeds 1e300 in plain-real mode; "
                    "rerun with value_mode='log'"
                )
            vals.append(nxt)
    vals = vals[: k_max + 2]  # k_max = 0 keeps only x_{-1}, x_0

    derivs: Optional[list] = None
    if with_derivatives:
        if isinstance(E, complex):
            raise ValueError("derivative stream supports real energies only")
        if value_mode == "log":
            lvals = vals
        else:
            lvals = [LogScalar.from_float(float(v)) for v in vals]
        half = LogScalar.from_float(0.5)
        two = LogScalar.from_float(2.0)
        derivs = [LogScalar.zero(), half, half]
        while len(derivs) < len(vals):
            i = len(derivs)  # slot of x_{i-1}
            dp, dpp = derivs[i - 1], derivs[i - 2]
            xp, xpp = lvals[i - 1], lvals[i - 2]
            derivs.append(two * (dp * xpp + xp * dpp) - derivs[i - 3])
        derivs = derivs[: len(vals)]

    return TraceSequence(
        lambda_=lambda_,
        energy=E,
        values=vals,
        derivatives=derivs,
        value_mode=value_mode,
    )


def transfer_matrix(n: int, omega: float, z: Real, lambda_: float) -> np.ndarray:
    """Product of one-step matrices [[z - V(l), -1], [1, 0]] over sites.

    For n >= 1 this is T(n)...T(1); for n <= -1 the inverse of T(0)...T(n+1),
    the standard two-sided convention.  Determinant is 1 up to roundoff.
    """
    if n == 0:
        raise ValueError("n must be nonzero")
    out = np.eye(2, dtype=complex)
    if n > 0:
        for site in range(1, n + 1):
            v = potential_value(lambda_, omega, site)
            step = np.array([[z - v, -1.0], [1.0, 0.0]], dtype=complex)
            out = step @ out
    else:
        for site in range(0, n, -1):
            v = potential_value(lambda_, omega, site)
            # inverse of [[z - v, -1], [1, 0]] is [[0, 1], [-1, z - v]]
            step = np.array([[0.0, 1.0], [-1.0, z - v]], dtype=complex)
            out = out @ step
    return out


def a_lambda(lambda_: float) -> float:
    """Largest real root of x^3 - (2 + lambda) x - 1 by safeguarded Newton.

    Starts from x0 = sqrt(2 + lambda) + 1; the cubic is increasing and convex
    there, so Newton descends monotonically; a bisection fallback guards the
    bracket [sqrt(2 + lambda), x0] anyway.
    """
    if lambda_ < 0:
        raise ValueError(f"lambda_ must be >= 0, got {lambda_}")
    c = 2.0 + lambda_
    lo = math.sqrt(c)  # f(lo) = -1 < 0
    hi = lo + 1.0  # f(hi) = 2c + 3 sqrt(c) > 0
    x = hi
    for _ in range(100):
        f = x * x * x - c * x - 1.0
        if f > 0:
            hi = x
        else:
            lo = x
        df = 3.0 * x * x - c
        step = f / df
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) < 1e-16 * max(1.0, abs(x)):
            x = x_new
            break
        x = x_new
    return x
