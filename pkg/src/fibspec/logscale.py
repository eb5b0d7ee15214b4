"""Signed-logarithm scalars and vectorized helpers.

Quantities built from long products of transfer-matrix entries overflow
float64 long before the levels of interest are reached.  This module keeps
track of such quantities as a sign in ``{-1, 0, +1}`` together with the
natural log of the absolute value (``-inf`` encodes zero).  Addition uses
the standard log1p trick so that sums of terms with wildly different
magnitudes stay accurate.

Two interfaces are provided:

* :class:`LogScalar` -- a small immutable scalar type with arithmetic and
  total ordering, used wherever single values cross API boundaries.
* ``slog_*`` functions -- the same arithmetic on parallel numpy arrays
  (int8 signs, float64 log magnitudes), used by the band engine for bulk
  recursions.

Precision note: storing ``log(|v|)`` in a single float64 quantizes the log
to about 1 ulp of its own magnitude, so a float -> LogScalar -> float
round trip is exact only up to a relative error of roughly
``|log(v)| * eps`` (about 2e-13 at the extremes of the float64 range,
machine epsilon near ``|v| = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LogScalar",
    "LOG_ZERO",
    "slog_from_float",
    "slog_to_float",
    "slog_mul",
    "slog_add",
    "slog_scale",
]

LOG_ZERO = float("-inf")

_EXP_MAX = math.log(1.7976931348623157e308)  # overflow threshold for exp


def _sign(v: float) -> int:
    if v > 0.0:
        return 1
    if v < 0.0:
        return -1
    return 0


@dataclass(frozen=True)
class LogScalar:
    """A real number stored as ``sign * exp(log_mag)``.

    Parameters
    ----------
    sign : int
        One of -1, 0, +1.  A sign of 0 requires ``log_mag == -inf``.
    log_mag : float
        Natural log of the absolute value; ``-inf`` for zero.
    """

    sign: int
    log_mag: float

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0 and self.log_mag != LOG_ZERO:
            raise ValueError("zero LogScalar must have log_mag == -inf")
        if math.isnan(self.log_mag):
            raise ValueError("log_mag must not be NaN")

    # --- constructors -------------------------------------------------

    @classmethod
    def from_float(cls, value: float) -> "LogScalar":
        """Build from an ordinary float (must be finite)."""
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            raise ValueError(f"value must be finite, got {value!r}")
        if value == 0.0:
            return cls(0, LOG_ZERO)
        return cls(_sign(value), math.log(abs(value)))

    @classmethod
    def zero(cls) -> "LogScalar":
        return cls(0, LOG_ZERO)

    @classmethod
    def one(cls) -> "LogScalar":
        return cls(1, 0.0)

    # --- conversions ---------------------------------------------------

    def to_float(self) -> float:
        """Convert back to a float; overflows to signed inf beyond float64."""
        if self.sign == 0:
            return 0.0
        if self.log_mag > _EXP_MAX:
            return math.inf * self.sign
        return self.sign * math.exp(self.log_mag)

    def __float__(self) -> float:
        return self.to_float()

    # --- arithmetic ----------------------------------------------------

    def __mul__(self, other: "LogScalar") -> "LogScalar":
        if not isinstance(other, LogScalar):
            return NotImplemented
        s = self.sign * other.sign
        if s == 0:
            return LogScalar(0, LOG_ZERO)
        return LogScalar(s, self.log_mag + other.log_mag)

    def __truediv__(self, other: "LogScalar") -> "LogScalar":
        if not isinstance(other, LogScalar):
            return NotImplemented
        if other.sign == 0:
            raise ZeroDivisionError("division by zero LogScalar")
        if self.sign == 0:
            return LogScalar(0, LOG_ZERO)
        return LogScalar(self.sign * other.sign, self.log_mag - other.log_mag)

    def __neg__(self) -> "LogScalar":
        return LogScalar(-self.sign, self.log_mag)

    def __abs__(self) -> "LogScalar":
        return LogScalar(abs(self.sign), self.log_mag)

    def __add__(self, other: "LogScalar") -> "LogScalar":
        if not isinstance(other, LogScalar):
            return NotImplemented
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        a, b = self.log_mag, other.log_mag
        if self.sign == other.sign:
            # log(e^a + e^b) = max + log1p(e^{-|a-b|})
            hi, lo = (a, b) if a >= b else (b, a)
            return LogScalar(self.sign, hi + math.log1p(math.exp(lo - hi)))
        # opposite signs: log|e^a - e^b| = max + log1p(-e^{-|a-b|})
        if a == b:
            return LogScalar(0, LOG_ZERO)
        if a > b:
            return LogScalar(self.sign, a + math.log1p(-math.exp(b - a)))
        return LogScalar(other.sign, b + math.log1p(-math.exp(a - b)))

    def __sub__(self, other: "LogScalar") -> "LogScalar":
        if not isinstance(other, LogScalar):
            return NotImplemented
        return self + (-other)

    def scaled(self, factor: float) -> "LogScalar":
        """Multiply by an ordinary float without leaving log space."""
        return self * LogScalar.from_float(factor)

    # --- ordering (numeric total order) ---------------------------------

    def _key(self) -> tuple[int, float]:
        # (sign, sign * log_mag) orders negatives by decreasing magnitude,
        # zero in the middle, positives by increasing magnitude.
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.log_mag)

    def __lt__(self, other: "LogScalar") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "LogScalar") -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: "LogScalar") -> bool:
        return self._key() > other._key()

    def __ge__(self, other: "LogScalar") -> bool:
        return self._key() >= other._key()

    def __repr__(self) -> str:
        return f"LogScalar(sign={self.sign}, log_mag={self.log_mag!r})"


# --- vectorized signed-log arithmetic -----------------------------------
#
# Arrays travel in pairs (sign, logmag): sign is int8 in {-1, 0, +1} and
# logmag is float64 with -inf wherever sign == 0.


def slog_from_float(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a float array into (sign, log|value|) arrays."""
    values = np.asarray(values, dtype=np.float64)
    signs = np.sign(values).astype(np.int8)
    logs = np.full(values.shape, LOG_ZERO)
    nz = signs != 0
    logs[nz] = np.log(np.abs(values[nz]))
    return signs, logs


def slog_to_float(signs: np.ndarray, logs: np.ndarray) -> np.ndarray:
    """Recombine sign/logmag arrays into floats (inf on overflow)."""
    with np.errstate(over="ignore"):
        out = np.exp(logs)
    return signs.astype(np.float64) * out


def slog_mul(
    s1: np.ndarray, l1: np.ndarray, s2: np.ndarray, l2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise product of two signed-log arrays."""
    signs = (s1 * s2).astype(np.int8)
    # zero operands carry -inf logs, so -inf + finite = -inf is already
    # right; only re-pin the slot in case both logs were non-finite.
    logs = np.where(signs == 0, LOG_ZERO, l1 + l2)
    return signs, logs


def slog_scale(
    signs: np.ndarray, logs: np.ndarray, factor: float
) -> tuple[np.ndarray, np.ndarray]:
    """Multiply a signed-log array by a scalar float."""
    fs = _sign(factor)
    if fs == 0:
        return (
            np.zeros_like(signs),
            np.full(logs.shape, LOG_ZERO),
        )
    return (signs * np.int8(fs)).astype(np.int8), logs + math.log(abs(factor))


def slog_add(
    s1: np.ndarray, l1: np.ndarray, s2: np.ndarray, l2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise sum of two signed-log arrays via the log1p trick."""
    s1 = np.asarray(s1)
    s2 = np.asarray(s2)
    l1 = np.asarray(l1, dtype=np.float64)
    l2 = np.asarray(l2, dtype=np.float64)

    same = s1 == s2
    hi = np.maximum(l1, l2)
    lo = np.minimum(l1, l2)

    out_s = np.where(l1 >= l2, s1, s2).astype(np.int8)
    out_l = np.empty(np.broadcast(l1, l2).shape, dtype=np.float64)

    with np.errstate(invalid="ignore", divide="ignore"):
        # same sign (or either zero): log(e^hi + e^lo)
        add_l = np.logaddexp(l1, l2)
        # opposite signs: log|e^hi - e^lo|; hi == lo gives log1p(-1) = -inf
        diff_l = hi + np.log1p(-np.exp(lo - hi))

    # logaddexp(-inf, -inf) = -inf already; diff of equal magnitudes -> -inf
    out_l = np.where(same, add_l, diff_l)
    # either operand zero: result is the other operand regardless of sign
    z1 = s1 == 0
    z2 = s2 == 0
    out_l = np.where(z1, l2, out_l)
    out_l = np.where(z2 & ~z1, l1, out_l)
    out_s = np.where(z1, s2, out_s).astype(np.int8)
    out_s = np.where(z2 & ~z1, s1, out_s).astype(np.int8)
    # exact cancellation
    cancel = (~same) & ~z1 & ~z2 & (l1 == l2)
    out_s = np.where(cancel, np.int8(0), out_s).astype(np.int8)
    out_l = np.where(cancel, LOG_ZERO, out_l)
    # NaN scrub: hi = -inf with opposite signs yields NaN from -inf - -inf
    bad = np.isnan(out_l)
    if np.any(bad):
        out_l = np.where(bad, LOG_ZERO, out_l)
        out_s = np.where(bad, np.int8(0), out_s).astype(np.int8)
    return out_s, out_l
