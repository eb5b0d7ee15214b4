"""Exact integer combinatorics of the band hierarchy.

a_{k,m} counts level-k type-A bands with visit count m, b_{k,m} the type-B
bands; the aggregates A_k = sum(m * a_{k,m}), B_k likewise, C_k = A_k + B_k
drive the density-of-states dimension limit C_k/(k F_k) -> 4/(5 + sqrt 5).
Everything is arbitrary-precision integer arithmetic; the closed form is a
true equality test, not a tolerance test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .trace import fibonacci_numbers

__all__ = [
    "CombTable",
    "build_comb_table",
    "closed_form_a",
    "comb_limit",
    "comb_rows",
    "COMB_LIMIT_EXACT",
]

COMB_LIMIT_EXACT = 4.0 / (5.0 + math.sqrt(5.0))  # 0.5527864045...


@dataclass
class CombTable:
    """Sparse (a_{k,m}, b_{k,m}) tables and their aggregates, exact ints.

    ``a[k]`` and ``b[k]`` are dicts {m: count}; rows sum to a_k = F_{k-2}
    and b_k = F_{k-1} for k >= 2.
    """

    k_max: int
    fib: list[int]
    a: list[dict[int, int]]
    b: list[dict[int, int]]
    A: list[int]
    B: list[int]
    C: list[int]

    def a_total(self, k: int) -> int:
        return sum(self.a[k].values())

    def b_total(self, k: int) -> int:
        return sum(self.b[k].values())

    def band_count(self, k: int) -> int:
        return self.a_total(k) + self.b_total(k)

    def m_distribution(self, k: int) -> dict[int, int]:
        """Visit-count histogram over all level-k bands."""
        out: dict[int, int] = {}
        for tab in (self.a[k], self.b[k]):
            for m, c in tab.items():
                out[m] = out.get(m, 0) + c
        return out

    def ratio(self, k: int) -> float:
        return self.C[k] / (k * self.fib[k])


def build_comb_table(k_max: int) -> CombTable:
    """Run the band-count recursion from a_{0,0} = 1, b_{1,0} = 1.

    a_{k,m} = b_{k-1,m-1};  b_{k,m} = a_{k-2,m-1} + 2 b_{k-2,m-1}.
    The aggregates are recomputed from raw sums, so the closed
    recursions A_k = B_{k-1} + F_{k-2}, B_k = A_{k-2} + 2B_{k-2} + F_{k-1},
    C_k = C_{k-1} + C_{k-2} + 2F_{k-2} stay independent checks.
    """
    if k_max < 2:
        raise ValueError(f"k_max must be >= 2, got {k_max}")
    fib = fibonacci_numbers(k_max)
    a: list[dict[int, int]] = [{0: 1}, {}]
    b: list[dict[int, int]] = [{}, {0: 1}]
    for k in range(2, k_max + 1):
        a.append({m + 1: c for m, c in b[k - 1].items()})
        bk: dict[int, int] = {}
        for m, c in a[k - 2].items():
            bk[m + 1] = bk.get(m + 1, 0) + c
        for m, c in b[k - 2].items():
            bk[m + 1] = bk.get(m + 1, 0) + 2 * c
        b.append(bk)
    A = [sum(m * c for m, c in row.items()) for row in a]
    B = [sum(m * c for m, c in row.items()) for row in b]
    C = [x + y for x, y in zip(A, B)]
    return CombTable(k_max=k_max, fib=fib, a=a, b=b, A=A, B=B, C=C)


def closed_form_a(k: int, m: int) -> int:
    """a_{k,m} = 2^{2k-3m-1} * (m/(k-m)) * binom(k-m, 2m-k), exact.

    Zero outside the support ceil(k/2) <= m <= floor(2k/3); the power of two
    can be negative inside the support, and the product is always integral
    (asserted via exact rational arithmetic).
    """
    if k < 1 or m < (k + 1) // 2 or m > (2 * k) // 3:
        return 0
    value = (
        Fraction(2) ** (2 * k - 3 * m - 1)
        * Fraction(m, k - m)
        * math.comb(k - m, 2 * m - k)
    )
    if value.denominator != 1:
        raise ArithmeticError(
            f"closed form for a_({k},{m}) is not integral: {value}"
        )
    return int(value)


def comb_limit(table: CombTable) -> tuple[float, float]:
    """(C_k/(k F_k) at k_max, linear-in-1/k extrapolation over top 10 levels).

    The ratio approaches 4/(5 + sqrt 5) with an O(1/k) correction, so the
    fit ratio = beta + c/k on the last ten levels recovers the limit to
    about 1e-3 already at k_max = 20.
    """
    if table.k_max < 20:
        raise ValueError(f"k_max must be >= 20 for the fit, got {table.k_max}")
    ks = np.arange(table.k_max - 9, table.k_max + 1)
    ratios = np.array([table.ratio(int(k)) for k in ks])
    slope, beta = np.polyfit(1.0 / ks, ratios, 1)
    return table.ratio(table.k_max), float(beta)


def comb_rows(table: CombTable) -> Iterator[tuple]:
    """Rows (k, F_k, a_k, b_k, A_k, B_k, C_k, C_k/(k F_k)); ratio NaN at k=0."""
    for k in range(table.k_max + 1):
        ratio = table.ratio(k) if k >= 1 else float("nan")
        yield (
            k,
            table.fib[k],
            table.a_total(k),
            table.b_total(k),
            table.A[k],
            table.B[k],
            table.C[k],
            ratio,
        )
