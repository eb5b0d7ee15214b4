"""Band isolation for the level-k spectral approximants.

The level-k approximant is the set {E : |x_k(E)| <= 1}; it consists of
exactly F_k disjoint closed intervals ("bands"), each containing exactly one
simple root of x_k.  This module finds all of them, polishes the roots,
locates the |x_k| = 1 band edges, attaches root derivatives (signed-log, the
growth is exponential in k), Raymond types, parent lineage, and membership
counts -- the raw material for every dimension and transport estimator.

Two discovery strategies:

* lambda > 4: recursive bracketing down the band hierarchy.  A type-B band
  at level k-1 holds exactly one root of x_k; a type-A band at level k-2
  holds one; a type-B band at level k-2 holds two, separated by its unique
  type-A child band at level k-1.  Brackets are verified (sign change at the
  ends) and rescued by local subdivision if roundoff blurs an endpoint.
* 0 < lambda <= 4: adaptive uniform scan of the union of level-(k-1) and
  level-(k-2) bands (every level-k root lies in that union), with grid
  doubling until the sign-change count reaches F_k.

All bulk evaluation is vectorized; plain-float trace values are clamped at
1e120, which preserves signs in the escape regime (there
sign(x_{j+2}) = sign(x_{j+1} x_j), unaffected by magnitude capping) while
on-band values stay far below the cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Optional

import numpy as np

from .errors import (
    BandCountMismatch,
    DimensionTooLarge,
    DomainError,
    NotApplicable,
    StructureViolation,
)
from .logscale import LOG_ZERO, LogScalar, slog_add, slog_from_float, slog_mul, slog_scale
from .trace import fibonacci, fibonacci_numbers, potential_value

__all__ = [
    "Band",
    "BandHierarchy",
    "compute_bands",
    "classify_bands",
    "root_derivatives",
    "derivative_log_stats",
    "sandwich_violations",
    "twisted_eigen_roots",
    "koebe_radius_bounds",
    "trace_values",
    "trace_joint_slog",
    "band_membership_counts",
    "band_sign_changes",
    "band_rows",
]

_CLAMP = 1e120
_MEMBER_TOL = 1e-9  # |x_j(root)| <= 1 + tol counts as membership
_SEP_MARGIN = 1e-9  # separator must clear |x_k| > 1 + margin
_ROOT_RESIDUAL = 1e-11  # backward-error criterion for polished roots


# --- vectorized trace evaluation -----------------------------------------


def trace_values(
    lambda_: float, E: np.ndarray, k: int, clamp: float = _CLAMP
) -> np.ndarray:
    """x_k at each energy, as clamped floats.

    Clamping at ``clamp`` keeps the escape-regime recursion inside float64;
    signs (all that matters out there) are unaffected.
    """
    E = np.asarray(E, dtype=np.float64)
    if k == -1:
        return np.ones_like(E)
    a = np.ones_like(E)  # x_{-1}
    b = E / 2.0  # x_0
    if k == 0:
        return b
    c = (E - lambda_) / 2.0  # x_1
    for _ in range(k - 1):
        a, b, c = b, c, np.clip(2.0 * c * b - a, -clamp, clamp)
    return c


def trace_joint_slog(
    lambda_: float, E: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """x_k and x'_k at each energy in signed-log form.

    Returns (sign_x, log|x|, sign_x', log|x'|); overflow-free at any level.
    """
    E = np.asarray(E, dtype=np.float64)
    shape = E.shape
    sv = [
        (np.ones(shape, dtype=np.int8), np.zeros(shape)),  # x_{-1} = 1
        slog_from_float(E / 2.0),
        slog_from_float((E - lambda_) / 2.0),
    ]
    half = math.log(0.5)
    dv = [
        (np.zeros(shape, dtype=np.int8), np.full(shape, LOG_ZERO)),  # x'_{-1}
        (np.ones(shape, dtype=np.int8), np.full(shape, half)),  # x'_0
        (np.ones(shape, dtype=np.int8), np.full(shape, half)),  # x'_1
    ]
    if k <= 1:
        (sx, lx), (sd, ld) = sv[k + 1], dv[k + 1]
        return sx, lx, sd, ld
    (sa, la), (sb, lb), (sc, lc) = sv
    (da_s, da_l), (db_s, db_l), (dc_s, dc_l) = dv
    for _ in range(k - 1):
        # value: x_new = 2 * x_c * x_b - x_a
        vs, vl = slog_mul(sc, lc, sb, lb)
        vs, vl = slog_scale(vs, vl, 2.0)
        vs, vl = slog_add(vs, vl, (-sa).astype(np.int8), la)
        # derivative: d_new = 2 * (d_c * x_b + x_c * d_b) - d_a
        t1s, t1l = slog_mul(dc_s, dc_l, sb, lb)
        t2s, t2l = slog_mul(sc, lc, db_s, db_l)
        ds, dl = slog_add(t1s, t1l, t2s, t2l)
        ds, dl = slog_scale(ds, dl, 2.0)
        ds, dl = slog_add(ds, dl, (-da_s).astype(np.int8), da_l)
        sa, la, sb, lb, sc, lc = sb, lb, sc, lc, vs, vl
        da_s, da_l, db_s, db_l, dc_s, dc_l = db_s, db_l, dc_s, dc_l, ds, dl
    return sc, lc, dc_s, dc_l


def band_membership_counts(lambda_: float, roots: np.ndarray, k: int) -> np.ndarray:
    """For each root, the number of j in [0, k-1] with |x_j(root)| <= 1.

    This is the visit count m that drives the derivative sandwich
    S_l^m <= 2|x_k'| <= S_u^m and the (a_{k,m}, b_{k,m}) combinatorics.
    The j = 0 approximant [-2, 2] participates: dropping it breaks the
    sandwich at every coupling tested.
    """
    E = np.asarray(roots, dtype=np.float64)
    counts = np.zeros(E.shape, dtype=np.int64)
    if k <= 0:
        return counts
    a = np.ones_like(E)
    b = E / 2.0
    counts += np.abs(b) <= 1.0 + _MEMBER_TOL  # j = 0
    if k == 1:
        return counts
    c = (E - lambda_) / 2.0
    counts += np.abs(c) <= 1.0 + _MEMBER_TOL  # j = 1
    for _ in range(2, k):  # j = 2 .. k-1
        a, b, c = b, c, np.clip(2.0 * c * b - a, -_CLAMP, _CLAMP)
        counts += np.abs(c) <= 1.0 + _MEMBER_TOL
    return counts


def sandwich_violations(h: BandHierarchy) -> list[tuple[int, int, float, float]]:
    """Bands violating S_l^m <= 2|x_k'| <= S_u^m, as (level, index, lo, hi) gaps.

    The derivative of the full trace (twice the stored half-trace derivative)
    is the sandwiched quantity; m is the band's visit count.  The lower
    constant requires lambda >= 8, the upper lambda > 4.  An empty list is
    the expected outcome.
    """
    lam = h.lambda_
    if lam < 8.0:
        raise NotApplicable(f"derivative sandwich requires lambda >= 8, got {lam}")
    s_l = 0.5 * ((lam - 4.0) + math.sqrt((lam - 4.0) ** 2 - 12.0))
    s_u = 2.0 * lam + 22.0
    log2 = math.log(2.0)
    out = []
    for bands in h.levels:
        for b in bands:
            lg = b.deriv.log_mag + log2
            lo_gap = lg - b.m_count * math.log(s_l)
            hi_gap = b.m_count * math.log(s_u) - lg
            if lo_gap < -1e-9 or hi_gap < -1e-9:
                out.append((b.level, b.index, lo_gap, hi_gap))
    return out


# --- data model -----------------------------------------------------------


@dataclass
class Band:
    """One connected component of the level-k approximant."""

    level: int
    index: int  # 1-based, left to right
    left: float
    right: float
    root: float
    deriv: LogScalar  # |x_k'(root)|
    band_type: str = "untyped"  # "A", "B", or "untyped"
    parent: Optional[tuple[int, int]] = None  # (level, index)
    m_count: int = 0

    @property
    def interval(self) -> tuple[float, float]:
        return (self.left, self.right)

    @property
    def width(self) -> float:
        return self.right - self.left


@dataclass
class BandHierarchy:
    """Per-level band lists for a fixed coupling, levels 0..k_max."""

    lambda_: float
    levels: list[list[Band]]

    @property
    def delta_cap(self) -> float:
        return self.lambda_ ** 2 / 4.0

    @property
    def k_max(self) -> int:
        return len(self.levels) - 1

    def bands(self, k: int) -> list[Band]:
        return self.levels[k]


# --- root bracketing, bisection, polish -----------------------------------


def _bisect_roots(
    lambda_: float,
    k: int,
    lo: np.ndarray,
    hi: np.ndarray,
    s_lo: np.ndarray,
    width: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Shrink sign-change brackets below ``width`` by vectorized bisection."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(80):
        if np.max(hi - lo) <= width:
            break
        mid = 0.5 * (lo + hi)
        s = np.sign(trace_values(lambda_, mid, k))
        exact = s == 0
        move_lo = s == s_lo
        lo = np.where(move_lo, mid, lo)
        hi = np.where(move_lo, hi, mid)
        lo = np.where(exact, mid, lo)
        hi = np.where(exact, mid, hi)
    return lo, hi


def _polish_roots(
    lambda_: float, k: int, lo: np.ndarray, hi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Newton-polish one root per bracket; returns (roots, log|x_k'|).

    Newton steps use the jointly recursed derivative in signed-log form (the
    derivative overflows float64 at large k); a step that would leave its
    bracket is replaced by the bracket midpoint.  Two steps are standard;
    up to three more run only for lanes still failing the backward-error
    residual |x_k| < 1e-11 * |x_k'| * max(1, |root|).
    """
    root = 0.5 * (lo + hi)
    log_tol = math.log(_ROOT_RESIDUAL)
    ld = None
    for it in range(5):
        sx, lx, sd, ld = trace_joint_slog(lambda_, root, k)
        ok = lx <= ld + np.log(np.maximum(1.0, np.abs(root))) + log_tol
        if it >= 2 and bool(np.all(ok)):
            break
        with np.errstate(over="ignore"):
            step = -(sx * sd).astype(np.float64) * np.exp(lx - ld)
        cand = root + step
        inside = (cand > lo) & (cand < hi)
        root = np.where(inside, cand, 0.5 * (lo + hi))
        lo = np.minimum(lo, root)
        hi = np.maximum(hi, root)
    sx, lx, sd, ld = trace_joint_slog(lambda_, root, k)
    if np.any(sd == 0):
        raise StructureViolation(
            f"vanishing x_k' at a level-{k} root: roots are expected simple"
        )
    bad = lx > ld + np.log(np.maximum(1.0, np.abs(root))) + log_tol
    if np.any(bad):
        # double precision has hit its noise floor (backward error ~ eps
        # times accumulated amplification); finish those lanes in extended
        # precision, where the floor sits three orders lower
        r_fix, ld_fix = _polish_longdouble(lambda_, k, root[bad])
        root = root.copy()
        ld = ld.copy()
        root[bad] = r_fix
        ld[bad] = ld_fix
    return root, ld


def _polish_longdouble(
    lambda_: float, k: int, roots: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Extended-precision Newton finish for roots stuck at the float64 floor.

    Near a level-k root every visited trace value is bounded (the orbit is
    non-escaping up to level k) and |x_k'| stays far below the extended
    range, so the plain joint recursion is overflow-safe here.
    """
    lam = np.longdouble(lambda_)

    def joint(E: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a = np.ones_like(E)
        b = E / 2
        c = (E - lam) / 2
        da = np.zeros_like(E)
        db = np.full_like(E, 0.5)
        dc = np.full_like(E, 0.5)
        if k == 0:
            return b, db
        for _ in range(k - 1):
            nv = 2 * c * b - a
            nd = 2 * (dc * b + c * db) - da
            a, b, c = b, c, nv
            da, db, dc = db, dc, nd
        return c, dc

    E = roots.astype(np.longdouble)
    for _ in range(4):
        x, dx = joint(E)
        E = E - x / dx
    out = E.astype(np.float64)
    x, dx = joint(out.astype(np.longdouble))
    resid_ok = np.abs(x) <= _ROOT_RESIDUAL * np.abs(dx) * np.maximum(
        1.0, np.abs(out)
    )
    if not np.all(resid_ok):
        worst = float(np.max(np.abs(x / dx)[~resid_ok]))
        raise StructureViolation(
            f"root polish at level {k} missed the residual target even in "
            f"extended precision (worst backward error {worst:.3e})"
        )
    with np.errstate(divide="ignore"):
        ld = np.log(np.abs(dx)).astype(np.float64)
    return out, ld


# --- band-edge solver ------------------------------------------------------


def _outer_separator(lambda_: float, k: int, side: int) -> float:
    """A point beyond the outermost band where |x_k| > 1 (side = -1 or +1)."""
    base = -2.0 if side < 0 else 2.0 + lambda_
    h = 1e-9 * (4.0 + lambda_)
    for _ in range(200):
        pt = base + side * h
        if abs(float(trace_values(lambda_, np.array([pt]), k)[0])) > 1.0 + _SEP_MARGIN:
            return pt
        h *= 4.0
    raise StructureViolation(
        f"could not find an outer separator at level {k} (side {side:+d})"
    )


def _interior_separators(
    lambda_: float, k: int, roots: np.ndarray, t_lobe: np.ndarray
) -> np.ndarray:
    """One point strictly between consecutive roots where |x_k| > 1.

    Tries a fixed probe grid per gap first; remaining gaps fall back to a
    derivative-sign bisection toward the single interior extremum of x_k
    (whose magnitude exceeds 1 + lambda^2/4), stopping early at any probe
    with |x_k| > 1.
    """
    lo = roots[:-1]
    hi = roots[1:]
    n = lo.size
    q = np.full(n, np.nan)
    if n == 0:
        return q

    w = (np.arange(1, 18, dtype=np.float64)) / 18.0
    pts = lo[:, None] + (hi - lo)[:, None] * w[None, :]
    vals = np.abs(trace_values(lambda_, pts.ravel(), k)).reshape(n, w.size)
    hit = vals > 1.0 + _SEP_MARGIN
    has = hit.any(axis=1)
    first = np.argmax(hit, axis=1)
    q[has] = pts[np.arange(n), first][has]

    todo = ~has
    if np.any(todo):
        g_lo = lo[todo].copy()
        g_hi = hi[todo].copy()
        t = t_lobe[todo]
        found = np.full(g_lo.shape, np.nan)
        active = np.ones(g_lo.shape, dtype=bool)
        for _ in range(90):
            if not np.any(active):
                break
            mid = 0.5 * (g_lo + g_hi)
            sx, lx, sd, _ld = trace_joint_slog(lambda_, mid, k)
            clear = active & (lx > math.log1p(_SEP_MARGIN))
            found[clear] = mid[clear]
            active &= ~clear
            tiny = active & (g_hi - g_lo <= 4e-16 * np.maximum(1.0, np.abs(mid)))
            # converged onto the extremum itself; its magnitude exceeds
            # 1 + lambda^2/4, so accept the midpoint
            found[tiny] = mid[tiny]
            active &= ~tiny
            rising = sd == t
            g_lo = np.where(active & rising, mid, g_lo)
            g_hi = np.where(active & ~rising, mid, g_hi)
        if np.any(active) or np.any(np.isnan(found)):
            raise StructureViolation(
                f"gap separator search failed at level {k}"
            )
        q[todo] = found
    return q


def _band_edges(
    lambda_: float, k: int, roots: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Left/right |x_k| = 1 crossings for every root, via sign bisection.

    Between a root and a separator point with |x_k| > 1 the level-1 crossing
    of |x_k| is unique (single interior extremum per gap), so plain bisection
    on sign(t * x_k - 1) converges to the band edge.
    """
    n = roots.size
    # lobe sign of x_k between root j and root j+1 (lobe 0 left of all roots):
    # the leading coefficient is positive, so the rightmost lobe is +1.
    t = np.array([(-1.0) ** (n - j) for j in range(n + 1)])
    q = np.empty(n + 1)
    q[0] = _outer_separator(lambda_, k, -1)
    q[n] = _outer_separator(lambda_, k, +1)
    if n > 1:
        q[1:n] = _interior_separators(lambda_, k, roots, t[1:n])

    # lanes: n left edges then n right edges
    pos = np.concatenate([q[:n], q[1:]])  # side with t*x - 1 > 0
    neg = np.concatenate([roots, roots])  # side with t*x - 1 = -1 < 0
    targ = np.concatenate([t[:n], t[1:]])
    for _ in range(90):
        if np.max(np.abs(pos - neg)) <= 1e-16 * max(1.0, float(np.max(np.abs(roots)))):
            break
        mid = 0.5 * (pos + neg)
        g = targ * trace_values(lambda_, mid, k) - 1.0
        pos = np.where(g >= 0.0, mid, pos)
        neg = np.where(g >= 0.0, neg, mid)
    edge = 0.5 * (pos + neg)
    left = np.minimum(edge[:n], roots)
    right = np.maximum(edge[n:], roots)
    # collapsed bands at extreme (lambda, k): keep the interval strictly
    # around the root (true edges are within one ulp)
    left = np.where(left >= roots, np.nextafter(roots, -np.inf), left)
    right = np.where(right <= roots, np.nextafter(roots, np.inf), right)
    return left, right


# --- discovery: hierarchy (lambda > 4) and scan (lambda <= 4) ---------------


def _verify_brackets(
    lambda_: float,
    k: int,
    lo: np.ndarray,
    hi: np.ndarray,
    expected: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Check one sign change per bracket; rescue blurred ones by subdivision."""
    s_lo = np.sign(trace_values(lambda_, lo, k))
    s_hi = np.sign(trace_values(lambda_, hi, k))
    ok = s_lo * s_hi < 0
    if np.all(ok):
        return lo, hi, s_lo
    lo = lo.copy()
    hi = hi.copy()
    s_lo = s_lo.copy()
    for i in np.nonzero(~ok)[0]:
        n = 129
        for _ in range(4):
            grid = np.linspace(lo[i], hi[i], n)
            s = np.sign(trace_values(lambda_, grid, k))
            nz = s != 0
            g, sg = grid[nz], s[nz]
            flips = np.nonzero(sg[:-1] * sg[1:] < 0)[0]
            if flips.size == 1:
                j = flips[0]
                lo[i], hi[i], s_lo[i] = g[j], g[j + 1], sg[j]
                break
            if flips.size > 1:
                raise StructureViolation(
                    f"bracket at level {k} holds {flips.size} roots, expected 1"
                )
            n = 4 * (n - 1) + 1
        else:
            raise BandCountMismatch(k, expected - 1, expected, refinement=4)
    return lo, hi, s_lo


def _hierarchy_brackets(
    levels: list[list[Band]], k: int
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]], list[str]]:
    """Brackets for level k from the typed structure at levels k-1, k-2."""
    prev1 = levels[k - 1]
    prev2 = levels[k - 2]
    a_child: dict[int, Band] = {}
    for c in prev1:
        if c.band_type == "A" and c.parent is not None and c.parent[0] == k - 2:
            a_child[c.parent[1]] = c
    lo: list[float] = []
    hi: list[float] = []
    parents: list[tuple[int, int]] = []
    types: list[str] = []
    for b in prev1:
        if b.band_type == "B":
            lo.append(b.left)
            hi.append(b.right)
            parents.append((k - 1, b.index))
            types.append("A")
    for b in prev2:
        if b.band_type == "A":
            lo.append(b.left)
            hi.append(b.right)
            parents.append((k - 2, b.index))
            types.append("B")
        else:
            c = a_child.get(b.index)
            if c is None:
                raise StructureViolation(
                    f"type-B band ({k - 2}, {b.index}) lacks its type-A child",
                )
            for span in ((b.left, c.left), (c.right, b.right)):
                lo.append(span[0])
                hi.append(span[1])
                parents.append((k - 2, b.index))
                types.append("B")
    return np.array(lo), np.array(hi), parents, types


def _merged_scan_intervals(levels: list[list[Band]], k: int) -> list[tuple[float, float]]:
    """Union of level-(k-1) and level-(k-2) bands, padded and merged."""
    spans = []
    for b in levels[k - 1] + levels[k - 2]:
        pad = 1e-12 + 1e-9 * b.width
        spans.append((b.left - pad, b.right + pad))
    spans.sort()
    merged = [list(spans[0])]
    for lo, hi in spans[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def _scan_brackets(
    lambda_: float,
    levels: list[list[Band]],
    k: int,
    expected: int,
    base_points: int,
    max_refinements: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sign-change brackets for level k by adaptive scan of the parent union."""
    intervals = _merged_scan_intervals(levels, k)
    ivs = np.array(intervals)
    n = base_points
    found = -1
    for _ in range(max_refinements + 1):
        if ivs.shape[0] * n > 6e7:
            break
        w = np.linspace(0.0, 1.0, n)
        grid = ivs[:, :1] + (ivs[:, 1:] - ivs[:, :1]) * w[None, :]
        s = np.sign(trace_values(lambda_, grid.ravel(), k)).reshape(grid.shape)
        zero = s == 0
        if np.any(zero):
            step = (ivs[:, 1] - ivs[:, 0]) / (n - 1)
            nudged = grid + zero * step[:, None] * 1e-3
            s = np.where(
                zero,
                np.sign(trace_values(lambda_, nudged.ravel(), k)).reshape(grid.shape),
                s,
            )
            grid = np.where(zero, nudged, grid)
        flip = s[:, :-1] * s[:, 1:] < 0
        found = int(np.count_nonzero(flip))
        if found == expected:
            rows, cols = np.nonzero(flip)
            return grid[rows, cols], grid[rows, cols + 1], s[rows, cols]
        n = 2 * (n - 1) + 1
    raise BandCountMismatch(k, found, expected, refinement=2)


def _assemble_level(
    lambda_: float,
    k: int,
    lo: np.ndarray,
    hi: np.ndarray,
    s_lo: np.ndarray,
    parents: Optional[list[tuple[int, int]]],
    types: Optional[list[str]],
    expected: int,
) -> list[Band]:
    """Bisect + polish + edges + membership, then build sorted Band records."""
    b_lo, b_hi = _bisect_roots(lambda_, k, lo, hi, s_lo)
    roots, log_derivs = _polish_roots(lambda_, k, b_lo, b_hi)
    order = np.argsort(roots)
    roots = roots[order]
    log_derivs = log_derivs[order]
    if np.any(np.diff(roots) <= 0):
        raise BandCountMismatch(
            k, int(np.unique(roots).size), expected, refinement=2
        )
    left, right = _band_edges(lambda_, k, roots)
    m_counts = band_membership_counts(lambda_, roots, k)
    bands = []
    for j in range(expected):
        src = int(order[j])
        bands.append(
            Band(
                level=k,
                index=j + 1,
                left=float(left[j]),
                right=float(right[j]),
                root=float(roots[j]),
                deriv=LogScalar(1, float(log_derivs[j])),
                band_type=types[src] if types is not None else "untyped",
                parent=parents[src] if parents is not None else None,
                m_count=int(m_counts[j]),
            )
        )
    return bands


def _closed_levels(lambda_: float, typed: bool) -> list[list[Band]]:
    """Levels 0 and 1 in closed form: x_0 = E/2, x_1 = (E - lambda)/2."""
    half = LogScalar.from_float(0.5)
    b0 = Band(
        level=0, index=1, left=-2.0, right=2.0, root=0.0, deriv=half,
        band_type="A" if typed else "untyped", parent=None, m_count=0,
    )
    b1 = Band(
        level=1, index=1, left=lambda_ - 2.0, right=lambda_ + 2.0, root=lambda_,
        deriv=half, band_type="B" if typed else "untyped", parent=None, m_count=0,
    )
    return [[b0], [b1]]


def compute_bands(
    lambda_: float,
    k_max: int,
    base_points: int = 33,
    max_refinements: int = 12,
) -> BandHierarchy:
    """Isolate all F_k bands for every level k <= k_max.

    Roots are refined to backward error 1e-11 (residual |x_k| below
    1e-11 * |x_k'| * max(1, |root|)); band edges solve |x_k| = 1 inside the
    adjacent gaps.  Raises :class:`BandCountMismatch` if the scan density
    cannot resolve all sign changes (the exception carries the refinement
    factor to retry with).
    """
    if lambda_ <= 0:
        raise DomainError(f"lambda_ must be positive, got {lambda_}")
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    hierarchical = lambda_ > 4.0
    levels = _closed_levels(lambda_, typed=hierarchical)
    fibs = fibonacci_numbers(max(k_max, 1))
    for k in range(2, k_max + 1):
        expected = fibs[k]
        if hierarchical:
            lo, hi, parents, types = _hierarchy_brackets(levels, k)
            if lo.size != expected:
                raise StructureViolation(
                    f"hierarchy spawned {lo.size} brackets at level {k}, "
                    f"expected {expected}"
                )
            lo, hi, s_lo = _verify_brackets(lambda_, k, lo, hi, expected)
        else:
            lo, hi, s_lo = _scan_brackets(
                lambda_, levels, k, expected, base_points, max_refinements
            )
            parents = types = None
        bands = _assemble_level(
            lambda_, k, lo, hi, s_lo, parents, types, expected
        )
        if parents is None:
            _attach_scan_parents(bands, levels, k)
        levels.append(bands)
    return BandHierarchy(lambda_=lambda_, levels=levels[: k_max + 1])


def _attach_scan_parents(
    bands: list[Band], levels: list[list[Band]], k: int
) -> None:
    """Parent = enclosing band at level k-1, else at level k-2 (scan mode)."""
    for prev_level in (k - 1, k - 2):
        prev = levels[prev_level]
        lefts = np.array([b.left for b in prev])
        rights = np.array([b.right for b in prev])
        for band in bands:
            if band.parent is not None:
                continue
            i = int(np.searchsorted(lefts, band.root) - 1)
            if 0 <= i < len(prev) and band.root <= rights[i]:
                band.parent = (prev_level, prev[i].index)


# --- classification ---------------------------------------------------------


def classify_bands(h: BandHierarchy) -> BandHierarchy:
    """Type every band A or B and validate the nesting structure.

    Types are re-derived from scratch (A iff |x_{k-1}(root)| <= 1) and
    cross-checked against any constructive types already present, the
    Fibonacci count split (a_k = F_{k-2}, b_k = F_{k-1}), and the
    containment rules: an A-band holds exactly one level-(k+2) B-band and
    nothing from level k+1; a B-band holds exactly one level-(k+1) A-band
    and two level-(k+2) B-bands.
    """
    if h.lambda_ <= 4.0:
        raise NotApplicable(
            f"Raymond typing requires lambda > 4, got {h.lambda_}"
        )
    if h.k_max < 2:
        raise ValueError("classification needs at least levels 0..2")
    fibs = fibonacci_numbers(h.k_max)
    new_levels: list[list[Band]] = []
    for k, bands in enumerate(h.levels):
        roots = np.array([b.root for b in bands])
        prev_vals = np.abs(trace_values(h.lambda_, roots, k - 1))
        prev2_vals = (
            np.abs(trace_values(h.lambda_, roots, k - 2)) if k >= 1 else None
        )
        typed = []
        for j, b in enumerate(bands):
            in_prev = prev_vals[j] <= 1.0 + _MEMBER_TOL
            t = "A" if in_prev else "B"
            if prev2_vals is not None:
                in_prev2 = prev2_vals[j] <= 1.0 + _MEMBER_TOL
                if in_prev == in_prev2:
                    raise StructureViolation(
                        f"band sits in {'both' if in_prev else 'neither'} of "
                        f"the two previous approximants",
                        band=(k, b.index),
                    )
            if b.band_type != "untyped" and b.band_type != t:
                raise StructureViolation(
                    "constructive type disagrees with membership typing",
                    band=(k, b.index),
                )
            typed.append(replace(b, band_type=t))
        a_k = sum(1 for b in typed if b.band_type == "A")
        b_k = sum(1 for b in typed if b.band_type == "B")
        exp_a = 1 if k == 0 else (0 if k == 1 else fibs[k - 2])
        exp_b = 0 if k == 0 else fibs[k - 1]
        if (a_k, b_k) != (exp_a, exp_b):
            raise StructureViolation(
                f"level {k} type counts (a, b) = ({a_k}, {b_k}), "
                f"expected ({exp_a}, {exp_b})"
            )
        new_levels.append(typed)

    _check_containment(new_levels)
    return BandHierarchy(lambda_=h.lambda_, levels=new_levels)


def _contained(levels: list[list[Band]], k: int, lo: float, hi: float) -> list[Band]:
    """Bands at level k whose roots lie in [lo, hi]."""
    roots = np.array([b.root for b in levels[k]])
    i0 = int(np.searchsorted(roots, lo, side="left"))
    i1 = int(np.searchsorted(roots, hi, side="right"))
    return levels[k][i0:i1]


def _check_containment(levels: list[list[Band]]) -> None:
    k_max = len(levels) - 1
    for k in range(k_max - 1):
        for b in levels[k]:
            inside1 = _contained(levels, k + 1, b.left, b.right)
            inside2 = (
                _contained(levels, k + 2, b.left, b.right)
                if k + 2 <= k_max
                else None
            )
            if b.band_type == "A":
                if inside1:
                    raise StructureViolation(
                        "type-A band contains next-level bands",
                        band=(k, b.index),
                    )
                if inside2 is not None and (
                    len(inside2) != 1 or inside2[0].band_type != "B"
                ):
                    raise StructureViolation(
                        "type-A band must hold exactly one type-B band two "
                        "levels down",
                        band=(k, b.index),
                    )
            else:
                if len(inside1) != 1 or inside1[0].band_type != "A":
                    raise StructureViolation(
                        "type-B band must hold exactly one type-A band one "
                        "level down",
                        band=(k, b.index),
                    )
                if inside2 is not None and (
                    len(inside2) != 2
                    or any(c.band_type != "B" for c in inside2)
                ):
                    raise StructureViolation(
                        "type-B band must hold exactly two type-B bands two "
                        "levels down",
                        band=(k, b.index),
                    )


# --- derivative reports, eigensolver backend, radius bounds -----------------


def root_derivatives(h: BandHierarchy, level: int) -> list[tuple[float, LogScalar]]:
    """(root, |x_k'(root)|) for every band at the given level."""
    if level < 0 or level > h.k_max:
        raise ValueError(f"level {level} not computed (k_max = {h.k_max})")
    return [(b.root, b.deriv) for b in h.levels[level]]


def derivative_log_stats(h: BandHierarchy, level: int) -> tuple[float, float, float]:
    """(min, max, sum) of log|x_k'| over level-k roots.

    The sum runs left to right so results are bit-reproducible.
    """
    logs = [b.deriv.log_mag for b in h.levels[level]]
    if not logs:
        raise ValueError(f"no bands at level {level}")
    total = 0.0
    for v in logs:
        total += v
    return min(logs), max(logs), total


def twisted_eigen_roots(lambda_: float, k: int) -> np.ndarray:
    """Roots of x_k as eigenvalues of the twisted F_k-site approximant.

    The F_k-site periodic operator with boundary phase e^{i pi/2} has
    discriminant 2 x_k(E) = 2 cos(pi/2) = 0, so its spectrum is exactly the
    root set.  The matrix is Hermitian by construction; this is the
    validation backend for the recursion-based roots.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k > 16:
        raise DimensionTooLarge(
            f"twisted eigensolver capped at k = 16 (F_16 = 2584), got k = {k}"
        )
    n = fibonacci(k)
    H = np.zeros((n, n), dtype=complex)
    for i in range(n):
        H[i, i] = potential_value(lambda_, 0.0, i + 1)
    for i in range(n - 1):
        H[i, i + 1] += 1.0
        H[i + 1, i] += 1.0
    H[0, n - 1] += 1j
    H[n - 1, 0] += -1j
    return np.linalg.eigvalsh(H)


def koebe_radius_bounds(
    delta: float, min_deriv: LogScalar, lambda_: float
) -> tuple[LogScalar, LogScalar]:
    """Distortion-type scalar bounds tied to the minimal root derivative.

    For 0 < delta < lambda^2/8 returns
    ``lower = (delta / ((1+delta)(1+2delta)))^2 * min_deriv`` and
    ``upper = ((2+3delta)^2 / ((1+delta)(1+2delta)^2)) * min_deriv``;
    lower <= upper always, and as delta -> 0 the pair tends to
    (0, 4 * min_deriv).
    """
    if not 0.0 < delta < lambda_ ** 2 / 8.0:
        raise DomainError(
            f"delta must lie in (0, lambda^2/8) = (0, {lambda_ ** 2 / 8.0}), "
            f"got {delta}"
        )
    lower_c = (delta / ((1.0 + delta) * (1.0 + 2.0 * delta))) ** 2
    upper_c = (2.0 + 3.0 * delta) ** 2 / ((1.0 + delta) * (1.0 + 2.0 * delta) ** 2)
    return min_deriv.scaled(lower_c), min_deriv.scaled(upper_c)


# --- diagnostics and export --------------------------------------------------


def band_sign_changes(
    lambda_: float, bands: list[Band], k: int, points: int = 32
) -> np.ndarray:
    """Sign changes of x_k on a uniform probe inside each band.

    The expected value is exactly 1 everywhere; anything else is reported,
    not refined away.
    """
    counts = np.zeros(len(bands), dtype=np.int64)
    if not bands:
        return counts
    lo = np.array([b.left for b in bands])
    hi = np.array([b.right for b in bands])
    w = np.linspace(0.0, 1.0, points)
    grid = lo[:, None] + (hi - lo)[:, None] * w[None, :]
    s = np.sign(trace_values(lambda_, grid.ravel(), k)).reshape(grid.shape)
    for i in range(len(bands)):
        sg = s[i][s[i] != 0]
        counts[i] = int(np.count_nonzero(sg[:-1] * sg[1:] < 0))
    return counts


def band_rows(h: BandHierarchy) -> Iterator[tuple]:
    """Rows (level, index, left, right, root, log_deriv, type, m_count)."""
    for bands in h.levels:
        for b in bands:
            yield (
                b.level,
                b.index,
                b.left,
                b.right,
                b.root,
                b.deriv.log_mag,
                b.band_type,
                b.m_count,
            )
