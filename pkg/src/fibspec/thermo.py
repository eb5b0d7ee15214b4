"""Symbolic dynamics and thermodynamic formalism for the band hierarchy.

The two-symbol topological Markov chain with transition matrix [[1, 1], [1, 0]]
(the golden-mean shift, entropy log phi) models the renormalization dynamics.
This module builds its Parry (maximal-entropy) measure from Perron eigendata,
evaluates the level-k pressure function from band root derivatives in
log-sum-exp form, solves the Bowen equation P_k(t) = 0 by bisection, and
checks that deduplicated band-lineage words equidistribute toward the Parry
cylinder measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.special import logsumexp

from .bands import BandHierarchy, compute_bands
from .errors import (
    NotApplicable,
    NotTransitive,
    RootNotBracketed,
    StructureViolation,
)
from .trace import PHI, fibonacci

__all__ = [
    "GOLDEN_MEAN_MATRIX",
    "MarkovModel",
    "PressureCurve",
    "parry_measure",
    "top_entropy",
    "pressure_curve",
    "level_words",
    "equidistribution_check",
    "pressure_rows",
]

_LOG_PHI = math.log(PHI)

GOLDEN_MEAN_MATRIX = ((1, 1), (1, 0))


@dataclass
class MarkovModel:
    """Perron data of a transitive 0-1 transition matrix.

    ``left_vec`` and ``right_vec`` are positive Perron eigenvectors scaled so
    that ``left_vec @ right_vec = 1``; ``stationary[i] = left_vec[i] *
    right_vec[i]`` and the stochastic matrix is ``A_ij v_j / (lambda_A v_i)``.
    The measure of the cylinder on an admissible word i_0 ... i_n is
    ``u_{i_0} v_{i_n} / lambda_A^n``.
    """

    matrix: np.ndarray
    perron_value: float
    right_vec: np.ndarray
    left_vec: np.ndarray

    @property
    def stationary(self) -> np.ndarray:
        return self.left_vec * self.right_vec

    @property
    def transition_matrix(self) -> np.ndarray:
        v = self.right_vec
        return self.matrix * v[None, :] / (self.perron_value * v[:, None])

    def cylinder_measure(self, word: Sequence[int]) -> float:
        """Measure of the cylinder set on a symbol word (0 if inadmissible)."""
        if len(word) == 0:
            return 1.0
        for s, t in zip(word, word[1:]):
            if self.matrix[s, t] == 0:
                return 0.0
        n = len(word) - 1
        return float(
            self.left_vec[word[0]] * self.right_vec[word[-1]]
            / self.perron_value ** n
        )


def _is_transitive(A: np.ndarray) -> bool:
    """Irreducibility: (I + A)^(n-1) strictly positive.

    Periodic-but-irreducible matrices (e.g. permutations) are transitive
    shifts with well-defined Perron data, so the test must not demand a
    strictly positive power of A itself.
    """
    n = A.shape[0]
    B = (A.astype(bool) | np.eye(n, dtype=bool)).astype(int)
    power = np.eye(n, dtype=int)
    for _ in range(max(1, n - 1)):
        power = np.minimum(power @ B, 1)
    return bool((power > 0).all())


def parry_measure(A) -> MarkovModel:
    """Maximal-entropy Markov data for a transitive 0-1 matrix.

    Power iteration on both sides with a final Rayleigh-quotient refinement;
    eigen-residuals are required to reach 1e-12.
    """
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    if not np.isin(A, (0, 1)).all():
        raise ValueError("matrix entries must be 0 or 1")
    if not _is_transitive(A):
        raise NotTransitive(
            "transition graph is not strongly connected "
            f"((I + A)^{max(1, A.shape[0] - 1)} has zero entries)"
        )
    Af = A.astype(float)
    n = A.shape[0]
    # Iterate on I + A: primitive for any irreducible A, so the iteration
    # converges even when A itself is periodic; eigenvectors are shared.
    shifted = Af + np.eye(n)
    v = np.full(n, 1.0 / math.sqrt(n))
    u = v.copy()
    lam = 1.0
    for _ in range(200_000):
        v_new = shifted @ v
        u_new = shifted.T @ u
        v_new /= np.linalg.norm(v_new)
        u_new /= np.linalg.norm(u_new)
        lam = float(v_new @ Af @ v_new)
        done = (
            np.linalg.norm(Af @ v_new - lam * v_new) < 1e-13
            and np.linalg.norm(Af.T @ u_new - lam * u_new) < 1e-13
        )
        v, u = v_new, u_new
        if done:
            break
    res_v = np.linalg.norm(Af @ v - lam * v)
    res_u = np.linalg.norm(Af.T @ u - lam * u)
    if res_v > 1e-12 or res_u > 1e-12:
        raise ArithmeticError(
            f"Perron iteration stalled: residuals {res_v:.2e}, {res_u:.2e}"
        )
    u = u / float(u @ v)  # u . v = 1, making p_i = u_i v_i a probability vector
    return MarkovModel(matrix=A, perron_value=lam, right_vec=v, left_vec=u)


def top_entropy(A) -> float:
    """Topological entropy of the shift: log of the Perron value."""
    return math.log(parry_measure(A).perron_value)


@dataclass
class PressureCurve:
    """Level-k pressure function P_k(t) built from band root derivatives.

    ``values[i] = (1/k) log sum_j exp(-t_grid[i] * log|x_k'(root_j)|)``;
    ``entropy_at_zero = (1/k) log F_k`` exactly; ``bowen_root`` solves
    P_k(t) = 0.  The tangent line is anchored at the entropy limit log(phi)
    with the t=0 slope, so its t-intercept is exactly the root-derivative
    dimension estimator ``log(phi) * k F_k / sum_j log|x_k'|``.
    """

    lambda_: float
    level: int
    t_grid: np.ndarray
    values: np.ndarray
    bowen_root: float
    entropy_at_zero: float
    tangent_slope: float
    tangent_intercept: float
    _log_derivs: np.ndarray = field(default=None, repr=False)

    def pressure(self, t: float) -> float:
        return _pressure_value(self._log_derivs, self.level, t)


def _pressure_value(log_derivs: np.ndarray, k: int, t: float) -> float:
    return float(logsumexp(-t * log_derivs)) / k


def _bands_for_level(lambda_: float, level: int, hierarchy=None):
    if hierarchy is None:
        hierarchy = compute_bands(lambda_, level)
    return hierarchy.bands(level)


def pressure_curve(
    lambda_: float,
    level: int,
    t_grid: Iterable[float],
    hierarchy: BandHierarchy | None = None,
) -> PressureCurve:
    """Evaluate P_k on a grid and solve the Bowen equation on [0, 2].

    Raises RootNotBracketed when P_k(0) and P_k(2) do not straddle zero
    (P_k(0) = (1/k) log F_k > 0 always, so this means P_k(2) >= 0).
    """
    bands = _bands_for_level(lambda_, level, hierarchy)
    k = level
    log_derivs = np.array([b.deriv.log_mag for b in bands])
    t_grid = np.asarray(list(t_grid), dtype=float)
    values = np.array([_pressure_value(log_derivs, k, t) for t in t_grid])
    p0 = _pressure_value(log_derivs, k, 0.0)
    p2 = _pressure_value(log_derivs, k, 2.0)
    if not (p0 > 0.0 > p2):
        raise RootNotBracketed(
            f"pressure at level {k} has P(0) = {p0:.6g}, P(2) = {p2:.6g}; "
            "no sign change on [0, 2]"
        )
    lo, hi = 0.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _pressure_value(log_derivs, k, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    bowen = 0.5 * (lo + hi)
    sum_logs = float(np.sum(log_derivs))
    slope = -sum_logs / (k * fibonacci(k))
    intercept = _LOG_PHI * k * fibonacci(k) / sum_logs
    return PressureCurve(
        lambda_=lambda_,
        level=k,
        t_grid=t_grid,
        values=values,
        bowen_root=bowen,
        entropy_at_zero=math.log(fibonacci(k)) / k,
        tangent_slope=slope,
        tangent_intercept=intercept,
        _log_derivs=log_derivs,
    )


def level_words(hierarchy: BandHierarchy, level: int) -> list[str]:
    """Golden-mean itinerary words of the level-``level`` bands.

    Each band gets one letter per level 0..k: 'a' at levels its lineage
    visits, and at a level skipped by a two-level parent step, 'b' for the
    left sibling (or for the only child of an A-parent) and 'a' for the
    right sibling; the level below a level-1 seed is 'b'.  This encodes
    each band as a distinct admissible word ('b' is always isolated), and
    the F_k words exhaust the admissible words of length k+1 that end in
    'a' and start with "ab" or "ba" — the count identity F_{k-2} + F_{k-1}
    = F_k level by level.  The left/right letter convention is a global
    orientation choice; the word set (hence all statistics) is invariant
    under swapping it.
    """
    if hierarchy.lambda_ <= 4.0:
        raise NotApplicable(
            f"lineage coding requires coupling > 4, got {hierarchy.lambda_}"
        )
    words: list[list[str]] = [["a"], ["ba"]]
    for k in range(2, level + 1):
        bands = hierarchy.bands(k)
        b_children: dict[tuple[int, int], list[int]] = {}
        for i, b in enumerate(bands):
            if b.band_type == "B":
                b_children.setdefault(b.parent, []).append(i)
        level_k: list[str] = []
        for i, b in enumerate(bands):
            if b.band_type not in ("A", "B") or b.parent is None:
                raise NotApplicable(
                    "lineage words need typed bands with parent links"
                )
            plvl, pidx = b.parent
            parent_word = words[plvl][pidx - 1]
            if b.band_type == "A":
                level_k.append(parent_word + "a")
            else:
                parent_type = hierarchy.bands(plvl)[pidx - 1].band_type
                siblings = b_children[b.parent]
                if parent_type == "A" or i == min(siblings):
                    level_k.append(parent_word + "ba")
                else:
                    level_k.append(parent_word + "aa")
        words.append(level_k)
    result = words[level]
    if len(set(result)) != len(result):
        raise StructureViolation(
            f"lineage coding collided at level {level}: "
            f"{len(result) - len(set(result))} duplicate words"
        )
    return result


def equidistribution_check(
    lambda_: float,
    level: int,
    word_len: int,
    hierarchy: BandHierarchy | None = None,
) -> float:
    """L1 gap between lineage-word statistics and Parry cylinder measures.

    Pools sliding windows of ``word_len`` letters over the level-``level``
    lineage words (one word per band) and compares the empirical window
    distribution with the golden-mean Parry cylinder measures.  Windows
    starting within ceil(log(level)) letters of either end are skipped:
    the word class pins the two leading letters and the final letter, so
    boundary windows carry an O(1) bias while interior windows
    equidistribute.
    """
    if lambda_ <= 4.0:
        raise NotApplicable(
            f"lineage coding requires coupling > 4, got {lambda_}"
        )
    if not 1 <= word_len <= 6:
        raise ValueError(f"word_len must be in [1, 6], got {word_len}")
    if hierarchy is None:
        hierarchy = compute_bands(lambda_, level)
    words = level_words(hierarchy, level)
    margin = math.ceil(math.log(level)) if level > 1 else 0
    counts: dict[str, int] = {}
    total = 0
    for w in words:
        for i in range(margin, len(w) - word_len - margin + 1):
            window = w[i : i + word_len]
            counts[window] = counts.get(window, 0) + 1
            total += 1
    if total == 0:
        raise ValueError(
            f"lineage words at level {level} are shorter than {word_len}"
        )
    model = parry_measure(GOLDEN_MEAN_MATRIX)
    sym = {"a": 0, "b": 1}
    l1 = 0.0
    for window in _all_words(word_len):
        emp = counts.get(window, 0) / total
        parry = model.cylinder_measure([sym[c] for c in window])
        l1 += abs(emp - parry)
    return l1


def _all_words(length: int) -> Iterator[str]:
    if length == 0:
        yield ""
        return
    for rest in _all_words(length - 1):
        for c in "ab":
            yield c + rest


def pressure_rows(curve: PressureCurve) -> Iterator[tuple]:
    """Rows (t, P_k(t)) for CSV output."""
    for t, value in zip(curve.t_grid, curve.values):
        yield (float(t), float(value))
