"""Direct finite-volume computations on the Hamiltonian itself.

Everything here works on the operator side rather than the trace-map side:
potential generation on a finite window, integrated density of states by
Sturm-sequence inertia counts, gap labeling against the golden-rotation
fractional parts, a density-of-states scaling probe, and time-evolution
transport moments.  These are the independent checks on the band pipeline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import eigh_tridiagonal

from .bands import BandHierarchy, compute_bands
from .errors import (
    BoundaryContamination,
    CoverageFailure,
    DimensionTooLarge,
    DomainError,
    ShiftHitsEigenvalue,
    StructureViolation,
)
from .trace import ALPHA, PHI, fibonacci

__all__ = [
    "PotentialSpec",
    "generate_potential",
    "fibonacci_word",
    "ids_finite",
    "GapRecord",
    "gap_labels",
    "DosEntry",
    "DosScalingProbe",
    "dos_scaling_probe",
    "TransportRow",
    "TransportRun",
    "transport_moments",
    "transport_moment_family",
    "quadrature_nodes",
    "exponential_average",
]

logger = logging.getLogger(__name__)

_L_CAP = 4096
_QUAD_NODES = 512
_X_MIN = 1e-4
_X_MAX = 36.0
_OUTSIDE_FRACTION = 0.45
_OUTSIDE_TOLERANCE = 1e-8
_UNITARITY_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# potential generation


@dataclass
class PotentialSpec:
    """A finite sample of the quasiperiodic potential.

    ``values[n-1]`` is the on-site value at site n = 1..length: the
    coupling when the fractional part of n*alpha + omega falls in
    [1 - alpha, 1), zero otherwise.
    """

    lambda_: float
    omega: float
    length: int
    values: np.ndarray


def fibonacci_word(length: int) -> str:
    """Prefix of the substitution fixed point a -> ab, b -> a.

    Built by the concatenation rule s_{k+1} = s_k s_{k-1} from s = "a",
    "ab"; the word lengths run through the Fibonacci numbers.
    """
    if length < 1:
        raise DomainError("word length must be >= 1")
    prev, word = "a", "ab"
    while len(word) < length:
        prev, word = word, word + prev
    return word[:length]


def generate_potential(lambda_: float, omega: float, length: int) -> PotentialSpec:
    """Sample the potential at sites 1..length.

    Convention check: at omega = 0 the induced 0/1 word on a
    Fibonacci-number window equals the substitution fixed point under
    a -> 1 (on-site value lambda), b -> 0, both indexed from n = 1.
    """
    if length < 1:
        raise DomainError("potential length must be >= 1")
    if not 0.0 <= omega < 1.0:
        raise DomainError("omega must lie in [0, 1)")
    n = np.arange(1, length + 1, dtype=float)
    frac = np.mod(n * ALPHA + omega, 1.0)
    hits = frac >= 1.0 - ALPHA
    values = np.where(hits, lambda_, 0.0)
    if omega == 0.0:
        fibs = set()
        k = 0
        while fibonacci(k) <= length:
            fibs.add(fibonacci(k))
            k += 1
        if length in fibs:
            expected = np.array(
                [c == "a" for c in fibonacci_word(length)], dtype=bool
            )
            if not np.array_equal(hits, expected):
                raise StructureViolation(
                    "circle word disagrees with the substitution word at "
                    f"window length {length}"
                )
    return PotentialSpec(
        lambda_=lambda_, omega=omega, length=length, values=values
    )


# ---------------------------------------------------------------------------
# Sturm-sequence integrated density of states


def _sturm_negative_count(values: np.ndarray, energy: float) -> int:
    """Number of eigenvalues of the Dirichlet tridiagonal matrix < energy.

    LDL^T pivot recursion; a vanishing pivot means the shift hit an
    eigenvalue of a leading principal submatrix.
    """
    count = 0
    pivot = None
    for v in values:
        d = v - energy
        if pivot is not None:
            d -= 1.0 / pivot
        if d == 0.0:
            raise ShiftHitsEigenvalue(f"zero Sturm pivot at shift {energy}")
        if d < 0.0:
            count += 1
        pivot = d
    return count


def ids_finite(potential: PotentialSpec, energy: float) -> Fraction:
    """Integrated density of states of the finite window at ``energy``.

    Exact eigenvalue count below the shift divided by the window length,
    via the Sturm pivot signs -- no eigenvectors, no rounding in the
    count itself.  A shift that lands exactly on a pivot zero is retried
    at energy + 1e-12 and logged.
    """
    try:
        count = _sturm_negative_count(potential.values, energy)
    except ShiftHitsEigenvalue:
        logger.warning(
            "Sturm shift %.17g hit an eigenvalue; retrying perturbed", energy
        )
        count = _sturm_negative_count(potential.values, energy + 1e-12)
    return Fraction(count, potential.length)


# ---------------------------------------------------------------------------
# gap labeling


@dataclass
class GapRecord:
    """One internal spectral gap with its golden-rotation label.

    ``gap_index`` is j for the gap to the right of band j (left to
    right), so the finite-volume density of states on the gap is exactly
    j / F_k; ``label_m`` is the integer whose fractional part {m * phi}
    best matches it.
    """

    level: int
    gap_index: int
    interval: tuple[float, float]
    ids_value: Fraction
    label_m: int
    label_error: float


def gap_labels(
    lambda_: float,
    level: int,
    m_max: int,
    hierarchy: BandHierarchy | None = None,
) -> list[GapRecord]:
    """Label every internal gap at the level and check label coverage.

    The label search scans m in [-F_k, F_k] ordered by |m|, so the
    smallest admissible |m| wins ties.  Coverage: every m with
    0 < |m| <= m_max must be matched by some gap to within 2/F_k,
    otherwise CoverageFailure lists the missed labels.
    """
    if lambda_ <= 0.0:
        raise DomainError("gap labeling needs lambda > 0")
    if hierarchy is None:
        hierarchy = compute_bands(lambda_, level)
    bands = hierarchy.bands(level)
    count = len(bands)
    if count != fibonacci(level):
        raise StructureViolation(
            f"level {level} holds {count} bands, expected {fibonacci(level)}"
        )
    half = np.arange(1, count + 1)
    m_order = np.empty(2 * count + 1, dtype=int)
    m_order[0] = 0
    m_order[1::2] = half
    m_order[2::2] = -half
    fracs = np.mod(m_order * PHI, 1.0)

    records = []
    tolerance = 2.0 / count
    for j in range(1, count):
        target = j / count
        errors = np.abs(target - fracs)
        best = int(np.argmin(errors))
        record = GapRecord(
            level=level,
            gap_index=j,
            interval=(bands[j - 1].right, bands[j].left),
            ids_value=Fraction(j, count),
            label_m=int(m_order[best]),
            label_error=float(errors[best]),
        )
        if record.label_error >= tolerance:
            raise StructureViolation(
                f"gap {j}/{count} has no label within {tolerance}: best "
                f"m={record.label_m} err={record.label_error}"
            )
        records.append(record)

    targets = np.arange(1, count) / count
    missing = []
    for m in range(-m_max, m_max + 1):
        if m == 0:
            continue
        frac = (m * PHI) % 1.0
        j_near = int(np.clip(round(frac * count), 1, count - 1))
        err = min(
            abs(targets[j_near - 1] - frac),
            abs(targets[max(j_near - 2, 0)] - frac),
            abs(targets[min(j_near, count - 2)] - frac),
        )
        if err >= tolerance:
            missing.append(m)
    if missing:
        raise CoverageFailure(missing)
    return records


# ---------------------------------------------------------------------------
# density-of-states scaling probe


@dataclass
class DosEntry:
    """One probed interval: measure exponent log(nu) / log(width)."""

    interval: tuple[float, float]
    ratio: float
    depth: int


@dataclass
class DosScalingProbe:
    """Scaling snapshot of the root-counting measure at one level.

    The measure puts weight 1/F_k on each level-k root; ``entries`` hold
    the exponents over sampled band intervals (depth 0) and dyadic
    shrinkings about their roots (depth >= 1).  The min and mean are
    taken over all full bands and bracket the smallest and the typical
    local exponents.
    """

    lambda_: float
    level: int
    entries: list[DosEntry]
    min_band_ratio: float
    mean_band_ratio: float


def dos_scaling_probe(
    lambda_: float,
    level: int,
    interval_count: int,
    hierarchy: BandHierarchy | None = None,
    depth: int = 2,
) -> DosScalingProbe:
    """Probe nu(I) ~ |I|^ratio over band intervals and dyadic refinements."""
    if interval_count < 1:
        raise DomainError("interval_count must be >= 1")
    if hierarchy is None:
        hierarchy = compute_bands(lambda_, level)
    bands = hierarchy.bands(level)
    count = len(bands)
    widths = np.array([b.width for b in bands])
    if (widths >= 1.0).any():
        raise DomainError(
            "scaling probe needs all band widths < 1; raise the level"
        )
    log_nu = -math.log(count)
    ratios = log_nu / np.log(widths)
    roots = np.sort(np.array([b.root for b in bands]))

    picked = np.unique(
        np.linspace(0, count - 1, min(interval_count, count)).round().astype(int)
    )
    entries = []
    for i in picked:
        band = bands[i]
        entries.append(
            DosEntry(interval=band.interval, ratio=float(ratios[i]), depth=0)
        )
        for d in range(1, depth + 1):
            half_width = band.width / 2 ** (d + 1)
            lo, hi = band.root - half_width, band.root + half_width
            inside = int(np.searchsorted(roots, hi) - np.searchsorted(roots, lo))
            if inside == 0:
                continue
            ratio = (math.log(inside) + log_nu) / math.log(hi - lo)
            entries.append(DosEntry(interval=(lo, hi), ratio=ratio, depth=d))
    return DosScalingProbe(
        lambda_=lambda_,
        level=level,
        entries=entries,
        min_band_ratio=float(ratios.min()),
        mean_band_ratio=float(ratios.mean()),
    )


# ---------------------------------------------------------------------------
# transport moments


def quadrature_nodes(T: float) -> np.ndarray:
    """The geometric time grid used by the exponential average at scale T."""
    x = np.geomspace(_X_MIN, _X_MAX, _QUAD_NODES)
    return 0.5 * T * x


def exponential_average(samples: np.ndarray, T: float, value_at_zero: float = 0.0) -> float:
    """(2/T) integral of exp(-2t/T) f(t) dt for f sampled on quadrature_nodes(T).

    Composite Simpson on the logarithmic axis over the geometric nodes,
    plus a linear patch on the untiled head [0, t_min]; the tail beyond
    the last node is below 3e-16 of the weight mass.
    """
    x = np.geomspace(_X_MIN, _X_MAX, _QUAD_NODES)
    integrand = np.exp(-x) * samples * x
    main = float(simpson(integrand, x=np.log(x)))
    head = 0.5 * _X_MIN * (value_at_zero + math.exp(-_X_MIN) * samples[0])
    return main + head


@dataclass
class TransportRow:
    """Time-averaged p-th moment at one averaging scale T."""

    T: float
    moment: float
    beta_estimate: float


@dataclass
class TransportRun:
    """One finite-volume wavepacket-spreading experiment.

    ``beta`` is the least-squares slope of log(moment) against p*log(T)
    over the whole grid; each row carries the running slope using the
    rows up to and including it (the first row repeats the two-point
    slope).  ``outside_prob_max`` is the largest time-averaged mass
    beyond the |n| > 0.45 L guard ring over the grid.
    """

    lambda_: float
    omega: float
    length: int
    p: float
    rows: list[TransportRow]
    beta: float
    unitarity_defect: float
    outside_prob_max: float


def _running_slopes(log_T: np.ndarray, log_m: np.ndarray, p: float) -> list[float]:
    x = p * log_T
    slopes = []
    for i in range(1, len(x)):
        slopes.append(float(np.polyfit(x[: i + 1], log_m[: i + 1], 1)[0]))
    return [slopes[0]] + slopes


def transport_moment_family(
    lambda_: float,
    omega: float,
    length: int,
    ps: Sequence[float],
    T_grid: Sequence[float],
) -> dict[float, TransportRun]:
    """Transport runs for several moment orders sharing one eigensystem.

    Exact time evolution from the dense eigendecomposition of the
    Dirichlet window, the wavepacket started mid-sample; the p-th moments
    are exponentially time-averaged by quadrature and the spreading
    exponents fitted on the log-log grid.
    """
    if length > _L_CAP:
        raise DimensionTooLarge(f"window length {length} exceeds {_L_CAP}")
    T_grid = [float(t) for t in T_grid]
    if len(T_grid) == 0 or min(T_grid) <= 0.0:
        raise DomainError("T_grid must be positive")
    if max(T_grid) > length / 4.0:
        raise DomainError(
            "largest averaging scale exceeds length/4; the ballistic "
            "wavefront (speed <= 2) must stay inside the window"
        )
    ps = [float(p) for p in ps]
    if len(ps) == 0:
        raise DomainError("need at least one moment order")
    potential = generate_potential(lambda_, omega, length)
    eigvals, eigvecs = eigh_tridiagonal(
        potential.values, np.ones(length - 1)
    )
    center = math.ceil(length / 2) - 1
    overlaps = eigvecs[center, :].copy()
    distance = np.abs(np.arange(length) - center).astype(float)
    outside = distance > _OUTSIDE_FRACTION * length

    T_values = np.array(sorted(T_grid), dtype=float)
    moments = {p: [] for p in ps}
    unitarity_defect = 0.0
    outside_prob_max = 0.0
    for T in T_values:
        t = quadrature_nodes(T)
        phases = np.exp(-1j * np.outer(eigvals, t)) * overlaps[:, None]
        prob = np.abs(eigvecs @ phases) ** 2
        defect = float(np.abs(prob.sum(axis=0) - 1.0).max())
        unitarity_defect = max(unitarity_defect, defect)
        if defect > _UNITARITY_TOLERANCE:
            raise StructureViolation(
                f"evolution lost unitarity: defect {defect} at T={T}"
            )
        out_avg = exponential_average(prob[outside].sum(axis=0), T, 0.0)
        outside_prob_max = max(outside_prob_max, out_avg)
        if out_avg > _OUTSIDE_TOLERANCE:
            raise BoundaryContamination(
                f"time-averaged boundary mass {out_avg} at T={T} "
                f"(limit {_OUTSIDE_TOLERANCE})"
            )
        for p in ps:
            sampled = (distance ** p) @ prob
            moments[p].append(exponential_average(sampled, T, 0.0))

    runs = {}
    log_T = np.log(T_values)
    for p in ps:
        m = np.array(moments[p])
        if (m <= 0.0).any():
            raise StructureViolation("nonpositive time-averaged moment")
        log_m = np.log(m)
        beta = float(np.polyfit(p * log_T, log_m, 1)[0])
        slopes = _running_slopes(log_T, log_m, p)
        rows = [
            TransportRow(T=float(T), moment=float(mom), beta_estimate=sl)
            for T, mom, sl in zip(T_values, m, slopes)
        ]
        runs[p] = TransportRun(
            lambda_=lambda_,
            omega=omega,
            length=length,
            p=p,
            rows=rows,
            beta=beta,
            unitarity_defect=unitarity_defect,
            outside_prob_max=outside_prob_max,
        )
    return runs


def transport_moments(
    lambda_: float,
    omega: float,
    length: int,
    p: float,
    T_grid: Sequence[float],
) -> TransportRun:
    """Time-averaged p-th moments over T_grid with fitted spreading slope."""
    return transport_moment_family(lambda_, omega, length, [p], T_grid)[p]
