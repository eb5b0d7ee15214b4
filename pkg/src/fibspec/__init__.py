"""fibspec: spectral toolkit for the Fibonacci Hamiltonian.

Band structure of the trace-map approximants, fractal-dimension and
transport-exponent estimators, periodic-orbit bounds, thermodynamic
pressure, gap labeling, and finite-operator cross-checks, with a CLI and
an HTTP service wrapper.
"""

from __future__ import annotations

import os as _os

# Honor the package thread-count variable before numpy/BLAS first load;
# it only seeds the usual BLAS knobs, so explicit settings still win.
_threads = _os.environ.get("FIBSPEC_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(_var, _threads)

from .version import VERSION as __version__

from .errors import (
    BandCountMismatch,
    BoundaryContamination,
    BracketFailure,
    DimensionTooLarge,
    DomainError,
    EigenFailure,
    FibspecError,
    NotApplicable,
    NotTransitive,
    RootNotBracketed,
    ShiftHitsEigenvalue,
    StructureViolation,
    TraceOverflow,
)
from .logscale import LogScalar
from .trace import (
    ALPHA,
    PHI,
    CouplingParams,
    TraceVector,
    a_lambda,
    fibonacci,
    fricke_vogt,
    line_point,
    trace_map,
    trace_sequence,
    transfer_matrix,
)

__all__ = [
    "__version__",
    "ALPHA",
    "PHI",
    "CouplingParams",
    "TraceVector",
    "LogScalar",
    "a_lambda",
    "fibonacci",
    "fricke_vogt",
    "line_point",
    "trace_map",
    "trace_sequence",
    "transfer_matrix",
    "FibspecError",
    "TraceOverflow",
    "BandCountMismatch",
    "NotApplicable",
    "StructureViolation",
    "DimensionTooLarge",
    "DomainError",
    "BracketFailure",
    "RootNotBracketed",
    "EigenFailure",
    "NotTransitive",
    "ShiftHitsEigenvalue",
    "BoundaryContamination",
]
