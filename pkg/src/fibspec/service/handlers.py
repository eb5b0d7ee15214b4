"""Compute handlers: one request model in, one tabular response out.

These are plain functions so the CLI can call them in-process; the HTTP
app in :mod:`fibspec.service.app` is a thin routing layer over the same
functions.  Rows are emitted fully sorted (by coupling, then level, then
index) so that serialized output is deterministic.
"""

from __future__ import annotations

import math

import numpy as np

from ..bands import band_rows, compute_bands, derivative_log_stats
from ..combinatorics import build_comb_table, comb_limit, comb_rows
from ..errors import DomainError
from ..operator import gap_labels, transport_moment_family
from ..orbits import orbit_sweep_rows
from ..report import asymptotics_audit, full_report
from ..thermo import pressure_curve, pressure_rows
from ..trace import PHI
from ..version import VERSION
from .models import (
    BandsRequest,
    CombRequest,
    DimsRequest,
    GapsRequest,
    OrbitsRequest,
    PressureRequest,
    SweepRequest,
    TableResponse,
    TransportRequest,
)

_LOG_PHI = math.log(PHI)


def _cell(value):
    """JSON-safe cell: NaN becomes the string 'nan' (CSV-identical)."""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def _table(schema_name, columns, rows, **kwargs) -> TableResponse:
    return TableResponse(
        schema_name=schema_name,
        columns=list(columns),
        rows=[[_cell(v) for v in row] for row in rows],
        **kwargs,
    )


def handle_bands(req: BandsRequest) -> TableResponse:
    rows = []
    for lam in sorted(req.lambdas):
        hierarchy = compute_bands(lam, req.level)
        for row in band_rows(hierarchy):
            rows.append((lam,) + row)
    return _table(
        "fibspec.bands.v1",
        (
            "lambda",
            "level",
            "index",
            "left",
            "right",
            "root",
            "log_deriv",
            "band_type",
            "m_count",
        ),
        rows,
        meta={"version": VERSION, "level": req.level},
    )


def handle_orbits(req: OrbitsRequest) -> TableResponse:
    rows = list(orbit_sweep_rows(sorted(req.lambdas)))
    return _table(
        "fibspec.orbits.v1",
        (
            "lambda",
            "bound_p6label",
            "bound_p4label",
            "gamma_closed_form",
            "lyapunov_p2",
        ),
        rows,
        meta={"version": VERSION},
    )


def handle_dims(req: DimsRequest) -> TableResponse:
    rows = []
    statuses = []
    for lam in sorted(req.lambdas):
        report = full_report(lam, req.k_max)
        statuses.append(report.chain_status)
        rows.append(
            (
                lam,
                report.gamma.value,
                report.gamma.error_indicator,
                report.dim_nu.value,
                report.dim_nu.error_indicator,
                report.dim_sigma.value,
                report.dim_sigma.error_indicator,
                report.alpha.value,
                report.alpha.error_indicator,
                report.chain_status,
            )
        )
    status = "ok" if all(s == "STRICT" for s in statuses) else "INCONCLUSIVE"
    return _table(
        "fibspec.dims.v1",
        (
            "lambda",
            "gamma",
            "gamma_err",
            "dim_nu",
            "dim_nu_err",
            "dim_sigma",
            "dim_sigma_err",
            "alpha",
            "alpha_err",
            "chain_status",
        ),
        rows,
        status=status,
        meta={"version": VERSION, "k_max": req.k_max},
    )


def handle_pressure(req: PressureRequest) -> TableResponse:
    hierarchy = compute_bands(req.lambda_, req.level)
    curve = pressure_curve(req.lambda_, req.level, req.t_grid, hierarchy)
    lo, hi, total = derivative_log_stats(hierarchy, req.level)
    k = req.level
    annotations = {
        "gamma_hat": _LOG_PHI / (hi / k),
        "nu_hat": curve.tangent_intercept,
        "bowen_root": curve.bowen_root,
        "alpha_hat": _LOG_PHI / (lo / k),
        "entropy_at_zero": curve.entropy_at_zero,
        "tangent_slope": curve.tangent_slope,
    }
    return _table(
        "fibspec.pressure.v1",
        ("t", "pressure"),
        pressure_rows(curve),
        annotations=annotations,
        meta={"version": VERSION, "lambda": req.lambda_, "level": req.level},
    )


def handle_gaps(req: GapsRequest) -> TableResponse:
    records = gap_labels(req.lambda_, req.level, req.m_max)
    rows = [
        (
            r.level,
            r.gap_index,
            r.interval[0],
            r.interval[1],
            r.label_m,
            r.label_error,
        )
        for r in records
    ]
    return _table(
        "fibspec.gaps.v1",
        ("level", "j", "left", "right", "m", "label_error"),
        rows,
        meta={
            "version": VERSION,
            "lambda": req.lambda_,
            "m_max": req.m_max,
            "gap_count": len(rows),
        },
    )


def handle_comb(req: CombRequest) -> TableResponse:
    table = build_comb_table(req.k_max)
    annotations = {}
    if req.k_max >= 20:
        ratio_at_kmax, extrapolated = comb_limit(table)
        annotations = {
            "ratio_at_kmax": ratio_at_kmax,
            "extrapolated_limit": extrapolated,
            "target_limit": 4.0 / (5.0 + math.sqrt(5.0)),
        }
    return _table(
        "fibspec.comb.v1",
        ("k", "fib", "a_total", "b_total", "A", "B", "C", "ratio"),
        comb_rows(table),
        annotations=annotations,
        meta={"version": VERSION, "k_max": req.k_max},
    )


def handle_transport(req: TransportRequest) -> TableResponse:
    run = transport_moment_family(
        req.lambda_, req.omega, req.length, [req.p], req.T_grid
    )[req.p]
    rows = [(row.T, row.moment, row.beta_estimate) for row in run.rows]
    meta = {
        "version": VERSION,
        "lambda": req.lambda_,
        "omega": req.omega,
        "length": req.length,
        "p": req.p,
        "beta": run.beta,
        "unitarity_defect": run.unitarity_defect,
        "outside_prob_max": run.outside_prob_max,
    }
    if req.seed is not None:
        rng = np.random.default_rng(req.seed)
        spread = []
        for omega in rng.uniform(0.0, 1.0, size=2):
            other = transport_moment_family(
                req.lambda_, float(omega), req.length, [req.p], req.T_grid
            )[req.p]
            spread.append({"omega": float(omega), "beta": other.beta})
        meta["omega_spread"] = spread
    return _table(
        "fibspec.transport.v1",
        ("T", "moment", "beta"),
        rows,
        meta=meta,
    )


def handle_sweep(req: SweepRequest) -> TableResponse:
    if req.report != "asymptotics":
        raise DomainError(f"unknown sweep report {req.report!r}")
    audit = asymptotics_audit(sorted(req.lambdas))
    annotations = {
        "targets": audit["targets"],
        "within_tolerance": audit["within_tolerance"],
        "monotone_toward": audit["monotone_toward"],
    }
    status = "ok" if audit["status"] == "PASS" else "INCONCLUSIVE"
    return _table(
        "fibspec.sweep.v1",
        (
            "lambda",
            "gamma_loglambda",
            "dim_nu_loglambda",
            "dim_sigma_loglambda",
            "alpha_loglambda",
        ),
        audit["rows"],
        annotations=annotations,
        status=status,
        meta={"version": VERSION, "caps": audit["caps"]},
    )


HANDLERS = {
    "bands": (BandsRequest, handle_bands),
    "orbits": (OrbitsRequest, handle_orbits),
    "dims": (DimsRequest, handle_dims),
    "pressure": (PressureRequest, handle_pressure),
    "gaps": (GapsRequest, handle_gaps),
    "comb": (CombRequest, handle_comb),
    "transport": (TransportRequest, handle_transport),
    "sweep": (SweepRequest, handle_sweep),
}
