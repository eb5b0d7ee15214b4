"""Request and response bodies for the HTTP service.

Every compute endpoint takes one request model and returns the shared
tabular response; the response doubles as the shipped schema description
for JSON output (column names are pinned per endpoint and versioned in
``schema_name``).
"""

from __future__ import annotations

from typing import Union

from pydantic import BaseModel, ConfigDict, Field

Cell = Union[int, float, str]


class TableResponse(BaseModel):
    """One tabular result: pinned columns, data rows, side annotations.

    ``status`` is "ok" or "INCONCLUSIVE" (an audit that could not certify
    its claim); ``annotations`` carry scalar results that belong next to
    the table rather than in it (intercepts, targets, audit verdicts);
    ``meta`` echoes derived run facts (version, caps, spreads).
    """

    schema_name: str
    columns: list[str]
    rows: list[list[Cell]]
    annotations: dict = Field(default_factory=dict)
    status: str = "ok"
    meta: dict = Field(default_factory=dict)


class BandsRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lambdas: list[float]
    level: int


class OrbitsRequest(BaseModel):
    lambdas: list[float]


class DimsRequest(BaseModel):
    lambdas: list[float]
    k_max: int = 18


class PressureRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lambda_: float = Field(alias="lambda")
    level: int
    t_grid: list[float]


class GapsRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lambda_: float = Field(alias="lambda")
    level: int
    m_max: int = 20


class CombRequest(BaseModel):
    k_max: int = 60


class TransportRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lambda_: float = Field(alias="lambda")
    omega: float = 0.0
    length: int = 1024
    p: float = 2.0
    T_grid: list[float]
    seed: int | None = None


class SweepRequest(BaseModel):
    lambdas: list[float]
    report: str = "asymptotics"


class HealthResponse(BaseModel):
    status: str
    version: str
