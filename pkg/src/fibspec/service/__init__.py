"""Service layer: request/response models, compute handlers, HTTP app."""

from .app import create_app
from .handlers import HANDLERS
from .models import (
    BandsRequest,
    CombRequest,
    DimsRequest,
    GapsRequest,
    HealthResponse,
    OrbitsRequest,
    PressureRequest,
    SweepRequest,
    TableResponse,
    TransportRequest,
)

__all__ = [
    "BandsRequest",
    "CombRequest",
    "DimsRequest",
    "GapsRequest",
    "HANDLERS",
    "HealthResponse",
    "OrbitsRequest",
    "PressureRequest",
    "SweepRequest",
    "TableResponse",
    "TransportRequest",
    "create_app",
]
