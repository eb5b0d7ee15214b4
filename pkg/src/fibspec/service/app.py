"""HTTP front end: one POST route per compute command, plus a health probe.

The routes are generated from the shared handler registry so the HTTP
surface cannot drift from what the CLI runs in-process.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import DomainError, FibspecError
from ..version import VERSION
from .handlers import HANDLERS
from .models import HealthResponse, TableResponse


def _make_endpoint(model, handler):
    def endpoint(body) -> TableResponse:
        return handler(body)

    # The request model differs per route, so the annotation is attached
    # here rather than written in the signature.
    endpoint.__annotations__["body"] = model
    endpoint.__name__ = handler.__name__
    endpoint.__doc__ = handler.__doc__
    return endpoint


def create_app() -> FastAPI:
    app = FastAPI(title="fibspec", version=VERSION)

    @app.exception_handler(FibspecError)
    def _fibspec_error(request: Request, exc: FibspecError) -> JSONResponse:
        status = 422 if isinstance(exc, DomainError) else 500
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=VERSION)

    for name, (model, handler) in HANDLERS.items():
        app.post(f"/v1/{name}", response_model=TableResponse)(
            _make_endpoint(model, handler)
        )
    return app
