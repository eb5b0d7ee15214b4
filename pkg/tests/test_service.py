"""HTTP layer: routing, schema versioning, error mapping."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from fibspec.service import HANDLERS, create_app
from fibspec.service.models import GapsRequest, TableResponse
from fibspec.version import VERSION


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


def test_health(client):
    reply = client.get("/v1/health")
    assert reply.status_code == 200
    assert reply.json() == {"status": "ok", "version": VERSION}


def test_every_command_has_a_route(client):
    paths = {route.path for route in client.app.routes}
    for name in HANDLERS:
        assert f"/v1/{name}" in paths


def test_orbits_roundtrip(client):
    reply = client.post("/v1/orbits", json={"lambdas": [2.0, 1.0]})
    assert reply.status_code == 200
    body = TableResponse.model_validate(reply.json())
    assert body.schema_name == "fibspec.orbits.v1"
    assert body.columns[0] == "lambda"
    assert [row[0] for row in body.rows] == [1.0, 2.0]  # sorted by coupling
    assert body.status == "ok"


def test_gaps_roundtrip_matches_in_process(client):
    payload = {"lambda": 2.0, "level": 8, "m_max": 10}
    reply = client.post("/v1/gaps", json=payload)
    assert reply.status_code == 200
    remote = TableResponse.model_validate(reply.json())
    model, handler = HANDLERS["gaps"]
    local = handler(model.model_validate(payload))
    assert remote.rows == local.rows
    assert remote.columns == ["level", "j", "left", "right", "m", "label_error"]
    assert remote.meta["gap_count"] == len(remote.rows)


def test_request_model_accepts_both_spellings():
    assert GapsRequest.model_validate({"lambda": 2.0, "level": 8}).lambda_ == 2.0
    assert GapsRequest.model_validate({"lambda_": 2.0, "level": 8}).lambda_ == 2.0


def test_comb_annotations(client):
    reply = client.post("/v1/comb", json={"k_max": 25})
    body = reply.json()
    assert set(body["annotations"]) == {
        "ratio_at_kmax",
        "extrapolated_limit",
        "target_limit",
    }
    # the k = 0 seed row carries a 'nan' ratio cell, kept JSON-safe
    assert body["rows"][0][7] == "nan"


def test_pressure_annotations_are_ordered(client):
    reply = client.post(
        "/v1/pressure",
        json={"lambda": 2.0, "level": 8, "t_grid": [-1.0, 0.0, 1.0, 2.0]},
    )
    notes = reply.json()["annotations"]
    assert (
        notes["gamma_hat"]
        <= notes["nu_hat"]
        <= notes["alpha_hat"]
    )
    assert notes["gamma_hat"] <= notes["bowen_root"] <= notes["alpha_hat"]


def test_validation_errors_are_422(client):
    reply = client.post("/v1/gaps", json={"lambda": 2.0})  # level missing
    assert reply.status_code == 422


def test_domain_errors_are_mapped(client):
    reply = client.post(
        "/v1/gaps", json={"lambda": -2.0, "level": 8, "m_max": 5}
    )
    assert reply.status_code == 422
    body = reply.json()
    assert body["error"] == "DomainError"
    assert "lambda" in body["detail"]


def test_transport_roundtrip(client):
    reply = client.post(
        "/v1/transport",
        json={"lambda": 8.0, "length": 256, "p": 2.0, "T_grid": [16.0, 32.0, 64.0]},
    )
    assert reply.status_code == 200
    body = TableResponse.model_validate(reply.json())
    assert body.columns == ["T", "moment", "beta"]
    assert len(body.rows) == 3
    assert 0.0 < body.meta["beta"] < 1.0
    assert "omega_spread" not in body.meta  # no seed requested


def test_transport_seeded_spread(client):
    reply = client.post(
        "/v1/transport",
        json={
            "lambda": 8.0,
            "length": 128,
            "p": 2.0,
            "T_grid": [8.0, 16.0, 32.0],
            "seed": 20240817,
        },
    )
    body = reply.json()
    spread = body["meta"]["omega_spread"]
    assert len(spread) == 2
    for entry in spread:
        assert 0.0 <= entry["omega"] < 1.0
        assert isinstance(entry["beta"], float)
