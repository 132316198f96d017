import inspect

import numpy as np
import pytest
from fastapi.routing import APIRoute
from fastapi.testclient import TestClient

from app.main import app

client = TestClient(app)

CIRCUIT = {"omega0": 2.0 * np.pi * 5e9, "lc_norm": 0.0, "z0_norm": 0.1}


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "healthy"}


def test_handlers_are_coroutines():
    routes = [r for r in app.routes if isinstance(r, APIRoute)]
    assert len(routes) > 10
    for route in routes:
        assert inspect.iscoroutinefunction(route.endpoint), route.path


def test_operating_point_uses_matched_conductance():
    response = client.post("/api/gyrator/operating-point", json=CIRCUIT)
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["G0"] == pytest.approx(1.0 / 50.0)
    assert data["normalized"]["g"] == pytest.approx(1.0)


def test_bandwidth_route():
    response = client.post("/api/gyrator/bandwidth", json=CIRCUIT)
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["omega_minus"] < data["omega0"] < data["omega_plus"]
    assert data["notches"] == []


def test_circulator_route():
    response = client.post(
        "/api/circulator/sweep",
        json={"r": 50.0, "z0": 50.0, "omega0": 1e9, "omega_norm": [1.0]},
    )
    assert response.status_code == 200
    body = response.json()
    s = body["data"]["S"][0]
    assert s[0][1] == pytest.approx([1.0, 0.0], abs=1e-9)
    assert s[1][2] == pytest.approx([-1.0, 0.0], abs=1e-9)
    assert body["max_unitarity_error"] < 1e-10


def test_single_mode_on_resonance():
    response = client.post("/api/quantum/single-mode", json={"omega_s": 1.0, "omega_m": 1.0, "kappa": 0.1})
    assert response.json()["data"]["S11"] == pytest.approx([1.0, 0.0])


def test_quantum_simulation_needs_drive():
    response = client.post(
        "/api/quantum/simulate",
        json={"e_c": 0.2, "e_l": 20.0, "g": 0.1, "kappa": 7e8, "omega_s": 3.5e10,
              "levels_per_mode": 3, "excitation_cap": 2, "substeps": 64},
    )
    assert response.status_code == 400
    assert response.json()["detail"]["error"] == "DomainError"


def test_nonlinear_inversion_route():
    response = client.post(
        "/api/nonlinear/invert",
        json={"capacitance": [[1.0, 0.0], [0.0, 2.0]], "offset": [0.0, 0.0], "charge": [0.5, 0.2]},
    )
    assert response.status_code == 200
    assert response.json()["data"]["velocity"] == pytest.approx([0.5, 0.1])


def test_junction_energy_route():
    response = client.post(
        "/api/junction/energy",
        json={"junction": {"gap": 45.0, "channels": [{"kind": "constant", "value": 0.01}]}, "flux": [0.0, 0.25]},
    )
    assert response.status_code == 200
    data = response.json()["data"]
    assert len(data["abs_energy"]) == 2
    assert data["E_J"] == pytest.approx(45.0 * 0.01 / 4.0)


def test_coupling_route():
    response = client.post("/api/coupling/conductance", json={"gyrator": {"arm1": {"ej_prime": 2.0}, "z0": 50.0}})
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["G"] == pytest.approx(data["G_uncompressed"])
    assert data["flags"]["beyond_validity"] is False


def test_physics_errors_become_bad_requests():
    response = client.post(
        "/api/gyrator/compression",
        json={"circuit": CIRCUIT, "photon_numbers": [1.0, 2.0, 3.0]},
    )
    assert response.status_code == 400
    detail = response.json()["detail"]
    assert detail["error"] == "DomainError"
    assert "N = 0" in detail["message"]
