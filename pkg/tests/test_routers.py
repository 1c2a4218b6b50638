import itertools

import numpy as np
import pytest
from fastapi.testclient import TestClient

from config import Settings
from data.xor import one_hot, parity_labels
from main import create_app
from network.net import parity_net
from network.serialize import dumps_net

TINY = {"X": [[0.0, 1.0], [1.0, 0.0]], "Y": [[1.0, 0.0], [0.0, 1.0]]}
ARCH = {"d": 2, "K": 1, "L": 1, "J": 2}


@pytest.fixture
def client() -> TestClient:
    return TestClient(create_app(settings=Settings()))


class TestHealth:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json()["status"] == "healthy"
        assert "timestamp" in response.json()


class TestBuildAndSolve:
    def test_build_returns_mps_and_census(self, client):
        response = client.post("/models/build", json={**TINY, "arch": ARCH})
        assert response.status_code == 200
        body = response.json()
        assert body["format"] == "mps"
        assert body["model"].startswith("NAME")
        assert body["stats"]["binaries"] == 4
        assert body["families"] == {"gate": 4, "link": 16, "out": 4, "omega": 4, "div": 4}

    def test_build_lp_format(self, client):
        response = client.post("/models/build", json={**TINY, "arch": ARCH, "format": "lp"})
        assert response.status_code == 200
        assert "Minimize" in response.json()["model"]

    def test_solve_built_model(self, client):
        mps = client.post("/models/build", json={**TINY, "arch": ARCH}).json()["model"]
        response = client.post("/models/solve", json={"mps": mps, "params": {"rel_gap": 0.0}})
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "optimal"
        assert body["gap"] == pytest.approx(0.0, abs=1e-9)
        assert set(body["values"]) >= {"alpha[0][0][0]", "omega[1]", "r[0][0][1]"}

    def test_feature_mismatch_is_rejected(self, client):
        response = client.post("/models/build", json={**TINY, "arch": {**ARCH, "d": 3}})
        assert response.status_code == 400
        assert "features" in response.json()["detail"]

    def test_invalid_labels(self, client):
        response = client.post("/models/build", json={"X": TINY["X"], "Y": [[1.0, 1.0], [0.0, 1.0]], "arch": ARCH})
        assert response.status_code == 400
        assert response.json()["detail"].startswith("Invalid dataset")

    def test_invalid_arch_is_unprocessable(self, client):
        response = client.post("/models/build", json={**TINY, "arch": {**ARCH, "J": 1}})
        assert response.status_code == 422

    def test_invalid_mps(self, client):
        response = client.post("/models/solve", json={"mps": "NAME broken\nCOLUMNS\n    x  nowhere  1\n"})
        assert response.status_code == 400
        assert response.json()["detail"].startswith("Invalid MPS")


class TestEvaluate:
    def test_parity_net_scores_perfectly(self, client):
        X = np.array(list(itertools.product((0.0, 1.0), repeat=5)))
        payload = {"net": dumps_net(parity_net()), "X": X.tolist(), "Y": one_hot(parity_labels(X), 2).tolist()}
        response = client.post("/models/evaluate", json=payload)
        assert response.status_code == 200
        assert response.json()["accuracy"] == 1.0
        assert response.json()["n"] == 32

    def test_bad_net_text(self, client):
        response = client.post("/models/evaluate", json={"net": "hello", **TINY})
        assert response.status_code == 400
        assert "Invalid network" in response.json()["detail"]

    def test_shape_mismatch(self, client):
        response = client.post("/models/evaluate", json={"net": dumps_net(parity_net()), **TINY})
        assert response.status_code == 400
