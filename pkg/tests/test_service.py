import json
import threading
from urllib.error import HTTPError
from urllib.parse import urlencode
from urllib.request import Request, urlopen

import pytest

from fairinfo.cli import main
from fairinfo.service import make_server


@pytest.fixture(scope="module")
def server_url():
    server = make_server(port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield f"http://{host}:{port}"
    server.shutdown()


def call(url, method="GET", body=None):
    data = None
    if body is not None:
        data = body if isinstance(body, bytes) else json.dumps(body).encode()
    request = Request(url, data=data, method=method)
    if data is not None:
        request.add_header("Content-Type", "application/json")
    try:
        with urlopen(request) as response:
            return response.status, json.loads(response.read() or b"{}")
    except HTTPError as err:
        return err.code, json.loads(err.read() or b"{}")


@pytest.fixture(scope="module")
def figure1_session(server_url):
    status, doc = call(f"{server_url}/sessions", "POST", {"demo": "figure1"})
    assert status == 201
    return doc["id"]


@pytest.fixture(scope="module")
def caution_session(server_url):
    status, doc = call(f"{server_url}/sessions", "POST", {"demo": "caution"})
    assert status == 201
    return doc["id"]


def test_demos_listed(server_url):
    status, doc = call(f"{server_url}/demos")
    assert status == 200
    assert doc["demos"] == ["caution", "figure1", "groupwise"]


def test_create_session_from_population_file(server_url, tmp_path):
    path = tmp_path / "population.json"
    assert main(["demo", "--name", "groupwise", "--out", str(path)]) == 0
    status, doc = call(f"{server_url}/sessions", "POST", path.read_bytes())
    assert status == 201
    assert doc["cells"] == 6
    assert set(doc["groups"]) == {"A", "B"}


def test_malformed_body_is_400(server_url):
    status, doc = call(f"{server_url}/sessions", "POST", b"{not json")
    assert status == 400
    bad = {"cells": [{"id": "x", "mass": 0.9, "group": "A", "p_star": 0.5}], "predictors": {}}
    status, doc = call(f"{server_url}/sessions", "POST", bad)
    assert status == 400
    assert "mass-sum" in doc["error"]


def test_unknown_session_and_predictor_404(server_url, figure1_session):
    status, _ = call(f"{server_url}/sessions/deadbeef/audit?predictor=z")
    assert status == 404
    status, doc = call(f"{server_url}/sessions/{figure1_session}/audit?predictor=missing")
    assert status == 404
    assert "missing" in doc["error"]


def test_audit_returns_figure1_contents(server_url, figure1_session):
    status, doc = call(f"{server_url}/sessions/{figure1_session}/audit?predictor=z")
    assert status == 200
    assert doc["information"]["content"] == pytest.approx(1 / 6)
    status, doc = call(f"{server_url}/sessions/{figure1_session}/audit?predictor=z_prime")
    assert doc["information"]["content"] == pytest.approx(1 / 3)


def test_curves_rows(server_url, caution_session):
    status, doc = call(
        f"{server_url}/sessions/{caution_session}/curves?predictor=z&group=B&points=5"
    )
    assert status == 200
    betas = [row["beta"] for row in doc["rows"]]
    assert betas[0] == 0 and betas[-1] == 1


def test_optimize_endpoint(server_url, caution_session):
    body = {
        "predictor": "z",
        "objective": "utility",
        "fairness_metric": "beta",
        "eps": 0,
        "t_i": -1,
        "tau_u": 0.7,
        "tau_l": 0.5,
    }
    status, doc = call(f"{server_url}/sessions/{caution_session}/optimize", "POST", body)
    assert status == 200
    assert doc["value"] == pytest.approx(0.05)
    infeasible = dict(body, objective="impact", t_u=0.5)
    status, doc = call(f"{server_url}/sessions/{caution_session}/optimize", "POST", infeasible)
    assert status == 422
    assert doc["status"] == "infeasible"


def test_merge_creates_new_immutable_session(server_url, figure1_session):
    before = call(f"{server_url}/sessions/{figure1_session}")[1]
    status, doc = call(
        f"{server_url}/sessions/{figure1_session}/merge",
        "POST",
        {"z": "z", "q": "z_prime"},
    )
    assert status == 201
    new_id = doc["session"]["id"]
    assert new_id != figure1_session
    assert doc["merged_predictor"] in doc["session"]["predictors"]
    after = call(f"{server_url}/sessions/{figure1_session}")[1]
    assert after == before  # original session untouched


def test_merge_then_compare_improves(server_url, caution_session):
    status, doc = call(
        f"{server_url}/sessions/{caution_session}/merge",
        "POST",
        {"z": "z", "q": "z", "per_group": True},
    )
    assert status == 201
    # comparing a predictor against itself: equal optima, zero margins
    session = doc["session"]["id"]
    merged = doc["merged_predictor"]
    query = urlencode(
        {
            "base": "z",
            "refined": merged,
            "spec": json.dumps(
                {"objective": "utility", "fairness_metric": "beta", "eps": 0.0,
                 "t_i": -1, "tau_u": 0.7, "tau_l": 0.5}
            ),
        }
    )
    status, doc = call(f"{server_url}/sessions/{session}/compare?{query}")
    assert status == 200
    assert doc["ok"] is True
    comparison = doc["comparisons"][0]
    assert comparison["opt_refined"] >= comparison["opt_base"] - 1e-8


def test_repeated_reads_identical(server_url, figure1_session):
    url = f"{server_url}/sessions/{figure1_session}/audit?predictor=z"
    first = call(url)
    second = call(url)
    assert first == second
