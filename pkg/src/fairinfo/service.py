"""HTTP facade over immutable population sessions.

A session pins one population plus its named predictors.  Every GET is a pure
read of that snapshot; merging never mutates a session but instead derives a
new one carrying the merged predictor, so concurrent clients cannot observe
torn state.  The session store is an append-only map guarded by a lock.

JSON over HTTP/1.1, loopback by default, CORS open for the local explorer UI.
No persistence and no authentication: this is a local analysis tool.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from time import time
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .information import CalibrationError, check_calibration, information_report
from .optimize import (
    OptimizationSpec,
    SpecError,
    solve_optimization,
    verify_improvement,
)
from .policy import sweep_curves
from .population import (
    ALL,
    Group,
    Population,
    PopulationError,
    Predictor,
    dump_population,
    load_population,
)
from .refinement import merge_oracle
from .synth import paper_instances


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass(frozen=True)
class Session:
    id: str
    population: Population
    predictors: dict[str, Predictor]
    created: float = field(default_factory=time)


class SessionStore:
    """Append-only session map; inserts are atomic, entries never change."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def add(self, population: Population, predictors: dict[str, Predictor]) -> Session:
        session = Session(secrets.token_hex(8), population, dict(predictors))
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id!r}")
        return session


def _predictor(session: Session, name: str) -> Predictor:
    if name not in session.predictors:
        raise ApiError(
            404, f"unknown predictor {name!r} (available: {sorted(session.predictors)})"
        )
    return session.predictors[name]


def _session_summary(session: Session) -> dict:
    pop = session.population
    return {
        "id": session.id,
        "cells": len(pop.cells),
        "groups": {g.value: float(pop.scope_mass(g)) for g in pop.groups},
        "predictors": sorted(session.predictors),
    }


class Api:
    """Transport-independent request handlers (unit-testable without sockets)."""

    def __init__(self, store: Optional[SessionStore] = None):
        self.store = store or SessionStore()

    def create_session(self, body: bytes) -> tuple[int, dict]:
        try:
            doc = json.loads(body or b"{}")
        except json.JSONDecodeError as exc:
            raise ApiError(400, f"malformed JSON body: {exc.msg}")
        if isinstance(doc, dict) and "demo" in doc:
            instances = paper_instances()
            name = doc["demo"]
            if name not in instances:
                raise ApiError(400, f"unknown demo {name!r} (available: {sorted(instances)})")
            pop, predictors = instances[name]
        else:
            try:
                pop, predictors = load_population(body)
            except PopulationError as exc:
                raise ApiError(400, str(exc))
        session = self.store.add(pop, predictors)
        return 201, _session_summary(session)

    def list_demos(self) -> tuple[int, dict]:
        return 200, {"demos": sorted(paper_instances())}

    def get_session(self, session_id: str) -> tuple[int, dict]:
        return 200, _session_summary(self.store.get(session_id))

    def audit(self, session_id: str, query: dict) -> tuple[int, dict]:
        session = self.store.get(session_id)
        z = _predictor(session, _require(query, "predictor"))
        scope = query.get("scope", [ALL])[0]
        pop = session.population
        try:
            calibration = check_calibration(pop, z, scope)
        except PopulationError as exc:
            raise ApiError(400, str(exc))
        doc = {"calibration": calibration.to_dict()}
        if calibration.is_calibrated:
            doc["information"] = information_report(pop, z, scope).to_dict()
        return 200, doc

    def curves(self, session_id: str, query: dict) -> tuple[int, dict]:
        session = self.store.get(session_id)
        z = _predictor(session, _require(query, "predictor"))
        group = _require(query, "group")
        points = int(query.get("points", ["201"])[0])
        if group not in ("A", "B"):
            raise ApiError(400, "group must be A or B")
        try:
            rows = sweep_curves(session.population, z, group, points=points)
        except (PopulationError, CalibrationError) as exc:
            raise ApiError(400, str(exc))
        return 200, {
            "group": group,
            "rows": [
                {
                    "beta": float(r.beta),
                    "tpr": None if r.tpr is None else float(r.tpr),
                    "fpr": None if r.fpr is None else float(r.fpr),
                    "ppv": None if r.ppv is None else float(r.ppv),
                }
                for r in rows
            ],
        }

    def optimize(self, session_id: str, body: bytes) -> tuple[int, dict]:
        session = self.store.get(session_id)
        doc = _json_object(body)
        z = _predictor(session, _require_field(doc, "predictor"))
        spec_doc = doc.get("spec")
        if spec_doc is None:
            spec_doc = {k: v for k, v in doc.items() if k != "predictor"}
        try:
            spec = OptimizationSpec.from_dict(spec_doc)
            result = solve_optimization(session.population, z, spec)
        except (SpecError, CalibrationError) as exc:
            raise ApiError(400, str(exc))
        if result.status != "optimal":
            return 422, result.to_dict()
        return 200, result.to_dict()

    def merge(self, session_id: str, body: bytes) -> tuple[int, dict]:
        session = self.store.get(session_id)
        doc = _json_object(body)
        z = _predictor(session, _require_field(doc, "z"))
        q = _predictor(session, _require_field(doc, "q"))
        scopes = (Group.A, Group.B) if doc.get("per_group") else ALL
        try:
            report = merge_oracle(session.population, z, q, scopes=scopes)
        except (CalibrationError, PopulationError, ValueError) as exc:
            raise ApiError(400, str(exc))
        predictors = dict(session.predictors)
        predictors[report.result.name] = report.result
        derived = self.store.add(session.population, predictors)
        out = report.to_dict()
        out["session"] = _session_summary(derived)
        out["merged_predictor"] = report.result.name
        return 201, out

    def compare(self, session_id: str, query: dict) -> tuple[int, dict]:
        session = self.store.get(session_id)
        base = _predictor(session, _require(query, "base"))
        refined = _predictor(session, _require(query, "refined"))
        if "spec" in query:
            try:
                spec_doc = json.loads(query["spec"][0])
            except json.JSONDecodeError as exc:
                raise ApiError(400, f"malformed spec JSON: {exc.msg}")
        else:
            spec_doc = {
                k: (v[0] if k in ("objective", "fairness_metric") else float(v[0]))
                for k, v in query.items()
                if k not in ("base", "refined")
            }
        try:
            spec = OptimizationSpec.from_dict(spec_doc)
            report = verify_improvement(session.population, base, refined, [spec])
        except (SpecError, CalibrationError) as exc:
            raise ApiError(400, str(exc))
        return 200, report.to_dict()

    def export(self, session_id: str) -> tuple[int, dict]:
        session = self.store.get(session_id)
        text = dump_population(session.population, session.predictors)
        return 200, json.loads(text)


def _require(query: dict, key: str) -> str:
    values = query.get(key)
    if not values:
        raise ApiError(400, f"missing query parameter {key!r}")
    return values[0]


def _require_field(doc: dict, key: str) -> str:
    if key not in doc:
        raise ApiError(400, f"missing body field {key!r}")
    return doc[key]


def _json_object(body: bytes) -> dict:
    try:
        doc = json.loads(body or b"{}")
    except json.JSONDecodeError as exc:
        raise ApiError(400, f"malformed JSON body: {exc.msg}")
    if not isinstance(doc, dict):
        raise ApiError(400, "body must be a JSON object")
    return doc


class _Handler(BaseHTTPRequestHandler):
    api: Api  # injected by make_server
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, doc: dict) -> None:
        payload = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(payload)

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _route(self, method: str) -> None:
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = parse_qs(url.query)
        try:
            status, doc = self._dispatch(method, parts, query)
        except ApiError as exc:
            status, doc = exc.status, {"error": exc.message}
        except Exception as exc:  # pragma: no cover - defensive
            status, doc = 500, {"error": f"{type(exc).__name__}: {exc}"}
        self._send(status, doc)

    def _dispatch(self, method: str, parts: list[str], query: dict) -> tuple[int, dict]:
        api = self.api
        if method == "GET" and parts == ["demos"]:
            return api.list_demos()
        if method == "POST" and parts == ["sessions"]:
            return api.create_session(self._body())
        if len(parts) >= 2 and parts[0] == "sessions":
            session_id = parts[1]
            tail = parts[2:]
            if method == "GET" and tail == []:
                return api.get_session(session_id)
            if method == "GET" and tail == ["audit"]:
                return api.audit(session_id, query)
            if method == "GET" and tail == ["curves"]:
                return api.curves(session_id, query)
            if method == "GET" and tail == ["compare"]:
                return api.compare(session_id, query)
            if method == "GET" and tail == ["export"]:
                return api.export(session_id)
            if method == "POST" and tail == ["optimize"]:
                return api.optimize(session_id, self._body())
            if method == "POST" and tail == ["merge"]:
                return api.merge(session_id, self._body())
        raise ApiError(404, f"no route for {method} /{'/'.join(parts)}")

    def do_GET(self) -> None:
        self._route("GET")

    def do_POST(self) -> None:
        self._route("POST")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Content-Length", "0")
        self.end_headers()


def make_server(host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    api = Api()
    handler = type("BoundHandler", (_Handler,), {"api": api})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(host: str = "127.0.0.1", port: int = 8151) -> None:
    server = make_server(host, port)
    print(f"fairinfo service listening on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:  # pragma: no cover
        pass
