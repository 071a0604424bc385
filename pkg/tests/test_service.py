from __future__ import annotations

import threading
import time

import pytest
from fastapi.testclient import TestClient

from argueval.backends import Backend, ScriptedBackend
from argueval.config import AppConfig, ServiceSettings, parse_app_config
from argueval.demo import PERSONAS, showcase_scenario
from argueval.service import create_app
from argueval.session import EngineConfig
from argueval.storage import EventLogStore


@pytest.fixture()
def scenario():
    return showcase_scenario()


@pytest.fixture()
def client(scenario, tmp_path):
    config = AppConfig(
        engine=EngineConfig(personas=PERSONAS),
        service=ServiceSettings(data_dir=str(tmp_path / "sessions")),
        deterministic=True,
    )
    backend = ScriptedBackend(scenario.exchanges)
    app = create_app(config, backend=backend)
    with TestClient(app, raise_server_exceptions=False) as client:
        yield client


def wait_done(client, job_id, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.01)
    raise AssertionError("job did not finish in time")


def evaluated_session(client, scenario):
    session_id = client.post("/sessions", json={"essay": scenario.essay}).json()["session_id"]
    job_id = client.post(f"/sessions/{session_id}/evaluate").json()["job_id"]
    job = wait_done(client, job_id)
    assert job["status"] == "done", job
    return session_id


class TestHealthAndErrors:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_error_body_shape(self, client):
        response = client.get("/sessions/nope/report")
        assert response.status_code == 404
        body = response.json()
        assert set(body) == {"code", "message", "detail"}
        assert body["code"] == "unknown_session"

    def test_validation_error_shape(self, client):
        response = client.post("/sessions", json={"wrong": "field"})
        assert response.status_code == 400
        assert response.json()["code"] == "validation_error"

    def test_empty_essay_rejected(self, client):
        response = client.post("/sessions", json={"essay": "   "})
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_essay"

    def test_bad_rubric_rejected(self, client):
        response = client.post("/sessions", json={"essay": "x", "rubric": "dimensions: 3"})
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_rubric"


class TestEvaluationFlow:
    def test_evaluate_poll_report(self, client, scenario):
        session_id = evaluated_session(client, scenario)
        report = client.get(f"/sessions/{session_id}/report").json()
        assert report["state"] == "feedback_ready"
        entries = {e["dimension"]: e for e in report["entries"]}
        assert entries["issue"]["accepted_argument_ids"] == ["A", "C"]
        assert entries["issue"]["grade"]["level"] == 1
        assert len(report["entries"]) == 4

    def test_report_before_evaluation_is_409(self, client, scenario):
        session_id = client.post("/sessions", json={"essay": scenario.essay}).json()["session_id"]
        response = client.get(f"/sessions/{session_id}/report")
        assert response.status_code == 409

    def test_challenge_in_created_state_is_409(self, client, scenario):
        session_id = client.post("/sessions", json={"essay": scenario.essay}).json()["session_id"]
        response = client.post(
            f"/sessions/{session_id}/challenge", json={"dimension": "issue", "text": "no"}
        )
        assert response.status_code == 409

    def test_double_evaluate_is_409(self, client, scenario):
        session_id = evaluated_session(client, scenario)
        response = client.post(f"/sessions/{session_id}/evaluate")
        assert response.status_code == 409

    def test_job_handle_fields(self, client, scenario):
        session_id = client.post("/sessions", json={"essay": scenario.essay}).json()["session_id"]
        job_id = client.post(f"/sessions/{session_id}/evaluate").json()["job_id"]
        job = wait_done(client, job_id)
        assert job["result_ref"] == f"/sessions/{session_id}/report"
        assert job["error"] is None

    def test_unknown_job_is_404(self, client):
        assert client.get("/jobs/missing").status_code == 404


class TestGraph:
    def test_graph_flags_match_solver(self, client, scenario):
        session_id = evaluated_session(client, scenario)
        graph = client.get(f"/sessions/{session_id}/graph/issue").json()
        accepted = {n["id"] for n in graph["nodes"] if n["accepted"]}
        assert accepted == {"A", "C"}
        in_grounded = {n["id"] for n in graph["nodes"] if n["in_grounded"]}
        assert in_grounded == {"A", "C"}
        assert {(e["from"], e["to"]) for e in graph["edges"]} == {
            ("A", "B"),
            ("B", "A"),
            ("C", "B"),
        }

    def test_unknown_dimension_is_404(self, client, scenario):
        session_id = evaluated_session(client, scenario)
        assert client.get(f"/sessions/{session_id}/graph/style").status_code == 404

    def test_graph_before_report_is_409(self, client, scenario):
        session_id = client.post("/sessions", json={"essay": scenario.essay}).json()["session_id"]
        assert client.get(f"/sessions/{session_id}/graph/issue").status_code == 409


class TestChallengeFlow:
    def test_challenge_revises_report(self, client, scenario):
        session_id = evaluated_session(client, scenario)
        response = client.post(
            f"/sessions/{session_id}/challenge",
            json={"dimension": "issue", "text": scenario.challenges["issue"]},
        )
        assert response.status_code == 202
        job = wait_done(client, response.json()["job_id"])
        assert job["status"] == "done", job
        graph = client.get(f"/sessions/{session_id}/graph/issue").json()
        students = [n for n in graph["nodes"] if n["author"] == "student"]
        assert len(students) == 1
        assert students[0]["accepted"] is False
        report = client.get(f"/sessions/{session_id}/report").json()
        entries = {e["dimension"]: e for e in report["entries"]}
        assert entries["issue"]["grade"]["level"] == 1
        assert entries["issue"]["accepted_argument_ids"] == ["A", "C", "E", "F"]

    def test_unknown_challenge_dimension_is_404(self, client, scenario):
        session_id = evaluated_session(client, scenario)
        response = client.post(
            f"/sessions/{session_id}/challenge", json={"dimension": "style", "text": "x"}
        )
        assert response.status_code == 404


class SlowBackend(Backend):
    def __init__(self, inner, delay=0.05):
        self.inner = inner
        self.delay = delay

    def complete(self, messages):
        time.sleep(self.delay)
        return self.inner.complete(messages)


class TestConcurrencyControl:
    def test_second_challenge_in_flight_gets_409(self, scenario, tmp_path):
        config = AppConfig(
            engine=EngineConfig(personas=PERSONAS),
            service=ServiceSettings(data_dir=str(tmp_path / "s")),
            deterministic=True,
        )
        backend = SlowBackend(ScriptedBackend(scenario.exchanges), delay=0.05)
        app = create_app(config, backend=backend)
        with TestClient(app, raise_server_exceptions=False) as client:
            session_id = evaluated_session(client, scenario)
            first = client.post(
                f"/sessions/{session_id}/challenge",
                json={"dimension": "issue", "text": scenario.challenges["issue"]},
            )
            assert first.status_code == 202
            second = client.post(
                f"/sessions/{session_id}/challenge",
                json={"dimension": "issue", "text": "again"},
            )
            assert second.status_code == 409
            assert second.json()["code"] == "busy"
            wait_done(client, first.json()["job_id"])


class TestPersistenceAcrossRestart:
    def test_sessions_survive_service_restart(self, scenario, tmp_path):
        data_dir = str(tmp_path / "sessions")
        config = AppConfig(
            engine=EngineConfig(personas=PERSONAS),
            service=ServiceSettings(data_dir=data_dir),
            deterministic=True,
        )
        backend = ScriptedBackend(scenario.exchanges)
        with TestClient(create_app(config, backend=backend), raise_server_exceptions=False) as client:
            session_id = evaluated_session(client, scenario)
            report_before = client.get(f"/sessions/{session_id}/report").json()
        # fresh app instance over the same data dir
        backend2 = ScriptedBackend(scenario.exchanges)
        with TestClient(create_app(config, backend=backend2), raise_server_exceptions=False) as client:
            report_after = client.get(f"/sessions/{session_id}/report").json()
            assert report_after == report_before


class TestConfigParsing:
    def test_minimal_document(self):
        config = parse_app_config("backend:\n  kind: scripted\n  script_path: s.jsonl\n")
        assert config.backend.kind == "scripted"
        assert config.backend.script_path.endswith("s.jsonl")

    def test_unknown_section_rejected(self):
        with pytest.raises(Exception) as excinfo:
            parse_app_config("backnd: {}\n")
        assert "backnd" in str(excinfo.value)

    def test_personas_round_trip(self):
        doc = """
backend: {kind: scripted, script_path: s.jsonl}
engine:
  personas:
    - {name: Mike, bias: positive}
    - {name: Sarah, bias: negative}
  num_rounds: 2
deterministic: true
"""
        config = parse_app_config(doc)
        assert [p.name for p in config.engine.personas] == ["Mike", "Sarah"]
        assert config.deterministic is True

    def test_bad_bias_rejected(self):
        doc = "engine:\n  personas:\n    - {name: A, bias: upbeat}\n    - {name: B, bias: negative}\n"
        with pytest.raises(Exception):
            parse_app_config(doc)
