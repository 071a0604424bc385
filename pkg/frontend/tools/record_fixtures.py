"""Record real API responses for the frontend contract tests.

Runs the service in-process against the bundled scripted scenario, performs
the full flow (create, evaluate, report, graphs, challenge, revised report),
and dumps every response body to test/fixtures/showcase.json. Regenerate
with:  python3 tools/record_fixtures.py   (from the frontend/ directory)
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from fastapi.testclient import TestClient

from argueval.backends import ScriptedBackend
from argueval.config import AppConfig, ServiceSettings
from argueval.demo import PERSONAS, showcase_scenario
from argueval.service import create_app
from argueval.session import EngineConfig


def wait_done(client: TestClient, job_id: str) -> dict:
    for _ in range(500):
        job = client.get(f"/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            assert job["status"] == "done", job
            return job
        time.sleep(0.01)
    raise RuntimeError("job did not finish")


def main() -> None:
    import tempfile

    scenario = showcase_scenario()
    with tempfile.TemporaryDirectory() as data_dir:
        config = AppConfig(
            engine=EngineConfig(personas=PERSONAS),
            service=ServiceSettings(data_dir=data_dir),
            deterministic=True,
        )
        app = create_app(config, backend=ScriptedBackend(scenario.exchanges))
        fixtures: dict = {"essay": scenario.essay, "challenge_text": scenario.challenges["issue"]}
        with TestClient(app) as client:
            created = client.post("/sessions", json={"essay": scenario.essay}).json()
            fixtures["create"] = created
            session_id = created["session_id"]

            evaluate = client.post(f"/sessions/{session_id}/evaluate").json()
            fixtures["evaluate_job"] = evaluate
            fixtures["job_done"] = wait_done(client, evaluate["job_id"])

            fixtures["report_initial"] = client.get(f"/sessions/{session_id}/report").json()
            for dim in ("issue", "evidence", "position", "conclusion"):
                fixtures[f"graph_{dim}_initial"] = client.get(
                    f"/sessions/{session_id}/graph/{dim}"
                ).json()

            challenge = client.post(
                f"/sessions/{session_id}/challenge",
                json={"dimension": "issue", "text": scenario.challenges["issue"]},
            ).json()
            fixtures["challenge_job"] = challenge
            fixtures["challenge_job_done"] = wait_done(client, challenge["job_id"])
            fixtures["report_revised"] = client.get(f"/sessions/{session_id}/report").json()
            fixtures["graph_issue_revised"] = client.get(
                f"/sessions/{session_id}/graph/issue"
            ).json()

    out = Path(__file__).parent.parent / "test" / "fixtures" / "showcase.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(fixtures, indent=2, sort_keys=True) + "\n", "utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
