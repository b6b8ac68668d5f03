"""Record live API payloads for the frontend component tests.

Boots the service in-process on a quickly trained model (5 epochs over the
frozen corpus, the same recipe the Python suite uses), replays the requests
the UI makes, and freezes the JSON responses under frontend/tests/fixtures/.
The frontend suite runs against these files instead of a live server, so
they must never be edited by hand; rerun this script after any API change
and review the diff. A trained model is used instead of the identity
initialization because its optimizer runs actually accept moves, which
gives the chart tests a series with real rises.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from fastapi.testclient import TestClient

from molscope.flow import FlowConfig, new_model, train
from molscope.molgraph import to_tensors
from molscope.platform.api import create_app
from molscope.platform.dataset import ingest_dataset

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "frontend" / "tests" / "fixtures"


def record(name: str, payload: dict) -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path.relative_to(ROOT)}")


def main() -> None:
    entries, rejects = ingest_dataset(ROOT / "data" / "corpus200.smi")
    assert not rejects
    tensors = [to_tensors(e.graph, 9) for e in entries]
    model, _ = train(new_model(FlowConfig()), tensors, epochs=5, lr=1e-3, batch=32, seed=0)
    app = create_app(model, entries[:5], model_version="flow-e5-s0", job_workers=1)

    with TestClient(app) as client:
        record("health.json", client.get("/api/health").json())
        record("dataset.json", client.get("/api/dataset").json())
        record("render_cco.json", client.post("/api/render", json={"smiles": "CCO"}).json())
        record(
            "grid_cco_3.json",
            client.post(
                "/api/grid", json={"smiles": "CCO", "steps": 3, "delta": 0.5, "seed": 0}
            ).json(),
        )
        record(
            "grid_cco_3_delta0.json",
            client.post(
                "/api/grid", json={"smiles": "CCO", "steps": 3, "delta": 0.0, "seed": 0}
            ).json(),
        )
        record(
            "interpolate_cco_ccn_5.json",
            client.post(
                "/api/interpolate", json={"from": "CCO", "to": "CCN", "steps": 5}
            ).json(),
        )

        submitted = client.post(
            "/api/optimize",
            json={
                "smiles": "CCO",
                "property": "mol_weight",
                "maximize": True,
                "steps": 20,
                "step_size": 1.5,
                "sim_min": 0.3,
                "seed": 0,
            },
        ).json()
        job_id = submitted["job_id"]
        deadline = time.monotonic() + 30
        while True:
            snap = client.get(f"/api/jobs/{job_id}").json()
            if snap["state"] in ("done", "failed"):
                break
            if time.monotonic() > deadline:
                raise RuntimeError(f"job stuck in state {snap['state']}")
            time.sleep(0.1)
        assert snap["state"] == "done", snap
        record("job_done.json", snap)

        record(
            "error_smiles.json",
            client.post("/api/render", json={"smiles": "C(("}).json(),
        )


if __name__ == "__main__":
    main()
