#!/usr/bin/env python3
"""Record real API responses for the frontend test suite.

Drives the HTTP facade through the two-branch refactoring walkthrough and
writes the responses to frontend/tests/fixtures/walkthrough.json, so the UI
tests assert against genuine solver output rather than hand-written numbers.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fastapi.testclient import TestClient

from spe_workbench.api import create_app
from spe_workbench.fixtures import ecs_bytes
from spe_workbench.modelio import parse_json_bytes

BLOB_ACTION = {
    "type": "blobSplit",
    "subject": "ProductCatalog",
    "parts": [
        {"name": "FilmCatalog", "probability": 0.8, "operations": None},
        {"name": "BookCatalog", "probability": 0.2, "operations": None},
    ],
}
EST_ACTION = {
    "type": "estFacade",
    "scenario": "Register",
    "caller": "UserController",
    "callee": "Database",
    "remoteFacadeName": "RemoteFacade",
    "localFacadeName": "LocalFacade",
}
CATALOG_SPLIT = {
    "kind": "splitCenter",
    "center": "ProductCatalog",
    "parts": [{"id": "FilmCatalog", "probability": 0.8}, {"id": "BookCatalog", "probability": 0.2}],
}
FILM_SPLIT = {
    "kind": "splitCenter",
    "center": "FilmCatalog",
    "parts": [{"id": "FilmCatalog1", "probability": 0.5}, {"id": "FilmCatalog2", "probability": 0.5}],
}


def main() -> None:
    client = TestClient(create_app())
    model_doc = parse_json_bytes(ecs_bytes())
    model_id = client.post("/api/v1/models", json=model_doc).json()["id"]
    session = client.post("/api/v1/sessions", json={"modelId": model_id}).json()
    sid, root = session["id"], session["rootId"]

    antipatterns = client.get(f"/api/v1/models/{model_id}/antipatterns").json()
    root_qn = client.get(f"/api/v1/sessions/{sid}/nodes/{root}/qn").json()

    blob_node = client.post(
        f"/api/v1/sessions/{sid}/nodes/{root}/expand",
        json={"actionId": "ui-blob", "action": BLOB_ACTION},
    ).json()
    est_node = client.post(
        f"/api/v1/sessions/{sid}/nodes/{blob_node['id']}/expand",
        json={"actionId": "ui-est", "action": EST_ACTION},
    ).json()
    catalog_node = client.post(
        f"/api/v1/sessions/{sid}/nodes/{root}/qn-edits",
        json={"actionId": "ui-catalog-split", "edits": [CATALOG_SPLIT]},
    ).json()
    catalog_qn = client.get(f"/api/v1/sessions/{sid}/nodes/{catalog_node['id']}/qn").json()
    film_node = client.post(
        f"/api/v1/sessions/{sid}/nodes/{catalog_node['id']}/qn-edits",
        json={"actionId": "ui-film-split", "edits": [FILM_SPLIT]},
    ).json()
    film_qn = client.get(f"/api/v1/sessions/{sid}/nodes/{film_node['id']}/qn").json()
    tree = client.get(f"/api/v1/sessions/{sid}/tree").json()
    ledger = client.get(f"/api/v1/sessions/{sid}/ledger").json()

    fixture = {
        "model": model_doc,
        "rootId": root,
        "nodes": {
            node["id"]: node
            for node in [tree_node for tree_node in tree["nodes"]]
        },
        "edges": {
            "blob": {"parent": root, "node": blob_node["id"]},
            "est": {"parent": blob_node["id"], "node": est_node["id"]},
            "catalogSplit": {"parent": root, "node": catalog_node["id"]},
            "filmSplit": {"parent": catalog_node["id"], "node": film_node["id"]},
        },
        "antipatterns": antipatterns,
        "qnViews": {root: root_qn, catalog_node["id"]: catalog_qn, film_node["id"]: film_qn},
        "ledger": ledger,
        "actions": {
            "blob": BLOB_ACTION,
            "est": EST_ACTION,
            "catalogSplit": CATALOG_SPLIT,
            "filmSplit": FILM_SPLIT,
        },
    }
    out = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    (out / "walkthrough.json").write_text(json.dumps(fixture, indent=2) + "\n")
    print(f"wrote {out / 'walkthrough.json'}")


if __name__ == "__main__":
    main()
