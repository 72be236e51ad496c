#!/usr/bin/env python3
# The whole pipeline over HTTP: upload a dataset, submit a query, poll,
# fetch the report and artifacts. TestClient keeps it self-contained; a
# real deployment runs `python3 -m cfadvisor.service --port 8080` and the
# calls below work unchanged with any HTTP client.

import io
import json
import time

from fastapi.testclient import TestClient

from cfadvisor.dataset import write_csv
from cfadvisor.service import create_app
from cfadvisor.synth import synth_dataset
import tempfile
from pathlib import Path

tmp = Path(tempfile.mkdtemp())
ds = synth_dataset("fugaku-like", 400, seed=1)
write_csv(ds, tmp / "jobs.csv")
schema = json.dumps([c.to_dict() for c in ds.schema])

client = TestClient(create_app())

resp = client.post("/datasets", files={
    "file": ("jobs.csv", io.BytesIO((tmp / "jobs.csv").read_bytes()), "text/csv"),
    "schema": ("schema.json", io.BytesIO(schema.encode()), "application/json"),
})
dataset_id = resp.json()["dataset_id"]
print("uploaded dataset", dataset_id, "->", resp.status_code)

resp = client.post("/queries", json={
    "dataset_id": dataset_id,
    "query": {
        "Type": "Recommend",
        "Targets": {"duration": "< 120"},
        "Constraints": {"state": "completed"},
    },
})
run_id = resp.json()["run_id"]
print("submitted run", run_id)

while True:
    status = client.get(f"/runs/{run_id}").json()["status"]
    print("  status:", status)
    if status in ("done", "failed"):
        break
    time.sleep(0.3)

report = client.get(f"/reports/{run_id}").json()
print("\ntop candidate:")
best = report["topk"][0]
print("  features:", {k: round(v, 2) if isinstance(v, float) else v
                      for k, v in best["features"].items()})
print("  " + best["explanation"])

for name in ("candidates.csv", "graph.dot", "projection.csv", "radar.json"):
    blob = client.get(f"/reports/{run_id}/artifacts/{name}")
    print(f"artifact {name}: {len(blob.content)} bytes")
