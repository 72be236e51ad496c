"""HTTP facade over the query pipeline.

Datasets are uploaded once and addressed by content hash, queries run on a
small thread pool, and reports plus artifacts are fetched by run id. All
state lives in process memory; finished runs are retained up to a cap and
then evicted oldest-first. Intended for one analyst or a small team, not
multi-tenant use.
"""

from __future__ import annotations

import json
import tempfile
import threading
import uuid
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

from fastapi import (
    APIRouter,
    Body,
    Depends,
    FastAPI,
    File,
    Form,
    HTTPException,
    Request,
    Response,
    UploadFile,
)
from fastapi.middleware.cors import CORSMiddleware

from .dataset import Dataset, DatasetError, load_dataset, schema_from_json
from .query import QueryError, RunResult, execute_query, parse_query

MAX_UPLOAD_BYTES = 100 * 1024 * 1024
RUN_RETENTION = 100
POOL_SIZE = 2

_MEDIA_TYPES = {
    "report.json": "application/json",
    "radar.json": "application/json",
    "candidates.csv": "text/csv",
    "projection.csv": "text/csv",
    "graph.dot": "text/vnd.graphviz",
}

FINISHED = ("done", "failed")


@dataclass
class RunRecord:
    run_id: str
    dataset_id: str
    query_echo: dict
    status: str = "queued"
    error: str | None = None
    result: RunResult | None = None

    def summary(self) -> dict:
        out = {"run_id": self.run_id, "dataset_id": self.dataset_id,
               "status": self.status}
        if self.error is not None:
            out["error"] = self.error
        if self.result is not None:
            out["infeasible"] = self.result.infeasible
        return out


class _State:
    def __init__(self, pool_size: int, retention: int):
        self.datasets: dict[str, Dataset] = {}
        self.runs: OrderedDict[str, RunRecord] = OrderedDict()
        self.lock = threading.Lock()
        self.retention = retention
        self.executor = ThreadPoolExecutor(max_workers=pool_size)


def create_app(token: str | None = None,
               max_upload_bytes: int = MAX_UPLOAD_BYTES,
               pool_size: int = POOL_SIZE,
               retention: int = RUN_RETENTION) -> FastAPI:
    state = _State(pool_size, retention)

    @asynccontextmanager
    async def lifespan(app):
        yield
        state.executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="cfadvisor", lifespan=lifespan)
    app.state.store = state
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])

    def check_token(request: Request):
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(401, "missing or wrong bearer token")

    api = APIRouter(dependencies=[Depends(check_token)])

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @api.post("/datasets")
    async def upload_dataset(file: UploadFile = File(...),
                             schema_file: UploadFile | None = File(
                                 None, alias="schema"),
                             schema_inline: str | None = Form(
                                 None, alias="schema_json")):
        blob = await file.read()
        if len(blob) > max_upload_bytes:
            raise HTTPException(413, f"dataset exceeds {max_upload_bytes} bytes")
        if (schema_file is None) == (schema_inline is None):
            raise HTTPException(400, "provide exactly one of schema file or "
                                     "schema_json form field")
        schema_text = ((await schema_file.read()).decode()
                       if schema_file else schema_inline)
        try:
            columns = schema_from_json(json.loads(schema_text))
        except (json.JSONDecodeError, DatasetError) as exc:
            raise HTTPException(400, f"bad schema: {exc}")

        suffix = Path(file.filename or "data.csv").suffix or ".csv"
        with tempfile.NamedTemporaryFile(suffix=suffix, delete=False) as tmp:
            tmp.write(blob)
            tmp_path = Path(tmp.name)
        try:
            ds = load_dataset(tmp_path, columns)
        except DatasetError as exc:
            raise HTTPException(400, f"bad dataset: {exc}")
        finally:
            tmp_path.unlink(missing_ok=True)

        dataset_id = ds.content_hash[:16]
        with state.lock:
            existed = dataset_id in state.datasets
            if not existed:
                state.datasets[dataset_id] = ds
        body = {
            "dataset_id": dataset_id,
            "content_hash": ds.content_hash,
            "n_rows": int(next(iter(ds.values.values())).shape[0]),
            "columns": [c.to_dict() for c in ds.schema],
            "existing": existed,
        }
        return Response(json.dumps(body), status_code=200 if existed else 201,
                        media_type="application/json")

    @api.get("/datasets")
    def list_datasets():
        with state.lock:
            items = [{"dataset_id": k,
                      "n_rows": int(next(iter(ds.values.values())).shape[0]),
                      "columns": [c.to_dict() for c in ds.schema]}
                     for k, ds in state.datasets.items()]
        return {"datasets": items}

    def _execute(record: RunRecord, ds: Dataset, query):
        def on_phase(name):
            with state.lock:
                record.status = name

        try:
            result = execute_query(ds, query, on_phase=on_phase)
            with state.lock:
                record.result = result
                record.status = "done"
        except Exception as exc:
            stage = getattr(exc, "stage", "run")
            with state.lock:
                record.status = "failed"
                record.error = f"{stage}: {exc}"

    @api.post("/queries", status_code=202)
    def submit_query(payload: dict = Body(...)):
        dataset_id = payload.get("dataset_id")
        if not isinstance(dataset_id, str):
            raise HTTPException(400, "payload needs a dataset_id string")
        with state.lock:
            ds = state.datasets.get(dataset_id)
        if ds is None:
            raise HTTPException(404, f"unknown dataset {dataset_id!r}")
        try:
            query = parse_query(payload.get("query"))
        except QueryError as exc:
            raise HTTPException(400, f"bad query: {exc}")

        record = RunRecord(run_id=uuid.uuid4().hex, dataset_id=dataset_id,
                           query_echo=query.echo())
        with state.lock:
            state.runs[record.run_id] = record
            while len(state.runs) > state.retention:
                victim = next((k for k, r in state.runs.items()
                               if r.status in FINISHED), None)
                if victim is None:
                    break
                del state.runs[victim]
        state.executor.submit(_execute, record, ds, query)
        return {"run_id": record.run_id}

    def _get_run(run_id: str) -> RunRecord:
        with state.lock:
            record = state.runs.get(run_id)
        if record is None:
            raise HTTPException(404, f"unknown run {run_id!r}")
        return record

    @api.get("/runs")
    def list_runs():
        with state.lock:
            items = [r.summary() for r in state.runs.values()]
        return {"runs": items}

    @api.get("/runs/{run_id}")
    def run_status(run_id: str):
        record = _get_run(run_id)
        out = record.summary()
        out["query"] = record.query_echo
        return out

    @api.get("/reports/{run_id}")
    def get_report(run_id: str):
        record = _get_run(run_id)
        if record.status != "done":
            raise HTTPException(409, {"status": record.status,
                                      "error": record.error})
        return record.result.report

    @api.get("/reports/{run_id}/artifacts/{name}")
    def get_artifact(run_id: str, name: str):
        record = _get_run(run_id)
        if record.status != "done":
            raise HTTPException(409, {"status": record.status,
                                      "error": record.error})
        blob = record.result.artifacts.get(name)
        if blob is None:
            raise HTTPException(
                404, f"no artifact {name!r}; have {sorted(record.result.artifacts)}")
        return Response(blob, media_type=_MEDIA_TYPES.get(
            name, "application/octet-stream"))

    app.include_router(api)
    return app


def main(argv=None) -> int:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(
        prog="cfadvisor-service", description="serve the query pipeline over HTTP")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--token", default=None,
                        help="require this bearer token on every request")
    parser.add_argument("--pool-size", type=int, default=POOL_SIZE)
    args = parser.parse_args(argv)
    uvicorn.run(create_app(token=args.token, pool_size=args.pool_size),
                host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
