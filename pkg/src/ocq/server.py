"""HTTP facade over ingestion and the engine for the visual editor.

Logs and evaluation results live in in-memory LRU registries keyed by
content hash, so identical requests return identical ids and bodies.
"""

from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .engine import EvaluationResult, evaluate_tree
from .errors import InvalidQuery, OcqError, ParseError, ResultTooLarge
from .export import export_csv, summarize
from .index import IndexedLog, build_index
from .model import KIND_EVENT, parse_query_json, serialize_query
from .oced import Oced
from .ocel_json import import_ocel2_json, validate

DEFAULT_MAX_LOG_BYTES = 128 * 1024 * 1024
DEFAULT_EVAL_TIMEOUT = 120.0
_PAGE_LIMIT = 10_000


class _Lru:
    """Thread-safe LRU map with a fixed capacity."""

    def __init__(self, cap: int) -> None:
        self.cap = cap
        self._items: OrderedDict[str, object] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: str):
        with self._lock:
            item = self._items.get(key)
            if item is not None:
                self._items.move_to_end(key)
            return item

    def put(self, key: str, value) -> None:
        with self._lock:
            self._items[key] = value
            self._items.move_to_end(key)
            while len(self._items) > self.cap:
                self._items.popitem(last=False)


class _StoredLog:
    __slots__ = ("log", "idx", "meta")

    def __init__(self, log: Oced, idx: IndexedLog, meta: dict) -> None:
        self.log = log
        self.idx = idx
        self.meta = meta


def _log_metadata(log_id: str, log: Oced) -> dict:
    qualifiers = set()
    for ev in log.events.values():
        qualifiers.update(q for q, _ in ev.e2o)
    for ob in log.objects.values():
        qualifiers.update(q for q, _ in ob.o2o)
    return {
        "logId": log_id,
        "counts": {"events": log.num_events, "objects": log.num_objects},
        "eventTypes": sorted({ev.activity for ev in log.events.values()}),
        "objectTypes": sorted({ob.otype for ob in log.objects.values()}),
        "qualifiers": sorted(qualifiers),
    }


def _error(status: int, message: str, findings=None) -> JSONResponse:
    body: dict = {"error": message}
    if findings is not None:
        body["findings"] = findings
    return JSONResponse(status_code=status, content=body)


def _findings_payload(findings) -> list[dict]:
    return [{"code": f.code, "where": f.where, "message": f.message} for f in findings]


def create_app(
    max_log_bytes: int = DEFAULT_MAX_LOG_BYTES,
    eval_timeout: float = DEFAULT_EVAL_TIMEOUT,
    static_dir: Optional[str] = None,
    log_cap: int = 16,
    result_cap: int = 64,
) -> FastAPI:
    app = FastAPI(title="ocq", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    logs = _Lru(log_cap)
    results = _Lru(result_cap)
    workers = ThreadPoolExecutor(max_workers=4)

    @app.post("/api/log")
    async def post_log(request: Request):
        body = await request.body()
        if len(body) > max_log_bytes:
            return _error(413, f"log exceeds {max_log_bytes} bytes")
        log_id = hashlib.sha256(body).hexdigest()[:16]
        stored = logs.get(log_id)
        if stored is None:
            try:
                log = import_ocel2_json(body)
            except OcqError as exc:
                return _error(422, str(exc))
            report = validate(log)
            if report.errors:
                return _error(
                    422,
                    "log failed validation",
                    [{"code": f.code, "where": f.ref, "message": f.message} for f in report.errors],
                )
            stored = _StoredLog(log, build_index(log), _log_metadata(log_id, log))
            logs.put(log_id, stored)
        return stored.meta

    @app.get("/api/log/{log_id}/info")
    def log_info(log_id: str):
        stored = logs.get(log_id)
        if stored is None:
            return _error(404, f"unknown log {log_id!r}")
        return stored.meta

    @app.post("/api/query/evaluate")
    async def evaluate(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(422, "body must be JSON")
        if not isinstance(payload, dict) or "logId" not in payload or "tree" not in payload:
            return _error(422, "body needs 'logId' and 'tree'")
        stored = logs.get(str(payload["logId"]))
        if stored is None:
            return _error(404, f"unknown log {payload['logId']!r}")
        try:
            tree = parse_query_json(payload["tree"])
        except InvalidQuery as exc:
            return _error(422, "invalid query tree", _findings_payload(exc.findings))
        except ParseError as exc:
            return _error(422, str(exc))
        result_id = hashlib.sha256(
            str(payload["logId"]).encode() + serialize_query(tree)
        ).hexdigest()[:16]
        result = results.get(result_id)
        if result is None:
            future = workers.submit(evaluate_tree, tree, stored.idx)
            try:
                result = future.result(timeout=eval_timeout)
            except ResultTooLarge as exc:
                return _error(409, str(exc))
            except FutureTimeout:
                return _error(504, f"evaluation exceeded {eval_timeout:.0f}s")
            results.put(result_id, result)
        return {"resultId": result_id, "perNode": summarize(result)}

    def _node_or_error(result_id: str, node_id: str):
        result = results.get(result_id)
        if result is None:
            return None, _error(404, f"unknown result {result_id!r}")
        res = result.per_node.get(node_id)
        if res is None:
            return None, _error(404, f"unknown node {node_id!r}")
        return (result, res), None

    @app.get("/api/result/{result_id}/node/{node_id}")
    def node_page(
        result_id: str,
        node_id: str,
        offset: int = Query(0, ge=0),
        limit: int = Query(100, ge=0, le=_PAGE_LIMIT),
        includeBasicOnly: bool = Query(False),
    ):
        found, err = _node_or_error(result_id, node_id)
        if err is not None:
            return err
        result, res = found
        assert isinstance(result, EvaluationResult)
        box = result.tree.nodes[node_id]
        visible = (
            np.arange(res.n_rows) if includeBasicOnly else np.nonzero(~res.cbs_excluded)[0]
        )
        satisfied = res.satisfied_mask()
        it = result.idx.interner
        tables = {
            var: (it.event_ids if kind == KIND_EVENT else it.object_ids)
            for var, kind in zip(res.var_names, res.var_kinds)
        }
        label_names = [spec.name for spec in box.labels]
        rows = []
        for i in visible[offset : offset + limit]:
            i = int(i)
            labels = {}
            for name in label_names:
                values, present = res.labels[name]
                labels[name] = float(values[i]) if bool(present[i]) else None
            rows.append(
                {
                    "vars": {
                        var: tables[var].name_of(int(res.columns[var][i]))
                        for var in res.var_names
                    },
                    "satisfied": bool(satisfied[i]),
                    "cbsExcluded": bool(res.cbs_excluded[i]),
                    "verdicts": [bool(v) for v in res.verdicts[:, i]],
                    "labels": labels,
                }
            )
        return {
            "total": int(visible.size),
            "offset": offset,
            "limit": limit,
            "varNames": list(res.var_names),
            "labelNames": label_names,
            "hasConstraints": bool(box.constraints),
            "rows": rows,
        }

    @app.get("/api/result/{result_id}/node/{node_id}/export.csv")
    def node_csv(result_id: str, node_id: str, includeBasicOnly: bool = Query(False)):
        found, err = _node_or_error(result_id, node_id)
        if err is not None:
            return err
        result, _ = found
        data = export_csv(result, node_id, include_basic_only=includeBasicOnly)
        return Response(
            content=data,
            media_type="text/csv",
            headers={"Content-Disposition": f'attachment; filename="{node_id}.csv"'},
        )

    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:

        @app.get("/")
        def root():
            return {"service": "ocq", "api": "/api"}

    return app


def run_server(host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    candidates = [Path("frontend/dist"), Path(__file__).resolve().parents[2] / "frontend" / "dist"]
    static = next((str(p) for p in candidates if p.is_dir()), None)
    uvicorn.run(create_app(static_dir=static), host=host, port=port)
