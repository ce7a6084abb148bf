"""HTTP API over sessions, metrics, and the drift monitor.

Sessions live in memory up to a configurable capacity with least-recently-
used eviction; requesting an evicted session answers 410, never stale
data. GET handlers are read-only (metric cache fills aside, which are
idempotent), and the report endpoint emits byte-for-byte what the CLI
writes for the same input.

Every analyzed token is also folded into a process-wide MonitorState,
exposed at /monitor/status.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response

from .backend import BackendDescriptor, fetch_logprobs
from .distributions import TokenDistribution
from .errors import TokentropyError
from .metrics import METRIC_KINDS, token_metrics
from .monitor import MonitorState
from .records import parse_records
from .session import (
    AnalysisSession,
    build_session,
    color_map,
    render_report_bytes,
    scatter_export,
)

DEFAULT_TOPK = 10


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    capacity: int = 64
    backend: Optional[BackendDescriptor] = None
    assets_path: Optional[str] = None
    monitor_capacity: int = 512
    monitor_k: float = 3.0

    def __post_init__(self):
        if not 0 <= self.port <= 65535:
            raise ValueError(f"invalid port {self.port}")
        if self.capacity < 1:
            raise ValueError("session store capacity must be >= 1")


class SessionStore:
    """LRU map of session id to AnalysisSession; mutations are serialized."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, AnalysisSession] = OrderedDict()
        self._evicted: set[str] = set()

    def put(self, session: AnalysisSession):
        with self._lock:
            self._sessions[session.session_id] = session
            self._sessions.move_to_end(session.session_id)
            while len(self._sessions) > self.capacity:
                evicted_id, _ = self._sessions.popitem(last=False)
                self._evicted.add(evicted_id)

    def get(self, session_id: str) -> AnalysisSession:
        with self._lock:
            if session_id in self._sessions:
                self._sessions.move_to_end(session_id)
                return self._sessions[session_id]
        if session_id in self._evicted:
            raise HTTPException(status_code=410, detail="session evicted")
        raise HTTPException(status_code=404, detail="unknown session")


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="tokentropy", docs_url=None, redoc_url=None)
    store = SessionStore(config.capacity)
    monitor = MonitorState(capacity=config.monitor_capacity, k=config.monitor_k)
    monitor_lock = threading.Lock()
    app.state.store = store
    app.state.monitor = monitor
    app.state.config = config

    def _observe_session(session: AnalysisSession):
        with monitor_lock:
            for d in session.distributions:
                monitor.observe(token_metrics(d))

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            body = await request.json()
        except ValueError as exc:
            raise HTTPException(status_code=400, detail="body is not valid JSON") from exc
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        has_records = "records" in body
        has_prompt = "prompt" in body
        if has_records == has_prompt:
            raise HTTPException(
                status_code=400, detail="provide exactly one of records or prompt"
            )
        try:
            if has_records:
                records = body["records"]
                if isinstance(records, list):
                    records = "\n".join(
                        r if isinstance(r, str) else _dump(r) for r in records
                    )
                distributions, texts = parse_records(records)
                label = body.get("label", "records")
                source_text = None
            else:
                backend = _resolve_backend(body.get("backend"), config)
                distributions, texts = fetch_logprobs(backend, body["prompt"])
                label = body.get("label", "prompt")
                source_text = body["prompt"]
            session = build_session(label, distributions, texts, source_text=source_text)
        except TokentropyError as exc:
            status = 502 if has_prompt else 400
            raise HTTPException(status_code=status, detail=str(exc)) from exc
        store.put(session)
        _observe_session(session)
        return {"id": session.session_id, "label": session.label, "tokens": len(session)}

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        session = store.get(session_id)
        return Response(content=render_report_bytes(session), media_type="application/json")

    @app.get("/sessions/{session_id}/metrics/{kind}")
    def get_metric_vector(session_id: str, kind: str):
        session = store.get(session_id)
        if kind not in METRIC_KINDS:
            raise HTTPException(status_code=404, detail=f"unknown metric kind {kind!r}")
        values = session.metric(kind)
        return {
            "kind": kind,
            "values": [float(v) for v in values],
            "intensities": [float(v) for v in color_map(values, kind)],
            "tokens": session.token_texts,
            "approximate": session.approximate,
        }

    @app.get("/sessions/{session_id}/scatter")
    def get_scatter(session_id: str):
        session = store.get(session_id)
        return {
            "label": session.label,
            "points": [[h, v, pos, tok] for h, v, pos, tok in scatter_export(session)],
        }

    @app.get("/sessions/{session_id}/tokens/{position}/topk")
    def get_topk(session_id: str, position: int, k: int = DEFAULT_TOPK):
        session = store.get(session_id)
        if not 0 <= position < len(session):
            raise HTTPException(status_code=404, detail="position out of range")
        if k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        d = session.distributions[position]
        return {
            "position": position,
            "token": session.token_texts[position],
            "approximate": d.approximate,
            "alternatives": _top_alternatives(d, k),
        }

    @app.get("/monitor/status")
    def monitor_status():
        with monitor_lock:
            return monitor.status()

    @app.post("/monitor/freeze")
    def monitor_freeze():
        with monitor_lock:
            try:
                monitor.freeze_baseline()
            except TokentropyError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            return {"frozen": True, "window_count": monitor.window_count()}

    if config.assets_path:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.assets_path, html=True), name="ui")

    return app


def _dump(obj: dict) -> str:
    import json

    return json.dumps(obj, ensure_ascii=False)


def _resolve_backend(spec: Optional[dict], config: ServiceConfig) -> BackendDescriptor:
    if spec is None:
        if config.backend is None:
            raise HTTPException(status_code=400, detail="no backend configured")
        return config.backend
    try:
        return BackendDescriptor(**spec)
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=f"bad backend spec: {exc}") from exc


def _top_alternatives(d: TokenDistribution, k: int) -> list[dict]:
    order = np.argsort(-d.log_probs, kind="stable")
    rows = []
    for i in order:
        if i == d.tail_index:
            continue
        lp = float(d.log_probs[i])
        if d.support_texts is not None:
            label = d.support_texts[i]
        else:
            label = f"<{int(d.token_ids[i])}>"
        rows.append(
            {
                "token": label,
                "token_id": int(d.token_ids[i]),
                "probability": float(np.exp(lp)),
                "log_prob": lp,
                "selected": bool(i == d.selected_index),
            }
        )
        if len(rows) == k:
            break
    return rows
