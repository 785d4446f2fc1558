"""HTTP/JSON facade over the workbench for the web UI and external tools.

Stateless request handling over in-process stores; mutations on a session are
serialized by a per-session lock (single-writer rule).  Solver runs that
exceed a two-second budget return 202 with a poll URL.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import Future, ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout

from fastapi import Body, Depends, FastAPI, Header, HTTPException, Query, Response

from .antipatterns import DetectionConfig, detect_blob, detect_est, occurrences_to_json
from .errors import (
    BackwardUnsupportedEditError,
    BadProbabilitiesError,
    BudgetExceededError,
    FrozenElementError,
    InvalidModelError,
    MissingDemandError,
    NoClientComponentError,
    NothingToBatchError,
    ParseError,
    RefactoringError,
    SchemaError,
    UnknownNodeError,
)
from .model import validate_model
from .modelio import model_from_json, model_to_json
from .mva import bottleneck, solve
from .qn import result_to_json
from .session import (
    Session,
    action_from_json,
    check_requirements,
    resolve_requirements,
    scalability_tradeoff,
)
from .simulate import simulate
from .transform import forward

API_PREFIX = "/api/v1"
SOLVE_BUDGET_SECONDS = 2.0

_CONFLICTS = (
    FrozenElementError,
    BackwardUnsupportedEditError,
    NothingToBatchError,
    RefactoringError,
    BadProbabilitiesError,
)
_UNPROCESSABLE = (
    InvalidModelError,
    BudgetExceededError,
    MissingDemandError,
    NoClientComponentError,
)


def _http(exc: Exception) -> HTTPException:
    if isinstance(exc, (ParseError, SchemaError, ValueError)):
        return HTTPException(status_code=400, detail=str(exc))
    if isinstance(exc, (KeyError, UnknownNodeError)):
        return HTTPException(status_code=404, detail=str(exc))
    if isinstance(exc, _CONFLICTS):
        return HTTPException(status_code=409, detail=str(exc))
    if isinstance(exc, _UNPROCESSABLE):
        return HTTPException(status_code=422, detail=str(exc))
    raise exc


def _report_json(report) -> dict:
    return {
        "satisfied": report.satisfied,
        "responseTimes": [
            {"class": e.subject, "value": e.value, "threshold": e.threshold, "violated": e.violated}
            for e in report.response_times
        ],
        "utilizations": [
            {"center": e.subject, "value": e.value, "threshold": e.threshold, "violated": e.violated}
            for e in report.utilizations
        ],
    }


def _node_json(session: Session, node) -> dict:
    from .session import _action_to_json  # shared serialization

    return {
        "id": node.id,
        "parent": node.parent,
        "children": list(node.children),
        "action": _action_to_json(node.action),
        "result": result_to_json(node.result),
        "report": _report_json(node.report),
        "bottleneck": bottleneck(node.result) if node.result.utilization else None,
        "modelVersion": node.model.model_version,
        "hasQnEdits": bool(node.trace.journal),
    }


def create_app(
    token: str | None = None,
    solve_budget: float = SOLVE_BUDGET_SECONDS,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="spe-workbench", version="0.1.0")
    models: dict[str, object] = {}
    sessions: dict[str, Session] = {}
    session_locks: dict[str, threading.Lock] = {}
    action_index: dict[str, dict[str, str]] = {}  # session -> action id -> node id
    jobs: dict[str, Future] = {}
    executor = ThreadPoolExecutor(max_workers=4)

    def auth(authorization: str | None = Header(default=None)) -> None:
        if token is not None and authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    dep = [Depends(auth)]

    def _get_model(model_id: str):
        if model_id not in models:
            raise HTTPException(status_code=404, detail=f"no model '{model_id}'")
        return models[model_id]

    def _get_session(session_id: str) -> Session:
        if session_id not in sessions:
            raise HTTPException(status_code=404, detail=f"no session '{session_id}'")
        return sessions[session_id]

    @app.post(API_PREFIX + "/models", status_code=201, dependencies=dep)
    def upload_model(payload: dict = Body(...)):
        try:
            model = model_from_json(payload)
            report = validate_model(model)
            if not report.ok:
                raise InvalidModelError(report.violations)
        except Exception as exc:  # noqa: BLE001 - mapped to HTTP codes
            raise _http(exc) from exc
        model_id = f"m-{uuid.uuid4().hex[:12]}"
        models[model_id] = model
        return {"id": model_id}

    @app.get(API_PREFIX + "/models/{model_id}", dependencies=dep)
    def get_model(model_id: str):
        return model_to_json(_get_model(model_id))

    def _run_analysis(model, solver: str, seed: int, horizon: float) -> dict:
        qn, _ = forward(model)
        if solver == "sim":
            result = simulate(qn, horizon=horizon, warmup=0.1 * horizon, seed=seed).result
        else:
            result = solve(qn, solver)
        report = check_requirements(result, resolve_requirements(model))
        return {"result": result_to_json(result), "report": _report_json(report)}

    @app.post(API_PREFIX + "/models/{model_id}/analysis", dependencies=dep)
    def analyze(
        model_id: str,
        response: Response,
        solver: str = Query("auto", pattern="^(auto|exact|amva|sim)$"),
        seed: int = 1,
        horizon: float = 20000.0,
    ):
        model = _get_model(model_id)
        future = executor.submit(_run_analysis, model, solver, seed, horizon)
        try:
            return future.result(timeout=solve_budget)
        except FutureTimeout:
            job_id = f"j-{uuid.uuid4().hex[:12]}"
            jobs[job_id] = future
            response.status_code = 202
            return {"job": job_id, "pollUrl": f"{API_PREFIX}/jobs/{job_id}"}
        except Exception as exc:  # noqa: BLE001
            raise _http(exc) from exc

    @app.get(API_PREFIX + "/jobs/{job_id}", dependencies=dep)
    def poll_job(job_id: str, response: Response):
        if job_id not in jobs:
            raise HTTPException(status_code=404, detail=f"no job '{job_id}'")
        future = jobs[job_id]
        if not future.done():
            response.status_code = 202
            return {"job": job_id, "status": "running"}
        try:
            return future.result()
        except Exception as exc:  # noqa: BLE001
            raise _http(exc) from exc

    @app.get(API_PREFIX + "/models/{model_id}/antipatterns", dependencies=dep)
    def antipatterns(
        model_id: str,
        blobMinConnections: int = 3,
        blobMinUtilization: float = 0.85,
        blobMinDemandShare: float = 0.3,
        estMinMessages: float = 5.0,
        solver: str = Query("auto", pattern="^(auto|exact|amva)$"),
    ):
        model = _get_model(model_id)
        try:
            cfg = DetectionConfig(
                blob_min_connections=blobMinConnections,
                blob_min_utilization=blobMinUtilization,
                blob_min_demand_share=blobMinDemandShare,
                est_min_messages=estMinMessages,
            )
            cfg.check()
            qn, trace = forward(model)
            result = solve(qn, solver)
            occurrences = detect_blob(model, result, trace, cfg) + detect_est(model, cfg)
        except Exception as exc:  # noqa: BLE001
            raise _http(exc) from exc
        return occurrences_to_json(occurrences)

    @app.post(API_PREFIX + "/sessions", status_code=201, dependencies=dep)
    def create_session(payload: dict = Body(...)):
        model_id = payload.get("modelId")
        if not isinstance(model_id, str):
            raise HTTPException(status_code=400, detail="body must carry modelId")
        model = _get_model(model_id)
        try:
            session = Session(model)
        except Exception as exc:  # noqa: BLE001
            raise _http(exc) from exc
        session_id = f"s-{uuid.uuid4().hex[:12]}"
        sessions[session_id] = session
        session_locks[session_id] = threading.Lock()
        action_index[session_id] = {}
        return {"id": session_id, "rootId": session.root_id}

    @app.get(API_PREFIX + "/sessions/{session_id}/tree", dependencies=dep)
    def session_tree(session_id: str):
        session = _get_session(session_id)
        return {
            "rootId": session.root_id,
            "cursor": session.cursor,
            "nodes": [_node_json(session, n) for n in session.nodes.values()],
        }

    def _expand(session_id: str, node_id: str, payload: dict) -> dict:
        session = _get_session(session_id)
        action_id = payload.get("actionId")
        spec = payload.get("action")
        if not isinstance(spec, dict):
            raise HTTPException(status_code=400, detail="body must carry an action object")
        with session_locks[session_id]:
            if action_id and action_id in action_index[session_id]:
                node = session.nodes[action_index[session_id][action_id]]
                return _node_json(session, node)
            try:
                action = action_from_json(spec)
                child = session.expand(node_id, action)
            except Exception as exc:  # noqa: BLE001
                raise _http(exc) from exc
            if action_id:
                action_index[session_id][action_id] = child.id
            return _node_json(session, child)

    @app.post(API_PREFIX + "/sessions/{session_id}/nodes/{node_id}/expand", status_code=201, dependencies=dep)
    def expand_node(session_id: str, node_id: str, payload: dict = Body(...)):
        return _expand(session_id, node_id, payload)

    @app.post(API_PREFIX + "/sessions/{session_id}/nodes/{node_id}/qn-edits", status_code=201, dependencies=dep)
    def qn_edits(session_id: str, node_id: str, payload: dict = Body(...)):
        edits = payload.get("edits")
        if not isinstance(edits, list):
            raise HTTPException(status_code=400, detail="body must carry an edits array")
        wrapped = {"actionId": payload.get("actionId"), "action": {"type": "qnEdits", "edits": edits}}
        return _expand(session_id, node_id, wrapped)

    @app.post(API_PREFIX + "/sessions/{session_id}/cursor", dependencies=dep)
    def move_cursor(session_id: str, payload: dict = Body(...)):
        session = _get_session(session_id)
        node_id = payload.get("nodeId")
        with session_locks[session_id]:
            try:
                session.backtrack(node_id)
            except Exception as exc:  # noqa: BLE001
                raise _http(exc) from exc
        return {"cursor": session.cursor}

    @app.get(API_PREFIX + "/sessions/{session_id}/ledger", dependencies=dep)
    def ledger(session_id: str):
        session = _get_session(session_id)
        led = session.ledger
        doc = {
            "softwareIterations": led.software_iterations,
            "performanceIterations": led.performance_iterations,
            "tForward": led.t_forward,
            "tForth": led.t_forth,
            "tBack": led.t_back,
        }
        try:
            doc["tradeoff"] = scalability_tradeoff(led)
        except Exception:  # noqa: BLE001 - tradeoff needs samples on used paths
            doc["tradeoff"] = None
        return doc

    @app.get(API_PREFIX + "/sessions/{session_id}/nodes/{node_id}/qn", dependencies=dep)
    def qn_view(session_id: str, node_id: str):
        session = _get_session(session_id)
        try:
            node = session.node(node_id)
        except Exception as exc:  # noqa: BLE001
            raise _http(exc) from exc
        frozen = {c.id: c.frozen for c in node.model.components}
        return {
            "classes": [
                {"id": c.id, "population": c.population, "thinkTimeSec": c.think_time}
                for c in node.qn.classes
            ],
            "centers": [
                {
                    "id": k.id,
                    "kind": k.kind,
                    "frozen": frozen.get(node.trace.component_of_center(k.id) or k.id, False),
                    "demand": {
                        c.id: node.qn.demand[i][j] for j, c in enumerate(node.qn.classes)
                    },
                }
                for i, k in enumerate(node.qn.centers)
            ],
            "journal": [e_json for e_json in _journal_json(node)],
        }

    def _journal_json(node):
        from .session import _edit_to_json

        return [_edit_to_json(e) for e in node.trace.journal]

    @app.get(API_PREFIX + "/sessions/{session_id}/nodes/{node_id}/export", dependencies=dep)
    def export_node(session_id: str, node_id: str):
        session = _get_session(session_id)
        with session_locks[session_id]:
            try:
                model = session.export_model(node_id)
            except Exception as exc:  # noqa: BLE001
                raise _http(exc) from exc
        return model_to_json(model)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
