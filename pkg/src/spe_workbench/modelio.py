"""Model file format: JSON documents with schema id "spe-model/1".

Saving is canonical (collections sorted by id, fixed key order), so
save(load(f)) is byte-identical for canonical inputs.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import ParseError, SchemaError
from .model import (
    Alt,
    Component,
    DemandAnnotation,
    Interface,
    Loop,
    Message,
    OperationDef,
    Requirement,
    ResponseTimeReq,
    Scenario,
    SoftwareModel,
    Step,
    UtilizationReq,
    WorkloadClass,
)

MODEL_SCHEMA = "spe-model/1"


def _expect(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise SchemaError(message, path)


def _get(obj: dict, key: str, kind, path: str, default=None, required: bool = True):
    if key not in obj:
        if required:
            raise SchemaError(f"missing key '{key}'", path)
        return default
    value = obj[key]
    if kind is float:
        _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
                f"'{key}' must be a number", path)
        return float(value)
    if kind is int:
        _expect(isinstance(value, int) and not isinstance(value, bool),
                f"'{key}' must be an integer", path)
        return value
    _expect(isinstance(value, kind), f"'{key}' must be {kind.__name__}", path)
    return value


def _step_from_json(obj: Any, path: str) -> Step:
    _expect(isinstance(obj, dict), "step must be an object", path)
    kind = _get(obj, "kind", str, path)
    if kind == "message":
        return Message(
            source=_get(obj, "from", str, path),
            target=_get(obj, "to", str, path),
            operation=_get(obj, "operation", str, path),
        )
    if kind == "alt":
        branches = _get(obj, "branches", list, path)
        parsed = []
        for i, br in enumerate(branches):
            bpath = f"{path}/branches/{i}"
            _expect(isinstance(br, dict), "branch must be an object", bpath)
            prob = _get(br, "probability", float, bpath)
            body = _get(br, "body", list, bpath)
            parsed.append((prob, tuple(_step_from_json(s, f"{bpath}/body/{j}") for j, s in enumerate(body))))
        return Alt(branches=tuple(parsed))
    if kind == "loop":
        body = _get(obj, "body", list, path)
        return Loop(
            count=_get(obj, "count", float, path),
            body=tuple(_step_from_json(s, f"{path}/body/{j}") for j, s in enumerate(body)),
        )
    raise SchemaError(f"unknown step kind '{kind}'", path)


def _step_to_json(step: Step) -> dict:
    if isinstance(step, Message):
        return {"kind": "message", "from": step.source, "to": step.target, "operation": step.operation}
    if isinstance(step, Alt):
        return {
            "kind": "alt",
            "branches": [
                {"probability": prob, "body": [_step_to_json(s) for s in body]}
                for prob, body in step.branches
            ],
        }
    return {"kind": "loop", "count": step.count, "body": [_step_to_json(s) for s in step.body]}


def model_from_json(doc: Any) -> SoftwareModel:
    """Build a SoftwareModel from a parsed JSON document."""
    _expect(isinstance(doc, dict), "document root must be an object", "/")
    version = _get(doc, "version", str, "/")
    _expect(version == MODEL_SCHEMA, f"unsupported schema '{version}', expected '{MODEL_SCHEMA}'", "/version")

    frozen: dict[str, str] = {}
    for i, c in enumerate(_get(doc, "constraints", list, "/", default=[], required=False) or []):
        path = f"/constraints/{i}"
        _expect(isinstance(c, dict), "constraint must be an object", path)
        kind = _get(c, "kind", str, path)
        _expect(kind == "frozen", f"unknown constraint kind '{kind}'", path)
        frozen[_get(c, "component", str, path)] = _get(c, "reason", str, path, default="", required=False) or ""

    components = []
    for i, c in enumerate(_get(doc, "components", list, "/")):
        path = f"/components/{i}"
        _expect(isinstance(c, dict), "component must be an object", path)
        cid = _get(c, "id", str, path)
        components.append(
            Component(
                id=cid,
                name=_get(c, "name", str, path, default=cid, required=False),
                provided=tuple(_get(c, "provided", list, path, default=[], required=False)),
                required=tuple(_get(c, "required", list, path, default=[], required=False)),
                frozen=cid in frozen,
                frozen_reason=frozen.get(cid, ""),
            )
        )

    interfaces = []
    for i, it in enumerate(_get(doc, "interfaces", list, "/")):
        path = f"/interfaces/{i}"
        _expect(isinstance(it, dict), "interface must be an object", path)
        ops = []
        for j, op in enumerate(_get(it, "operations", list, path)):
            opath = f"{path}/operations/{j}"
            _expect(isinstance(op, dict), "operation must be an object", opath)
            oid = _get(op, "id", str, opath)
            ops.append(OperationDef(id=oid, name=_get(op, "name", str, opath, default=oid, required=False)))
        iid = _get(it, "id", str, path)
        interfaces.append(
            Interface(id=iid, name=_get(it, "name", str, path, default=iid, required=False), operations=tuple(ops))
        )

    scenarios = []
    for i, s in enumerate(_get(doc, "scenarios", list, "/")):
        path = f"/scenarios/{i}"
        _expect(isinstance(s, dict), "scenario must be an object", path)
        sid = _get(s, "id", str, path)
        body = _get(s, "body", list, path)
        scenarios.append(
            Scenario(
                id=sid,
                name=_get(s, "name", str, path, default=sid, required=False),
                workload_class=_get(s, "workloadClass", str, path),
                body=tuple(_step_from_json(st, f"{path}/body/{j}") for j, st in enumerate(body)),
            )
        )

    workloads = []
    for i, w in enumerate(_get(doc, "workloads", list, "/")):
        path = f"/workloads/{i}"
        _expect(isinstance(w, dict), "workload must be an object", path)
        wid = _get(w, "id", str, path)
        workloads.append(
            WorkloadClass(
                id=wid,
                name=_get(w, "name", str, path, default=wid, required=False),
                population=_get(w, "population", int, path),
                think_time=_get(w, "thinkTimeSec", float, path),
            )
        )

    demands = []
    for i, d in enumerate(_get(doc, "demands", list, "/")):
        path = f"/demands/{i}"
        _expect(isinstance(d, dict), "demand must be an object", path)
        demands.append(
            DemandAnnotation(
                component=_get(d, "component", str, path),
                operation=_get(d, "operation", str, path),
                service_time=_get(d, "serviceTimeSec", float, path),
            )
        )

    requirements: list[Requirement] = []
    for i, r in enumerate(_get(doc, "requirements", list, "/")):
        path = f"/requirements/{i}"
        _expect(isinstance(r, dict), "requirement must be an object", path)
        kind = _get(r, "kind", str, path)
        if kind == "responseTime":
            requirements.append(
                ResponseTimeReq(
                    workload_class=_get(r, "class", str, path),
                    max_server_side_response=_get(r, "maxServerSideResponseSec", float, path),
                )
            )
        elif kind == "utilization":
            requirements.append(UtilizationReq(max_utilization=_get(r, "maxUtilization", float, path)))
        else:
            raise SchemaError(f"unknown requirement kind '{kind}'", path)

    return SoftwareModel(
        components=tuple(components),
        interfaces=tuple(interfaces),
        scenarios=tuple(scenarios),
        workloads=tuple(workloads),
        demands=tuple(demands),
        requirements=tuple(requirements),
        model_version=_get(doc, "modelVersion", int, "/", default=1, required=False),
    )


def model_to_json(model: SoftwareModel) -> dict:
    """Canonical JSON document for a model (collections sorted by id)."""
    req_json = []
    for r in model.requirements:
        if isinstance(r, ResponseTimeReq):
            req_json.append(
                {"kind": "responseTime", "class": r.workload_class,
                 "maxServerSideResponseSec": r.max_server_side_response}
            )
        else:
            req_json.append({"kind": "utilization", "maxUtilization": r.max_utilization})
    req_json.sort(key=lambda r: (r["kind"], r.get("class", "")))
    return {
        "version": MODEL_SCHEMA,
        "modelVersion": model.model_version,
        "components": [
            {"id": c.id, "name": c.name, "provided": sorted(c.provided), "required": sorted(c.required)}
            for c in sorted(model.components, key=lambda c: c.id)
        ],
        "interfaces": [
            {
                "id": it.id,
                "name": it.name,
                "operations": [{"id": o.id, "name": o.name} for o in sorted(it.operations, key=lambda o: o.id)],
            }
            for it in sorted(model.interfaces, key=lambda it: it.id)
        ],
        "scenarios": [
            {
                "id": s.id,
                "name": s.name,
                "workloadClass": s.workload_class,
                "body": [_step_to_json(st) for st in s.body],
            }
            for s in sorted(model.scenarios, key=lambda s: s.id)
        ],
        "workloads": [
            {"id": w.id, "name": w.name, "population": w.population, "thinkTimeSec": w.think_time}
            for w in sorted(model.workloads, key=lambda w: w.id)
        ],
        "demands": [
            {"component": d.component, "operation": d.operation, "serviceTimeSec": d.service_time}
            for d in sorted(model.demands, key=lambda d: (d.component, d.operation))
        ],
        "requirements": req_json,
        "constraints": [
            {"kind": "frozen", "component": c.id, "reason": c.frozen_reason}
            for c in sorted(model.components, key=lambda c: c.id)
            if c.frozen
        ],
    }


def parse_json_bytes(data: bytes, what: str = "document") -> Any:
    try:
        return json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{what} is not valid UTF-8: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} is not valid JSON: {exc.msg}", exc.lineno, exc.colno) from exc


def dump_json_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def load_model(data: bytes) -> SoftwareModel:
    """Parse a model document; raises ParseError / SchemaError."""
    return model_from_json(parse_json_bytes(data, "model document"))


def save_model(model: SoftwareModel) -> bytes:
    """Serialize a model to its canonical byte form."""
    return dump_json_bytes(model_to_json(model))
