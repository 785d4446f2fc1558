"""Round-trip analysis session: a decision tree of refactoring alternatives.

Each node holds a software model, its generated QN (plus trace), the solver
result, and the requirement report.  Software-side actions refactor the model
and re-run the forward transformation; performance-side actions edit the QN
directly and defer the backward transformation until the analyst exports the
node.  Wall-clock timings of the two paths feed the scalability ledger.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Union

from .antipatterns import (
    AntipatternOccurrence,
    DetectionConfig,
    FacadePlan,
    SplitPlan,
    solve_blob,
    solve_est,
)
from .errors import EmptyLedgerError, SchemaError, UnknownNodeError
from .model import ResponseTimeReq, SoftwareModel, UtilizationReq
from .modelio import dump_json_bytes, model_from_json, model_to_json, parse_json_bytes
from .mva import DEFAULT_LATTICE_BUDGET, solve_amva, solve_exact_mva
from .qn import QnModel, SolverResult, qn_from_json, qn_to_json, result_from_json, result_to_json
from .transform import (
    ChangeDemand,
    ChangeRouting,
    ChangeThinkTime,
    QnEdit,
    SplitCenter,
    TraceLink,
    TraceModel,
    apply_qn_edit,
    backward,
    forward,
)

SESSION_SCHEMA = "spe-session/1"


@dataclass(frozen=True)
class RequirementEntry:
    subject: str  # class id (response time) or center id (utilization)
    value: float
    threshold: float
    violated: bool


@dataclass(frozen=True)
class RequirementReport:
    response_times: tuple[RequirementEntry, ...]
    utilizations: tuple[RequirementEntry, ...]

    @property
    def satisfied(self) -> bool:
        return not any(e.violated for e in self.response_times + self.utilizations)


def check_requirements(result: SolverResult, requirements) -> RequirementReport:
    """Evaluate resolved (kind, subject, threshold) requirements against a
    solver result.  Both comparisons are strict, matching the "greater than" /
    "more than" phrasing of the requirement definitions."""
    responses = []
    utilizations = []
    for kind, subject, threshold in requirements:
        if kind == "responseTime":
            value = result.server_side_response[subject]
            responses.append(RequirementEntry(subject, value, threshold, value > threshold))
        elif kind == "utilization":
            for center in sorted(result.utilization):
                value = result.utilization[center]
                utilizations.append(RequirementEntry(center, value, threshold, value > threshold))
        else:
            raise SchemaError(f"unknown requirement kind '{kind}'", "/requirements")
    return RequirementReport(tuple(responses), tuple(utilizations))


def resolve_requirements(model: SoftwareModel) -> list[tuple]:
    """Flatten model requirements to (kind, subject, threshold) triples.

    Response-time requirements name workload classes; the QN classes are
    scenarios, so expand each class requirement over its scenarios.
    """
    out = []
    for req in model.requirements:
        if isinstance(req, ResponseTimeReq):
            for scenario in model.scenarios:
                if scenario.workload_class == req.workload_class:
                    out.append(("responseTime", scenario.id, req.max_server_side_response))
        elif isinstance(req, UtilizationReq):
            out.append(("utilization", "*", req.max_utilization))
    return out


@dataclass(frozen=True)
class SoftwareAction:
    plan: Union[SplitPlan, FacadePlan]


@dataclass(frozen=True)
class PerformanceAction:
    edits: tuple[QnEdit, ...]


Action = Union[SoftwareAction, PerformanceAction]


@dataclass
class DecisionNode:
    id: str
    parent: str | None
    action: Action | None
    model: SoftwareModel
    qn: QnModel
    trace: TraceModel
    result: SolverResult
    report: RequirementReport
    children: list[str] = field(default_factory=list)
    exported_model: SoftwareModel | None = None


@dataclass
class CostLedger:
    software_iterations: int = 0
    performance_iterations: int = 0
    t_forward: list[float] = field(default_factory=list)
    t_forth: list[float] = field(default_factory=list)
    t_back: list[float] = field(default_factory=list)


def scalability_tradeoff(ledger: CostLedger) -> dict:
    """The M*O(forward) vs N*(O_bid(forth)+O_bid(back)) comparison."""
    m, n = ledger.software_iterations, ledger.performance_iterations
    if m > 0 and not ledger.t_forward:
        raise EmptyLedgerError("software path used but has no forward timings")
    if n > 0 and (not ledger.t_forth or not ledger.t_back):
        raise EmptyLedgerError("performance path used but lacks forth/back timings")
    lhs = m * statistics.fmean(ledger.t_forward) if m > 0 else 0.0
    rhs = (
        n * (statistics.fmean(ledger.t_forth) + statistics.fmean(ledger.t_back))
        if n > 0
        else 0.0
    )
    return {"lhs": lhs, "rhs": rhs, "softwareSideCheaper": lhs < rhs}


class Session:
    """Single-writer decision tree over refactoring alternatives."""

    def __init__(self, model: SoftwareModel, detection: DetectionConfig | None = None,
                 lattice_budget: int = DEFAULT_LATTICE_BUDGET):
        self.detection = detection or DetectionConfig()
        self.lattice_budget = lattice_budget
        self.ledger = CostLedger()
        self.nodes: dict[str, DecisionNode] = {}
        self._counter = 0
        t0 = time.perf_counter()
        qn, trace = forward(model)
        self.ledger.t_forward.append(time.perf_counter() - t0)
        result = self._solve(qn)
        root = DecisionNode(
            id=self._next_id(),
            parent=None,
            action=None,
            model=model,
            qn=qn,
            trace=trace,
            result=result,
            report=check_requirements(result, resolve_requirements(model)),
        )
        self.nodes[root.id] = root
        self.root_id = root.id
        self.cursor = root.id

    def _next_id(self) -> str:
        nid = f"n{self._counter}"
        self._counter += 1
        return nid

    def _solve(self, qn: QnModel) -> SolverResult:
        if qn.lattice_size() <= self.lattice_budget:
            return solve_exact_mva(qn, self.lattice_budget)
        return solve_amva(qn)

    def node(self, node_id: str) -> DecisionNode:
        if node_id not in self.nodes:
            raise UnknownNodeError(f"no node '{node_id}'")
        return self.nodes[node_id]

    def expand(self, node_id: str, action: Action) -> DecisionNode:
        """Apply an action to a node, solve, check, and append the child."""
        parent = self.node(node_id)
        if isinstance(action, SoftwareAction):
            plan = action.plan
            if isinstance(plan, SplitPlan):
                occ = AntipatternOccurrence(kind="blob", subject=plan.subject)
                new_model = solve_blob(parent.model, occ, plan)
            else:
                occ = AntipatternOccurrence(
                    kind="est", subject=(plan.scenario, plan.caller, plan.callee)
                )
                new_model = solve_est(parent.model, occ, plan, self.detection)
            t0 = time.perf_counter()
            qn, trace = forward(new_model)
            self.ledger.t_forward.append(time.perf_counter() - t0)
            self.ledger.software_iterations += 1
            model = new_model
        else:
            frozen = {c.id: c.frozen for c in parent.model.components}
            qn, trace = parent.qn, parent.trace
            t0 = time.perf_counter()
            # The bidirectional path pays for a traced forward each iteration.
            forward(parent.model)
            for edit in action.edits:
                qn, trace = apply_qn_edit(qn, trace, edit, frozen)
            self.ledger.t_forth.append(time.perf_counter() - t0)
            self.ledger.performance_iterations += 1
            model = parent.model

        result = self._solve(qn)
        child = DecisionNode(
            id=self._next_id(),
            parent=parent.id,
            action=action,
            model=model,
            qn=qn,
            trace=trace,
            result=result,
            report=check_requirements(result, resolve_requirements(model)),
        )
        self.nodes[child.id] = child
        parent.children.append(child.id)
        self.cursor = child.id
        return child

    def backtrack(self, node_id: str) -> None:
        """Move the cursor; the tree is append-only, nothing is discarded."""
        self.cursor = self.node(node_id).id

    def export_model(self, node_id: str) -> SoftwareModel:
        """Software model of a node; runs the backward transformation lazily
        for nodes produced by performance-side edits."""
        node = self.node(node_id)
        if not node.trace.journal:
            return node.model
        if node.exported_model is None:
            t0 = time.perf_counter()
            node.exported_model = backward(node.qn, node.trace, node.model)
            self.ledger.t_back.append(time.perf_counter() - t0)
        return node.exported_model


def _action_to_json(action: Action | None) -> dict | None:
    if action is None:
        return None
    if isinstance(action, SoftwareAction):
        plan = action.plan
        if isinstance(plan, SplitPlan):
            return {
                "type": "blobSplit",
                "subject": plan.subject,
                "parts": [
                    {"name": n, "probability": p, "operations": list(s) if s else None}
                    for n, p, s in plan.parts
                ],
            }
        return {
            "type": "estFacade",
            "scenario": plan.scenario,
            "caller": plan.caller,
            "callee": plan.callee,
            "remoteFacadeName": plan.remote_facade_name,
            "localFacadeName": plan.local_facade_name,
        }
    return {"type": "qnEdits", "edits": [_edit_to_json(e) for e in action.edits]}


def _edit_to_json(edit: QnEdit) -> dict:
    if isinstance(edit, SplitCenter):
        return {
            "kind": "splitCenter",
            "center": edit.center,
            "parts": [{"id": pid, "probability": p} for pid, p in edit.parts],
        }
    if isinstance(edit, ChangeDemand):
        return {"kind": "changeDemand", "center": edit.center, "class": edit.class_id, "newDemand": edit.new_demand}
    if isinstance(edit, ChangeRouting):
        return {
            "kind": "changeRouting",
            "center": edit.center,
            "parts": list(edit.parts),
            "newProbabilities": list(edit.new_probabilities),
        }
    return {"kind": "changeThinkTime", "class": edit.class_id, "seconds": edit.seconds}


def edit_from_json(doc: dict) -> QnEdit:
    kind = doc.get("kind")
    try:
        if kind == "splitCenter":
            return SplitCenter(
                center=doc["center"],
                parts=tuple((p["id"], float(p["probability"])) for p in doc["parts"]),
            )
        if kind == "changeDemand":
            return ChangeDemand(center=doc["center"], class_id=doc["class"], new_demand=float(doc["newDemand"]))
        if kind == "changeRouting":
            return ChangeRouting(
                center=doc["center"],
                parts=tuple(doc["parts"]),
                new_probabilities=tuple(float(p) for p in doc["newProbabilities"]),
            )
        if kind == "changeThinkTime":
            return ChangeThinkTime(class_id=doc["class"], seconds=float(doc["seconds"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed edit: {exc!r}", "/edit") from exc
    raise SchemaError(f"unknown edit kind '{kind}'", "/edit/kind")


def action_from_json(doc: dict) -> Action:
    typ = doc.get("type")
    try:
        if typ == "blobSplit":
            return SoftwareAction(
                SplitPlan(
                    subject=doc["subject"],
                    parts=tuple(
                        (p["name"], float(p["probability"]),
                         tuple(p["operations"]) if p.get("operations") else None)
                        for p in doc["parts"]
                    ),
                )
            )
        if typ == "estFacade":
            return SoftwareAction(
                FacadePlan(
                    scenario=doc["scenario"],
                    caller=doc["caller"],
                    callee=doc["callee"],
                    remote_facade_name=doc.get("remoteFacadeName", "RemoteFacade"),
                    local_facade_name=doc.get("localFacadeName", "LocalFacade"),
                )
            )
        if typ == "qnEdits":
            return PerformanceAction(edits=tuple(edit_from_json(e) for e in doc["edits"]))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed action: {exc!r}", "/action") from exc
    raise SchemaError(f"unknown action type '{typ}'", "/action/type")


def _report_to_json(report: RequirementReport) -> dict:
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


def _report_from_json(doc: dict) -> RequirementReport:
    return RequirementReport(
        response_times=tuple(
            RequirementEntry(e["class"], e["value"], e["threshold"], e["violated"])
            for e in doc["responseTimes"]
        ),
        utilizations=tuple(
            RequirementEntry(e["center"], e["value"], e["threshold"], e["violated"])
            for e in doc["utilizations"]
        ),
    )


def _trace_to_json(trace: TraceModel) -> dict:
    return {
        "version": "spe-trace/1",
        "sourceVersion": trace.source_version,
        "links": [
            {"kind": l.kind, "software": l.software_element, "qn": l.qn_element, "detail": list(l.detail)}
            for l in trace.links
        ],
        "journal": [_edit_to_json(e) for e in trace.journal],
    }


def _trace_from_json(doc: dict) -> TraceModel:
    return TraceModel(
        links=tuple(
            TraceLink(l["kind"], l["software"], l["qn"], tuple(l.get("detail", ())))
            for l in doc["links"]
        ),
        source_version=int(doc["sourceVersion"]),
        journal=tuple(edit_from_json(e) for e in doc.get("journal", [])),
    )


def persist_session(session: Session) -> bytes:
    """Serialize the full tree (models, QNs, traces, results, ledger)."""
    doc = {
        "version": SESSION_SCHEMA,
        "rootId": session.root_id,
        "cursor": session.cursor,
        "counter": session._counter,
        "ledger": {
            "softwareIterations": session.ledger.software_iterations,
            "performanceIterations": session.ledger.performance_iterations,
            "tForward": session.ledger.t_forward,
            "tForth": session.ledger.t_forth,
            "tBack": session.ledger.t_back,
        },
        "nodes": [
            {
                "id": node.id,
                "parent": node.parent,
                "action": _action_to_json(node.action),
                "model": model_to_json(node.model),
                "qn": qn_to_json(node.qn),
                "trace": _trace_to_json(node.trace),
                "result": result_to_json(node.result),
                "report": _report_to_json(node.report),
                "children": node.children,
            }
            for node in session.nodes.values()
        ],
    }
    return dump_json_bytes(doc)


def load_session(data: bytes, detection: DetectionConfig | None = None) -> Session:
    """Rebuild a session from its persisted form; inverse of persist_session."""
    doc = parse_json_bytes(data, "session document")
    if not isinstance(doc, dict) or doc.get("version") != SESSION_SCHEMA:
        raise SchemaError(f"expected schema '{SESSION_SCHEMA}'", "/version")
    try:
        session = Session.__new__(Session)
        session.detection = detection or DetectionConfig()
        session.lattice_budget = DEFAULT_LATTICE_BUDGET
        ledger = doc["ledger"]
        session.ledger = CostLedger(
            software_iterations=int(ledger["softwareIterations"]),
            performance_iterations=int(ledger["performanceIterations"]),
            t_forward=[float(x) for x in ledger["tForward"]],
            t_forth=[float(x) for x in ledger["tForth"]],
            t_back=[float(x) for x in ledger["tBack"]],
        )
        session.nodes = {}
        for n in doc["nodes"]:
            node = DecisionNode(
                id=n["id"],
                parent=n["parent"],
                action=action_from_json(n["action"]) if n["action"] else None,
                model=model_from_json(n["model"]),
                qn=qn_from_json(n["qn"]),
                trace=_trace_from_json(n["trace"]),
                result=result_from_json(n["result"]),
                report=_report_from_json(n["report"]),
                children=list(n["children"]),
            )
            session.nodes[node.id] = node
        session.root_id = doc["rootId"]
        session.cursor = doc["cursor"]
        session._counter = int(doc["counter"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed session document: {exc!r}", "/") from exc
    if session.root_id not in session.nodes or session.cursor not in session.nodes:
        raise SchemaError("root/cursor reference unknown nodes", "/")
    return session
