"""Detection and solution of the BLOB and excessive-messaging (EST)
performance antipatterns on the software model.

Detection is pure and deterministic; thresholds are configuration because
the antipattern definitions quantify neither "excessive" requests nor the
connection/utilization boundary of a blob.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import NothingToBatchError, RefactoringError
from .model import (
    Alt,
    Component,
    DemandAnnotation,
    Interface,
    Loop,
    Message,
    OperationDef,
    SoftwareModel,
    Step,
    connection_count,
    message_count_between,
    walk_steps,
)
from .qn import SolverResult
from .refactor import split_component
from .transform import TraceModel

AP_SCHEMA = "spe-ap/1"


@dataclass(frozen=True)
class DetectionConfig:
    blob_min_connections: int = 3
    blob_min_utilization: float = 0.85
    blob_min_demand_share: float = 0.3
    est_min_messages: float = 5.0
    est_remote_cost: float = 0.005  # per-remote-call overhead, seconds
    facade_local_cost: float = 0.005  # local-facade dispatch demand, seconds

    def check(self) -> None:
        values = (
            self.blob_min_connections,
            self.blob_min_utilization,
            self.blob_min_demand_share,
            self.est_min_messages,
        )
        if any(v <= 0 for v in values):
            raise ValueError("detection thresholds must be > 0")
        if self.est_remote_cost < 0 or self.facade_local_cost < 0:
            raise ValueError("facade costs must be >= 0")


@dataclass(frozen=True)
class SplitPlan:
    subject: str
    parts: tuple[tuple[str, float, tuple[str, ...] | None], ...]


@dataclass(frozen=True)
class FacadePlan:
    scenario: str
    caller: str
    callee: str
    remote_facade_name: str = "RemoteFacade"
    local_facade_name: str = "LocalFacade"


@dataclass(frozen=True)
class AntipatternOccurrence:
    kind: str  # "blob" | "est"
    subject: str | tuple[str, str, str]
    evidence: dict[str, float] = field(default_factory=dict)
    candidate_plans: tuple = ()


def detect_blob(
    model: SoftwareModel, result: SolverResult, trace: TraceModel, cfg: DetectionConfig
) -> list[AntipatternOccurrence]:
    """Non-frozen components that concentrate connections and load.

    Flagged when connections >= blob_min_connections and either the traced
    center's utilization or its share of total queueing work exceeds the
    configured minimum.
    """
    cfg.check()
    total_util = sum(result.utilization.values())
    found = []
    for comp in model.components:
        if comp.frozen:
            continue
        center = None
        for link in trace.links:
            if link.kind == "component-center" and link.software_element == comp.id:
                center = link.qn_element
                break
        if center is None or center not in result.utilization:
            continue
        connections = connection_count(model, comp.id)
        if connections < cfg.blob_min_connections:
            continue
        util = result.utilization[center]
        share = util / total_util if total_util > 0 else 0.0
        if util >= cfg.blob_min_utilization or share >= cfg.blob_min_demand_share:
            plan = SplitPlan(
                subject=comp.id,
                parts=((f"{comp.id}A", 0.5, None), (f"{comp.id}B", 0.5, None)),
            )
            found.append(
                AntipatternOccurrence(
                    kind="blob",
                    subject=comp.id,
                    evidence={"connections": float(connections), "utilization": util, "demandShare": share},
                    candidate_plans=(plan,),
                )
            )
    found.sort(key=lambda o: (-o.evidence["utilization"], o.subject))
    return found


def detect_est(model: SoftwareModel, cfg: DetectionConfig) -> list[AntipatternOccurrence]:
    """Scenario/caller/callee triples with an excessive expected message count.

    The bound is inclusive; the callee may be frozen because the facade
    solution leaves the callee untouched.
    """
    cfg.check()
    found = []
    for scenario in model.scenarios:
        pairs = {(m.source, m.target) for m, _ in walk_steps(scenario.body)}
        for caller, callee in sorted(pairs):
            count = message_count_between(scenario, caller, callee)
            if count >= cfg.est_min_messages:
                plan = FacadePlan(scenario=scenario.id, caller=caller, callee=callee)
                found.append(
                    AntipatternOccurrence(
                        kind="est",
                        subject=(scenario.id, caller, callee),
                        evidence={"expectedMessages": count},
                        candidate_plans=(plan,),
                    )
                )
    found.sort(key=lambda o: (-o.evidence["expectedMessages"], o.subject))
    return found


def solve_blob(model: SoftwareModel, occurrence: AntipatternOccurrence, plan: SplitPlan) -> SoftwareModel:
    """Distribute a blob's responsibilities over weighted parts."""
    if occurrence.kind != "blob":
        raise RefactoringError("occurrence is not a blob")
    if plan.subject != occurrence.subject:
        raise RefactoringError("plan subject does not match the occurrence")
    return split_component(model, plan.subject, [(n, p, list(s) if s else None) for n, p, s in plan.parts])


def _contains_flagged(step: Step, caller: str, callee: str) -> bool:
    if isinstance(step, Message):
        return step.source == caller and step.target == callee
    if isinstance(step, Alt):
        return any(_contains_flagged(s, caller, callee) for _, body in step.branches for s in body)
    if isinstance(step, Loop):
        return any(_contains_flagged(s, caller, callee) for s in step.body)
    return False


def _redirect(steps: tuple[Step, ...], caller: str, callee: str, new_source: str) -> tuple[Step, ...]:
    out: list[Step] = []
    for step in steps:
        if isinstance(step, Message):
            if step.source == caller and step.target == callee:
                out.append(replace(step, source=new_source))
            else:
                out.append(step)
        elif isinstance(step, Alt):
            out.append(
                Alt(branches=tuple((p, _redirect(b, caller, callee, new_source)) for p, b in step.branches))
            )
        else:
            out.append(Loop(count=step.count, body=_redirect(step.body, caller, callee, new_source)))
    return tuple(out)


def solve_est(
    model: SoftwareModel,
    occurrence: AntipatternOccurrence,
    plan: FacadePlan,
    cfg: DetectionConfig,
) -> SoftwareModel:
    """Batch the flagged fine-grained calls through a session facade.

    The k caller->callee messages become one caller->RemoteFacade call, one
    RemoteFacade->LocalFacade call, and k LocalFacade->callee calls.  Each
    batched call is now local, so its annotation sheds the per-remote-call
    overhead (cfg.est_remote_cost); the callee component itself is untouched,
    which keeps the fix legal even for frozen callees.
    """
    if occurrence.kind != "est":
        raise RefactoringError("occurrence is not an est occurrence")
    scenario_id, caller, callee = occurrence.subject
    if (plan.scenario, plan.caller, plan.callee) != (scenario_id, caller, callee):
        raise RefactoringError("plan does not match the occurrence")
    scenario = model.scenario(scenario_id)
    k = message_count_between(scenario, caller, callee)
    if k < 2:
        raise NothingToBatchError(f"expected message count {k} < 2, nothing to batch")

    remote, local = plan.remote_facade_name, plan.local_facade_name
    for name in (remote, local):
        if any(c.id == name for c in model.components):
            raise RefactoringError(f"component id '{name}' already exists")

    flagged_ops = {
        m.operation
        for m, _ in walk_steps(scenario.body)
        if m.source == caller and m.target == callee
    }
    # The overhead rebate must not leak into calls made outside the batch.
    for other in model.scenarios:
        for m, _ in walk_steps(other.body):
            if m.operation in flagged_ops and not (
                other.id == scenario_id and m.source == caller and m.target == callee
            ):
                raise RefactoringError(
                    f"operation '{m.operation}' is also invoked outside the batched interaction"
                )
    for op in flagged_ops:
        annotation = model.demand_for(callee, op)
        if annotation is None:
            raise RefactoringError(f"no demand annotation for ({callee}, {op})")
        if cfg.est_remote_cost >= annotation.service_time:
            raise RefactoringError(
                f"remote overhead {cfg.est_remote_cost}s exceeds the per-call cost of '{op}'"
            )

    handle_op = f"handle_{remote}"
    dispatch_op = f"dispatch_{local}"
    remote_iface = Interface(id=f"I{remote}", name=f"I{remote}", operations=(OperationDef(handle_op, handle_op),))
    local_iface = Interface(id=f"I{local}", name=f"I{local}", operations=(OperationDef(dispatch_op, dispatch_op),))
    callee_ifaces = set()
    for op in flagged_ops:
        owner = model.operation_owner(op)
        if owner:
            callee_ifaces.add(owner[0].id)

    new_body = _redirect(scenario.body, caller, callee, local)
    insert_at = 0
    for i, step in enumerate(scenario.body):
        if _contains_flagged(step, caller, callee):
            insert_at = i
            break
    facade_steps = (
        Message(source=caller, target=remote, operation=handle_op),
        Message(source=remote, target=local, operation=dispatch_op),
    )
    new_body = new_body[:insert_at] + facade_steps + new_body[insert_at:]
    scenarios = tuple(replace(s, body=new_body) if s.id == scenario_id else s for s in model.scenarios)

    components = []
    for comp in model.components:
        if comp.id == caller:
            required = [iid for iid in comp.required]
            # Drop callee interfaces the caller no longer talks to.
            still_used = set()
            for s in scenarios:
                for m, _ in walk_steps(s.body):
                    if m.source == caller:
                        owner = model.operation_owner(m.operation)
                        if owner:
                            still_used.add(owner[0].id)
            required = [iid for iid in required if iid not in (callee_ifaces - still_used)]
            required.append(remote_iface.id)
            components.append(replace(comp, required=tuple(required)))
        else:
            components.append(comp)
    components.append(
        Component(id=remote, name=remote, provided=(remote_iface.id,), required=(local_iface.id,))
    )
    components.append(
        Component(id=local, name=local, provided=(local_iface.id,), required=tuple(sorted(callee_ifaces)))
    )

    demands = [
        replace(d, service_time=d.service_time - cfg.est_remote_cost)
        if d.component == callee and d.operation in flagged_ops
        else d
        for d in model.demands
    ]
    demands.append(DemandAnnotation(component=remote, operation=handle_op, service_time=cfg.est_remote_cost))
    demands.append(DemandAnnotation(component=local, operation=dispatch_op, service_time=cfg.facade_local_cost))

    return replace(
        model,
        components=tuple(components),
        interfaces=model.interfaces + (remote_iface, local_iface),
        scenarios=scenarios,
        demands=tuple(demands),
    ).bump_version()


def occurrences_to_json(occurrences: list[AntipatternOccurrence]) -> dict:
    items = []
    for occ in occurrences:
        entry = {
            "kind": occ.kind,
            "subject": list(occ.subject) if isinstance(occ.subject, tuple) else occ.subject,
            "evidence": occ.evidence,
        }
        plans = []
        for plan in occ.candidate_plans:
            if isinstance(plan, SplitPlan):
                plans.append(
                    {
                        "type": "split",
                        "subject": plan.subject,
                        "parts": [
                            {"name": n, "probability": p, "operations": list(s) if s else None}
                            for n, p, s in plan.parts
                        ],
                    }
                )
            else:
                plans.append(
                    {
                        "type": "facade",
                        "scenario": plan.scenario,
                        "caller": plan.caller,
                        "callee": plan.callee,
                        "remoteFacadeName": plan.remote_facade_name,
                        "localFacadeName": plan.local_facade_name,
                    }
                )
        entry["candidatePlans"] = plans
        items.append(entry)
    return {"version": AP_SCHEMA, "occurrences": items}
