"""Software model: static view, dynamic view, workloads, demands, requirements.

Models are immutable after construction; refactorings build new models.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Union

PROB_TOL = 1e-9


@dataclass(frozen=True)
class OperationDef:
    id: str
    name: str


@dataclass(frozen=True)
class Interface:
    id: str
    name: str
    operations: tuple[OperationDef, ...]


@dataclass(frozen=True)
class Component:
    id: str
    name: str
    provided: tuple[str, ...] = ()
    required: tuple[str, ...] = ()
    frozen: bool = False
    frozen_reason: str = ""


@dataclass(frozen=True)
class Message:
    source: str
    target: str
    operation: str


@dataclass(frozen=True)
class Alt:
    branches: tuple[tuple[float, tuple["Step", ...]], ...]


@dataclass(frozen=True)
class Loop:
    count: float
    body: tuple["Step", ...]


Step = Union[Message, Alt, Loop]


@dataclass(frozen=True)
class Scenario:
    id: str
    name: str
    workload_class: str
    body: tuple[Step, ...]


@dataclass(frozen=True)
class WorkloadClass:
    id: str
    name: str
    population: int
    think_time: float


@dataclass(frozen=True)
class DemandAnnotation:
    component: str
    operation: str
    service_time: float


@dataclass(frozen=True)
class ResponseTimeReq:
    workload_class: str
    max_server_side_response: float


@dataclass(frozen=True)
class UtilizationReq:
    max_utilization: float


Requirement = Union[ResponseTimeReq, UtilizationReq]


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


@dataclass(frozen=True)
class SoftwareModel:
    components: tuple[Component, ...] = ()
    interfaces: tuple[Interface, ...] = ()
    scenarios: tuple[Scenario, ...] = ()
    workloads: tuple[WorkloadClass, ...] = ()
    demands: tuple[DemandAnnotation, ...] = ()
    requirements: tuple[Requirement, ...] = ()
    model_version: int = 1

    def component(self, cid: str) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def interface(self, iid: str) -> Interface:
        for i in self.interfaces:
            if i.id == iid:
                return i
        raise KeyError(iid)

    def workload(self, wid: str) -> WorkloadClass:
        for w in self.workloads:
            if w.id == wid:
                return w
        raise KeyError(wid)

    def scenario(self, sid: str) -> Scenario:
        for s in self.scenarios:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def operation_owner(self, op_id: str) -> tuple[Interface, OperationDef] | None:
        for iface in self.interfaces:
            for op in iface.operations:
                if op.id == op_id:
                    return iface, op
        return None

    def demand_for(self, component: str, operation: str) -> DemandAnnotation | None:
        for d in self.demands:
            if d.component == component and d.operation == operation:
                return d
        return None

    def bump_version(self) -> "SoftwareModel":
        return replace(self, model_version=self.model_version + 1)


def walk_steps(body: tuple[Step, ...], weight: float = 1.0) -> Iterator[tuple[Message, float]]:
    """Yield every message in a step list with its expected execution count."""
    for step in body:
        if isinstance(step, Message):
            yield step, weight
        elif isinstance(step, Alt):
            for prob, branch in step.branches:
                yield from walk_steps(branch, weight * prob)
        elif isinstance(step, Loop):
            yield from walk_steps(step.body, weight * step.count)


def expected_invocations(scenario: Scenario) -> dict[tuple[str, str], float]:
    """Expected invocation count per (target component, operation).

    A message counts once, weighted by the product of enclosing alternative
    branch probabilities and loop iteration means.
    """
    counts: dict[tuple[str, str], float] = {}
    for msg, weight in walk_steps(scenario.body):
        key = (msg.target, msg.operation)
        counts[key] = counts.get(key, 0.0) + weight
    return counts


def message_count_between(scenario: Scenario, source: str, target: str) -> float:
    """Expected number of messages sent from `source` to `target`."""
    total = 0.0
    for msg, weight in walk_steps(scenario.body):
        if msg.source == source and msg.target == target:
            total += weight
    return total


def connectors(model: SoftwareModel) -> set[tuple[str, str, str]]:
    """Static-view connector edges as (consumer, provider, interface) triples."""
    providers: dict[str, list[str]] = {}
    for comp in model.components:
        for iid in comp.provided:
            providers.setdefault(iid, []).append(comp.id)
    edges = set()
    for comp in model.components:
        for iid in comp.required:
            for provider in providers.get(iid, []):
                if provider != comp.id:
                    edges.add((comp.id, provider, iid))
    return edges


def connection_count(model: SoftwareModel, component_id: str) -> int:
    """Number of connector edges incident to a component."""
    return sum(
        1
        for consumer, provider, _ in connectors(model)
        if component_id in (consumer, provider)
    )


def client_component(model: SoftwareModel) -> Component | None:
    """The unique workload-generating component: provides nothing, sends messages."""
    senders = set()
    for scenario in model.scenarios:
        for msg, _ in walk_steps(scenario.body):
            senders.add(msg.source)
    candidates = [c for c in model.components if not c.provided and c.id in senders]
    if len(candidates) == 1:
        return candidates[0]
    return None


def _validate_steps(
    model: SoftwareModel,
    body: tuple[Step, ...],
    path: str,
    out: list[Violation],
    component_ids: set[str],
    op_owner: dict[str, str],
) -> None:
    for i, step in enumerate(body):
        here = f"{path}/{i}"
        if isinstance(step, Message):
            for role, cid in (("from", step.source), ("to", step.target)):
                if cid not in component_ids:
                    out.append(
                        Violation("DANGLING_REF", here, f"{role} references unknown component '{cid}'")
                    )
            owner = op_owner.get(step.operation)
            if owner is None:
                out.append(
                    Violation("DANGLING_REF", here, f"unknown operation '{step.operation}'")
                )
            elif step.target in component_ids:
                target = model.component(step.target)
                if owner not in target.provided:
                    out.append(
                        Violation(
                            "OP_NOT_PROVIDED",
                            here,
                            f"'{step.target}' does not provide interface '{owner}' of operation '{step.operation}'",
                        )
                    )
        elif isinstance(step, Alt):
            total = 0.0
            for j, (prob, branch) in enumerate(step.branches):
                if not (0.0 <= prob <= 1.0):
                    out.append(
                        Violation("PROB_RANGE", f"{here}/branches/{j}", f"probability {prob} outside [0,1]")
                    )
                total += prob
                _validate_steps(model, branch, f"{here}/branches/{j}", out, component_ids, op_owner)
            if abs(total - 1.0) > PROB_TOL:
                out.append(
                    Violation("ALT_PROB_SUM", here, f"branch probabilities sum to {total}, expected 1")
                )
        elif isinstance(step, Loop):
            if not step.count > 0:
                out.append(Violation("LOOP_COUNT", here, f"loop count {step.count} must be > 0"))
            _validate_steps(model, step.body, f"{here}/body", out, component_ids, op_owner)


def validate_model(model: SoftwareModel) -> ValidationReport:
    """Check every structural invariant; an empty report means the model is sound."""
    out: list[Violation] = []

    component_ids: set[str] = set()
    for c in model.components:
        if c.id in component_ids:
            out.append(Violation("DUP_ID", f"/components/{c.id}", "duplicate component id"))
        component_ids.add(c.id)

    interface_ids: set[str] = set()
    op_owner: dict[str, str] = {}
    for iface in model.interfaces:
        if iface.id in interface_ids:
            out.append(Violation("DUP_ID", f"/interfaces/{iface.id}", "duplicate interface id"))
        interface_ids.add(iface.id)
        for op in iface.operations:
            if op.id in op_owner:
                out.append(
                    Violation(
                        "OP_SHARED",
                        f"/interfaces/{iface.id}/operations/{op.id}",
                        "operation id appears in more than one interface",
                    )
                )
            op_owner[op.id] = iface.id

    for c in model.components:
        overlap = set(c.provided) & set(c.required)
        if overlap:
            out.append(
                Violation(
                    "PROVIDED_REQUIRED_OVERLAP",
                    f"/components/{c.id}",
                    f"interfaces both provided and required: {sorted(overlap)}",
                )
            )
        for iid in (*c.provided, *c.required):
            if iid not in interface_ids:
                out.append(
                    Violation("DANGLING_REF", f"/components/{c.id}", f"unknown interface '{iid}'")
                )

    workload_ids: set[str] = set()
    for w in model.workloads:
        if w.id in workload_ids:
            out.append(Violation("DUP_ID", f"/workloads/{w.id}", "duplicate workload id"))
        workload_ids.add(w.id)
        if w.population < 1:
            out.append(Violation("POPULATION", f"/workloads/{w.id}", "population must be >= 1"))
        if w.think_time < 0:
            out.append(Violation("THINK_TIME", f"/workloads/{w.id}", "think time must be >= 0"))

    scenario_ids: set[str] = set()
    for s in model.scenarios:
        here = f"/scenarios/{s.id}"
        if s.id in scenario_ids:
            out.append(Violation("DUP_ID", here, "duplicate scenario id"))
        scenario_ids.add(s.id)
        if s.workload_class not in workload_ids:
            out.append(Violation("DANGLING_REF", here, f"unknown workload class '{s.workload_class}'"))
        if not s.body:
            out.append(Violation("EMPTY_SCENARIO", here, "scenario body is empty"))
        _validate_steps(model, s.body, f"{here}/body", out, component_ids, op_owner)

    seen_demand: set[tuple[str, str]] = set()
    for i, d in enumerate(model.demands):
        here = f"/demands/{i}"
        if not d.service_time > 0:
            out.append(Violation("SERVICE_TIME", here, f"service time {d.service_time} must be > 0"))
        if (d.component, d.operation) in seen_demand:
            out.append(
                Violation("DUP_DEMAND", here, f"duplicate annotation for ({d.component}, {d.operation})")
            )
        seen_demand.add((d.component, d.operation))
        if d.component not in component_ids:
            out.append(Violation("DANGLING_REF", here, f"unknown component '{d.component}'"))
        owner = op_owner.get(d.operation)
        if owner is None:
            out.append(Violation("DANGLING_REF", here, f"unknown operation '{d.operation}'"))
        elif d.component in component_ids and owner not in model.component(d.component).provided:
            out.append(
                Violation(
                    "OP_NOT_PROVIDED",
                    here,
                    f"'{d.component}' does not provide the interface of '{d.operation}'",
                )
            )

    for i, req in enumerate(model.requirements):
        here = f"/requirements/{i}"
        if isinstance(req, ResponseTimeReq):
            if not req.max_server_side_response > 0:
                out.append(Violation("THRESHOLD", here, "response-time threshold must be > 0"))
            if req.workload_class not in workload_ids:
                out.append(
                    Violation("DANGLING_REF", here, f"unknown workload class '{req.workload_class}'")
                )
        else:
            if not (0 < req.max_utilization <= 1):
                out.append(Violation("THRESHOLD", here, "utilization threshold must be in (0,1]"))

    return ValidationReport(tuple(out))
