"""Forward transformation (software model -> QN), QN-side edits, and the
backward transformation that propagates recorded edits to the software model.

Backward is edit replay over trace links rather than model diffing: the
forward mapping collapses information (several software elements can share a
center), so the journal of supported edits is what makes inversion tractable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

from .errors import (
    BackwardUnsupportedEditError,
    BadProbabilitiesError,
    FrozenElementError,
    InvalidModelError,
    MissingDemandError,
    NoClientComponentError,
    RefactoringError,
    SchemaError,
)
from .model import (
    PROB_TOL,
    SoftwareModel,
    client_component,
    expected_invocations,
    validate_model,
)
from .qn import DELAY, QUEUEING_PS, QnCenter, QnClass, QnModel
from .refactor import rescale_annotations, split_component

TRACE_SCHEMA = "spe-trace/1"


@dataclass(frozen=True)
class SplitCenter:
    center: str
    parts: tuple[tuple[str, float], ...]  # (new id, probability)


@dataclass(frozen=True)
class ChangeDemand:
    center: str
    class_id: str
    new_demand: float


@dataclass(frozen=True)
class ChangeRouting:
    center: str  # the originally split center (parent id)
    parts: tuple[str, ...]
    new_probabilities: tuple[float, ...]


@dataclass(frozen=True)
class ChangeThinkTime:
    class_id: str
    seconds: float


QnEdit = Union[SplitCenter, ChangeDemand, ChangeRouting, ChangeThinkTime]


@dataclass(frozen=True)
class TraceLink:
    kind: str  # "component-center" | "class-scenario" | "demand-derivation"
    software_element: str
    qn_element: str
    detail: tuple = ()


@dataclass(frozen=True)
class TraceModel:
    links: tuple[TraceLink, ...]
    source_version: int
    journal: tuple[QnEdit, ...] = ()

    def component_of_center(self, center_id: str) -> str | None:
        for link in self.links:
            if link.kind == "component-center" and link.qn_element == center_id:
                return link.software_element
        return None

    def scenario_of_class(self, class_id: str) -> str | None:
        for link in self.links:
            if link.kind == "class-scenario" and link.qn_element == class_id:
                return link.software_element
        return None

    def append(self, edit: QnEdit, new_links: tuple[TraceLink, ...] = ()) -> "TraceModel":
        return replace(self, links=self.links + new_links, journal=self.journal + (edit,))


def forward(model: SoftwareModel) -> tuple[QnModel, TraceModel]:
    """Map a validated software model to a closed multi-class QN plus trace.

    The client becomes the single delay center; every other component becomes
    one processor-sharing center; each scenario becomes one closed class with
    its workload population, and demands aggregate expected invocation counts
    times per-invocation service times.
    """
    report = validate_model(model)
    if not report.ok:
        raise InvalidModelError(report.violations)
    client = client_component(model)
    if client is None:
        raise NoClientComponentError(
            "expected exactly one component with no provided interfaces that originates messages"
        )

    servers = [c for c in model.components if c.id != client.id]
    classes = []
    links: list[TraceLink] = []
    for scenario in model.scenarios:
        workload = model.workload(scenario.workload_class)
        classes.append(QnClass(id=scenario.id, population=workload.population, think_time=workload.think_time))
        links.append(TraceLink("class-scenario", scenario.id, scenario.id))

    centers = [QnCenter(id=client.id, kind=DELAY)]
    links.append(TraceLink("component-center", client.id, client.id))
    for comp in servers:
        centers.append(QnCenter(id=comp.id, kind=QUEUEING_PS))
        links.append(TraceLink("component-center", comp.id, comp.id))

    demand_rows: list[list[float]] = []
    demand_rows.append([c.think_time for c in classes])  # delay row mirrors think times
    for comp in servers:
        row = []
        for scenario in model.scenarios:
            counts = expected_invocations(scenario)
            total = 0.0
            for (target, op), count in counts.items():
                if target != comp.id:
                    continue
                annotation = model.demand_for(comp.id, op)
                if annotation is None:
                    raise MissingDemandError(
                        f"operation '{op}' on '{comp.id}' is invoked by '{scenario.id}' but has no demand annotation"
                    )
                total += count * annotation.service_time
                links.append(
                    TraceLink(
                        "demand-derivation",
                        f"{comp.id}.{op}",
                        f"{comp.id}/{scenario.id}",
                        detail=(scenario.id, count),
                    )
                )
            row.append(total)
        demand_rows.append(row)

    qn = QnModel(classes=tuple(classes), centers=tuple(centers), demand=tuple(tuple(r) for r in demand_rows))
    trace = TraceModel(links=tuple(links), source_version=model.model_version)
    return qn, trace


def _check_probabilities(probs: list[float]) -> None:
    for p in probs:
        if not (0.0 < p <= 1.0):
            raise BadProbabilitiesError(f"probability {p} outside (0, 1]")
    if abs(sum(probs) - 1.0) > PROB_TOL:
        raise BadProbabilitiesError(f"probabilities sum to {sum(probs)}, expected 1")


def _frozen_guard(model_components: dict[str, bool], trace: TraceModel, center_id: str) -> None:
    comp = trace.component_of_center(center_id)
    if comp is not None and model_components.get(comp, False):
        raise FrozenElementError(f"center '{center_id}' traces to frozen component '{comp}'")


def apply_qn_edit(
    qn: QnModel, trace: TraceModel, edit: QnEdit, frozen_components: dict[str, bool] | None = None
) -> tuple[QnModel, TraceModel]:
    """Apply one supported edit to the QN, extending the trace journal.

    `frozen_components` maps component id -> frozen flag from the software
    model the trace derives from; edits whose target traces to a frozen
    component are rejected.
    """
    frozen_components = frozen_components or {}
    center_ids = qn.center_ids()
    class_ids = qn.class_ids()

    if isinstance(edit, SplitCenter):
        if edit.center not in center_ids:
            raise SchemaError(f"unknown center '{edit.center}'", "/edit/center")
        _frozen_guard(frozen_components, trace, edit.center)
        probs = [p for _, p in edit.parts]
        _check_probabilities(probs)
        idx = center_ids.index(edit.center)
        if qn.centers[idx].kind != QUEUEING_PS:
            raise SchemaError("only queueing centers can be split", "/edit/center")
        for part_id, _ in edit.parts:
            if part_id in center_ids:
                raise SchemaError(f"part id '{part_id}' already exists", "/edit/parts")
        new_centers = list(qn.centers[:idx])
        new_rows = [list(r) for r in qn.demand[:idx]]
        base_row = qn.demand[idx]
        for part_id, p in edit.parts:
            new_centers.append(QnCenter(id=part_id, kind=QUEUEING_PS))
            new_rows.append([p * d for d in base_row])
        new_centers.extend(qn.centers[idx + 1 :])
        new_rows.extend(list(r) for r in qn.demand[idx + 1 :])
        source_component = trace.component_of_center(edit.center)
        new_links = tuple(
            TraceLink("component-center", source_component or edit.center, part_id, detail=("split", edit.center, p))
            for part_id, p in edit.parts
        )
        new_qn = QnModel(classes=qn.classes, centers=tuple(new_centers), demand=tuple(tuple(r) for r in new_rows))
        return new_qn, trace.append(edit, new_links)

    if isinstance(edit, ChangeDemand):
        if edit.center not in center_ids:
            raise SchemaError(f"unknown center '{edit.center}'", "/edit/center")
        if edit.class_id not in class_ids:
            raise SchemaError(f"unknown class '{edit.class_id}'", "/edit/class")
        if edit.new_demand < 0 or not math.isfinite(edit.new_demand):
            raise SchemaError("demand must be finite and >= 0", "/edit/newDemand")
        _frozen_guard(frozen_components, trace, edit.center)
        i = center_ids.index(edit.center)
        j = class_ids.index(edit.class_id)
        rows = [list(r) for r in qn.demand]
        rows[i][j] = edit.new_demand
        new_qn = QnModel(classes=qn.classes, centers=qn.centers, demand=tuple(tuple(r) for r in rows))
        return new_qn, trace.append(edit)

    if isinstance(edit, ChangeRouting):
        probs = list(edit.new_probabilities)
        if len(probs) != len(edit.parts):
            raise SchemaError("parts and probabilities must align", "/edit")
        _check_probabilities(probs)
        for part in edit.parts:
            if part not in center_ids:
                raise SchemaError(f"unknown center '{part}'", "/edit/parts")
            _frozen_guard(frozen_components, trace, part)
        rows = [list(r) for r in qn.demand]
        for j in range(len(class_ids)):
            total = sum(rows[center_ids.index(p)][j] for p in edit.parts)
            for part, prob in zip(edit.parts, probs):
                rows[center_ids.index(part)][j] = prob * total
        new_qn = QnModel(classes=qn.classes, centers=qn.centers, demand=tuple(tuple(r) for r in rows))
        return new_qn, trace.append(edit)

    if isinstance(edit, ChangeThinkTime):
        if edit.class_id not in class_ids:
            raise SchemaError(f"unknown class '{edit.class_id}'", "/edit/class")
        if edit.seconds < 0:
            raise SchemaError("think time must be >= 0", "/edit/seconds")
        j = class_ids.index(edit.class_id)
        classes = list(qn.classes)
        classes[j] = replace(classes[j], think_time=edit.seconds)
        delay_idx = qn.centers.index(qn.delay_center())
        rows = [list(r) for r in qn.demand]
        rows[delay_idx][j] = edit.seconds
        new_qn = QnModel(classes=tuple(classes), centers=qn.centers, demand=tuple(tuple(r) for r in rows))
        return new_qn, trace.append(edit)

    raise SchemaError(f"unsupported edit type {type(edit).__name__}", "/edit")


def qn_equal(a: QnModel, b: QnModel, tol: float = 1e-12) -> bool:
    """Structural equality up to center ordering and float tolerance."""
    if sorted(c.id for c in a.classes) != sorted(c.id for c in b.classes):
        return False
    if sorted((k.id, k.kind) for k in a.centers) != sorted((k.id, k.kind) for k in b.centers):
        return False
    a_class = {c.id: c for c in a.classes}
    b_class = {c.id: c for c in b.classes}
    for cid, ca in a_class.items():
        cb = b_class[cid]
        if ca.population != cb.population:
            return False
        if abs(ca.think_time - cb.think_time) > tol * max(1.0, abs(ca.think_time)):
            return False
    a_ids, b_ids = a.center_ids(), b.center_ids()
    a_cls, b_cls = a.class_ids(), b.class_ids()
    for ki, kid in enumerate(a_ids):
        bi = b_ids.index(kid)
        for ji, cid in enumerate(a_cls):
            bj = b_cls.index(cid)
            da, db = a.demand[ki][ji], b.demand[bi][bj]
            if abs(da - db) > tol * max(1.0, abs(da)):
                return False
    return True


def backward(edited_qn: QnModel, trace: TraceModel, base_model: SoftwareModel) -> SoftwareModel:
    """Propagate the recorded QN edit journal back to the software model.

    The edited QN must derive from forward(base_model) through the journal;
    anything else (hand edits, untraced centers) has no in-metamodel preimage
    and raises BackwardUnsupportedEditError.
    """
    if trace.source_version != base_model.model_version:
        raise BackwardUnsupportedEditError(
            f"trace was recorded against model version {trace.source_version}, "
            f"got {base_model.model_version}"
        )
    qn0, replay_trace = forward(base_model)
    frozen = {c.id: c.frozen for c in base_model.components}
    for edit in trace.journal:
        qn0, replay_trace = apply_qn_edit(qn0, replay_trace, edit, frozen)
    if not qn_equal(qn0, edited_qn):
        raise BackwardUnsupportedEditError(
            "edited QN does not derive from the recorded edit journal (unsupported manual edit?)"
        )
    if not trace.journal:
        return base_model

    model = base_model
    qn_cursor, trace_cursor = forward(model)
    for edit in trace.journal:
        if isinstance(edit, SplitCenter):
            subject = trace_cursor.component_of_center(edit.center)
            if subject is None:
                raise BackwardUnsupportedEditError(f"center '{edit.center}' traces to no component")
            model = split_component(model, subject, [(pid, p, None) for pid, p in edit.parts])
        elif isinstance(edit, ChangeDemand):
            comp = trace_cursor.component_of_center(edit.center)
            scenario = trace_cursor.scenario_of_class(edit.class_id)
            if comp is None or scenario is None:
                raise BackwardUnsupportedEditError("edit target has no trace link")
            old = qn_cursor.demand_of(edit.center, edit.class_id)
            if old <= 0:
                raise BackwardUnsupportedEditError(
                    "cannot scale a zero demand: no messages to rescale in the software model"
                )
            try:
                model = rescale_annotations(model, comp, scenario, edit.new_demand / old)
            except RefactoringError as exc:
                raise BackwardUnsupportedEditError(str(exc)) from exc
        elif isinstance(edit, ChangeRouting):
            try:
                model = _reroute_split(model, edit)
            except RefactoringError as exc:
                raise BackwardUnsupportedEditError(str(exc)) from exc
        elif isinstance(edit, ChangeThinkTime):
            scenario_id = trace_cursor.scenario_of_class(edit.class_id)
            if scenario_id is None:
                raise BackwardUnsupportedEditError("class has no trace link")
            wid = model.scenario(scenario_id).workload_class
            workloads = tuple(
                replace(w, think_time=edit.seconds) if w.id == wid else w for w in model.workloads
            )
            model = replace(model, workloads=workloads).bump_version()
        # Component ids equal center ids by construction, so re-deriving the
        # cursor from the partially refactored model resolves later edits
        # that target centers introduced by earlier splits.
        qn_cursor, trace_cursor = forward(model)

    return model


def _reroute_split(model: SoftwareModel, edit: ChangeRouting) -> SoftwareModel:
    """Adjust branch probabilities of a previously applied software split."""
    from .refactor import reweight_alt_branches

    return reweight_alt_branches(model, edit.parts, edit.new_probabilities)
