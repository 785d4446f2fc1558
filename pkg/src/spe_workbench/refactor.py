"""Software-model rewriting primitives shared by antipattern solutions and
the backward transformation: component splitting, demand rescaling, and
re-weighting of split alternatives."""

from __future__ import annotations

from dataclasses import replace

from .errors import BadProbabilitiesError, FrozenElementError, RefactoringError
from .model import (
    PROB_TOL,
    Alt,
    Component,
    DemandAnnotation,
    Interface,
    Loop,
    Message,
    OperationDef,
    SoftwareModel,
    Step,
    expected_invocations,
)


def _touches(step: Step, subject: str) -> bool:
    if isinstance(step, Message):
        return subject in (step.source, step.target)
    if isinstance(step, Alt):
        return any(_touches(s, subject) for _, body in step.branches for s in body)
    return any(_touches(s, subject) for s in step.body)


def _retarget(steps: tuple[Step, ...], subject: str, part: str, op_map: dict[str, str]) -> tuple[Step, ...]:
    out: list[Step] = []
    for step in steps:
        if isinstance(step, Message):
            source = part if step.source == subject else step.source
            target = part if step.target == subject else step.target
            op = op_map[step.operation] if step.target == subject else step.operation
            out.append(Message(source=source, target=target, operation=op))
        elif isinstance(step, Alt):
            out.append(
                Alt(
                    branches=tuple(
                        (p, _retarget(body, subject, part, op_map)) for p, body in step.branches
                    )
                )
            )
        else:
            out.append(Loop(count=step.count, body=_retarget(step.body, subject, part, op_map)))
    return tuple(out)


def _split_body(
    body: tuple[Step, ...],
    subject: str,
    parts: list[tuple[str, float]],
    op_maps: dict[str, dict[str, str]],
) -> tuple[Step, ...]:
    """Replace each maximal contiguous run of subject-touching steps with a
    probability-weighted alternative, one branch per part."""
    out: list[Step] = []
    run: list[Step] = []

    def flush() -> None:
        if not run:
            return
        branches = tuple(
            (prob, _retarget(tuple(run), subject, part, op_maps[part])) for part, prob in parts
        )
        out.append(Alt(branches=branches))
        run.clear()

    for step in body:
        if _touches(step, subject):
            run.append(step)
        else:
            flush()
            out.append(step)
    flush()
    return tuple(out)


def split_component(
    model: SoftwareModel,
    subject_id: str,
    parts: list[tuple[str, float, list[str] | None]],
) -> SoftwareModel:
    """Split a component into weighted parts (the BLOB solution and the
    software image of a QN center split).

    Each part clones the subject's provided interfaces (operation ids are
    suffixed with the part name); scenario portions touching the subject are
    replaced by an alternative fragment whose branch probabilities are the
    part weights.  `None` as operation subset clones everything.
    """
    subject = model.component(subject_id)
    if subject.frozen:
        raise FrozenElementError(f"'{subject_id}' is frozen ({subject.frozen_reason or 'legacy constraint'})")
    probs = [p for _, p, _ in parts]
    for p in probs:
        if not (0.0 < p <= 1.0):
            raise BadProbabilitiesError(f"probability {p} outside (0, 1]")
    if abs(sum(probs) - 1.0) > PROB_TOL:
        raise BadProbabilitiesError(f"part probabilities sum to {sum(probs)}, expected 1")
    existing = {c.id for c in model.components}
    for name, _, _ in parts:
        if name in existing:
            raise RefactoringError(f"part id '{name}' already exists in the model")

    invoked_ops = set()
    for scenario in model.scenarios:
        for (target, op) in expected_invocations(scenario):
            if target == subject_id:
                invoked_ops.add(op)
    for name, _, subset in parts:
        if subset is not None:
            missing = invoked_ops - set(subset)
            if missing:
                raise RefactoringError(
                    f"part '{name}' must retain operations invoked in scenarios: {sorted(missing)}"
                )

    provided_ifaces = [model.interface(iid) for iid in subject.provided]
    part_components: list[Component] = []
    new_interfaces: list[Interface] = []
    op_maps: dict[str, dict[str, str]] = {}
    for name, _, subset in parts:
        op_map: dict[str, str] = {}
        part_provided = []
        for iface in provided_ifaces:
            ops = [op for op in iface.operations if subset is None or op.id in subset]
            if not ops:
                continue
            clone_ops = tuple(OperationDef(id=f"{op.id}_{name}", name=op.name) for op in ops)
            for op in ops:
                op_map[op.id] = f"{op.id}_{name}"
            new_interfaces.append(Interface(id=f"{iface.id}_{name}", name=iface.name, operations=clone_ops))
            part_provided.append(f"{iface.id}_{name}")
        part_components.append(
            Component(id=name, name=name, provided=tuple(part_provided), required=subject.required)
        )
        op_maps[name] = op_map

    components: list[Component] = []
    for comp in model.components:
        if comp.id == subject_id:
            components.extend(part_components)
            continue
        if set(comp.required) & set(subject.provided):
            new_required = []
            for iid in comp.required:
                if iid in subject.provided:
                    for name, _, _ in parts:
                        clone_id = f"{iid}_{name}"
                        if any(i.id == clone_id for i in new_interfaces):
                            new_required.append(clone_id)
                else:
                    new_required.append(iid)
            components.append(replace(comp, required=tuple(new_required)))
        else:
            components.append(comp)

    interfaces: list[Interface] = []
    for iface in model.interfaces:
        if iface.id in subject.provided:
            interfaces.extend(i for i in new_interfaces if i.id.startswith(f"{iface.id}_"))
        else:
            interfaces.append(iface)

    scenarios = tuple(
        replace(s, body=_split_body(s.body, subject_id, [(n, p) for n, p, _ in parts], op_maps))
        for s in model.scenarios
    )

    demands: list[DemandAnnotation] = []
    for d in model.demands:
        if d.component == subject_id:
            for name, _, _ in parts:
                clone_op = op_maps[name].get(d.operation)
                if clone_op is not None:
                    demands.append(DemandAnnotation(component=name, operation=clone_op, service_time=d.service_time))
        else:
            demands.append(d)

    return replace(
        model,
        components=tuple(components),
        interfaces=tuple(interfaces),
        scenarios=scenarios,
        demands=tuple(demands),
    ).bump_version()


def rescale_annotations(model: SoftwareModel, component_id: str, scenario_id: str, factor: float) -> SoftwareModel:
    """Scale the service times of the operations a scenario invokes on one
    component.  Fails if those operations are shared with other scenarios,
    because the rescale would silently change other classes' demands."""
    if not factor > 0:
        raise RefactoringError(f"scale factor must be > 0, got {factor}")
    scenario = model.scenario(scenario_id)
    ops = {op for (target, op) in expected_invocations(scenario) if target == component_id}
    if not ops:
        raise RefactoringError(f"scenario '{scenario_id}' places no demand on '{component_id}'")
    for other in model.scenarios:
        if other.id == scenario_id:
            continue
        shared = {op for (target, op) in expected_invocations(other) if target == component_id} & ops
        if shared:
            raise RefactoringError(
                f"operations {sorted(shared)} are shared with scenario '{other.id}'; rescale has side effects"
            )
    demands = tuple(
        replace(d, service_time=d.service_time * factor)
        if d.component == component_id and d.operation in ops
        else d
        for d in model.demands
    )
    return replace(model, demands=demands).bump_version()


def _reweight_steps(
    body: tuple[Step, ...], parts: tuple[str, ...], probs: tuple[float, ...], hits: list[int]
) -> tuple[Step, ...]:
    out: list[Step] = []
    for step in body:
        if isinstance(step, Alt):
            mentioned = []
            for _, branch in step.branches:
                found = {p for p in parts if any(_touches(s, p) for s in branch)}
                mentioned.append(next(iter(found)) if len(found) == 1 else None)
            if len(step.branches) == len(parts) and set(mentioned) == set(parts):
                weight = {p: w for p, w in zip(parts, probs)}
                out.append(
                    Alt(
                        branches=tuple(
                            (weight[m], _reweight_steps(branch, parts, probs, hits))
                            for m, (_, branch) in zip(mentioned, step.branches)
                        )
                    )
                )
                hits.append(1)
                continue
            out.append(
                Alt(
                    branches=tuple(
                        (p, _reweight_steps(branch, parts, probs, hits)) for p, branch in step.branches
                    )
                )
            )
        elif isinstance(step, Loop):
            out.append(Loop(count=step.count, body=_reweight_steps(step.body, parts, probs, hits)))
        else:
            out.append(step)
    return tuple(out)


def reweight_alt_branches(
    model: SoftwareModel, parts: tuple[str, ...], new_probabilities: tuple[float, ...]
) -> SoftwareModel:
    """Reassign the probabilities of the alternative fragments produced by a
    split of `parts` (the software image of a QN routing change)."""
    hits: list[int] = []
    scenarios = tuple(
        replace(s, body=_reweight_steps(s.body, parts, new_probabilities, hits)) for s in model.scenarios
    )
    if not hits:
        raise RefactoringError(f"no alternative fragment over parts {parts} found")
    return replace(model, scenarios=scenarios).bump_version()
