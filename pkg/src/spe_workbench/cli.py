"""Command-line interface: analyze, detect, refactor, session, walkthrough, serve.

Exit codes: 0 success / requirements satisfied, 2 requirement violations,
1 operational error (bad file, frozen element, solver failure).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .antipatterns import DetectionConfig, detect_blob, detect_est, occurrences_to_json
from .errors import SpeError
from .kernels import active_kernel_name
from .model import SoftwareModel, validate_model
from .modelio import dump_json_bytes, load_model, save_model
from .mva import bottleneck, solve
from .qn import QnModel, SolverResult, result_to_json
from .session import (
    PerformanceAction,
    RequirementReport,
    Session,
    SoftwareAction,
    action_from_json,
    check_requirements,
    load_session,
    persist_session,
    resolve_requirements,
    scalability_tradeoff,
)
from .simulate import simulate
from .transform import SplitCenter, forward


def _read_model(path: str) -> SoftwareModel:
    model = load_model(Path(path).read_bytes())
    report = validate_model(model)
    if not report.ok:
        raise SpeError(
            "model is invalid:\n" + "\n".join(f"  {v.code} {v.path}: {v.message}" for v in report.violations)
        )
    return model


def _positive(value: str) -> float:
    v = float(value)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return v


def _solve_for(model: SoftwareModel, solver: str, seed: int, horizon: float) -> tuple[QnModel, SolverResult, object]:
    qn, trace = forward(model)
    if solver == "sim":
        sim = simulate(qn, horizon=horizon, warmup=0.1 * horizon, seed=seed)
        return qn, sim.result, trace
    return qn, solve(qn, solver), trace


def _report_table(report: RequirementReport) -> str:
    lines = []
    if report.response_times:
        lines.append("Response times (server-side, seconds)")
        lines.append(f"  {'class':<22}{'value':>10}{'threshold':>12}  status")
        for e in report.response_times:
            status = "VIOLATED" if e.violated else "ok"
            lines.append(f"  {e.subject:<22}{e.value:>10.3f}{e.threshold:>12.2f}  {status}")
    if report.utilizations:
        lines.append("Utilizations")
        lines.append(f"  {'center':<22}{'value':>10}{'threshold':>12}  status")
        for e in report.utilizations:
            status = "VIOLATED" if e.violated else "ok"
            lines.append(f"  {e.subject:<22}{e.value:>10.4f}{e.threshold:>12.2f}  {status}")
    lines.append(f"satisfied: {'yes' if report.satisfied else 'no'}")
    return "\n".join(lines)


def _emit(text_or_doc, args, default_name: str) -> None:
    if args.format == "structured":
        payload = dump_json_bytes(text_or_doc if isinstance(text_or_doc, dict) else {"text": text_or_doc})
        if args.out:
            Path(args.out).write_bytes(payload)
        else:
            sys.stdout.write(payload.decode())
    else:
        text = text_or_doc if isinstance(text_or_doc, str) else json.dumps(text_or_doc, indent=2)
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)


def cmd_analyze(args) -> int:
    model = _read_model(args.model)
    qn, result, _ = _solve_for(model, args.solver, args.seed, args.horizon)
    report = check_requirements(result, resolve_requirements(model))
    doc = {
        "result": result_to_json(result),
        "report": {
            "satisfied": report.satisfied,
            "responseTimes": [
                {"class": e.subject, "value": e.value, "threshold": e.threshold, "violated": e.violated}
                for e in report.response_times
            ],
            "utilizations": [
                {"center": e.subject, "value": e.value, "threshold": e.threshold, "violated": e.violated}
                for e in report.utilizations
            ],
        },
    }
    if args.format == "structured":
        _emit(doc, args, "analysis.json")
    else:
        text = _report_table(report)
        if result.utilization:
            text += f"\nbottleneck: {bottleneck(result)}\nsolver: {result.method} ({active_kernel_name()} kernel)"
        _emit(text, args, "analysis.txt")
    return 0 if report.satisfied else 2


def cmd_detect(args) -> int:
    model = _read_model(args.model)
    cfg = DetectionConfig(
        blob_min_connections=int(args.blob_min_connections),
        blob_min_utilization=args.blob_min_utilization,
        blob_min_demand_share=args.blob_min_demand_share,
        est_min_messages=args.est_min_messages,
        est_remote_cost=args.est_remote_cost,
        facade_local_cost=args.facade_local_cost,
    )
    qn, result, trace = _solve_for(model, args.solver, args.seed, args.horizon)
    occurrences = detect_blob(model, result, trace, cfg) + detect_est(model, cfg)
    if args.format == "structured":
        _emit(occurrences_to_json(occurrences), args, "occurrences.json")
    else:
        if not occurrences:
            _emit("no antipattern occurrences detected", args, "occurrences.txt")
        else:
            lines = []
            for occ in occurrences:
                subject = occ.subject if isinstance(occ.subject, str) else " -> ".join(occ.subject)
                evidence = ", ".join(f"{k}={v:.4g}" for k, v in occ.evidence.items())
                lines.append(f"{occ.kind.upper():<5} {subject}  [{evidence}]")
            _emit("\n".join(lines), args, "occurrences.txt")
    return 0


def cmd_refactor(args) -> int:
    model = _read_model(args.model)
    spec = json.loads(Path(args.action).read_text())
    action = action_from_json(spec)
    if isinstance(action, SoftwareAction):
        from .antipatterns import AntipatternOccurrence, FacadePlan, SplitPlan, solve_blob, solve_est

        plan = action.plan
        if isinstance(plan, SplitPlan):
            occ = AntipatternOccurrence(kind="blob", subject=plan.subject)
            refactored = solve_blob(model, occ, plan)
        else:
            occ = AntipatternOccurrence(kind="est", subject=(plan.scenario, plan.caller, plan.callee))
            cfg = DetectionConfig(est_remote_cost=args.est_remote_cost, facade_local_cost=args.facade_local_cost)
            refactored = solve_est(model, occ, plan, cfg)
    else:
        raise SpeError("QN edit sequences apply inside a session; use `spe session expand`")
    out = args.out or "refactored.json"
    Path(out).write_bytes(save_model(refactored))
    print(f"wrote {out}")
    return 0


def cmd_session(args) -> int:
    if args.session_cmd == "new":
        model = _read_model(args.model)
        session = Session(model)
        Path(args.out).write_bytes(persist_session(session))
        print(f"session with root {session.root_id} written to {args.out}")
        return 0

    data = Path(args.session).read_bytes()
    session = load_session(data)
    if args.session_cmd == "show":
        for node in session.nodes.values():
            marker = "*" if node.id == session.cursor else " "
            action = type(node.action).__name__ if node.action else "root"
            print(
                f"{marker} {node.id} parent={node.parent or '-'} action={action} "
                f"satisfied={'yes' if node.report.satisfied else 'no'}"
            )
        return 0
    if args.session_cmd == "expand":
        action = action_from_json(json.loads(Path(args.action).read_text()))
        child = session.expand(args.node, action)
        Path(args.session).write_bytes(persist_session(session))
        print(f"expanded {args.node} -> {child.id}; satisfied: {'yes' if child.report.satisfied else 'no'}")
        print(_report_table(child.report))
        return 0
    if args.session_cmd == "backtrack":
        session.backtrack(args.node)
        Path(args.session).write_bytes(persist_session(session))
        print(f"cursor moved to {args.node}")
        return 0
    if args.session_cmd == "export":
        model = session.export_model(args.node)
        Path(args.session).write_bytes(persist_session(session))
        out = args.out or f"model-{args.node}.json"
        Path(out).write_bytes(save_model(model))
        print(f"wrote {out}")
        return 0
    if args.session_cmd == "ledger":
        ledger = session.ledger
        print(
            f"software iterations M={ledger.software_iterations}, "
            f"performance iterations N={ledger.performance_iterations}"
        )
        try:
            trade = scalability_tradeoff(ledger)
            print(
                f"M*mean(tForward)={trade['lhs']:.6f}s vs "
                f"N*(mean(tForth)+mean(tBack))={trade['rhs']:.6f}s -> "
                f"software side cheaper: {'yes' if trade['softwareSideCheaper'] else 'no'}"
            )
        except SpeError as exc:
            print(f"tradeoff unavailable: {exc}")
        return 0
    raise SpeError(f"unknown session subcommand {args.session_cmd}")


def cmd_walkthrough(args) -> int:
    from .fixtures import ecs_model

    model = _read_model(args.model) if args.model else ecs_model()
    session = Session(model)
    root = session.nodes[session.root_id]
    print("== initial analysis ==")
    print(_report_table(root.report))
    print(f"bottleneck: {bottleneck(root.result)}\n")

    cfg = session.detection
    occurrences = detect_blob(model, root.result, root.trace, cfg) + detect_est(model, cfg)
    print("detected antipatterns:")
    for occ in occurrences:
        subject = occ.subject if isinstance(occ.subject, str) else " -> ".join(occ.subject)
        print(f"  {occ.kind.upper()} {subject}")
    print()

    from .antipatterns import FacadePlan, SplitPlan

    print("== software branch, step 1: split the blob (0.8 films / 0.2 books) ==")
    blob_child = session.expand(
        session.root_id,
        SoftwareAction(SplitPlan("ProductCatalog", (("FilmCatalog", 0.8, None), ("BookCatalog", 0.2, None)))),
    )
    print(_report_table(blob_child.report))
    print()

    print("== software branch, step 2: session facade for the registration calls ==")
    est_child = session.expand(
        blob_child.id,
        SoftwareAction(FacadePlan("Register", "UserController", "Database")),
    )
    print(_report_table(est_child.report))
    print()

    print("== performance branch, step 1: split the ProductCatalog center ==")
    qn_child1 = session.expand(
        session.root_id,
        PerformanceAction((SplitCenter("ProductCatalog", (("FilmCatalog", 0.8), ("BookCatalog", 0.2))),)),
    )
    print(_report_table(qn_child1.report))
    print()

    print("== performance branch, step 2: split the FilmCatalog center 0.5/0.5 ==")
    qn_child2 = session.expand(
        qn_child1.id,
        PerformanceAction((SplitCenter("FilmCatalog", (("FilmCatalog1", 0.5), ("FilmCatalog2", 0.5))),)),
    )
    print(_report_table(qn_child2.report))
    print()

    same = all(
        abs(blob_child.result.throughput[c] - qn_child1.result.throughput[c]) <= 1e-9
        for c in blob_child.result.throughput
    )
    print(f"both step-1 paths give identical performance results: {'yes' if same else 'NO'}")

    exported = session.export_model(qn_child2.id)
    print(f"performance leaf exported back to a software model with components: "
          f"{', '.join(sorted(c.id for c in exported.components))}")

    ledger = session.ledger
    print(
        f"\ncost ledger: M={ledger.software_iterations} software iterations, "
        f"N={ledger.performance_iterations} performance iterations"
    )
    trade = scalability_tradeoff(ledger)
    print(
        f"M*mean(tForward)={trade['lhs']:.6f}s vs N*(mean(tForth)+mean(tBack))={trade['rhs']:.6f}s "
        f"-> software side cheaper: {'yes' if trade['softwareSideCheaper'] else 'no'}"
    )
    if args.out:
        Path(args.out).write_bytes(persist_session(session))
        print(f"session written to {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(token=args.token, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spe", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p, model_required=True):
        p.add_argument("--model", required=model_required, help="model file (spe-model/1 JSON)")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--solver", choices=["auto", "exact", "amva", "sim"], default="auto")
        p.add_argument("--seed", type=int, default=1, help="simulation seed")
        p.add_argument("--horizon", type=float, default=20000.0, help="simulation horizon, model-seconds")
        p.add_argument("--format", choices=["plain", "structured"], default="plain")

    p = sub.add_parser("analyze", help="solve the generated QN and check requirements")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("detect", help="detect performance antipatterns")
    common(p)
    p.add_argument("--blob-min-connections", type=_positive, default=3)
    p.add_argument("--blob-min-utilization", type=_positive, default=0.85)
    p.add_argument("--blob-min-demand-share", type=_positive, default=0.3)
    p.add_argument("--est-min-messages", type=_positive, default=5)
    p.add_argument("--est-remote-cost", type=_positive, default=0.005)
    p.add_argument("--facade-local-cost", type=_positive, default=0.005)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("refactor", help="apply a refactoring action to a model file")
    common(p)
    p.add_argument("--action", required=True, help="action spec JSON file")
    p.add_argument("--est-remote-cost", type=_positive, default=0.005)
    p.add_argument("--facade-local-cost", type=_positive, default=0.005)
    p.set_defaults(func=cmd_refactor)

    p = sub.add_parser("session", help="manage analysis sessions")
    ssub = p.add_subparsers(dest="session_cmd", required=True)
    sp = ssub.add_parser("new")
    sp.add_argument("--model", required=True)
    sp.add_argument("--out", required=True)
    for name in ("show", "expand", "backtrack", "export", "ledger"):
        sp = ssub.add_parser(name)
        sp.add_argument("--session", required=True)
        if name in ("expand", "backtrack", "export"):
            sp.add_argument("--node", required=True)
        if name == "expand":
            sp.add_argument("--action", required=True)
        if name == "export":
            sp.add_argument("--out")
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("walkthrough", help="replay the two-branch e-commerce refactoring study")
    p.add_argument("--model", help="alternative model file (default: bundled ECS fixture)")
    p.add_argument("--out", help="write the resulting session file here")
    p.set_defaults(func=cmd_walkthrough)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--token", help="require this bearer token")
    p.add_argument("--ui", help="serve this directory (the built frontend) at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SpeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
