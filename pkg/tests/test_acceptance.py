"""Acceptance suite: every exit criterion with its stated tolerance.

Each test appends a PASS/FAIL line to the terminal summary so a plain
`pytest` run shows one line per criterion.
"""

import random
import resource
import time

import pytest

from conftest import ACCEPTANCE_LINES
from netgen import medium_net, tiny_net
from oracles import convolution_throughputs
from spe_workbench.antipatterns import (
    AntipatternOccurrence,
    DetectionConfig,
    FacadePlan,
    SplitPlan,
    solve_blob,
    solve_est,
)
from spe_workbench.errors import FrozenElementError
from spe_workbench.modelio import save_model
from spe_workbench.mva import bottleneck, server_side_response, solve_amva, solve_exact_mva
from spe_workbench.qn import DELAY, QUEUEING_PS, QnCenter, QnClass, QnModel, SolverResult
from spe_workbench.session import Session, SoftwareAction
from spe_workbench.simulate import simulate
from spe_workbench.transform import SplitCenter, apply_qn_edit, backward, forward, qn_equal

SUITE_SEED = 2024


def record(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    ACCEPTANCE_LINES.append(f"[{status}] {name}{suffix}")
    assert ok, f"{name}{suffix}"


@pytest.fixture(scope="module")
def medium_suite():
    rng = random.Random(SUITE_SEED)
    return [medium_net(rng) for _ in range(50)]


def test_exact_mva_matches_convolution_oracle():
    rng = random.Random(SUITE_SEED)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        qn = tiny_net(rng)
        exact = solve_exact_mva(qn)
        for cid, x in convolution_throughputs(qn).items():
            worst = max(worst, abs(exact.throughput[cid] - x) / x)
    elapsed = time.perf_counter() - start
    record(
        "exact MVA vs normalization-constant oracle (20 tiny nets, <=1e-9 rel, <1s)",
        worst <= 1e-9 and elapsed < 1.0,
        f"worst rel err {worst:.2e}, {elapsed:.2f}s",
    )


def test_exact_mva_inside_simulation_ci(medium_suite):
    start = time.perf_counter()
    inside = total = 0
    for i, qn in enumerate(medium_suite):
        exact = solve_exact_mva(qn)
        slowest_cycle = max(
            c.think_time
            + sum(row[j] for row, k in zip(qn.demand, qn.centers) if k.kind == QUEUEING_PS)
            for j, c in enumerate(qn.classes)
        )
        horizon = 3000.0 * slowest_cycle
        sim = simulate(qn, horizon=horizon, warmup=0.15 * horizon, seed=SUITE_SEED * 1000 + i)
        for cid in exact.throughput:
            total += 1
            if abs(sim.result.throughput[cid] - exact.throughput[cid]) <= sim.half_width_throughput[cid]:
                inside += 1
    elapsed = time.perf_counter() - start
    coverage = inside / total
    record(
        "exact MVA inside simulator 95% CI on >=90% of 50 nets (<5 min)",
        coverage >= 0.90 and elapsed < 300.0,
        f"coverage {coverage:.1%} ({inside}/{total}), {elapsed:.1f}s",
    )


def test_amva_within_three_percent(medium_suite):
    worst = 0.0
    for qn in medium_suite:
        exact = solve_exact_mva(qn)
        approx = solve_amva(qn)
        for cid in exact.throughput:
            worst = max(worst, abs(approx.throughput[cid] - exact.throughput[cid]) / exact.throughput[cid])
    record(
        "approximate MVA throughput within 3% of exact on the same suite",
        worst <= 0.03,
        f"worst rel err {worst:.2%}",
    )


def test_ecs_scale_budget(ecs):
    qn, _ = forward(ecs)
    assert qn.lattice_size() == 151 * 301 * 51
    start = time.perf_counter()
    solve_exact_mva(qn)
    exact_elapsed = time.perf_counter() - start
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    start = time.perf_counter()
    solve_amva(qn)
    amva_elapsed = time.perf_counter() - start
    record(
        "ECS populations (150,300,50): exact <120s and <1GB, AMVA <1s",
        exact_elapsed < 120.0 and peak_mb < 1024.0 and amva_elapsed < 1.0,
        f"exact {exact_elapsed:.2f}s, peak RSS {peak_mb:.0f}MB, amva {amva_elapsed:.3f}s",
    )


def test_hand_derived_throughput():
    qn = QnModel(
        classes=(QnClass("c", 2, 0.0),),
        centers=(QnCenter("t", DELAY), QnCenter("a", QUEUEING_PS), QnCenter("b", QUEUEING_PS)),
        demand=((0.0,), (1.0,), (2.0,)),
    )
    x = solve_exact_mva(qn).throughput["c"]
    record(
        "hand-derived value: D=[1,2], Z=0, N=2 gives X=3/7 (+-1e-12)",
        abs(x - 3.0 / 7.0) <= 1e-12,
        f"X={x!r}",
    )


def test_paper_arithmetic():
    result = SolverResult(
        class_ids=("MakePurchase", "BrowseCatalog"),
        center_ids=(),
        populations={"MakePurchase": 150, "BrowseCatalog": 300},
        think_times={"MakePurchase": 15.00, "BrowseCatalog": 15.00},
        throughput={},
        cycle_time={"MakePurchase": 23.32, "BrowseCatalog": 17.81},
        server_side_response={},
        residence={},
        queue_length={},
        utilization={},
    )
    purchase = server_side_response(result, "MakePurchase")
    browse = server_side_response(result, "BrowseCatalog")
    record(
        "reported arithmetic: 23.32-15.00=8.32 and 17.81-15.00=2.81",
        purchase == 23.32 - 15.00
        and abs(purchase - 8.32) < 1e-12
        and browse == 17.81 - 15.00
        and abs(browse - 2.81) < 1e-12,
        f"{purchase!r}, {browse!r}",
    )


def test_round_trip_laws(ecs):
    qn, trace = forward(ecs)
    identity = backward(qn, trace, ecs) is ecs

    frozen = {c.id: c.frozen for c in ecs.components}
    qn2, trace2 = apply_qn_edit(
        qn, trace, SplitCenter("ProductCatalog", (("FilmCatalog", 0.8), ("BookCatalog", 0.2))), frozen
    )
    conserved = all(
        abs(
            qn2.demand_of("FilmCatalog", c.id) + qn2.demand_of("BookCatalog", c.id)
            - qn.demand_of("ProductCatalog", c.id)
        )
        <= 1e-12
        for c in qn.classes
    )
    qn3, trace3 = apply_qn_edit(
        qn2, trace2, SplitCenter("FilmCatalog", (("FilmCatalog1", 0.5), ("FilmCatalog2", 0.5))), frozen
    )
    conserved = conserved and all(
        abs(
            qn3.demand_of("FilmCatalog1", c.id) + qn3.demand_of("FilmCatalog2", c.id)
            - qn2.demand_of("FilmCatalog", c.id)
        )
        <= 1e-12
        for c in qn.classes
    )
    restored = backward(qn3, trace3, ecs)
    qn_again, _ = forward(restored)
    well_behaved = qn_equal(qn3, qn_again, tol=1e-12)
    record(
        "round-trip laws: backward∘forward identity, forward∘backward on split QN, demand conservation (+-1e-12)",
        identity and conserved and well_behaved,
    )


def test_two_path_equivalence(ecs):
    occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    plan = SplitPlan("ProductCatalog", (("FilmCatalog", 0.8, None), ("BookCatalog", 0.2, None)))
    qn_software, _ = forward(solve_blob(ecs, occ, plan))
    qn, trace = forward(ecs)
    frozen = {c.id: c.frozen for c in ecs.components}
    qn_performance, _ = apply_qn_edit(
        qn, trace, SplitCenter("ProductCatalog", (("FilmCatalog", 0.8), ("BookCatalog", 0.2))), frozen
    )
    r_soft = solve_exact_mva(qn_software)
    r_perf = solve_exact_mva(qn_performance)
    worst = 0.0
    for cid in r_soft.throughput:
        worst = max(worst, abs(r_soft.throughput[cid] - r_perf.throughput[cid]) / r_perf.throughput[cid])
    for k in r_soft.utilization:
        worst = max(worst, abs(r_soft.utilization[k] - r_perf.utilization[k]) / max(r_perf.utilization[k], 1e-12))
    record(
        "two-path equivalence: software split + forward == QN split (<=1e-9)",
        worst <= 1e-9,
        f"worst rel diff {worst:.2e}",
    )


def test_narrative_reproduction(ecs):
    cfg = DetectionConfig()
    qn_a, trace_a = forward(ecs)
    res_a = solve_exact_mva(qn_a)

    def violated_classes(res):
        return {c for c in res.class_ids if res.server_side_response[c] > 4.0}

    def violated_centers(res):
        return {k for k, u in res.utilization.items() if u > 0.90}

    stage_a = (
        violated_classes(res_a) == {"MakePurchase"}
        and violated_centers(res_a) == {"ProductCatalog", "Database"}
        and 0.97 <= res_a.utilization["ProductCatalog"] < 1.0
        and 0.93 <= res_a.utilization["Database"] < 0.98
        and bottleneck(res_a) == "ProductCatalog"
    )

    blob_occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    model_b = solve_blob(ecs, blob_occ, SplitPlan("ProductCatalog", (("FilmCatalog", 0.8, None), ("BookCatalog", 0.2, None))))
    res_b = solve_exact_mva(forward(model_b)[0])
    stage_b = (
        "MakePurchase" not in violated_classes(res_b)
        and "Register" in violated_classes(res_b)
    )

    est_occ = AntipatternOccurrence(kind="est", subject=("Register", "UserController", "Database"))
    model_c = solve_est(model_b, est_occ, FacadePlan("Register", "UserController", "Database"), cfg)
    res_c = solve_exact_mva(forward(model_c)[0])
    stage_c = violated_classes(res_c) == set()

    frozen = {c.id: c.frozen for c in ecs.components}
    qn_d, trace_d = apply_qn_edit(
        qn_a, trace_a, SplitCenter("ProductCatalog", (("FilmCatalog", 0.8), ("BookCatalog", 0.2))), frozen
    )
    qn_d, trace_d = apply_qn_edit(
        qn_d, trace_d, SplitCenter("FilmCatalog", (("FilmCatalog1", 0.5), ("FilmCatalog2", 0.5))), frozen
    )
    res_d = solve_exact_mva(qn_d)
    stage_d = violated_centers(res_d) == {"Database"}

    record(
        "narrative: (a) initial violations/bottleneck (b) blob split flips (c) facade clears R1 (d) film split leaves Database sole R2 violator",
        stage_a and stage_b and stage_c and stage_d,
        f"a={stage_a} b={stage_b} c={stage_c} d={stage_d}",
    )


def test_commutativity_of_independent_actions(ecs):
    session = Session(ecs)
    blob = SoftwareAction(SplitPlan("ProductCatalog", (("FilmCatalog", 0.8, None), ("BookCatalog", 0.2, None))))
    est = SoftwareAction(FacadePlan("Register", "UserController", "Database"))
    ab = session.expand(session.expand(session.root_id, blob).id, est)
    ba = session.expand(session.expand(session.root_id, est).id, blob)
    record(
        "commutativity: blob-then-facade equals facade-then-blob structurally",
        save_model(ab.model) == save_model(ba.model),
    )


def test_frozen_element_enforced_everywhere(ecs, tmp_path):
    import json

    from fastapi.testclient import TestClient

    from spe_workbench.api import create_app
    from spe_workbench.cli import main
    from spe_workbench.fixtures import ecs_bytes
    from spe_workbench.modelio import parse_json_bytes

    # direct QN edit
    qn, trace = forward(ecs)
    frozen = {c.id: c.frozen for c in ecs.components}
    try:
        apply_qn_edit(qn, trace, SplitCenter("Database", (("D1", 0.5), ("D2", 0.5))), frozen)
        qn_edit_blocked = False
    except FrozenElementError:
        qn_edit_blocked = True

    # session pathways
    session = Session(ecs)
    try:
        session.expand(
            session.root_id,
            SoftwareAction(SplitPlan("Database", (("D1", 0.5, None), ("D2", 0.5, None)))),
        )
        session_blocked = False
    except FrozenElementError:
        session_blocked = True

    # CLI pathway
    model_path = tmp_path / "ecs.json"
    model_path.write_bytes(ecs_bytes())
    action_path = tmp_path / "action.json"
    action_path.write_text(json.dumps({
        "type": "blobSplit",
        "subject": "Database",
        "parts": [
            {"name": "D1", "probability": 0.5, "operations": None},
            {"name": "D2", "probability": 0.5, "operations": None},
        ],
    }))
    cli_blocked = main(["refactor", "--model", str(model_path), "--action", str(action_path)]) == 1

    # API pathway
    client = TestClient(create_app())
    model_id = client.post("/api/v1/models", json=parse_json_bytes(ecs_bytes())).json()["id"]
    session_id = client.post("/api/v1/sessions", json={"modelId": model_id}).json()["id"]
    root = client.get(f"/api/v1/sessions/{session_id}/tree").json()["rootId"]
    response = client.post(
        f"/api/v1/sessions/{session_id}/nodes/{root}/expand",
        json={"action": {"type": "qnEdits", "edits": [{
            "kind": "splitCenter", "center": "Database",
            "parts": [{"id": "D1", "probability": 0.5}, {"id": "D2", "probability": 0.5}],
        }]}},
    )
    api_blocked = response.status_code == 409

    record(
        "frozen Database rejected on every pathway (QN edit, session, CLI, API)",
        qn_edit_blocked and session_blocked and cli_blocked and api_blocked,
        f"qn={qn_edit_blocked} session={session_blocked} cli={cli_blocked} api={api_blocked}",
    )
