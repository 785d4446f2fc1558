from dataclasses import replace

import pytest

from spe_workbench.antipatterns import (
    AntipatternOccurrence,
    DetectionConfig,
    FacadePlan,
    SplitPlan,
    detect_blob,
    detect_est,
    occurrences_to_json,
    solve_blob,
    solve_est,
)
from spe_workbench.errors import (
    BadProbabilitiesError,
    FrozenElementError,
    NothingToBatchError,
    RefactoringError,
)
from spe_workbench.model import (
    Component,
    DemandAnnotation,
    Interface,
    Loop,
    Message,
    OperationDef,
    Scenario,
    expected_invocations,
    message_count_between,
    validate_model,
)
from spe_workbench.mva import solve_exact_mva
from spe_workbench.transform import forward


@pytest.fixture(scope="module")
def ecs_solution(ecs):
    qn, trace = forward(ecs)
    return solve_exact_mva(qn), trace


def test_blob_detection_flags_product_catalog(ecs, ecs_solution):
    result, trace = ecs_solution
    found = detect_blob(ecs, result, trace, DetectionConfig())
    assert [o.subject for o in found] == ["ProductCatalog"]
    evidence = found[0].evidence
    assert evidence["connections"] >= 3
    assert evidence["utilization"] >= 0.85
    assert found[0].candidate_plans


def test_blob_detection_never_flags_frozen(ecs, ecs_solution):
    result, trace = ecs_solution
    # Database exceeds the utilization threshold but is frozen.
    assert result.utilization["Database"] >= 0.85
    cfg = DetectionConfig(blob_min_utilization=0.5, blob_min_demand_share=0.05, blob_min_connections=1)
    found = detect_blob(ecs, result, trace, cfg)
    assert "Database" not in [o.subject for o in found]


def test_blob_detection_empty_on_toy(toy_model):
    qn, trace = forward(toy_model)
    result = solve_exact_mva(qn)
    assert detect_blob(toy_model, result, trace, DetectionConfig()) == []


def test_blob_detection_synthetic_hub():
    # hub provides three interfaces and requires two: five connector edges,
    # and it concentrates nearly all of the demand.
    interfaces = (
        Interface("IA", "IA", (OperationDef("a", "a"),)),
        Interface("IB", "IB", (OperationDef("b", "b"),)),
        Interface("IC", "IC", (OperationDef("c", "c"),)),
        Interface("ID", "ID", (OperationDef("d", "d"),)),
        Interface("IE", "IE", (OperationDef("e", "e"),)),
    )
    components = (
        Component("client", "client", provided=(), required=("IA", "IB", "IC")),
        Component("hub", "hub", provided=("IA", "IB", "IC"), required=("ID", "IE")),
        Component("d1", "d1", provided=("ID",), required=()),
        Component("d2", "d2", provided=("IE",), required=()),
    )
    scenarios = (
        Scenario("s", "s", "w", (
            Message("client", "hub", "a"),
            Message("client", "hub", "b"),
            Message("client", "hub", "c"),
            Message("hub", "d1", "d"),
            Message("hub", "d2", "e"),
        )),
    )
    model = __import__("spe_workbench.model", fromlist=["SoftwareModel"]).SoftwareModel(
        components=components,
        interfaces=interfaces,
        scenarios=scenarios,
        workloads=(__import__("spe_workbench.model", fromlist=["WorkloadClass"]).WorkloadClass("w", "w", 6, 1.0),),
        demands=(
            DemandAnnotation("hub", "a", 0.5),
            DemandAnnotation("hub", "b", 0.5),
            DemandAnnotation("hub", "c", 0.5),
            DemandAnnotation("d1", "d", 0.02),
            DemandAnnotation("d2", "e", 0.02),
        ),
    )
    assert validate_model(model).ok
    qn, trace = forward(model)
    result = solve_exact_mva(qn)
    found = detect_blob(model, result, trace, DetectionConfig(blob_min_connections=5))
    assert [o.subject for o in found] == ["hub"]
    assert found[0].evidence["demandShare"] >= 0.9


def test_est_detection_flags_register(ecs):
    found = detect_est(ecs, DetectionConfig())
    assert [o.subject for o in found] == [("Register", "UserController", "Database")]
    assert found[0].evidence["expectedMessages"] == pytest.approx(8.0)


def test_est_detection_empty_when_counts_low(toy_model):
    assert detect_est(toy_model, DetectionConfig()) == []


def test_est_threshold_inclusive(toy_model):
    looped = replace(
        toy_model,
        scenarios=(
            Scenario("main", "main", "users", (Loop(5.0, (Message("client", "server", "handle"),)),)),
        ),
    )
    found = detect_est(looped, DetectionConfig())
    assert [o.subject for o in found] == [("main", "client", "server")]


def test_est_detection_stable_after_unrelated_refactoring(ecs):
    cfg = DetectionConfig()
    before = detect_est(ecs, cfg)
    occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    plan = SplitPlan("ProductCatalog", (("FilmCatalog", 0.8, None), ("BookCatalog", 0.2, None)))
    after_model = solve_blob(ecs, occ, plan)
    after = detect_est(after_model, cfg)
    assert [o.subject for o in before] == [o.subject for o in after]
    assert before[0].evidence == after[0].evidence


def test_detection_is_deterministic(ecs, ecs_solution):
    result, trace = ecs_solution
    cfg = DetectionConfig()
    assert detect_blob(ecs, result, trace, cfg) == detect_blob(ecs, result, trace, cfg)
    assert detect_est(ecs, cfg) == detect_est(ecs, cfg)


def test_bad_thresholds_rejected(ecs):
    with pytest.raises(ValueError):
        detect_est(ecs, DetectionConfig(est_min_messages=0))


def test_solve_blob_paper_split(ecs):
    occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    plan = SplitPlan("ProductCatalog", (("FilmCatalog", 0.8, None), ("BookCatalog", 0.2, None)))
    model = solve_blob(ecs, occ, plan)
    assert validate_model(model).ok
    ids = {c.id for c in model.components}
    assert {"FilmCatalog", "BookCatalog"} <= ids and "ProductCatalog" not in ids
    # alternative fragments carry the probabilities into expected counts
    browse = model.scenario("BrowseCatalog")
    counts = expected_invocations(browse)
    film_ops = [v for (target, _), v in counts.items() if target == "FilmCatalog"]
    book_ops = [v for (target, _), v in counts.items() if target == "BookCatalog"]
    assert sum(film_ops) == pytest.approx(0.8)
    assert sum(book_ops) == pytest.approx(0.2)


def test_solve_blob_conserves_forwarded_demand(ecs):
    occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    plan = SplitPlan("ProductCatalog", (("FilmCatalog", 0.8, None), ("BookCatalog", 0.2, None)))
    model = solve_blob(ecs, occ, plan)
    qn_before, _ = forward(ecs)
    qn_after, _ = forward(model)
    for cls in qn_before.classes:
        before = sum(
            qn_before.demand_of(k.id, cls.id) for k in qn_before.centers if k.kind == "ps"
        )
        after = sum(
            qn_after.demand_of(k.id, cls.id) for k in qn_after.centers if k.kind == "ps"
        )
        assert after == pytest.approx(before, abs=1e-12)


def test_solve_blob_single_part_is_rename(ecs):
    occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    plan = SplitPlan("ProductCatalog", (("CatalogOnly", 1.0, None),))
    model = solve_blob(ecs, occ, plan)
    assert validate_model(model).ok
    qn_before, _ = forward(ecs)
    qn_after, _ = forward(model)
    assert qn_after.demand_of("CatalogOnly", "BrowseCatalog") == pytest.approx(
        qn_before.demand_of("ProductCatalog", "BrowseCatalog"), rel=1e-12
    )
    r_before = solve_exact_mva(qn_before)
    r_after = solve_exact_mva(qn_after)
    for cid in r_before.throughput:
        assert r_after.throughput[cid] == pytest.approx(r_before.throughput[cid], rel=1e-12)


def test_solve_blob_frozen_rejected(ecs):
    occ = AntipatternOccurrence(kind="blob", subject="Database")
    plan = SplitPlan("Database", (("D1", 0.5, None), ("D2", 0.5, None)))
    with pytest.raises(FrozenElementError):
        solve_blob(ecs, occ, plan)


def test_solve_blob_bad_probabilities(ecs):
    occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    plan = SplitPlan("ProductCatalog", (("A", 0.8, None), ("B", 0.1, None)))
    with pytest.raises(BadProbabilitiesError):
        solve_blob(ecs, occ, plan)


def test_solve_est_inserts_facade_chain(ecs):
    occ = AntipatternOccurrence(kind="est", subject=("Register", "UserController", "Database"))
    model = solve_est(ecs, occ, FacadePlan("Register", "UserController", "Database"), DetectionConfig())
    assert validate_model(model).ok
    register = model.scenario("Register")
    assert message_count_between(register, "UserController", "Database") == 0.0
    assert message_count_between(register, "UserController", "RemoteFacade") == 1.0
    assert message_count_between(register, "RemoteFacade", "LocalFacade") == 1.0
    assert message_count_between(register, "LocalFacade", "Database") == pytest.approx(8.0)
    ids = {c.id for c in model.components}
    assert {"RemoteFacade", "LocalFacade"} <= ids
    # facade demands come from configuration
    cfg = DetectionConfig()
    assert model.demand_for("RemoteFacade", "handle_RemoteFacade").service_time == cfg.est_remote_cost
    assert model.demand_for("LocalFacade", "dispatch_LocalFacade").service_time == cfg.facade_local_cost
    # batched local calls shed the remote overhead
    assert model.demand_for("Database", "insertUserRecord").service_time == pytest.approx(
        ecs.demand_for("Database", "insertUserRecord").service_time - cfg.est_remote_cost
    )


def test_solve_est_requires_two_messages(toy_model):
    occ = AntipatternOccurrence(kind="est", subject=("main", "client", "server"))
    with pytest.raises(NothingToBatchError):
        solve_est(toy_model, occ, FacadePlan("main", "client", "server"), DetectionConfig())


def test_solve_est_rejects_shared_batched_ops(ecs):
    shared = replace(
        ecs,
        scenarios=ecs.scenarios
        + (
            Scenario(
                "Audit", "Audit", "registerUsers",
                (Message("Customer", "UserController", "register"),
                 Message("UserController", "Database", "insertUserRecord")),
            ),
        ),
    )
    occ = AntipatternOccurrence(kind="est", subject=("Register", "UserController", "Database"))
    with pytest.raises(RefactoringError):
        solve_est(shared, occ, FacadePlan("Register", "UserController", "Database"), DetectionConfig())


def test_solve_est_overhead_must_not_exceed_call_cost(ecs):
    occ = AntipatternOccurrence(kind="est", subject=("Register", "UserController", "Database"))
    cfg = DetectionConfig(est_remote_cost=1.0)
    with pytest.raises(RefactoringError):
        solve_est(ecs, occ, FacadePlan("Register", "UserController", "Database"), cfg)


def test_blob_after_split_only_reflagged_when_metrics_exceed(ecs):
    cfg = DetectionConfig()
    occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    plan = SplitPlan("ProductCatalog", (("FilmCatalog", 0.5, None), ("BookCatalog", 0.5, None)))
    model = solve_blob(ecs, occ, plan)
    qn, trace = forward(model)
    result = solve_exact_mva(qn)
    found = detect_blob(model, result, trace, cfg)
    for o in found:
        assert (
            o.evidence["utilization"] >= cfg.blob_min_utilization
            or o.evidence["demandShare"] >= cfg.blob_min_demand_share
        )
        assert o.evidence["connections"] >= cfg.blob_min_connections


def test_occurrences_serialize(ecs, ecs_solution):
    result, trace = ecs_solution
    cfg = DetectionConfig()
    doc = occurrences_to_json(detect_blob(ecs, result, trace, cfg) + detect_est(ecs, cfg))
    assert doc["version"] == "spe-ap/1"
    kinds = [o["kind"] for o in doc["occurrences"]]
    assert kinds == ["blob", "est"]
