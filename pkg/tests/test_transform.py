from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spe_workbench.antipatterns import AntipatternOccurrence, SplitPlan, solve_blob
from spe_workbench.errors import (
    BackwardUnsupportedEditError,
    BadProbabilitiesError,
    FrozenElementError,
    InvalidModelError,
    MissingDemandError,
    NoClientComponentError,
)
from spe_workbench.model import Component, Loop, Message, Scenario, validate_model
from spe_workbench.mva import solve_exact_mva
from spe_workbench.qn import DELAY, QUEUEING_PS, QnCenter, QnModel
from spe_workbench.transform import (
    ChangeDemand,
    ChangeRouting,
    ChangeThinkTime,
    SplitCenter,
    apply_qn_edit,
    backward,
    forward,
    qn_equal,
)


def frozen_map(model):
    return {c.id: c.frozen for c in model.components}


def test_forward_ecs_shape(ecs):
    qn, trace = forward(ecs)
    delays = [k for k in qn.centers if k.kind == DELAY]
    ps = [k for k in qn.centers if k.kind == QUEUEING_PS]
    assert len(delays) == 1 and delays[0].id == "Customer"
    assert len(ps) == 4
    populations = sorted(c.population for c in qn.classes)
    assert populations == [50, 150, 300]
    think = {c.think_time for c in qn.classes}
    assert think == {15.0}
    assert trace.source_version == ecs.model_version
    assert not trace.journal


def test_forward_demand_aggregation(ecs):
    qn, _ = forward(ecs)
    register_db = qn.demand_of("Database", "Register")
    per_call = ecs.demand_for("Database", "insertUserRecord").service_time
    assert register_db == pytest.approx(8 * per_call, rel=1e-12)


def test_forward_requires_demand_annotations(ecs):
    stripped = replace(ecs, demands=tuple(d for d in ecs.demands if d.operation != "loadProduct"))
    with pytest.raises(MissingDemandError):
        forward(stripped)


def test_forward_requires_client(toy_model):
    no_client = replace(
        toy_model,
        components=tuple(
            replace(c, provided=("IServer",) if c.id == "client" else c.provided)
            for c in toy_model.components
        ),
    )
    with pytest.raises((NoClientComponentError, InvalidModelError)):
        forward(no_client)


def test_forward_rejects_invalid_model(toy_model):
    bad = replace(toy_model, scenarios=(Scenario("main", "main", "ghost", toy_model.scenarios[0].body),))
    with pytest.raises(InvalidModelError):
        forward(bad)


def test_scenario_without_demand_fails_downstream(toy_model):
    # A scenario whose body never sends a message yields an all-zero demand row.
    lazy = replace(
        toy_model,
        scenarios=toy_model.scenarios + (Scenario("idle", "idle", "users", (Loop(2.0, ()),)),),
    )
    qn, _ = forward(lazy)
    with pytest.raises(InvalidModelError):
        solve_exact_mva(qn)


def test_alt_weighted_demand(toy_model):
    from spe_workbench.model import Alt

    branched = replace(
        toy_model,
        components=toy_model.components
        + (Component("server2", "server2", provided=("IServer2",), required=()),),
        interfaces=toy_model.interfaces
        + (replace(toy_model.interfaces[0], id="IServer2", operations=(replace(toy_model.interfaces[0].operations[0], id="handle2"),)),),
        scenarios=(
            Scenario(
                "main", "main", "users",
                (
                    Alt(
                        branches=(
                            (0.8, (Message("client", "server", "handle"), Message("client", "server", "handle"))),
                            (0.2, (Message("client", "server2", "handle2"),)),
                        )
                    ),
                ),
            ),
        ),
        demands=toy_model.demands + (type(toy_model.demands[0])("server2", "handle2", 0.3),),
    )
    qn, _ = forward(branched)
    assert qn.demand_of("server", "main") == pytest.approx(0.8 * 2 * 0.5, rel=1e-12)
    assert qn.demand_of("server2", "main") == pytest.approx(0.2 * 0.3, rel=1e-12)


def test_split_center_adjusts_demands(ecs):
    qn, trace = forward(ecs)
    base = qn.demand_of("ProductCatalog", "MakePurchase")
    qn2, trace2 = apply_qn_edit(
        qn, trace, SplitCenter("ProductCatalog", (("FilmCatalog", 0.8), ("BookCatalog", 0.2))), frozen_map(ecs)
    )
    assert qn2.demand_of("FilmCatalog", "MakePurchase") == pytest.approx(0.8 * base, rel=1e-12)
    assert qn2.demand_of("BookCatalog", "MakePurchase") == pytest.approx(0.2 * base, rel=1e-12)
    assert "ProductCatalog" not in qn2.center_ids()
    assert trace2.journal and isinstance(trace2.journal[0], SplitCenter)

    film = qn2.demand_of("FilmCatalog", "BrowseCatalog")
    qn3, _ = apply_qn_edit(
        qn2, trace2, SplitCenter("FilmCatalog", (("FilmCatalog1", 0.5), ("FilmCatalog2", 0.5))), frozen_map(ecs)
    )
    assert qn3.demand_of("FilmCatalog1", "BrowseCatalog") == pytest.approx(0.5 * film, rel=1e-12)


def test_split_conserves_demand(ecs):
    qn, trace = forward(ecs)
    base = {c.id: qn.demand_of("ProductCatalog", c.id) for c in qn.classes}
    qn2, _ = apply_qn_edit(
        qn, trace, SplitCenter("ProductCatalog", (("A", 0.37), ("B", 0.41), ("C", 0.22))), frozen_map(ecs)
    )
    for cid, value in base.items():
        total = sum(qn2.demand_of(p, cid) for p in ("A", "B", "C"))
        assert abs(total - value) <= 1e-12


def test_split_frozen_center_rejected(ecs):
    qn, trace = forward(ecs)
    with pytest.raises(FrozenElementError):
        apply_qn_edit(qn, trace, SplitCenter("Database", (("D1", 0.5), ("D2", 0.5))), frozen_map(ecs))


def test_change_demand_frozen_center_rejected(ecs):
    qn, trace = forward(ecs)
    with pytest.raises(FrozenElementError):
        apply_qn_edit(qn, trace, ChangeDemand("Database", "Register", 0.01), frozen_map(ecs))


def test_bad_probabilities_rejected(ecs):
    qn, trace = forward(ecs)
    with pytest.raises(BadProbabilitiesError):
        apply_qn_edit(qn, trace, SplitCenter("ProductCatalog", (("A", 0.8), ("B", 0.3))), frozen_map(ecs))
    with pytest.raises(BadProbabilitiesError):
        apply_qn_edit(qn, trace, SplitCenter("ProductCatalog", (("A", 1.2), ("B", -0.2))), frozen_map(ecs))


def test_backward_without_edits_is_identity(ecs):
    qn, trace = forward(ecs)
    assert backward(qn, trace, ecs) is ecs


def test_backward_film_split(ecs):
    qn, trace = forward(ecs)
    frozen = frozen_map(ecs)
    qn, trace = apply_qn_edit(qn, trace, SplitCenter("ProductCatalog", (("FilmCatalog", 0.8), ("BookCatalog", 0.2))), frozen)
    qn, trace = apply_qn_edit(qn, trace, SplitCenter("FilmCatalog", (("FilmCatalog1", 0.5), ("FilmCatalog2", 0.5))), frozen)
    model = backward(qn, trace, ecs)
    ids = {c.id for c in model.components}
    assert {"FilmCatalog1", "FilmCatalog2", "BookCatalog"} <= ids
    assert "ProductCatalog" not in ids and "FilmCatalog" not in ids
    assert validate_model(model).ok
    # round-trip 2: forward of the backward image equals the edited QN
    qn_again, _ = forward(model)
    assert qn_equal(qn, qn_again)


def test_backward_rejects_untraced_center(ecs):
    qn, trace = forward(ecs)
    hacked = QnModel(
        classes=qn.classes,
        centers=qn.centers + (QnCenter("Rogue", QUEUEING_PS),),
        demand=qn.demand + (tuple(0.01 for _ in qn.classes),),
    )
    with pytest.raises(BackwardUnsupportedEditError):
        backward(hacked, trace, ecs)


def test_backward_rejects_stale_version(ecs):
    qn, trace = forward(ecs)
    with pytest.raises(BackwardUnsupportedEditError):
        backward(qn, trace, ecs.bump_version())


def test_backward_change_think_time(ecs):
    qn, trace = forward(ecs)
    qn2, trace2 = apply_qn_edit(qn, trace, ChangeThinkTime("Register", 20.0), frozen_map(ecs))
    model = backward(qn2, trace2, ecs)
    assert model.workload("registerUsers").think_time == 20.0
    qn_again, _ = forward(model)
    assert qn_equal(qn2, qn_again)


def test_backward_change_demand_rescales_annotations(ecs):
    qn, trace = forward(ecs)
    old = qn.demand_of("UserController", "Register")
    qn2, trace2 = apply_qn_edit(qn, trace, ChangeDemand("UserController", "Register", old * 0.5), frozen_map(ecs))
    model = backward(qn2, trace2, ecs)
    assert model.demand_for("UserController", "register").service_time == pytest.approx(
        ecs.demand_for("UserController", "register").service_time * 0.5, rel=1e-12
    )
    qn_again, _ = forward(model)
    assert qn_equal(qn2, qn_again)


def test_backward_change_demand_shared_ops_unsupported(ecs):
    # CatalogController's placeOrder serves MakePurchase only, but Database ops
    # shared across scenarios must refuse a per-class rescale.
    qn, trace = forward(ecs)
    old = qn.demand_of("CatalogController", "BrowseCatalog")
    # browseCatalog op is exclusive to BrowseCatalog: allowed.
    qn2, trace2 = apply_qn_edit(qn, trace, ChangeDemand("CatalogController", "BrowseCatalog", old * 2), frozen_map(ecs))
    assert backward(qn2, trace2, ecs)


def test_backward_change_routing(ecs):
    qn, trace = forward(ecs)
    frozen = frozen_map(ecs)
    qn, trace = apply_qn_edit(qn, trace, SplitCenter("ProductCatalog", (("FilmCatalog", 0.8), ("BookCatalog", 0.2))), frozen)
    catalog_total = qn.demand_of("FilmCatalog", "BrowseCatalog") + qn.demand_of("BookCatalog", "BrowseCatalog")
    qn, trace = apply_qn_edit(
        qn, trace, ChangeRouting("ProductCatalog", ("FilmCatalog", "BookCatalog"), (0.6, 0.4)), frozen
    )
    assert qn.demand_of("FilmCatalog", "BrowseCatalog") == pytest.approx(0.6 * catalog_total, rel=1e-9)
    model = backward(qn, trace, ecs)
    qn_again, _ = forward(model)
    assert qn_equal(qn, qn_again)


def test_two_path_equivalence(ecs):
    # software path: split the component, then forward
    occ = AntipatternOccurrence(kind="blob", subject="ProductCatalog")
    plan = SplitPlan("ProductCatalog", (("FilmCatalog", 0.8, None), ("BookCatalog", 0.2, None)))
    software = solve_blob(ecs, occ, plan)
    qn_sw, _ = forward(software)
    # performance path: forward, then split the center
    qn, trace = forward(ecs)
    qn_perf, _ = apply_qn_edit(
        qn, trace, SplitCenter("ProductCatalog", (("FilmCatalog", 0.8), ("BookCatalog", 0.2))), frozen_map(ecs)
    )
    assert qn_equal(qn_sw, qn_perf, tol=1e-12)
    r_sw = solve_exact_mva(qn_sw)
    r_perf = solve_exact_mva(qn_perf)
    for cid in r_sw.throughput:
        assert r_sw.throughput[cid] == pytest.approx(r_perf.throughput[cid], rel=1e-9)
    for k in r_sw.utilization:
        assert r_sw.utilization[k] == pytest.approx(r_perf.utilization[k], rel=1e-9)


@given(
    p=st.floats(min_value=0.01, max_value=0.99),
    parts=st.integers(min_value=2, max_value=4),
)
@settings(max_examples=25, deadline=None)
def test_split_demand_conservation_property(ecs, p, parts):
    qn, trace = forward(ecs)
    if parts == 2:
        probs = [p, 1.0 - p]
    else:
        rest = (1.0 - p) / (parts - 1)
        probs = [p] + [rest] * (parts - 1)
    spec = tuple((f"P{i}", probs[i]) for i in range(parts))
    base = {c.id: qn.demand_of("ProductCatalog", c.id) for c in qn.classes}
    qn2, _ = apply_qn_edit(qn, trace, SplitCenter("ProductCatalog", spec), frozen_map(ecs))
    for cid, value in base.items():
        total = sum(qn2.demand_of(f"P{i}", cid) for i in range(parts))
        assert abs(total - value) <= 1e-12
