import json
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spe_workbench.errors import ParseError, SchemaError
from spe_workbench.model import (
    Alt,
    Loop,
    Message,
    Scenario,
    connection_count,
    client_component,
    expected_invocations,
    message_count_between,
    validate_model,
)
from spe_workbench.modelio import load_model, save_model


def test_ecs_fixture_validates_clean(ecs):
    assert validate_model(ecs).ok


def test_ecs_fixture_shape(ecs):
    servers = [c for c in ecs.components if c.provided]
    assert len(servers) == 4
    client = client_component(ecs)
    assert client is not None and client.id == "Customer"
    assert ecs.component("Database").frozen


def test_alt_probabilities_must_sum_to_one(toy_model):
    bad = replace(
        toy_model,
        scenarios=(
            Scenario(
                "main",
                "main",
                "users",
                (
                    Alt(
                        branches=(
                            (0.8, (Message("client", "server", "handle"),)),
                            (0.3, (Message("client", "server", "handle"),)),
                        )
                    ),
                ),
            ),
        ),
    )
    assert "ALT_PROB_SUM" in validate_model(bad).codes()


def test_dangling_component_reference(toy_model):
    bad = replace(
        toy_model,
        scenarios=(
            Scenario("main", "main", "users", (Message("client", "ghost", "handle"),)),
        ),
    )
    assert "DANGLING_REF" in validate_model(bad).codes()


def test_loop_count_must_be_positive(toy_model):
    bad = replace(
        toy_model,
        scenarios=(
            Scenario(
                "main", "main", "users",
                (Loop(0.0, (Message("client", "server", "handle"),)),),
            ),
        ),
    )
    assert "LOOP_COUNT" in validate_model(bad).codes()


def test_empty_scenario_flagged(toy_model):
    bad = replace(toy_model, scenarios=(Scenario("main", "main", "users", ()),))
    assert "EMPTY_SCENARIO" in validate_model(bad).codes()


def test_duplicate_demand_flagged(toy_model):
    bad = replace(toy_model, demands=toy_model.demands * 2)
    assert "DUP_DEMAND" in validate_model(bad).codes()


def test_empty_document_is_parse_error():
    with pytest.raises(ParseError):
        load_model(b"")


def test_parse_error_carries_position():
    try:
        load_model(b'{"version": }')
    except ParseError as exc:
        assert exc.line == 1 and exc.column is not None
    else:
        pytest.fail("expected ParseError")


def test_schema_error_carries_path():
    doc = {"version": "spe-model/1", "components": [{"name": "x"}], "interfaces": [],
           "scenarios": [], "workloads": [], "demands": [], "requirements": []}
    with pytest.raises(SchemaError) as err:
        load_model(json.dumps(doc).encode())
    assert "/components/0" in str(err.value)


def test_wrong_schema_version_rejected():
    doc = {"version": "spe-model/2", "components": [], "interfaces": [],
           "scenarios": [], "workloads": [], "demands": [], "requirements": []}
    with pytest.raises(SchemaError):
        load_model(json.dumps(doc).encode())


def test_save_load_round_trip_byte_identical(ecs, toy_model):
    for model in (ecs, toy_model):
        data = save_model(model)
        assert save_model(load_model(data)) == data


def test_load_save_identity_on_models(ecs):
    assert load_model(save_model(ecs)) == ecs


def test_linear_scenario_counts():
    body = tuple(Message("a", "db", f"op{i % 2}") for i in range(3))
    scenario = Scenario("s", "s", "w", body)
    counts = expected_invocations(scenario)
    assert sum(v for (target, _), v in counts.items() if target == "db") == 3


def test_alt_branch_weighting_80_20():
    scenario = Scenario(
        "s", "s", "w",
        (
            Alt(
                branches=(
                    (0.8, (Message("cc", "film", "get"),)),
                    (0.2, (Message("cc", "book", "get"),)),
                )
            ),
        ),
    )
    counts = expected_invocations(scenario)
    assert counts[("film", "get")] == pytest.approx(0.8)
    assert counts[("book", "get")] == pytest.approx(0.2)


def test_loop_mean_weighting():
    scenario = Scenario("s", "s", "w", (Loop(2.5, (Message("a", "b", "op"),)),))
    assert expected_invocations(scenario)[("b", "op")] == pytest.approx(2.5)


def test_register_scenario_reaches_est_threshold(ecs):
    register = ecs.scenario("Register")
    assert message_count_between(register, "UserController", "Database") >= 5


def test_message_count_zero_for_unconnected_pair(ecs):
    assert message_count_between(ecs.scenario("Register"), "Customer", "Database") == 0.0


def test_message_count_under_alt():
    scenario = Scenario(
        "s", "s", "w",
        (
            Alt(
                branches=(
                    (0.5, (Message("a", "b", "op"), Message("a", "b", "op"))),
                    (0.5, ()),
                )
            ),
        ),
    )
    assert message_count_between(scenario, "a", "b") == pytest.approx(1.0)


def test_connection_count_ecs(ecs):
    assert connection_count(ecs, "ProductCatalog") == 3
    assert connection_count(ecs, "CatalogController") == 5


@given(p=st.floats(min_value=0.05, max_value=0.95), count=st.floats(min_value=0.1, max_value=5.0))
@settings(max_examples=40, deadline=None)
def test_alt_wrapping_scales_counts_linearly(p, count):
    inner = (Message("x", "y", "op"), Loop(count, (Message("x", "z", "op2"),)))
    plain = Scenario("s", "s", "w", inner)
    wrapped = Scenario("s", "s", "w", (Alt(branches=((p, inner), (1.0 - p, ()))),))
    base = expected_invocations(plain)
    scaled = expected_invocations(wrapped)
    assert set(base) == set(scaled)
    for key, value in base.items():
        assert scaled[key] == pytest.approx(p * value, rel=1e-12)


def test_alpha_rename_preserves_counts(ecs):
    mapping = {c.id: f"{c.id}X" for c in ecs.components}

    def rename_step(step):
        if isinstance(step, Message):
            return Message(mapping[step.source], mapping[step.target], step.operation)
        if isinstance(step, Alt):
            return Alt(tuple((p, tuple(rename_step(s) for s in b)) for p, b in step.branches))
        return Loop(step.count, tuple(rename_step(s) for s in step.body))

    for scenario in ecs.scenarios:
        renamed = Scenario(scenario.id, scenario.name, scenario.workload_class,
                           tuple(rename_step(s) for s in scenario.body))
        base = expected_invocations(scenario)
        after = expected_invocations(renamed)
        assert after == {(mapping[t], op): v for (t, op), v in base.items()}
