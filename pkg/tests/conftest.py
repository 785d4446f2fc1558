import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from spe_workbench.fixtures import ecs_model
from spe_workbench.model import (
    Component,
    DemandAnnotation,
    Interface,
    Message,
    OperationDef,
    ResponseTimeReq,
    Scenario,
    SoftwareModel,
    UtilizationReq,
    WorkloadClass,
)


@pytest.fixture(scope="session")
def ecs() -> SoftwareModel:
    return ecs_model()


@pytest.fixture
def toy_model() -> SoftwareModel:
    """Two-component client/server model that is free of antipatterns."""
    return SoftwareModel(
        components=(
            Component("client", "client", provided=(), required=("IServer",)),
            Component("server", "server", provided=("IServer",), required=()),
        ),
        interfaces=(Interface("IServer", "IServer", (OperationDef("handle", "handle"),)),),
        scenarios=(
            Scenario("main", "main", "users", (Message("client", "server", "handle"),)),
        ),
        workloads=(WorkloadClass("users", "users", 4, 2.0),),
        demands=(DemandAnnotation("server", "handle", 0.5),),
        requirements=(ResponseTimeReq("users", 4.0), UtilizationReq(0.95)),
    )
