import math

import pytest
from hypothesis import HealthCheck, settings

from avtest.geometry import LinePiece
from avtest.scenario import (
    PEDESTRIAN_SIZE, VEHICLE_SIZE, AgentKind, AgentSpec, ClassId, EgoRoute, EnvironmentConditions,
    MapGeometry, RoadSegment, ScenarioInstance, TriggeredWaypoints, TurnDirection,
)

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def straight_world(others=(), ego_x=0.0, dest_x=200.0, env=None):
    """Ego on a long straight two-way road heading +x, plus the given agents."""
    ego = AgentSpec("ego", AgentKind.EGO, (ego_x, -1.75, 0.0), VEHICLE_SIZE)
    road = MapGeometry((RoadSegment("main", (-50.0, 0.0), (dest_x + 50.0, 0.0), shoulder=8.0),),
                       (), (("main", True),))
    route = EgoRoute(ego.pose, (dest_x, -1.75), TurnDirection.NONE,
                     (LinePiece((ego_x, -1.75), (dest_x, -1.75)),))
    return ScenarioInstance(ClassId.A, road, (ego, *others), env or EnvironmentConditions(), route)


def walker(agent_id="ped", pose=(30.0, -6.0, math.pi / 2), to=(30.0, 6.0), speed=2.0, trigger=10.0):
    return AgentSpec(agent_id, AgentKind.PEDESTRIAN, pose, PEDESTRIAN_SIZE,
                     behavior=TriggeredWaypoints((to,), speed, trigger))


@pytest.fixture
def world_factory():
    return straight_world


# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES = []


def report_criterion(label: str, ok: bool, detail: str = "") -> bool:
    line = f"ACCEPTANCE {label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
