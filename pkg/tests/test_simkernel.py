import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from avtest.planners import make_planner
from avtest.scenario import AgentKind, AgentSpec, TriggeredWaypoints, build_scenario
from avtest.simkernel import (
    AgentState, EgoCommand, EgoDynamics, SimulationError, SimulationLimits, Verdict, check_triggers,
    curve_speed_cap, detect_collision, initial_state, route_path, run_simulation, step_agents,
)
from conftest import straight_world, walker


def _with_ego_speed(state, v):
    agents = list(state.agents)
    agents[state.ego_index] = replace(agents[state.ego_index], speed=v)
    return replace(state, agents=tuple(agents))


def test_one_braking_step_from_cruise():
    inst = straight_world()
    state = _with_ego_speed(initial_state(inst), 10.0)
    nxt = step_agents(state, inst, EgoCommand(0.0), 0.05)
    assert nxt.ego.speed == pytest.approx(9.7)
    # trapezoid: (10 + 9.7) / 2 * 0.05
    assert nxt.ego.pose[0] == pytest.approx(0.4925)
    assert nxt.time == pytest.approx(0.05) and nxt.step == 1


def test_one_accelerating_step_from_rest():
    inst = straight_world()
    nxt = step_agents(initial_state(inst), inst, EgoCommand(10.0), 0.05)
    assert nxt.ego.speed == pytest.approx(0.1)


def test_triggered_pedestrian_advances_speed_times_dt():
    inst = straight_world([walker(trigger=1000.0)])
    state = check_triggers(initial_state(inst), inst)
    assert state.agent("ped").activated
    nxt = step_agents(state, inst, EgoCommand(0.0), 0.05)
    ped = nxt.agent("ped")
    assert ped.pose[1] - (-6.0) == pytest.approx(0.1)
    assert ped.pose[0] == 30.0


def test_untriggered_agent_stays_put():
    inst = straight_world([walker(trigger=5.0)])
    state = initial_state(inst)
    for _ in range(10):
        state = check_triggers(step_agents(state, inst, EgoCommand(0.0), 0.05), inst)
    assert state.agent("ped").pose == (30.0, -6.0, math.pi / 2)
    assert not state.agent("ped").activated


def test_agent_stops_at_last_waypoint():
    inst = straight_world([walker(speed=5.0, trigger=1000.0)])
    state = check_triggers(initial_state(inst), inst)
    for _ in range(100):
        state = step_agents(state, inst, EgoCommand(0.0), 0.05)
    ped = state.agent("ped")
    assert ped.pose[:2] == (30.0, 6.0)
    assert ped.speed == 0.0


@pytest.mark.parametrize("gap, fires", [(9.999, True), (10.0, True), (10.001, False)])
def test_trigger_boundary_is_inclusive(gap, fires):
    inst = straight_world([walker(pose=(gap, -1.75, math.pi / 2), to=(gap, 6.0), trigger=10.0)])
    assert check_triggers(initial_state(inst), inst).agent("ped").activated is fires


@settings(max_examples=150)
@given(st.floats(1.0, 40.0), st.lists(st.floats(-30.0, 80.0), min_size=1, max_size=25))
def test_trigger_latches(trigger, ego_xs):
    """Activated iff the ego was within range at some checked instant, and never undone."""
    inst = straight_world([walker(pose=(25.0, -6.0, math.pi / 2), to=(25.0, -6.0), trigger=trigger)])
    state = initial_state(inst)
    ever_close = False
    for x in ego_xs:
        agents = list(state.agents)
        agents[0] = replace(agents[0], pose=(x, -1.75, 0.0))
        state = check_triggers(replace(state, agents=tuple(agents)), inst)
        ever_close |= math.hypot(25.0 - x, -6.0 + 1.75) <= trigger
        assert state.agent("ped").activated == ever_close


def test_blind_class_a_collision_time_matches_closed_form():
    """Blind ego, class A {pedSpeed 2, pedTrigger 10, numberOfCar 10, pedLocation 3}.

    Ego from rest at 2 m/s^2 to 10 m/s: x(t) = t^2 up to t = 5, then 25 + 10 (t - 5).
    ped_1 stands at (52, -4.75); it triggers once (52 - x)^2 + 3^2 <= 100, i.e.
    x >= 52 - sqrt(91) = 42.4605, first sampled at t = 6.75. It then walks
    north at 2 m/s and its top edge meets the ego's right side (y = -2.7)
    after 0.9 s, at t = 7.65, when the ego spans x in [49.15, 53.85], which
    covers the pedestrian's [51.75, 52.25].
    """
    inst = build_scenario("A", {"pedSpeed": 2, "pedTrigger": 10, "numberOfCar": 10, "pedLocation": 3})
    out = run_simulation(inst, make_planner("blind"))
    assert out.verdict is Verdict.COLLISION
    assert out.collision.agents == ("ego", "ped_1")
    # Contact is exact at t = 7.65; float accumulation may defer it by one step.
    assert 7.65 - 1e-9 <= out.collision.time <= 7.70 + 1e-9
    assert not out.destination_reached


def test_collision_detail_position_is_midpoint():
    inst = build_scenario("A", {"pedSpeed": 2, "pedTrigger": 10, "numberOfCar": 10, "pedLocation": 3})
    out = run_simulation(inst, make_planner("blind"))
    ego = [r for r in out.trajectory if r[1] == "ego" and r[0] == out.sim_time][0]
    ped = [r for r in out.trajectory if r[1] == "ped_1" and r[0] == out.sim_time][0]
    assert out.collision.position == pytest.approx(((ego[2] + ped[2]) / 2, (ego[3] + ped[3]) / 2))


def test_safe_run_reaches_destination():
    out = run_simulation(straight_world(dest_x=60.0), make_planner("blind"))
    assert out.verdict is Verdict.SAFE and out.destination_reached
    assert out.collision is None


def test_blocked_oracle_run_times_out():
    inst = build_scenario("C", {"oncomingSpeed": 4, "spawnDistance": 30, "oncomingTrigger": 10})
    out = run_simulation(inst, make_planner("oracle"), SimulationLimits(max_sim_time=10.0))
    assert out.verdict is Verdict.TIMEOUT
    assert out.sim_time == pytest.approx(10.0)
    assert out.steps == 200


def test_overlap_at_start_is_an_immediate_collision():
    blocker = AgentSpec("blocker", AgentKind.NPC, (2.0, -1.75, 0.0), (4.7, 1.9))
    out = run_simulation(straight_world([blocker]), make_planner("blind"))
    assert out.verdict is Verdict.COLLISION and out.collision.time == 0.0


@pytest.mark.parametrize("target", [float("nan"), float("inf"), -1.0])
def test_invalid_command_raises(target):
    with pytest.raises(SimulationError):
        run_simulation(straight_world(), lambda s, i: EgoCommand(target))


def test_plain_callable_planner_is_accepted():
    out = run_simulation(straight_world(dest_x=30.0), lambda s, i: EgoCommand(10.0))
    assert out.verdict is Verdict.SAFE


def test_limits_validation():
    with pytest.raises(ValueError):
        SimulationLimits(dt=0.0)
    with pytest.raises(ValueError):
        SimulationLimits(dt=0.1, max_sim_time=0.05)
    with pytest.raises(ValueError):
        EgoDynamics(max_decel=-1.0)


def test_curve_speed_cap_on_left_turn():
    dyn = EgoDynamics()
    route = build_scenario("B", {"rain": 0, "fog": 0, "timeOfDay": 12, "pedSpeed": 6,
                                 "pedTrigger": 14, "pedDistanceFromIntersection": 6}).ego_route
    path = route_path(route)
    (s0, s1, kappa), = path.curvature_segments()
    v_turn = math.sqrt(2.5 * 5.25)
    assert curve_speed_cap(path, 0.5 * (s0 + s1), dyn) == pytest.approx(v_turn)
    assert curve_speed_cap(path, s0 - 5.0, dyn) == pytest.approx(math.sqrt(v_turn ** 2 + 2 * 3 * 5))
    assert curve_speed_cap(path, s1 + 1.0, dyn) == dyn.cruise_speed


def test_run_is_deterministic():
    inst = build_scenario("D", {"leftSpeed": 5, "leftTrigger": 55, "rightSpeed": 5,
                                "rightTrigger": 15, "turnDirection": "Right"})
    a = run_simulation(inst, make_planner("limited"))
    b = run_simulation(inst, make_planner("limited"))
    assert a.trajectory == b.trajectory and a.verdict == b.verdict


def test_trajectory_csv():
    out = run_simulation(straight_world(dest_x=5.0), make_planner("blind"))
    lines = out.trajectory_csv().splitlines()
    assert lines[0] == "time,agentId,x,y,heading,speed"
    assert len(lines) == 1 + out.steps + 1


@settings(max_examples=100)
@given(st.lists(st.floats(0.0, 30.0), min_size=5, max_size=60))
def test_ego_speed_and_acceleration_stay_in_bounds(targets):
    dyn = EgoDynamics()
    inst = straight_world()
    state = initial_state(inst)
    for t in targets:
        nxt = step_agents(state, inst, EgoCommand(t), 0.05, dyn)
        assert 0.0 <= nxt.ego.speed <= dyn.cruise_speed
        dv = nxt.ego.speed - state.ego.speed
        assert -dyn.max_decel * 0.05 - 1e-12 <= dv <= dyn.max_accel * 0.05 + 1e-12
        state = nxt


@settings(max_examples=100)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-math.pi, math.pi),
       st.floats(-10, 10), st.floats(-10, 10), st.floats(-math.pi, math.pi))
def test_detect_collision_is_symmetric(x1, y1, h1, x2, y2, h2):
    a, b = AgentState("a", (x1, y1, h1)), AgentState("b", (x2, y2, h2))
    assert detect_collision(a, (4.7, 1.9), b, (0.5, 0.5)) == detect_collision(b, (0.5, 0.5), a, (4.7, 1.9))
