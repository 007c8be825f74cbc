"""Fixed-timestep kinematic world simulation and the collision oracle."""

from __future__ import annotations

import csv
import functools
import io
import math
import time as _time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from .geometry import Path, Pose, obb_overlap
from .scenario import AgentKind, EgoRoute, ScenarioInstance, TriggeredWaypoints


class SimulationError(RuntimeError):
    """Raised when a run cannot continue (e.g. a non-finite planner command)."""


class Verdict(str, Enum):
    SAFE = "Safe"
    COLLISION = "Collision"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class EgoCommand:
    target_speed: float
    follow_route: bool = True


@dataclass(frozen=True)
class SimulationLimits:
    dt: float = 0.05
    max_sim_time: float = 60.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.max_sim_time >= self.dt:
            raise ValueError("maxSimTime must be >= dt")

    @property
    def max_steps(self) -> int:
        return int(math.floor(self.max_sim_time / self.dt + 1e-9))


@dataclass(frozen=True)
class EgoDynamics:
    cruise_speed: float = 10.0
    max_accel: float = 2.0
    max_decel: float = 6.0
    lateral_accel: float = 2.5
    curve_decel: float = 3.0
    arrival_tolerance: float = 2.0

    def __post_init__(self):
        for name in ("cruise_speed", "max_accel", "max_decel", "lateral_accel", "curve_decel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.curve_decel > self.max_decel:
            raise ValueError("curve_decel cannot exceed max_decel")


@dataclass(frozen=True)
class AgentState:
    id: str
    pose: Pose
    speed: float = 0.0
    activated: bool = False
    waypoint_index: int = 0
    progress: float = 0.0   # arc length along the ego route; ego only

    @property
    def velocity(self) -> Tuple[float, float]:
        return (self.speed * math.cos(self.pose[2]), self.speed * math.sin(self.pose[2]))


@dataclass(frozen=True)
class WorldState:
    time: float
    step: int
    agents: Tuple[AgentState, ...]
    ego_index: int
    ego_command_log: Tuple[Tuple[float, EgoCommand], ...] = ()

    @property
    def ego(self) -> AgentState:
        return self.agents[self.ego_index]

    def agent(self, agent_id: str) -> AgentState:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(agent_id)


@dataclass(frozen=True)
class CollisionDetail:
    agents: Tuple[str, str]
    time: float
    position: Tuple[float, float]

    def to_dict(self) -> Dict[str, Any]:
        return {"agents": list(self.agents), "time": self.time, "position": list(self.position)}


@dataclass
class SimulationOutcome:
    verdict: Verdict
    collision: Optional[CollisionDetail]
    destination_reached: bool
    sim_time: float
    steps: int
    trajectory: List[Tuple[float, str, float, float, float, float]] = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.COLLISION

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "agentId", "x", "y", "heading", "speed"])
        w.writerows(self.trajectory)
        return buf.getvalue()


@functools.lru_cache(maxsize=64)
def route_path(route: EgoRoute) -> Path:
    return route.path()


def initial_state(instance: ScenarioInstance) -> WorldState:
    agents = tuple(AgentState(a.id, tuple(a.pose)) for a in instance.agents)
    ego_index = next(i for i, a in enumerate(instance.agents) if a.kind is AgentKind.EGO)
    return WorldState(0.0, 0, agents, ego_index)


def check_triggers(state: WorldState, instance: ScenarioInstance) -> WorldState:
    """Latch every scripted agent whose trigger radius now contains the ego centre."""
    ex, ey = state.ego.pose[0], state.ego.pose[1]
    new = list(state.agents)
    changed = False
    for i, (spec, ag) in enumerate(zip(instance.agents, state.agents)):
        if ag.activated or not isinstance(spec.behavior, TriggeredWaypoints):
            continue
        if math.hypot(ag.pose[0] - ex, ag.pose[1] - ey) <= spec.behavior.trigger_distance:
            exhausted = ag.waypoint_index >= len(spec.behavior.waypoints)
            new[i] = replace(ag, activated=True, speed=0.0 if exhausted else spec.behavior.speed)
            changed = True
    return replace(state, agents=tuple(new)) if changed else state


def detect_collision(a: AgentState, size_a: Tuple[float, float],
                     b: AgentState, size_b: Tuple[float, float]) -> bool:
    return obb_overlap(a.pose, size_a, b.pose, size_b)


def curve_speed_cap(path: Path, s: float, dyn: EgoDynamics) -> float:
    cap = dyn.cruise_speed
    for s0, s1, kappa in path.curvature_segments():
        v_turn = math.sqrt(dyn.lateral_accel / kappa)
        if s0 <= s <= s1:
            cap = min(cap, v_turn)
        elif s < s0:
            cap = min(cap, math.sqrt(v_turn ** 2 + 2.0 * dyn.curve_decel * (s0 - s)))
    return cap


def _advance_waypoints(ag: AgentState, beh: TriggeredWaypoints, dt: float) -> AgentState:
    x, y, h = ag.pose
    idx = ag.waypoint_index
    remaining = beh.speed * dt
    wps = beh.waypoints
    while remaining > 0 and idx < len(wps):
        tx, ty = wps[idx]
        d = math.hypot(tx - x, ty - y)
        if d > 0:
            h = math.atan2(ty - y, tx - x)
        if d <= remaining:
            x, y = tx, ty
            remaining -= d
            idx += 1
        else:
            x += remaining * math.cos(h)
            y += remaining * math.sin(h)
            remaining = 0.0
    speed = beh.speed if idx < len(wps) else 0.0
    return replace(ag, pose=(x, y, h), speed=speed, waypoint_index=idx)


def step_agents(state: WorldState, instance: ScenarioInstance, command: EgoCommand, dt: float,
                dynamics: EgoDynamics = EgoDynamics()) -> WorldState:
    """Advance every agent by one timestep under the given ego command."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    target = command.target_speed
    if not (isinstance(target, (int, float)) and math.isfinite(target)) or target < 0:
        raise SimulationError(f"invalid ego command target speed {target!r}")
    path = route_path(instance.ego_route)
    new = list(state.agents)
    for i, (spec, ag) in enumerate(zip(instance.agents, state.agents)):
        if i == state.ego_index:
            v = ag.speed
            goal = min(target, dynamics.cruise_speed, curve_speed_cap(path, ag.progress, dynamics))
            v_new = min(max(goal, v - dynamics.max_decel * dt), v + dynamics.max_accel * dt)
            v_new = max(v_new, 0.0)
            s = min(ag.progress + 0.5 * (v + v_new) * dt, path.length)
            new[i] = replace(ag, pose=path.pose_at(s), speed=v_new, progress=s)
        elif ag.activated and isinstance(spec.behavior, TriggeredWaypoints):
            if ag.waypoint_index < len(spec.behavior.waypoints):
                new[i] = _advance_waypoints(ag, spec.behavior, dt)
    step = state.step + 1
    log = state.ego_command_log + ((state.time, command),)
    return WorldState(step * dt, step, tuple(new), state.ego_index, log)


PlannerHandle = Union[Callable[[WorldState, ScenarioInstance], EgoCommand], Any]


def _first_collision(state: WorldState, sizes: Sequence[Tuple[float, float]],
                     movers: Sequence[int]) -> Optional[CollisionDetail]:
    agents = state.agents
    n = len(agents)
    checked = set()
    for i in movers:
        for j in range(n):
            if i == j:
                continue
            key = (i, j) if i < j else (j, i)
            if key in checked:
                continue
            checked.add(key)
            a, b = agents[key[0]], agents[key[1]]
            if detect_collision(a, sizes[key[0]], b, sizes[key[1]]):
                pos = (0.5 * (a.pose[0] + b.pose[0]), 0.5 * (a.pose[1] + b.pose[1]))
                return CollisionDetail((a.id, b.id), state.time, pos)
    return None


def _record(traj: list, state: WorldState) -> None:
    t = state.time
    for a in state.agents:
        traj.append((t, a.id, a.pose[0], a.pose[1], a.pose[2], a.speed))


def run_simulation(instance: ScenarioInstance, planner: PlannerHandle,
                   limits: SimulationLimits = SimulationLimits(),
                   dynamics: EgoDynamics = EgoDynamics(),
                   record_trajectory: bool = True) -> SimulationOutcome:
    """Run one scenario to the first collision, arrival, or the time limit."""
    instance.validate()
    plan = planner.plan if hasattr(planner, "plan") else planner
    started = _time.perf_counter()
    sizes = [a.footprint for a in instance.agents]
    dest = instance.ego_route.destination
    traj: list = []

    state = check_triggers(initial_state(instance), instance)
    if record_trajectory:
        _record(traj, state)
    hit = _first_collision(state, sizes, range(len(state.agents)))
    reached = False
    while hit is None:
        ego = state.ego
        if math.hypot(ego.pose[0] - dest[0], ego.pose[1] - dest[1]) <= dynamics.arrival_tolerance:
            reached = True
            break
        if state.step >= limits.max_steps:
            break
        cmd = plan(state, instance)
        prev = state
        state = step_agents(state, instance, cmd, limits.dt, dynamics)
        state = check_triggers(state, instance)
        if record_trajectory:
            _record(traj, state)
        movers = [i for i, (a, b) in enumerate(zip(prev.agents, state.agents)) if a.pose != b.pose]
        hit = _first_collision(state, sizes, movers)

    if hit is not None:
        verdict = Verdict.COLLISION
    elif reached:
        verdict = Verdict.SAFE
    else:
        verdict = Verdict.TIMEOUT
    return SimulationOutcome(verdict, hit, reached, state.time, state.step, traj,
                             _time.perf_counter() - started)
