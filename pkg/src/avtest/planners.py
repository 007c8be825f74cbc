"""Ego decision-making: perception model, baseline planners and the planner registry.

A planner is anything with ``plan(state, instance) -> EgoCommand``. Built-in
planners are created per run through :func:`make_planner` so that no state
leaks between runs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .geometry import Path, extents_along, ray_corridor_hit, wrap_angle
from .scenario import AgentSpec, Color, EgoRoute, EnvironmentConditions, ScenarioInstance
from .simkernel import AgentState, EgoCommand, EgoDynamics, WorldState, route_path

__all__ = [
    "PerceptionConfig", "BrakeConfig", "PlannerSettings", "Detection", "EgoCommand",
    "effective_range", "perceive", "predict_conflict", "plan_blind", "plan_oracle_brake",
    "plan_limited_perception", "BlindPlanner", "OracleBrakePlanner",
    "LimitedPerceptionPlanner", "register_planner", "make_planner", "available_planners",
]


@dataclass(frozen=True)
class PerceptionConfig:
    base_range: float = 60.0
    field_of_view: float = math.radians(120.0)
    night_factor: float = 0.6
    rain_slope: float = 0.3
    fog_slope: float = 0.4
    dark_color_night_factor: float = 0.7

    def __post_init__(self):
        if not self.base_range > 0:
            raise ValueError("baseRange must be > 0")
        if not 0 < self.field_of_view <= 2 * math.pi:
            raise ValueError("fieldOfView must lie in (0, 2*pi]")
        for name in ("night_factor", "dark_color_night_factor"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        for name in ("rain_slope", "fog_slope"):
            if not 0 <= getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in [0, 1)")

    def rain_factor(self, intensity: float) -> float:
        return 1.0 - self.rain_slope * intensity

    def fog_factor(self, intensity: float) -> float:
        return 1.0 - self.fog_slope * intensity


@dataclass(frozen=True)
class BrakeConfig:
    """Stopping-envelope braking shared by the oracle and limited planners."""

    margin: float = 2.0
    lookahead: float = 30.0
    prediction_horizon: float = 5.0
    lateral_margin: float = 0.3


@dataclass(frozen=True)
class PlannerSettings:
    dynamics: EgoDynamics = field(default_factory=EgoDynamics)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    brake: BrakeConfig = field(default_factory=BrakeConfig)
    reaction_delay_steps: int = 1


@dataclass(frozen=True)
class Detection:
    agent: AgentState
    footprint: Tuple[float, float]


def effective_range(env: EnvironmentConditions, agent: AgentSpec, cfg: PerceptionConfig) -> float:
    r = cfg.base_range * cfg.rain_factor(env.rain) * cfg.fog_factor(env.fog)
    if env.is_night:
        r *= cfg.night_factor
        if agent.color is Color.BLACK:
            r *= cfg.dark_color_night_factor
    return r


def perceive(state: WorldState, instance: ScenarioInstance, config: PerceptionConfig) -> List[Detection]:
    """Agents inside the degraded sensing range and the forward field of view."""
    ego = state.ego
    ex, ey, eh = ego.pose
    half_fov = 0.5 * config.field_of_view
    out = []
    for i, (spec, ag) in enumerate(zip(instance.agents, state.agents)):
        if i == state.ego_index:
            continue
        dx, dy = ag.pose[0] - ex, ag.pose[1] - ey
        dist = math.hypot(dx, dy)
        if dist > effective_range(instance.environment, spec, config):
            continue
        if dist > 0 and abs(wrap_angle(math.atan2(dy, dx) - eh)) > half_fov + 1e-12:
            continue
        out.append(Detection(ag, spec.footprint))
    return out


def predict_conflict(ego: AgentState, ego_size: Tuple[float, float], path: Path,
                     others: Iterable[Detection], brake: BrakeConfig) -> Optional[float]:
    """Free distance from the ego's front to the nearest predicted conflict.

    Each agent is extrapolated along a straight line at its current velocity
    for ``prediction_horizon`` seconds (stationary agents are a point). A
    conflict is where that line first enters the ego's corridor ahead of the
    ego centre. Agents that enter the corridor behind the ego are followers
    and ignored. Returns ``None`` when nothing conflicts.
    """
    s_ego = ego.progress
    half_len, half_wid = 0.5 * ego_size[0], 0.5 * ego_size[1]
    best: Optional[float] = None
    for det in others:
        ag = det.agent
        if ag.speed > 0:
            direction = (math.cos(ag.pose[2]), math.sin(ag.pose[2]))
            ray_len = ag.speed * brake.prediction_horizon
        else:
            direction, ray_len = (1.0, 0.0), 0.0
        origin = (ag.pose[0], ag.pose[1])
        for s_off, chord in path.chords:
            if s_off + chord.length < s_ego:
                continue
            along_ext, across_ext = extents_along(ag.pose[2], det.footprint[0], det.footprint[1],
                                                  chord.heading)
            hit = ray_corridor_hit(origin, direction, ray_len, chord,
                                   half_wid + across_ext + brake.lateral_margin)
            if hit is None:
                continue
            u_entry = _entry_coordinate(origin, direction, ray_len, chord, hit)
            s_entry = s_off + u_entry
            if s_entry < s_ego:
                continue
            d = s_entry - s_ego - half_len - along_ext
            if best is None or d < best:
                best = d
    return best


def _entry_coordinate(origin, direction, ray_len, chord, hit) -> float:
    """Along-chord coordinate where the ray first enters the corridor."""
    h = chord.heading
    da = direction[0] * math.cos(h) + direction[1] * math.sin(h)
    if ray_len == 0.0 or abs(da) < 1e-12:
        return hit[0] if da >= 0 else hit[1]
    return hit[0] if da > 0 else hit[1]


def _brake_command(ego: AgentState, gap: Optional[float], dyn: EgoDynamics,
                   brake: BrakeConfig) -> EgoCommand:
    if gap is None:
        return EgoCommand(dyn.cruise_speed)
    envelope = ego.speed ** 2 / (2.0 * dyn.max_decel) + brake.margin
    if gap <= max(envelope, brake.lookahead):
        return EgoCommand(0.0)
    return EgoCommand(dyn.cruise_speed)


def plan_blind(state: WorldState, route: EgoRoute, dynamics: EgoDynamics = EgoDynamics()) -> EgoCommand:
    return EgoCommand(dynamics.cruise_speed)


def _ego_size(instance: ScenarioInstance) -> Tuple[float, float]:
    return instance.ego.footprint


def plan_oracle_brake(state: WorldState, instance: ScenarioInstance, route: EgoRoute,
                      dynamics: EgoDynamics = EgoDynamics(),
                      brake: BrakeConfig = BrakeConfig()) -> EgoCommand:
    """Brake to a stop for any ground-truth agent predicted to cross the route ahead.

    The ego never leaves its lane, so a blocked lane means waiting.
    """
    truth = [Detection(ag, spec.footprint)
             for i, (spec, ag) in enumerate(zip(instance.agents, state.agents))
             if i != state.ego_index]
    gap = predict_conflict(state.ego, _ego_size(instance), route_path(route), truth, brake)
    return _brake_command(state.ego, gap, dynamics, brake)


def plan_limited_perception(state: WorldState, perceived: Sequence[Detection], route: EgoRoute,
                            ego_size: Tuple[float, float],
                            dynamics: EgoDynamics = EgoDynamics(),
                            brake: BrakeConfig = BrakeConfig()) -> EgoCommand:
    gap = predict_conflict(state.ego, ego_size, route_path(route), perceived, brake)
    return _brake_command(state.ego, gap, dynamics, brake)


class BlindPlanner:
    """Cruises regardless of the world; a lower bound on safety."""

    name = "blind"

    def __init__(self, settings: PlannerSettings = PlannerSettings()):
        self.settings = settings

    def plan(self, state: WorldState, instance: ScenarioInstance) -> EgoCommand:
        return plan_blind(state, instance.ego_route, self.settings.dynamics)


class OracleBrakePlanner:
    name = "oracle"

    def __init__(self, settings: PlannerSettings = PlannerSettings()):
        self.settings = settings

    def plan(self, state: WorldState, instance: ScenarioInstance) -> EgoCommand:
        s = self.settings
        return plan_oracle_brake(state, instance, instance.ego_route, s.dynamics, s.brake)


class LimitedPerceptionPlanner:
    """Oracle braking logic fed by degraded perception, delayed by a few steps."""

    name = "limited"

    def __init__(self, settings: PlannerSettings = PlannerSettings()):
        self.settings = settings
        self._memory: deque = deque(maxlen=settings.reaction_delay_steps + 1)

    def plan(self, state: WorldState, instance: ScenarioInstance) -> EgoCommand:
        s = self.settings
        self._memory.append(perceive(state, instance, s.perception))
        if len(self._memory) <= s.reaction_delay_steps:
            seen: List[Detection] = []
        else:
            seen = self._memory[0]
        return plan_limited_perception(state, seen, instance.ego_route, _ego_size(instance),
                                       s.dynamics, s.brake)


PlannerFactory = Callable[[PlannerSettings], object]

_REGISTRY: Dict[str, PlannerFactory] = {
    "blind": BlindPlanner,
    "oracle": OracleBrakePlanner,
    "limited": LimitedPerceptionPlanner,
}


def register_planner(name: str, factory: PlannerFactory) -> None:
    """Make a third-party planner selectable by name.

    ``factory(settings)`` must return a fresh object with
    ``plan(state, instance) -> EgoCommand``.
    """
    _REGISTRY[name] = factory


def available_planners() -> List[str]:
    return sorted(_REGISTRY)


def make_planner(name: str, settings: PlannerSettings = PlannerSettings()):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"planner {name!r} not found; available: {available_planners()}") from None
    return factory(settings)
