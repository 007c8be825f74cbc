"""Scenario domain model and the builders for scenario classes A-D.

All four classes are laid out on synthetic maps. Classes A and C use a
straight two-lane road along +x with the ego in the right lane (y = -1.75).
Classes B and D use a single four-way junction centred at the origin with
the ego approaching from the south, heading north in the right lane.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .geometry import ArcPiece, LinePiece, Path, Piece, Point, Pose


class ScenarioError(ValueError):
    """Invalid class id, parameter assignment or scenario instance."""


class ClassId(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


class AgentKind(str, Enum):
    EGO = "EgoVehicle"
    NPC = "NpcVehicle"
    PEDESTRIAN = "Pedestrian"


class Color(str, Enum):
    BLACK = "Black"
    WHITE = "White"
    BLUE = "Blue"
    RED = "Red"
    DEFAULT = "Default"


class TurnDirection(str, Enum):
    STRAIGHT = "Straight"
    LEFT = "Left"
    RIGHT = "Right"
    NONE = "None"


CODE_NAMES = {
    ClassId.A: "Close Quarters",
    ClassId.B: "Pedestrian at Intersection",
    ClassId.C: "Go Around, Oncoming",
    ClassId.D: "Camera Tricks",
}

LANE_WIDTH = 3.5
VEHICLE_SIZE = (4.7, 1.9)
PEDESTRIAN_SIZE = (0.5, 0.5)
EGO_LANE_Y = -LANE_WIDTH / 2

# class A
A_FIRST_SLOT_X = 40.0
A_SLOT_SPACING = 6.0
A_PARKED_Y = 6.0
A_PED_Y = 4.75
A_PED_SPACING = 1.0
A_DEST_PAST_LAST = 12.0
# class C
C_BLOCKER_AHEAD = 6.0
C_DEST_PAST_BLOCKER = 5.0
C_ROAD_END = 150.0
# classes B and D
JUNCTION_HALF = LANE_WIDTH
ARM_LENGTH = 60.0
EGO_START_Y = -40.0
EXIT_RUN = 30.0
CROSSWALK_WIDTH = 3.0
B_CROSSWALK_X = -(JUNCTION_HALF + CROSSWALK_WIDTH / 2)
# Pedestrian waits north of the west arm and walks south across the ego's exit lane.
# The start is pedDistanceFromIntersection plus this setback beyond the junction edge.
B_PED_SETBACK = 9.0
B_PED_END_Y = -(JUNCTION_HALF + 2.0)
B_CORNER_CAR_Y = (-8.0, -14.0)
D_NPC_SPAWN = 40.0
D_COLUMN_Y = (-8.0, -14.0, -20.0, -26.0, -32.0, -38.0)


@dataclass(frozen=True)
class EnvironmentConditions:
    rain: float = 0.0
    fog: float = 0.0
    time_of_day: float = 12.0

    def __post_init__(self):
        for name in ("rain", "fog"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ScenarioError(f"{name} must lie in [0, 1], got {v}")
        if not (0.0 <= self.time_of_day < 24.0):
            raise ScenarioError(f"timeOfDay must lie in [0, 24), got {self.time_of_day}")

    @property
    def is_night(self) -> bool:
        return not (6.0 <= self.time_of_day < 18.0)

    def to_dict(self) -> Dict[str, float]:
        return {"rain": self.rain, "fog": self.fog, "timeOfDay": self.time_of_day}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EnvironmentConditions":
        return cls(float(d["rain"]), float(d["fog"]), float(d["timeOfDay"]))


CLEAR_NOON = EnvironmentConditions()


@dataclass(frozen=True)
class Stationary:
    def to_dict(self) -> Dict[str, Any]:
        return {"type": "Stationary"}


@dataclass(frozen=True)
class TriggeredWaypoints:
    waypoints: Tuple[Point, ...]
    speed: float
    trigger_distance: float

    def __post_init__(self):
        if not self.waypoints:
            raise ScenarioError("TriggeredWaypoints needs at least one waypoint")
        if not (self.speed >= 0 and math.isfinite(self.speed)):
            raise ScenarioError(f"speed must be >= 0, got {self.speed}")
        if not (self.trigger_distance >= 0 and math.isfinite(self.trigger_distance)):
            raise ScenarioError(f"triggerDistance must be >= 0, got {self.trigger_distance}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "TriggeredWaypoints",
            "waypoints": [list(p) for p in self.waypoints],
            "speed": self.speed,
            "triggerDistance": self.trigger_distance,
        }


Behavior = Union[Stationary, TriggeredWaypoints]


def _behavior_from_dict(d: Mapping[str, Any]) -> Behavior:
    if d["type"] == "Stationary":
        return Stationary()
    if d["type"] == "TriggeredWaypoints":
        return TriggeredWaypoints(
            tuple((float(x), float(y)) for x, y in d["waypoints"]),
            float(d["speed"]),
            float(d["triggerDistance"]),
        )
    raise ScenarioError(f"unknown behavior type {d['type']!r}")


@dataclass(frozen=True)
class AgentSpec:
    id: str
    kind: AgentKind
    pose: Pose
    footprint: Tuple[float, float]
    color: Color = Color.DEFAULT
    behavior: Behavior = Stationary()

    def __post_init__(self):
        if not all(d > 0 for d in self.footprint):
            raise ScenarioError(f"agent {self.id}: footprint dimensions must be > 0")
        if not all(math.isfinite(v) for v in self.pose):
            raise ScenarioError(f"agent {self.id}: non-finite pose")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "pose": list(self.pose),
            "footprint": list(self.footprint),
            "color": self.color.value,
            "behavior": self.behavior.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AgentSpec":
        return cls(
            id=d["id"],
            kind=AgentKind(d["kind"]),
            pose=tuple(float(v) for v in d["pose"]),
            footprint=tuple(float(v) for v in d["footprint"]),
            color=Color(d["color"]),
            behavior=_behavior_from_dict(d["behavior"]),
        )


@dataclass(frozen=True)
class RoadSegment:
    """Straight two-way road; ``start``/``end`` are centreline endpoints."""

    id: str
    start: Point
    end: Point
    lane_width: float = LANE_WIDTH
    lanes_per_direction: int = 1
    shoulder: float = 4.0

    def __post_init__(self):
        if self.lane_width <= 0:
            raise ScenarioError(f"segment {self.id}: lane width must be > 0")

    @property
    def half_width(self) -> float:
        return self.lane_width * self.lanes_per_direction

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        line = LinePiece(self.start, self.end)
        h = line.heading
        rx, ry = p[0] - self.start[0], p[1] - self.start[1]
        along = rx * math.cos(h) + ry * math.sin(h)
        across = -rx * math.sin(h) + ry * math.cos(h)
        return (-tol <= along <= line.length + tol
                and abs(across) <= self.half_width + self.shoulder + tol)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "start": list(self.start),
            "end": list(self.end),
            "laneWidth": self.lane_width,
            "lanesPerDirection": self.lanes_per_direction,
            "shoulder": self.shoulder,
            "direction": "TwoWay",
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RoadSegment":
        return cls(d["id"], tuple(d["start"]), tuple(d["end"]), float(d["laneWidth"]),
                   int(d["lanesPerDirection"]), float(d["shoulder"]))


@dataclass(frozen=True)
class Crosswalk:
    center: Point
    heading: float   # walking direction
    length: float
    width: float

    def to_dict(self) -> Dict[str, Any]:
        return {"center": list(self.center), "heading": self.heading,
                "length": self.length, "width": self.width}


@dataclass(frozen=True)
class Intersection:
    id: str
    center: Point
    half_size: float
    crosswalks: Tuple[Crosswalk, ...] = ()

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        return (abs(p[0] - self.center[0]) <= self.half_size + tol
                and abs(p[1] - self.center[1]) <= self.half_size + tol)

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "center": list(self.center), "halfSize": self.half_size,
                "crosswalks": [c.to_dict() for c in self.crosswalks]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Intersection":
        cws = tuple(Crosswalk(tuple(c["center"]), float(c["heading"]), float(c["length"]),
                              float(c["width"])) for c in d["crosswalks"])
        return cls(d["id"], tuple(d["center"]), float(d["halfSize"]), cws)


@dataclass(frozen=True)
class MapGeometry:
    segments: Tuple[RoadSegment, ...]
    intersections: Tuple[Intersection, ...] = ()
    legal_centerline_crossing: Tuple[Tuple[str, bool], ...] = ()

    def contains(self, p: Point) -> bool:
        return (any(s.contains(p) for s in self.segments)
                or any(i.contains(p) for i in self.intersections))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "segments": [s.to_dict() for s in self.segments],
            "intersections": [i.to_dict() for i in self.intersections],
            "legalCenterlineCrossing": dict(self.legal_centerline_crossing),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "MapGeometry":
        return cls(
            tuple(RoadSegment.from_dict(s) for s in d["segments"]),
            tuple(Intersection.from_dict(i) for i in d["intersections"]),
            tuple(sorted(d["legalCenterlineCrossing"].items())),
        )


def _piece_to_dict(p: Piece) -> Dict[str, Any]:
    if isinstance(p, LinePiece):
        return {"type": "line", "start": list(p.start), "end": list(p.end)}
    return {"type": "arc", "center": list(p.center), "radius": p.radius,
            "startAngle": p.start_angle, "sweep": p.sweep}


def _piece_from_dict(d: Mapping[str, Any]) -> Piece:
    if d["type"] == "line":
        return LinePiece(tuple(d["start"]), tuple(d["end"]))
    if d["type"] == "arc":
        return ArcPiece(tuple(d["center"]), float(d["radius"]), float(d["startAngle"]),
                        float(d["sweep"]))
    raise ScenarioError(f"unknown route piece {d['type']!r}")


@dataclass(frozen=True)
class EgoRoute:
    start: Pose
    destination: Point
    turn_direction: TurnDirection
    pieces: Tuple[Piece, ...]

    def path(self) -> Path:
        return Path(self.pieces)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": list(self.start),
            "destination": list(self.destination),
            "turnDirection": self.turn_direction.value,
            "pieces": [_piece_to_dict(p) for p in self.pieces],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EgoRoute":
        return cls(tuple(d["start"]), tuple(d["destination"]),
                   TurnDirection(d["turnDirection"]),
                   tuple(_piece_from_dict(p) for p in d["pieces"]))


@dataclass(frozen=True)
class ScenarioInstance:
    class_id: ClassId
    map: MapGeometry
    agents: Tuple[AgentSpec, ...]
    environment: EnvironmentConditions
    ego_route: EgoRoute
    params: Tuple[Tuple[str, Any], ...] = field(default=())

    @property
    def ego(self) -> AgentSpec:
        return next(a for a in self.agents if a.kind is AgentKind.EGO)

    def agent(self, agent_id: str) -> AgentSpec:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(agent_id)

    def validate(self) -> None:
        egos = [a for a in self.agents if a.kind is AgentKind.EGO]
        if len(egos) != 1:
            raise ScenarioError(f"expected exactly one ego vehicle, found {len(egos)}")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ScenarioError("agent ids must be unique")
        for a in self.agents:
            if not self.map.contains(a.pose[:2]):
                raise ScenarioError(f"agent {a.id} lies outside the map")
        path = self.ego_route.path()
        if math.dist(path.pose_at(0.0)[:2], egos[0].pose[:2]) > 1e-6:
            raise ScenarioError("ego route does not start at the ego pose")
        if math.dist(path.end, self.ego_route.destination) > 1e-6:
            raise ScenarioError("ego route does not terminate at the destination")
        for _, chord in path.chords:
            if not (self.map.contains(chord.start) and self.map.contains(chord.end)):
                raise ScenarioError("ego route leaves the mapped roads")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classId": self.class_id.value,
            "params": dict(self.params),
            "map": self.map.to_dict(),
            "agents": [a.to_dict() for a in self.agents],
            "environment": self.environment.to_dict(),
            "egoRoute": self.ego_route.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ScenarioInstance":
        inst = cls(
            class_id=ClassId(d["classId"]),
            map=MapGeometry.from_dict(d["map"]),
            agents=tuple(AgentSpec.from_dict(a) for a in d["agents"]),
            environment=EnvironmentConditions.from_dict(d["environment"]),
            ego_route=EgoRoute.from_dict(d["egoRoute"]),
            params=tuple(d.get("params", {}).items()),
        )
        inst.validate()
        return inst

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioInstance":
        return cls.from_dict(json.loads(text))


def scenario_schema() -> Dict[str, Any]:
    """JSON Schema for :meth:`ScenarioInstance.to_dict` output."""
    text = resources.files("avtest").joinpath("schemas/scenario_instance.schema.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# Parameter definitions

@dataclass(frozen=True)
class ParamDef:
    """One scenario parameter: representative values plus its valid domain."""

    name: str
    values: Tuple[Any, ...]
    low: Optional[float] = None
    high: Optional[float] = None
    high_open: bool = False
    integer: bool = False
    choices: Optional[Tuple[str, ...]] = None

    def coerce(self, value: Any) -> Any:
        if self.choices is not None:
            if isinstance(value, TurnDirection):
                value = value.value
            if isinstance(value, int) and not isinstance(value, bool):
                # Numeric turn codes: 0 straight, 1 left, 2 right.
                if 0 <= value < len(self.choices):
                    return self.choices[value]
            if value not in self.choices:
                raise ScenarioError(f"{self.name}: {value!r} not in {self.choices}")
            return value
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"{self.name}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ScenarioError(f"{self.name}: non-finite value")
        if self.integer and value != int(value):
            raise ScenarioError(f"{self.name}: expected an integer, got {value!r}")
        too_high = value >= self.high if self.high_open else value > self.high
        if value < self.low or too_high:
            raise ScenarioError(f"{self.name}: {value!r} outside valid range")
        return int(value) if self.integer else value


_TURNS = (TurnDirection.STRAIGHT.value, TurnDirection.LEFT.value, TurnDirection.RIGHT.value)

PARAMETERS: Dict[ClassId, Tuple[ParamDef, ...]] = {
    ClassId.A: (
        ParamDef("pedSpeed", (1, 2, 4), 0.0, 15.0),
        ParamDef("pedTrigger", (10, 20, 30), 0.0, 200.0),
        ParamDef("numberOfCar", (4, 10, 20), 1, 40, integer=True),
        ParamDef("pedLocation", (2, 3, 5), 1, 40, integer=True),
    ),
    ClassId.B: (
        ParamDef("rain", (0, 1), 0.0, 1.0),
        ParamDef("fog", (0, 1), 0.0, 1.0),
        ParamDef("timeOfDay", (12, 0), 0.0, 24.0, high_open=True),
        ParamDef("pedSpeed", (6, 8, 10), 0.0, 15.0),
        ParamDef("pedTrigger", (14, 24, 32), 0.0, 200.0),
        ParamDef("pedDistanceFromIntersection", (6, 9, 12), 4.0, 50.0),
    ),
    ClassId.C: (
        ParamDef("oncomingSpeed", (4, 8, 12), 0.0, 30.0),
        ParamDef("spawnDistance", (30, 50, 70), 10.0, 140.0),
        ParamDef("oncomingTrigger", (10, 20, 30, 40), 0.0, 200.0),
    ),
    ClassId.D: (
        ParamDef("leftSpeed", (0, 5, 10), 0.0, 20.0),
        ParamDef("leftTrigger", (5, 25, 55), 0.0, 200.0),
        ParamDef("rightSpeed", (0, 5, 10), 0.0, 20.0),
        ParamDef("rightTrigger", (10, 15, 45), 0.0, 200.0),
        ParamDef("turnDirection", _TURNS, choices=_TURNS),
    ),
}

ENVIRONMENT_PARAMS = ("rain", "fog", "timeOfDay")


def parse_class_id(class_id: Union[str, ClassId]) -> ClassId:
    try:
        return ClassId(class_id)
    except ValueError:
        raise ScenarioError(f"unknown scenario class {class_id!r}") from None


def validate_params(class_id: Union[str, ClassId], params: Mapping[str, Any]) -> Dict[str, Any]:
    """Check the key set and value domains; return the coerced assignment."""
    cid = parse_class_id(class_id)
    defs = PARAMETERS[cid]
    expected = {p.name for p in defs}
    missing = expected - set(params)
    extra = set(params) - expected
    if missing or extra:
        raise ScenarioError(
            f"class {cid.value}: missing {sorted(missing)}, unexpected {sorted(extra)}")
    return {p.name: p.coerce(params[p.name]) for p in defs}


# ---------------------------------------------------------------------------
# Builders

def _vehicle(aid: str, kind: AgentKind, pose: Pose, color: Color = Color.DEFAULT,
             behavior: Behavior = Stationary()) -> AgentSpec:
    return AgentSpec(aid, kind, pose, VEHICLE_SIZE, color, behavior)


def _straight_road(length_to: float) -> MapGeometry:
    seg = RoadSegment("main", (-20.0, 0.0), (length_to, 0.0), shoulder=5.0)
    return MapGeometry((seg,), (), (("main", True),))


def _junction_map() -> MapGeometry:
    h = JUNCTION_HALF
    arms = (
        RoadSegment("south", (0.0, -h), (0.0, -h - ARM_LENGTH)),
        RoadSegment("north", (0.0, h), (0.0, h + ARM_LENGTH)),
        RoadSegment("west", (-h, 0.0), (-h - ARM_LENGTH, 0.0)),
        RoadSegment("east", (h, 0.0), (h + ARM_LENGTH, 0.0)),
    )
    off = h + CROSSWALK_WIDTH / 2
    cws = (
        Crosswalk((0.0, -off), 0.0, 2 * h, CROSSWALK_WIDTH),
        Crosswalk((0.0, off), 0.0, 2 * h, CROSSWALK_WIDTH),
        Crosswalk((-off, 0.0), math.pi / 2, 2 * h, CROSSWALK_WIDTH),
        Crosswalk((off, 0.0), math.pi / 2, 2 * h, CROSSWALK_WIDTH),
    )
    junction = Intersection("J1", (0.0, 0.0), h, cws)
    return MapGeometry(arms, (junction,), tuple((a.id, False) for a in arms))


def junction_route(turn: TurnDirection) -> EgoRoute:
    """Ego route from the south approach through the junction."""
    h = JUNCTION_HALF
    lane = LANE_WIDTH / 2
    start = (lane, EGO_START_Y, math.pi / 2)
    entry = (lane, -h)
    if turn is TurnDirection.STRAIGHT:
        dest = (lane, h + EXIT_RUN)
        pieces: Tuple[Piece, ...] = (LinePiece(start[:2], dest),)
    elif turn is TurnDirection.LEFT:
        dest = (-h - EXIT_RUN, lane)
        arc = ArcPiece((-h, -h), h + lane, 0.0, math.pi / 2)
        pieces = (LinePiece(start[:2], entry), arc, LinePiece((-h, lane), dest))
    elif turn is TurnDirection.RIGHT:
        dest = (h + EXIT_RUN, -lane)
        arc = ArcPiece((h, -h), h - lane, math.pi, -math.pi / 2)
        pieces = (LinePiece(start[:2], entry), arc, LinePiece((h, -lane), dest))
    else:
        raise ScenarioError(f"junction route needs a turn, got {turn}")
    return EgoRoute(start, dest, turn, pieces)


def class_a_slot_x(k: int) -> float:
    """Longitudinal position of the k-th (1-based) parking slot."""
    return A_FIRST_SLOT_X + (k - 1) * A_SLOT_SPACING


def _build_a(p: Mapping[str, Any], env: EnvironmentConditions) -> ScenarioInstance:
    n = p["numberOfCar"]
    dest = (class_a_slot_x(n) + A_DEST_PAST_LAST, EGO_LANE_Y)
    ego = _vehicle("ego", AgentKind.EGO, (0.0, EGO_LANE_Y, 0.0))
    agents = [ego]
    for side, y in (("R", -A_PARKED_Y), ("L", A_PARKED_Y)):
        for k in range(1, n + 1):
            agents.append(_vehicle(f"car_{side}{k:02d}", AgentKind.NPC, (class_a_slot_x(k), y, 0.0)))
    x0 = class_a_slot_x(p["pedLocation"])
    for i in range(2):
        x = x0 + i * A_PED_SPACING
        agents.append(AgentSpec(
            f"ped_{i + 1}", AgentKind.PEDESTRIAN, (x, -A_PED_Y, math.pi / 2), PEDESTRIAN_SIZE,
            behavior=TriggeredWaypoints(((x, A_PED_Y),), float(p["pedSpeed"]), float(p["pedTrigger"])),
        ))
    route = EgoRoute(ego.pose, dest, TurnDirection.NONE, (LinePiece(ego.pose[:2], dest),))
    road_end = max(dest[0], x0 + A_PED_SPACING) + 20.0
    return ScenarioInstance(ClassId.A, _straight_road(road_end), tuple(agents), env, route)


def _build_b(p: Mapping[str, Any], env: EnvironmentConditions) -> ScenarioInstance:
    route = junction_route(TurnDirection.LEFT)
    ego = _vehicle("ego", AgentKind.EGO, route.start)
    x = B_CROSSWALK_X
    ped = AgentSpec(
        "ped_1", AgentKind.PEDESTRIAN,
        (x, JUNCTION_HALF + B_PED_SETBACK + float(p["pedDistanceFromIntersection"]), -math.pi / 2),
        PEDESTRIAN_SIZE,
        behavior=TriggeredWaypoints(((x, B_PED_END_Y),), float(p["pedSpeed"]), float(p["pedTrigger"])),
    )
    cars = [_vehicle(f"car_{i + 1}", AgentKind.NPC, (-LANE_WIDTH / 2, y, -math.pi / 2))
            for i, y in enumerate(B_CORNER_CAR_Y)]
    return ScenarioInstance(ClassId.B, _junction_map(), (ego, ped, *cars), env, route)


def _build_c(p: Mapping[str, Any], env: EnvironmentConditions) -> ScenarioInstance:
    ego = _vehicle("ego", AgentKind.EGO, (0.0, EGO_LANE_Y, 0.0))
    blocker = _vehicle("blocker", AgentKind.NPC, (C_BLOCKER_AHEAD, EGO_LANE_Y, 0.0))
    oncoming = _vehicle(
        "oncoming", AgentKind.NPC, (float(p["spawnDistance"]), -EGO_LANE_Y, math.pi),
        behavior=TriggeredWaypoints(((-15.0, -EGO_LANE_Y),), float(p["oncomingSpeed"]),
                                    float(p["oncomingTrigger"])),
    )
    dest = (C_BLOCKER_AHEAD + C_DEST_PAST_BLOCKER, EGO_LANE_Y)
    route = EgoRoute(ego.pose, dest, TurnDirection.NONE, (LinePiece(ego.pose[:2], dest),))
    road = _straight_road(C_ROAD_END)
    road = MapGeometry(road.segments, (), (("main", False),))
    return ScenarioInstance(ClassId.C, road, (ego, blocker, oncoming), env, route)


def _build_d(p: Mapping[str, Any], env: EnvironmentConditions) -> ScenarioInstance:
    route = junction_route(TurnDirection(p["turnDirection"]))
    ego = _vehicle("ego", AgentKind.EGO, route.start)
    lane = LANE_WIDTH / 2
    end = JUNCTION_HALF + ARM_LENGTH
    column = [_vehicle(f"queue_{i + 1}", AgentKind.NPC, (-lane, y, -math.pi / 2), Color.BLACK)
              for i, y in enumerate(D_COLUMN_Y)]
    left = _vehicle("npc_left", AgentKind.NPC, (-D_NPC_SPAWN, -lane, 0.0), Color.BLACK,
                    TriggeredWaypoints(((end, -lane),), float(p["leftSpeed"]), float(p["leftTrigger"])))
    right = _vehicle("npc_right", AgentKind.NPC, (D_NPC_SPAWN, lane, math.pi), Color.BLACK,
                     TriggeredWaypoints(((-end, lane),), float(p["rightSpeed"]), float(p["rightTrigger"])))
    return ScenarioInstance(ClassId.D, _junction_map(), (ego, *column, left, right), env, route)


_BUILDERS = {ClassId.A: _build_a, ClassId.B: _build_b, ClassId.C: _build_c, ClassId.D: _build_d}


def build_scenario(class_id: Union[str, ClassId], params: Mapping[str, Any],
                   environment: Optional[EnvironmentConditions] = None) -> ScenarioInstance:
    """Build the concrete world for one parameter assignment.

    Class B reads its environment from ``rain``/``fog``/``timeOfDay``; the
    other classes default to clear noon unless ``environment`` overrides it
    (metamorphic follow-ups of classes without weather parameters).
    """
    cid = parse_class_id(class_id)
    p = validate_params(cid, params)
    if cid is ClassId.B:
        env = EnvironmentConditions(float(p["rain"]), float(p["fog"]), float(p["timeOfDay"]))
        if environment is not None and environment != env:
            raise ScenarioError("class B environment is set through its parameters")
    else:
        env = environment or CLEAR_NOON
    inst = _BUILDERS[cid](p, env)
    inst = ScenarioInstance(inst.class_id, inst.map, inst.agents, inst.environment,
                            inst.ego_route, tuple(p.items()))
    inst.validate()
    return inst
