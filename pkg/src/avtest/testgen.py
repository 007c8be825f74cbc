"""Equivalence-partition test enumeration and metamorphic follow-ups."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .scenario import (
    CLEAR_NOON, ENVIRONMENT_PARAMS, PARAMETERS, ClassId, EnvironmentConditions,
    ScenarioInstance, build_scenario, parse_class_id,
)
from .simkernel import Verdict


class Role(str, Enum):
    SOURCE = "Source"
    MR1 = "FollowUpMR1"
    MR2 = "FollowUpMR2"


class Relation(str, Enum):
    MR1 = "MR1"
    MR2 = "MR2"


class RelationResult(str, Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"


NIGHT = 0.0
DAY = 12.0


@dataclass(frozen=True)
class ParameterPartition:
    name: str
    values: Tuple[Any, ...]


@dataclass(frozen=True)
class ClassSpec:
    class_id: ClassId
    partitions: Tuple[ParameterPartition, ...]

    @property
    def axes(self) -> List[str]:
        return [p.name for p in self.partitions]


def class_spec(class_id: Union[str, ClassId]) -> ClassSpec:
    cid = parse_class_id(class_id)
    return ClassSpec(cid, tuple(ParameterPartition(d.name, d.values) for d in PARAMETERS[cid]))


@dataclass(frozen=True)
class TestCase:
    id: str
    class_id: ClassId
    params: Tuple[Tuple[str, Any], ...]
    role: Role = Role.SOURCE
    source_id: Optional[str] = None
    # Only set on follow-ups of classes whose parameters carry no weather.
    environment: Optional[EnvironmentConditions] = None

    __test__ = False  # not a pytest class

    @property
    def param_dict(self) -> Dict[str, Any]:
        return dict(self.params)

    @property
    def effective_environment(self) -> EnvironmentConditions:
        p = self.param_dict
        if all(k in p for k in ENVIRONMENT_PARAMS):
            return EnvironmentConditions(float(p["rain"]), float(p["fog"]), float(p["timeOfDay"]))
        return self.environment or CLEAR_NOON

    def build(self) -> ScenarioInstance:
        return build_scenario(self.class_id, self.param_dict, self.environment)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "classId": self.class_id.value,
            "params": dict(self.params),
            "role": self.role.value,
            "sourceId": self.source_id,
            "environment": self.environment.to_dict() if self.environment else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TestCase":
        env = d.get("environment")
        return cls(
            id=d["id"],
            class_id=ClassId(d["classId"]),
            params=tuple(d["params"].items()),
            role=Role(d.get("role", Role.SOURCE.value)),
            source_id=d.get("sourceId"),
            environment=EnvironmentConditions.from_dict(env) if env else None,
        )


def enumerate_test_cases(spec: ClassSpec) -> List[TestCase]:
    """Cartesian product of the partition representatives, in lexicographic order."""
    if not spec.partitions:
        raise ValueError("class spec has no partitions")
    for p in spec.partitions:
        if not p.values:
            raise ValueError(f"partition {p.name!r} has no values")
    names = spec.axes
    return [
        TestCase(f"{spec.class_id.value}-{k:03d}", spec.class_id, tuple(zip(names, combo)))
        for k, combo in enumerate(itertools.product(*(p.values for p in spec.partitions)), start=1)
    ]


def is_canonical_source(case: TestCase) -> bool:
    env = case.effective_environment
    return env.time_of_day == DAY and env.rain == 0 and env.fog == 0


def _follow_up(source: TestCase, role: Role, env: EnvironmentConditions) -> TestCase:
    suffix = "MR1" if role is Role.MR1 else "MR2"
    p = source.param_dict
    if all(k in p for k in ENVIRONMENT_PARAMS):
        p.update(rain=type(p["rain"])(env.rain), fog=type(p["fog"])(env.fog),
                 timeOfDay=type(p["timeOfDay"])(env.time_of_day))
        return TestCase(f"{source.id}-{suffix}", source.class_id, tuple(p.items()), role, source.id)
    return TestCase(f"{source.id}-{suffix}", source.class_id, source.params, role, source.id, env)


def derive_follow_ups(source: TestCase) -> Tuple[TestCase, TestCase]:
    """Night (MR1) and night with intense rain and fog (MR2) variants of a daytime case."""
    if source.role is not Role.SOURCE:
        raise ValueError(f"{source.id} is already a follow-up")
    if not is_canonical_source(source):
        raise ValueError(f"{source.id} is not a clear daytime case")
    mr1 = _follow_up(source, Role.MR1, EnvironmentConditions(0.0, 0.0, NIGHT))
    mr2 = _follow_up(source, Role.MR2, EnvironmentConditions(1.0, 1.0, NIGHT))
    return mr1, mr2


def derive_suite_follow_ups(sources: Iterable[TestCase]) -> List[TestCase]:
    out: List[TestCase] = []
    for s in sources:
        if is_canonical_source(s):
            out.extend(derive_follow_ups(s))
    return out


def _is_failure(v: Union[Verdict, str, None]) -> bool:
    if v is None:
        raise ValueError("relation check needs both outcomes")
    return Verdict(v) is Verdict.COLLISION


def check_relation(source_verdict: Union[Verdict, str, None],
                   follow_up_verdict: Union[Verdict, str, None]) -> RelationResult:
    """Violated iff exactly one of the two runs collided.

    Timeouts count as non-failures here; they stay distinct in the outcome
    records.
    """
    if _is_failure(source_verdict) != _is_failure(follow_up_verdict):
        return RelationResult.VIOLATED
    return RelationResult.SATISFIED


@dataclass(frozen=True)
class MetamorphicPair:
    relation: Relation
    source_case: TestCase
    follow_up_case: TestCase
    source_verdict: Verdict
    follow_up_verdict: Verdict
    result: RelationResult


def make_pair(source: TestCase, follow_up: TestCase, source_verdict: Verdict,
              follow_up_verdict: Verdict) -> MetamorphicPair:
    if follow_up.source_id != source.id:
        raise ValueError(f"{follow_up.id} does not derive from {source.id}")
    relation = Relation.MR1 if follow_up.role is Role.MR1 else Relation.MR2
    return MetamorphicPair(relation, source, follow_up, Verdict(source_verdict),
                           Verdict(follow_up_verdict),
                           check_relation(source_verdict, follow_up_verdict))


def suite_to_json(cases: Sequence[TestCase]) -> str:
    return json.dumps([c.to_dict() for c in cases], indent=1)


def suite_from_json(text: str) -> List[TestCase]:
    return [TestCase.from_dict(d) for d in json.loads(text)]
