import math

import pytest
from hypothesis import given, settings, strategies as st

from avtest.scenario import ENVIRONMENT_PARAMS, ClassId, EnvironmentConditions
from avtest.simkernel import Verdict
from avtest.testgen import (
    ClassSpec, ParameterPartition, Relation, RelationResult, Role, check_relation, class_spec,
    derive_follow_ups, derive_suite_follow_ups, enumerate_test_cases, is_canonical_source,
    make_pair, suite_from_json, suite_to_json,
)

ALL_CASES = {cid: enumerate_test_cases(class_spec(cid)) for cid in ClassId}
CANONICAL = [c for cid in ClassId for c in ALL_CASES[cid] if is_canonical_source(c)]


@pytest.mark.parametrize("cid, n", [("A", 81), ("B", 216), ("C", 36), ("D", 243)])
def test_class_sizes(cid, n):
    assert len(ALL_CASES[ClassId(cid)]) == n


def test_ids_and_order():
    cases = ALL_CASES[ClassId.A]
    assert [c.id for c in cases[:2]] == ["A-001", "A-002"]
    assert cases[0].param_dict == {"pedSpeed": 1, "pedTrigger": 10, "numberOfCar": 4, "pedLocation": 2}
    # last axis varies fastest
    assert cases[1].param_dict["pedLocation"] == 3
    assert cases[-1].param_dict == {"pedSpeed": 4, "pedTrigger": 30, "numberOfCar": 20, "pedLocation": 5}


def test_every_case_builds():
    for cases in ALL_CASES.values():
        for c in cases:
            c.build()


@settings(max_examples=150)
@given(st.lists(st.lists(st.integers(), min_size=1, max_size=5, unique=True), min_size=1, max_size=5))
def test_enumeration_size_is_the_product_of_partition_sizes(value_lists):
    # Reuse class A's id; only the partitions matter here.
    spec = ClassSpec(ClassId.A, tuple(ParameterPartition(f"p{i}", tuple(v))
                                      for i, v in enumerate(value_lists)))
    cases = enumerate_test_cases(spec)
    assert len(cases) == math.prod(len(v) for v in value_lists)
    assert len({c.params for c in cases}) == len(cases)
    assert len({c.id for c in cases}) == len(cases)


def test_empty_partitions_rejected():
    with pytest.raises(ValueError):
        enumerate_test_cases(ClassSpec(ClassId.A, ()))
    with pytest.raises(ValueError):
        enumerate_test_cases(ClassSpec(ClassId.A, (ParameterPartition("x", ()),)))


def test_class_d_yields_486_follow_ups():
    follow = derive_suite_follow_ups(ALL_CASES[ClassId.D])
    assert len(follow) == 486
    assert sum(f.role is Role.MR1 for f in follow) == 243
    assert len({f.id for f in follow}) == 486


def test_class_b_only_daytime_clear_cases_are_sources():
    follow = derive_suite_follow_ups(ALL_CASES[ClassId.B])
    assert len(follow) == 2 * 27


@settings(max_examples=150)
@given(st.sampled_from(CANONICAL))
def test_follow_ups_preserve_every_non_environment_parameter(source):
    mr1, mr2 = derive_follow_ups(source)
    for fu, env in ((mr1, EnvironmentConditions(0, 0, 0)), (mr2, EnvironmentConditions(1, 1, 0))):
        assert fu.source_id == source.id
        assert fu.class_id is source.class_id
        for k, v in source.param_dict.items():
            if k not in ENVIRONMENT_PARAMS:
                assert fu.param_dict[k] == v
        assert fu.effective_environment == env
        assert fu.build().environment == env
    assert (mr1.role, mr2.role) == (Role.MR1, Role.MR2)
    assert mr1.id == f"{source.id}-MR1" and mr2.id == f"{source.id}-MR2"


def test_follow_ups_need_a_daytime_source():
    night_b = next(c for c in ALL_CASES[ClassId.B] if c.param_dict["timeOfDay"] == 0)
    with pytest.raises(ValueError, match="daytime"):
        derive_follow_ups(night_b)
    mr1, _ = derive_follow_ups(ALL_CASES[ClassId.D][0])
    with pytest.raises(ValueError, match="follow-up"):
        derive_follow_ups(mr1)


verdicts = st.sampled_from(list(Verdict))


@settings(max_examples=100)
@given(verdicts)
def test_relation_holds_for_equal_outcomes(v):
    assert check_relation(v, v) is RelationResult.SATISFIED


@settings(max_examples=100)
@given(verdicts, verdicts)
def test_relation_is_violated_iff_exactly_one_collided(a, b):
    expected = (a is Verdict.COLLISION) != (b is Verdict.COLLISION)
    assert (check_relation(a, b) is RelationResult.VIOLATED) == expected
    assert check_relation(a, b) == check_relation(b, a)


def test_relation_examples():
    assert check_relation("Safe", "Collision") is RelationResult.VIOLATED
    assert check_relation(Verdict.TIMEOUT, Verdict.SAFE) is RelationResult.SATISFIED
    with pytest.raises(ValueError):
        check_relation(Verdict.SAFE, None)


def test_make_pair():
    src = ALL_CASES[ClassId.D][0]
    mr1, mr2 = derive_follow_ups(src)
    pair = make_pair(src, mr2, Verdict.SAFE, Verdict.COLLISION)
    assert pair.relation is Relation.MR2
    assert pair.result is RelationResult.VIOLATED
    with pytest.raises(ValueError):
        make_pair(ALL_CASES[ClassId.D][1], mr1, Verdict.SAFE, Verdict.SAFE)


def test_suite_json_round_trip():
    suite = ALL_CASES[ClassId.D][:5] + derive_suite_follow_ups(ALL_CASES[ClassId.D][:5])
    assert suite_from_json(suite_to_json(suite)) == suite
