"""Scenario-based safety testing for autonomous-driving planners."""

from .campaign import CampaignConfig, run_campaign
from .planners import make_planner, register_planner
from .report import aggregate
from .scenario import ClassId, ScenarioInstance, build_scenario
from .simkernel import Verdict, run_simulation
from .testgen import class_spec, derive_follow_ups, enumerate_test_cases

__all__ = [
    "CampaignConfig", "run_campaign", "make_planner", "register_planner", "aggregate",
    "ClassId", "ScenarioInstance", "build_scenario", "Verdict", "run_simulation",
    "class_spec", "derive_follow_ups", "enumerate_test_cases",
]
__version__ = "0.1.0"
