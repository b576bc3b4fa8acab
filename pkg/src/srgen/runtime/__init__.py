"""Execution of tests against subject units: tracing, distances, observations."""
from .distance import K, branch_distance, fitness, normalize
from .interpreter import DEFAULT_STEP_LIMIT, ExecTrace, Machine, execute_test
from .observe import (
    INSPECTOR, RETURN, STATUS, Observation, harvest_observations, observed_value, values_match,
)
from .values import SKIPPED, TIMEOUT, Normal, Obj, Raised

__all__ = [
    "DEFAULT_STEP_LIMIT", "ExecTrace", "INSPECTOR", "K", "Machine", "Normal",
    "Obj", "Observation", "RETURN", "Raised", "SKIPPED", "STATUS", "TIMEOUT",
    "branch_distance", "execute_test", "fitness", "harvest_observations",
    "normalize", "observed_value", "values_match",
]
