"""Discrete-event simulator for prioritized heterogeneous-traffic congestion control."""

from .engine import Simulation, run
from .metrics import MetricsLog
from .scenario import Scenario, ScenarioError, load

__all__ = ["Scenario", "ScenarioError", "Simulation", "MetricsLog", "load", "run"]
__version__ = "0.1.0"
