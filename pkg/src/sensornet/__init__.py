"""Joint sensor placement, power-class and bandwidth selection for energy-harvesting IoT networks."""

from .scenario import Scenario, ScenarioError, load_scenario, read_scenario, reference_scenario

__version__ = "0.1.0"

__all__ = ["Scenario", "ScenarioError", "load_scenario", "read_scenario", "reference_scenario"]
