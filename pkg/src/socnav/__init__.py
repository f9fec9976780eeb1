"""Deterministic 2D social-navigation simulator with emotion-adaptive proxemics.

A differential-drive robot navigates an occupancy-grid world among
pedestrians. A simulated planar lidar feeds a geometric leg detector; detected
people receive Gaussian personal-space costs scaled by their emotional state
(happy 0.5 m, neutral 1.0 m, angry 1.5 m); a Dijkstra global planner and a
dynamic-window local planner drive the robot; per-timestep safety indices
quantify how close it came to each person.
"""
from .world import (
    Emotion,
    GridMap,
    Pedestrian,
    Pose2D,
    RobotState,
    Scenario,
    Velocity,
    load_scenario,
    proxemic_radius,
)
from .controller import ComparisonRecord, RunLog, run, run_pair
from .metrics import RunSummary, sii, sii_threshold

__version__ = "0.1.0"

__all__ = [
    "ComparisonRecord",
    "Emotion",
    "GridMap",
    "Pedestrian",
    "Pose2D",
    "RobotState",
    "RunLog",
    "RunSummary",
    "Scenario",
    "Velocity",
    "load_scenario",
    "proxemic_radius",
    "run",
    "run_pair",
    "sii",
    "sii_threshold",
    "__version__",
]
