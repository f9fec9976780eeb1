import json

import pytest

from socnav import controller
from socnav.scenarios import canonical_scenario
from socnav.world import Emotion, load_scenario


def straight_run_doc(length_m=5.0, tol=0.2, max_time=30.0):
    """Open 7 x 2 m map, straight dash from (1, 1) to (1 + length, 1)."""
    return {
        "map": {"resolution": 0.05, "width": 140, "height": 40},
        "robot": {"start": [1.0, 1.0, 0.0], "goal": [1.0 + length_m, 1.0]},
        "sim": {"dt": 0.1, "max_time": max_time, "seed": 7,
                "goal_tolerance": tol},
    }


def small_passing_doc(emotion="neutral", adaptation=True, seed=11):
    """8 x 6 m walled room with one pedestrian halfway along the route.

    A shorter analogue of the canonical scenario for module tests; the room
    keeps the canonical 6 m width so an angry person's zone stays passable.
    """
    width, height = 160, 120
    occupied = []
    for c in range(width):
        occupied.append([c, 0])
        occupied.append([c, height - 1])
    for r in range(1, height - 1):
        occupied.append([0, r])
        occupied.append([width - 1, r])
    return {
        "map": {"resolution": 0.05, "width": width, "height": height, "occupied": occupied},
        "robot": {"start": [1.0, 3.0, 0.0], "goal": [7.0, 3.0]},
        "pedestrians": [{"id": "p1", "pose": [4.0, 3.0, -1.5707963267948966],
                         "velocity": [0.0, 0.0], "emotion": emotion}],
        "adaptation_enabled": adaptation,
        "sim": {"dt": 0.1, "max_time": 45.0, "seed": seed},
    }


def load_doc(doc):
    return load_scenario(json.dumps(doc))


@pytest.fixture(scope="session")
def canonical_runs():
    """Lazily computed canonical runs shared across acceptance tests."""
    cache = {}

    def get(emotion: Emotion, adaptation: bool):
        key = (emotion, adaptation)
        if key not in cache:
            scn = canonical_scenario(emotion, adaptation)
            cache[key] = controller.run(scn)
        return cache[key]

    return get
