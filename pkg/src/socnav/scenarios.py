"""Canonical passing scenarios bundled with the package.

One stationary pedestrian stands in the middle of a 12 x 6 m walled room; the
robot starts at (1, 3) facing +x and must reach (11, 3), passing the person at
(6, 3). Variants differ only in the person's emotion and in whether the robot
is allowed to adapt its personal-space radius to it (emotion known vs unknown).
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .world import Emotion, Scenario, load_scenario

ROOM_WIDTH_M = 12.0
ROOM_HEIGHT_M = 6.0
RESOLUTION = 0.05
CANONICAL_SEED = 42

CANONICAL_NAMES = (
    "happy_known",
    "happy_unknown",
    "neutral",
    "angry_known",
    "angry_unknown",
)


def _border_walls(width_cells: int, height_cells: int) -> list[list[int]]:
    cells = []
    for c in range(width_cells):
        cells.append([c, 0])
        cells.append([c, height_cells - 1])
    for r in range(1, height_cells - 1):
        cells.append([0, r])
        cells.append([width_cells - 1, r])
    return cells


def canonical_document(emotion: Emotion, adaptation_enabled: bool,
                       seed: int = CANONICAL_SEED) -> dict:
    """Scenario document (JSON-serializable) for one canonical variant."""
    width_cells = round(ROOM_WIDTH_M / RESOLUTION)
    height_cells = round(ROOM_HEIGHT_M / RESOLUTION)
    return {
        "map": {
            "resolution": RESOLUTION,
            "width": width_cells,
            "height": height_cells,
            "occupied": _border_walls(width_cells, height_cells),
        },
        "robot": {
            "start": [1.0, 3.0, 0.0],
            "goal": [11.0, 3.0],
            "footprint_radius": 0.3,
        },
        "pedestrians": [
            {
                "id": "p1",
                "pose": [6.0, 3.0, -1.5707963267948966],
                "velocity": [0.0, 0.0],
                "emotion": emotion.value,
            }
        ],
        "adaptation_enabled": adaptation_enabled,
        "sim": {"dt": 0.1, "max_time": 60.0, "seed": seed},
    }


def canonical_scenario(emotion: Emotion, adaptation_enabled: bool,
                       seed: int = CANONICAL_SEED) -> Scenario:
    return load_scenario(json.dumps(canonical_document(emotion, adaptation_enabled, seed)))


def _variants() -> dict[str, tuple[Emotion, bool]]:
    return {
        "happy_known": (Emotion.HAPPY, True),
        "happy_unknown": (Emotion.HAPPY, False),
        "neutral": (Emotion.NEUTRAL, True),
        "angry_known": (Emotion.ANGRY, True),
        "angry_unknown": (Emotion.ANGRY, False),
    }


def write_canonical_scenarios(directory: Path) -> list[Path]:
    """Write the five canonical scenario files into a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (emotion, adaptation) in _variants().items():
        path = directory / f"{name}.json"
        path.write_text(json.dumps(canonical_document(emotion, adaptation), indent=2) + "\n")
        paths.append(path)
    return paths


def bundled_scenario_text(name: str) -> str:
    """JSON text of a bundled canonical scenario by name."""
    if name not in CANONICAL_NAMES:
        raise KeyError(f"unknown canonical scenario {name!r}; choose from {CANONICAL_NAMES}")
    return resources.files("socnav").joinpath(f"data/{name}.json").read_text()


def bundled_scenario(name: str) -> Scenario:
    return load_scenario(bundled_scenario_text(name))
