"""Scenario definition, occupancy-grid map, and robot/pedestrian kinematics."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

DEFAULT_RESOLUTION = 0.05       # m per cell
DEFAULT_FOOTPRINT_RADIUS = 0.3  # m, robot modelled as a circle
DEFAULT_BODY_RADIUS = 0.25      # m, pedestrian torso circle
DEFAULT_LEG_RADIUS = 0.07       # m
DEFAULT_LEG_SEPARATION = 0.25   # m, between leg centers
DEFAULT_SIM_DT = 0.1            # s
DEFAULT_MAX_SIM_TIME = 60.0     # s
DEFAULT_GOAL_TOLERANCE = 0.2    # m
DEFAULT_SEED = 0

# Absorbs one-ulp error in the (p - origin) / resolution quotient so that
# positions lying exactly on a cell boundary land in the upper cell.
_CELL_EPS = 1e-9


class ScenarioError(Exception):
    """Base class for scenario loading failures."""


class ParseError(ScenarioError):
    """The scenario document is malformed (bad JSON, missing/ill-typed keys)."""


class ValidationError(ScenarioError):
    """The scenario document parsed but violates a semantic constraint."""


class OutOfBounds(Exception):
    """A position or cell index lies outside the grid."""


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.remainder(a, math.tau)
    if a <= -math.pi:
        a += math.tau
    return a


@dataclass(frozen=True)
class Pose2D:
    """Planar pose; x, y in meters, theta in radians wrapped to (-pi, pi]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Velocity:
    """Differential-drive command: linear m/s, angular rad/s."""

    linear: float
    angular: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.linear) and math.isfinite(self.angular)):
            raise ValueError(f"velocity must be finite, got {self}")


class Emotion(Enum):
    HAPPY = "happy"
    NEUTRAL = "neutral"
    ANGRY = "angry"


_PROXEMIC_RADIUS_M = {
    Emotion.HAPPY: 0.5,
    Emotion.NEUTRAL: 1.0,
    Emotion.ANGRY: 1.5,
}


def proxemic_radius(emotion: Emotion) -> float:
    """Personal-space radius in meters for an emotional state."""
    return _PROXEMIC_RADIUS_M[emotion]


@dataclass(frozen=True)
class Pedestrian:
    id: str
    pose: Pose2D
    velocity: Velocity
    emotion: Emotion
    body_radius: float = DEFAULT_BODY_RADIUS
    leg_radius: float = DEFAULT_LEG_RADIUS
    leg_separation: float = DEFAULT_LEG_SEPARATION

    def __post_init__(self) -> None:
        if self.body_radius <= 0 or self.leg_radius <= 0:
            raise ValueError("pedestrian radii must be positive")
        if self.leg_separation <= 2 * self.leg_radius:
            raise ValueError("leg_separation must exceed the leg diameter")


def leg_centers(ped: Pedestrian) -> tuple[tuple[float, float], tuple[float, float]]:
    """Centers of the two leg circles, offset perpendicular to the heading."""
    half = 0.5 * ped.leg_separation
    px = -math.sin(ped.pose.theta) * half
    py = math.cos(ped.pose.theta) * half
    return (
        (ped.pose.x + px, ped.pose.y + py),
        (ped.pose.x - px, ped.pose.y - py),
    )


@dataclass(frozen=True)
class RobotState:
    pose: Pose2D
    velocity: Velocity
    footprint_radius: float = DEFAULT_FOOTPRINT_RADIUS

    def __post_init__(self) -> None:
        if self.footprint_radius <= 0:
            raise ValueError("footprint_radius must be positive")


@dataclass(frozen=True)
class GridMap:
    """Occupancy grid. `origin` is the world position of the corner of cell (0, 0)."""

    resolution: float
    width: int
    height: int
    origin: tuple[float, float]
    occupied: np.ndarray = field(repr=False)  # (height, width) bool

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must be at least 1x1")
        occ = np.ascontiguousarray(self.occupied, dtype=bool)
        if occ.shape != (self.height, self.width):
            raise ValueError(
                f"occupancy shape {occ.shape} does not match {self.height}x{self.width}"
            )
        occ.flags.writeable = False
        object.__setattr__(self, "occupied", occ)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))


def world_to_cell(p: tuple[float, float], grid: GridMap) -> tuple[int, int]:
    """Cell (col, row) containing world position `p`; raises OutOfBounds."""
    col = math.floor((p[0] - grid.origin[0]) / grid.resolution + _CELL_EPS)
    row = math.floor((p[1] - grid.origin[1]) / grid.resolution + _CELL_EPS)
    if not (0 <= col < grid.width and 0 <= row < grid.height):
        raise OutOfBounds(f"position {p} outside {grid.width}x{grid.height} grid")
    return col, row


def cell_to_world(c: tuple[int, int], grid: GridMap) -> tuple[float, float]:
    """World position of the center of cell `c` = (col, row); raises OutOfBounds."""
    col, row = c
    if not (0 <= col < grid.width and 0 <= row < grid.height):
        raise OutOfBounds(f"cell {c} outside {grid.width}x{grid.height} grid")
    return (
        grid.origin[0] + (col + 0.5) * grid.resolution,
        grid.origin[1] + (row + 0.5) * grid.resolution,
    )


def step_pose(pose: Pose2D, v: float, w: float, dt: float) -> Pose2D:
    """Advance a unicycle pose by a constant (v, w) command using exact arcs."""
    if abs(w) < 1e-6:
        x = pose.x + v * math.cos(pose.theta) * dt
        y = pose.y + v * math.sin(pose.theta) * dt
        theta = pose.theta + w * dt
    else:
        theta = pose.theta + w * dt
        r = v / w
        x = pose.x + r * (math.sin(theta) - math.sin(pose.theta))
        y = pose.y - r * (math.cos(theta) - math.cos(pose.theta))
    return Pose2D(x, y, theta)


def step_robot(s: RobotState, cmd: Velocity, dt: float) -> RobotState:
    """Integrate the robot one control period forward; velocity becomes `cmd`."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return RobotState(step_pose(s.pose, cmd.linear, cmd.angular, dt), cmd, s.footprint_radius)


def step_pedestrians(peds: list[Pedestrian], dt: float) -> list[Pedestrian]:
    """Advance every pedestrian by its own constant velocity; order preserved."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return [
        dataclasses.replace(p, pose=step_pose(p.pose, p.velocity.linear, p.velocity.angular, dt))
        for p in peds
    ]


@dataclass(frozen=True)
class Scenario:
    map: GridMap
    robot_start: Pose2D
    goal: tuple[float, float]
    pedestrians: tuple[Pedestrian, ...]
    adaptation_enabled: bool = True
    sim_dt: float = DEFAULT_SIM_DT
    max_sim_time: float = DEFAULT_MAX_SIM_TIME
    goal_tolerance: float = DEFAULT_GOAL_TOLERANCE
    seed: int = DEFAULT_SEED
    footprint_radius: float = DEFAULT_FOOTPRINT_RADIUS

    def __post_init__(self) -> None:
        if self.sim_dt <= 0:
            raise ValidationError("sim dt must be positive")
        if self.max_sim_time <= 0:
            raise ValidationError("max_sim_time must be positive")
        if self.goal_tolerance <= 0:
            raise ValidationError("goal_tolerance must be positive")
        object.__setattr__(self, "goal", (float(self.goal[0]), float(self.goal[1])))
        object.__setattr__(self, "pedestrians", tuple(self.pedestrians))


def _require(obj: dict, key: str, kind: type, where: str):
    if key not in obj:
        raise ParseError(f"missing key '{key}' in {where}")
    value = obj[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"key '{key}' in {where} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise ParseError(f"key '{key}' in {where} must be {kind.__name__}")
    return value


def _number_list(value, n: int, where: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ParseError(f"{where} must be a list of {n} numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{where} must contain only numbers")
        out.append(float(v))
    return out


def _parse_map(doc: dict) -> GridMap:
    resolution = float(doc.get("resolution", DEFAULT_RESOLUTION))
    if resolution <= 0:
        raise ValidationError("map resolution must be positive")
    origin = tuple(_number_list(doc.get("origin", [0.0, 0.0]), 2, "map.origin"))

    if "ascii" in doc:
        rows = doc["ascii"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, str) for r in rows):
            raise ParseError("map.ascii must be a non-empty list of strings")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ParseError("map.ascii rows must all have the same length")
        if width == 0:
            raise ParseError("map.ascii rows must be non-empty")
        occ = np.zeros((len(rows), width), dtype=bool)
        # First line of the document is the top of the map (largest y).
        for r, line in enumerate(reversed(rows)):
            for c, ch in enumerate(line):
                if ch == "#":
                    occ[r, c] = True
                elif ch != ".":
                    raise ParseError(f"map.ascii contains invalid character {ch!r}")
        return GridMap(resolution, width, len(rows), origin, occ)

    width = _require(doc, "width", int, "map")
    height = _require(doc, "height", int, "map")
    if isinstance(width, bool) or isinstance(height, bool) or width < 1 or height < 1:
        raise ParseError("map width/height must be positive integers")
    occ = np.zeros((height, width), dtype=bool)
    for entry in doc.get("occupied", []):
        col, row = _number_list(entry, 2, "map.occupied entry")
        col, row = int(col), int(row)
        if not (0 <= col < width and 0 <= row < height):
            raise ParseError(f"occupied cell ({col},{row}) outside {width}x{height} map")
        occ[row, col] = True
    return GridMap(resolution, width, height, origin, occ)


def load_scenario(text: str) -> Scenario:
    """Parse and validate a JSON scenario document.

    Schema: an object with keys `map` (inline `{resolution, width, height,
    occupied: [[col,row], ...]}` or `{ascii: [...]}` where `#` is occupied and
    `.` free, first line topmost), `robot` `{start: [x,y,theta], goal: [x,y],
    footprint_radius}`, `pedestrians` (array of `{id, pose: [x,y,theta],
    velocity: [v,w], emotion: "happy"|"neutral"|"angry"}`),
    `adaptation_enabled` (bool), and `sim` `{dt, max_time, seed}`. Lengths in
    meters, angles in radians. Omitted optional fields get defaults.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a JSON object")

    grid = _parse_map(_require(doc, "map", dict, "scenario"))

    robot = _require(doc, "robot", dict, "scenario")
    sx, sy, stheta = _number_list(_require(robot, "start", list, "robot"), 3, "robot.start")
    gx, gy = _number_list(_require(robot, "goal", list, "robot"), 2, "robot.goal")
    footprint = float(robot.get("footprint_radius", DEFAULT_FOOTPRINT_RADIUS))
    if footprint <= 0:
        raise ValidationError("robot footprint_radius must be positive")

    peds = []
    entries = doc.get("pedestrians", [])
    if not isinstance(entries, list):
        raise ParseError("pedestrians must be an array")
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ParseError(f"pedestrians[{i}] must be an object")
        where = f"pedestrians[{i}]"
        px, py, ptheta = _number_list(_require(entry, "pose", list, where), 3, f"{where}.pose")
        pv, pw = _number_list(entry.get("velocity", [0.0, 0.0]), 2, f"{where}.velocity")
        emotion_name = _require(entry, "emotion", str, where)
        try:
            emotion = Emotion(emotion_name.lower())
        except ValueError:
            raise ParseError(f"{where}.emotion {emotion_name!r} not one of happy/neutral/angry")
        try:
            peds.append(
                Pedestrian(
                    id=str(entry.get("id", i)),
                    pose=Pose2D(px, py, ptheta),
                    velocity=Velocity(pv, pw),
                    emotion=emotion,
                    body_radius=float(entry.get("body_radius", DEFAULT_BODY_RADIUS)),
                    leg_radius=float(entry.get("leg_radius", DEFAULT_LEG_RADIUS)),
                    leg_separation=float(entry.get("leg_separation", DEFAULT_LEG_SEPARATION)),
                )
            )
        except ValueError as e:
            raise ValidationError(f"{where}: {e}") from e

    sim = doc.get("sim", {})
    if not isinstance(sim, dict):
        raise ParseError("sim must be an object")
    seed = sim.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ParseError("sim.seed must be a non-negative integer")

    for label, (x, y) in (("start", (sx, sy)), ("goal", (gx, gy))):
        try:
            col, row = world_to_cell((x, y), grid)
        except OutOfBounds:
            raise ValidationError(f"{label} ({x}, {y}) is outside the map")
        if grid.occupied[row, col]:
            raise ValidationError(f"{label} ({x}, {y}) lies on an occupied cell")

    return Scenario(
        map=grid,
        robot_start=Pose2D(sx, sy, stheta),
        goal=(gx, gy),
        pedestrians=tuple(peds),
        adaptation_enabled=bool(doc.get("adaptation_enabled", True)),
        sim_dt=float(sim.get("dt", DEFAULT_SIM_DT)),
        max_sim_time=float(sim.get("max_time", DEFAULT_MAX_SIM_TIME)),
        goal_tolerance=float(sim.get("goal_tolerance", DEFAULT_GOAL_TOLERANCE)),
        seed=seed,
        footprint_radius=footprint,
    )
