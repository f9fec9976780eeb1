"""Layered costmaps: static, obstacle, inflation, and emotion-scaled social layers.

Costs are unsigned integers in [0, 254]: 254 marks an occupied (lethal) cell,
253 a cell whose center is within the robot footprint of a lethal cell, and 0
free space. Layers compose by per-cell maximum. The social layer adds a
Gaussian bump around each detected person whose spread scales with the
person's personal-space radius (sigma = radius / 2), so the bump holds about
13.5% of its peak exactly at the personal-space boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import raycast
from .world import DEFAULT_FOOTPRINT_RADIUS, Emotion, GridMap, proxemic_radius
from .sensing import LaserScan, PersonDetection, scan_endpoints

FREE = 0
INSCRIBED = 253
LETHAL = 254

DEFAULT_LOCAL_WINDOW = 3.0  # m, half-side of the robot-centered local costmap

_CELL_EPS = 1e-9


class WindowOutsideMap(Exception):
    """The requested local window does not intersect the map at all."""


@dataclass(frozen=True)
class Costmap:
    resolution: float
    width: int
    height: int
    origin: tuple[float, float]
    costs: np.ndarray = field(repr=False)  # (height, width) uint8

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        costs = np.ascontiguousarray(self.costs, dtype=np.uint8)
        if costs.shape != (self.height, self.width):
            raise ValueError("costs shape does not match width/height")
        costs.flags.writeable = False
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    def like(self, costs: np.ndarray) -> "Costmap":
        return Costmap(self.resolution, self.width, self.height, self.origin, costs)


@dataclass(frozen=True)
class SocialAgent:
    position: tuple[float, float]
    proxemic_radius: float
    emotion: Emotion

    def __post_init__(self) -> None:
        if self.proxemic_radius <= 0:
            raise ValueError("proxemic_radius must be positive")


@dataclass(frozen=True)
class LayerParams:
    inflation_inscribed_radius: float = DEFAULT_FOOTPRINT_RADIUS
    inflation_decay: float = 5.0       # 1/m
    inflation_cutoff: float = 0.7      # m
    social_amplitude: int = 253
    social_cutoff_sigmas: float = 3.0
    cost_weight: float = 3.0           # used by the global planner's edge costs

    def __post_init__(self) -> None:
        if self.inflation_inscribed_radius <= 0 or self.inflation_cutoff <= 0:
            raise ValueError("inflation radii must be positive")
        if self.inflation_decay <= 0:
            raise ValueError("inflation_decay must be positive")
        if not 1 <= self.social_amplitude <= 253:
            raise ValueError("social_amplitude must be in [1, 253]")
        if self.social_cutoff_sigmas <= 0:
            raise ValueError("social_cutoff_sigmas must be positive")


def build_static_layer(grid: GridMap) -> Costmap:
    """Occupied cells become LETHAL, free cells 0."""
    costs = np.where(grid.occupied, LETHAL, FREE).astype(np.uint8)
    return Costmap(grid.resolution, grid.width, grid.height, grid.origin, costs)


def apply_obstacle_layer(cm: Costmap, scan: LaserScan,
                         static_map: GridMap | None = None) -> Costmap:
    """Mark returning-beam endpoints LETHAL and clear the cells each beam crossed.

    Cells traversed before a beam's endpoint are reset to 0 unless they are
    occupied in `static_map` (the static layer of the current composition
    pass). Non-returning beams neither mark nor clear. Endpoints and traversal
    are clipped to the costmap extent.
    """
    start = (scan.origin.x, scan.origin.y)
    col = math.floor((start[0] - cm.origin[0]) / cm.resolution + _CELL_EPS)
    row = math.floor((start[1] - cm.origin[1]) / cm.resolution + _CELL_EPS)
    if not (0 <= col < cm.width and 0 <= row < cm.height):
        raise ValueError(f"scan origin {start} outside costmap")

    returning = scan.ranges < scan.config.range_max
    costs = cm.costs.copy()
    if not returning.any():
        return cm.like(costs)

    angles = (scan.origin.theta + scan.config.beam_angles())[returning]
    stops = scan.ranges[returning]

    # Clearing can only change cells that are neither free nor protected, so a
    # costmap that is exactly the static layer (the compose_local case) can
    # skip the traversal without changing the result.
    is_pristine_static = static_map is not None and np.array_equal(
        costs, np.where(static_map.occupied, LETHAL, FREE).astype(np.uint8))
    if not is_pristine_static:
        cleared = raycast.traversed_cells((cm.height, cm.width), cm.resolution,
                                          cm.origin, start, angles, stops)
        if static_map is not None:
            cleared &= ~static_map.occupied
        costs[cleared] = FREE

    endpoints = scan_endpoints(scan)[returning]
    cols = np.floor((endpoints[:, 0] - cm.origin[0]) / cm.resolution + _CELL_EPS).astype(int)
    rows = np.floor((endpoints[:, 1] - cm.origin[1]) / cm.resolution + _CELL_EPS).astype(int)
    inside = (cols >= 0) & (cols < cm.width) & (rows >= 0) & (rows < cm.height)
    costs[rows[inside], cols[inside]] = LETHAL
    return cm.like(costs)


def apply_inflation_layer(cm: Costmap, p: LayerParams = LayerParams()) -> Costmap:
    """Raise costs near LETHAL cells from their exact Euclidean distance field.

    Distance d is measured cell-center to cell-center in meters. Cells with
    d <= inscribed radius become at least INSCRIBED; within the cutoff the
    cost is at least round(252 * exp(-decay * (d - inscribed))); farther cells
    are untouched. Existing higher costs are never lowered.
    """
    lethal = cm.costs == LETHAL
    if not lethal.any():
        return cm
    d = ndimage.distance_transform_edt(~lethal, sampling=cm.resolution)
    costs = cm.costs.copy()

    inner = d <= p.inflation_inscribed_radius
    costs[inner] = np.maximum(costs[inner], INSCRIBED)

    band = ~inner & (d <= p.inflation_cutoff)
    decayed = np.rint(252.0 * np.exp(-p.inflation_decay * (d[band] - p.inflation_inscribed_radius)))
    costs[band] = np.maximum(costs[band], decayed.astype(np.uint8))
    return cm.like(costs)


def social_cost(d: float, r_p: float, amplitude: int,
                cutoff_sigmas: float = 3.0) -> int:
    """Gaussian personal-space cost at distance d from a person.

    sigma is r_p / 2; beyond cutoff_sigmas * sigma the cost is exactly 0.
    """
    if d < 0:
        raise ValueError("distance must be non-negative")
    if r_p <= 0:
        raise ValueError("r_p must be positive")
    sigma = r_p / 2.0
    if d > cutoff_sigmas * sigma:
        return 0
    return int(np.rint(amplitude * np.exp(-(d * d) / (2.0 * sigma * sigma))))


def emotion_to_agent(det: PersonDetection, emotion: Emotion,
                     adaptation_enabled: bool) -> SocialAgent:
    """Assign the personal-space radius the robot will respect for a detection.

    With adaptation on, the radius follows the person's emotion; with
    adaptation off the robot assumes the neutral radius.
    """
    radius = proxemic_radius(emotion) if adaptation_enabled else proxemic_radius(Emotion.NEUTRAL)
    return SocialAgent(det.position, radius, emotion)


def apply_social_layer(cm: Costmap, agents: list[SocialAgent],
                       p: LayerParams = LayerParams()) -> Costmap:
    """Per-cell max of the existing costs and every agent's Gaussian bump.

    The amplitude is capped at 253, so this layer never writes LETHAL.
    """
    if not agents:
        return cm
    costs = cm.costs.copy()
    res = cm.resolution
    for agent in agents:
        sigma = agent.proxemic_radius / 2.0
        cutoff = p.social_cutoff_sigmas * sigma
        ax, ay = agent.position
        c0 = max(0, math.floor((ax - cutoff - cm.origin[0]) / res + _CELL_EPS))
        c1 = min(cm.width, math.floor((ax + cutoff - cm.origin[0]) / res + _CELL_EPS) + 1)
        r0 = max(0, math.floor((ay - cutoff - cm.origin[1]) / res + _CELL_EPS))
        r1 = min(cm.height, math.floor((ay + cutoff - cm.origin[1]) / res + _CELL_EPS) + 1)
        if c0 >= c1 or r0 >= r1:
            continue
        xs = cm.origin[0] + (np.arange(c0, c1) + 0.5) * res - ax
        ys = cm.origin[1] + (np.arange(r0, r1) + 0.5) * res - ay
        d = np.sqrt(xs[None, :] ** 2 + ys[:, None] ** 2)
        bump = np.rint(p.social_amplitude * np.exp(-(d * d) / (2.0 * sigma * sigma)))
        bump[d > cutoff] = 0
        patch = costs[r0:r1, c0:c1]
        costs[r0:r1, c0:c1] = np.maximum(patch, bump.astype(np.uint8))
    return cm.like(costs)


def compose_global(grid: GridMap, params: LayerParams = LayerParams()) -> Costmap:
    """Whole-map costmap for the global planner: static walls plus inflation.

    The social layer is deliberately excluded; people are handled locally.
    """
    return apply_inflation_layer(build_static_layer(grid), params)


def window_bounds(grid: GridMap, center: tuple[float, float],
                  window: float) -> tuple[int, int, int, int]:
    """Grid-aligned (col0, col1, row0, row1) of a 2*window square, clipped."""
    res = grid.resolution
    n = int(round(2.0 * window / res))
    c_lo = math.floor((center[0] - window - grid.origin[0]) / res + _CELL_EPS)
    r_lo = math.floor((center[1] - window - grid.origin[1]) / res + _CELL_EPS)
    c0, c1 = max(0, c_lo), min(grid.width, c_lo + n)
    r0, r1 = max(0, r_lo), min(grid.height, r_lo + n)
    if c0 >= c1 or r0 >= r1:
        raise WindowOutsideMap(f"window around {center} misses the map")
    return c0, c1, r0, r1


def compose_local(grid: GridMap, scan: LaserScan, detections: list[PersonDetection],
                  emotions: list[Emotion], adaptation_enabled: bool,
                  params: LayerParams = LayerParams(),
                  window: float = DEFAULT_LOCAL_WINDOW) -> Costmap:
    """Robot-centered costmap with all four layers.

    The window is a square of side 2*window centered on the scan origin,
    aligned to the global grid and clipped at the map edges. Layer order:
    static crop, obstacle marking/clearing from the scan, inflation, then the
    social bumps for each detection with its associated emotion.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    if len(detections) != len(emotions):
        raise ValueError("detections and emotions must be parallel lists")
    c0, c1, r0, r1 = window_bounds(grid, (scan.origin.x, scan.origin.y), window)
    sub = GridMap(
        grid.resolution,
        c1 - c0,
        r1 - r0,
        (grid.origin[0] + c0 * grid.resolution, grid.origin[1] + r0 * grid.resolution),
        grid.occupied[r0:r1, c0:c1],
    )
    cm = build_static_layer(sub)
    cm = apply_obstacle_layer(cm, scan, static_map=sub)
    cm = apply_inflation_layer(cm, params)
    agents = [emotion_to_agent(d, e, adaptation_enabled) for d, e in zip(detections, emotions)]
    return apply_social_layer(cm, agents, params)


def to_text(cm: Costmap) -> str:
    """Portable text form: a header line then one row of integers per grid row."""
    header = f"{cm.width} {cm.height} {cm.resolution!r} {cm.origin[0]!r} {cm.origin[1]!r}"
    rows = [" ".join(str(int(v)) for v in cm.costs[r]) for r in range(cm.height)]
    return "\n".join([header] + rows) + "\n"


def from_text(text: str) -> Costmap:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty costmap text")
    head = lines[0].split()
    if len(head) != 5:
        raise ValueError("costmap header must be: width height resolution ox oy")
    width, height = int(head[0]), int(head[1])
    resolution, ox, oy = float(head[2]), float(head[3]), float(head[4])
    if len(lines) != height + 1:
        raise ValueError(f"expected {height} rows, got {len(lines) - 1}")
    costs = np.array([[int(v) for v in ln.split()] for ln in lines[1:]], dtype=np.uint8)
    return Costmap(resolution, width, height, (ox, oy), costs)
