"""Planar lidar simulation and person detection by leg clustering and pairing.

The detector is purely geometric: scan clusters whose width matches a human
leg get a confidence score, nearby leg candidates are paired into people, and
leftovers become lower-confidence single-leg detections. Furniture with
leg-like cross sections will be detected as people; that is accepted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial.distance import pdist

from . import raycast
from .world import GridMap, OutOfBounds, Pedestrian, Pose2D, leg_centers, world_to_cell

DEFAULT_N_BEAMS = 720
DEFAULT_RANGE_MAX = 8.0          # m
DEFAULT_JUMP_THRESHOLD = 0.13    # m between consecutive endpoints in one cluster
DEFAULT_PAIRING_DIST = 0.4       # m between paired leg candidates
MIN_CLUSTER_POINTS = 3
LEG_WIDTH_MIN = 0.05             # m, full-confidence cluster width band
LEG_WIDTH_MAX = 0.25
LEG_WIDTH_MARGIN = 0.05          # m, linear decay band outside [min, max]
PAIR_MIN_CONFIDENCE = 0.5


class RobotOutsideMap(Exception):
    """The scan origin does not lie inside the grid."""


@dataclass(frozen=True)
class ScanConfig:
    n_beams: int = DEFAULT_N_BEAMS
    angle_min: float = -math.pi
    angle_max: float = math.pi
    range_max: float = DEFAULT_RANGE_MAX
    range_noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.n_beams < 2:
            raise ValueError("n_beams must be at least 2")
        if self.angle_min >= self.angle_max:
            raise ValueError("angle_min must be below angle_max")
        if self.range_max <= 0:
            raise ValueError("range_max must be positive")
        if self.range_noise_sigma < 0:
            raise ValueError("range_noise_sigma must be non-negative")

    def beam_angles(self) -> np.ndarray:
        """Beam directions in the robot frame; angle_max itself is excluded."""
        step = (self.angle_max - self.angle_min) / self.n_beams
        return self.angle_min + step * np.arange(self.n_beams)


@dataclass(frozen=True)
class LaserScan:
    config: ScanConfig
    origin: Pose2D
    ranges: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        r = np.ascontiguousarray(self.ranges, dtype=float)
        if r.shape != (self.config.n_beams,):
            raise ValueError("ranges length must equal n_beams")
        r.flags.writeable = False
        object.__setattr__(self, "ranges", r)


@dataclass(frozen=True)
class ScanCluster:
    """Returning beams, contiguous on the scan circle, forming one blob.

    end_beam is inclusive; end_beam < start_beam marks a cluster that wraps
    across the first/last beam seam of a full-circle scan.
    """

    start_beam: int
    end_beam: int
    points: np.ndarray = field(repr=False)  # (k, 2) world positions, beam order
    width: float = 0.0

    def centroid(self) -> tuple[float, float]:
        c = self.points.mean(axis=0)
        return (float(c[0]), float(c[1]))


class DetectionSource(Enum):
    LEG_PAIR = "leg_pair"
    SINGLE_LEG = "single_leg"


@dataclass(frozen=True)
class PersonDetection:
    position: tuple[float, float]
    confidence: float
    source: DetectionSource


def simulate_scan(grid: GridMap, robot_pose: Pose2D, peds: list[Pedestrian],
                  cfg: ScanConfig = ScanConfig(), rng_seed=None) -> LaserScan:
    """Raycast the map walls and pedestrian leg circles from the robot pose.

    Per beam, the range is the nearer of the grid hit (DDA cell traversal) and
    the closest analytic ray-circle hit against every leg, clipped to
    range_max. With a positive noise sigma, Gaussian noise from a generator
    seeded with `rng_seed` is added and the result re-clipped to (0, range_max].
    """
    try:
        world_to_cell((robot_pose.x, robot_pose.y), grid)
    except OutOfBounds as e:
        raise RobotOutsideMap(str(e)) from e

    angles = robot_pose.theta + cfg.beam_angles()
    start = (robot_pose.x, robot_pose.y)
    ranges = raycast.grid_ranges(grid.occupied, grid.resolution, grid.origin,
                                 start, angles, cfg.range_max)

    if peds:
        centers = []
        radii = []
        for ped in peds:
            a, b = leg_centers(ped)
            centers.extend([a, b])
            radii.extend([ped.leg_radius, ped.leg_radius])
        leg_hits = raycast.circle_ranges(start, angles, np.array(centers), np.array(radii))
        ranges = np.minimum(ranges, leg_hits)

    ranges = np.minimum(ranges, cfg.range_max)
    if cfg.range_noise_sigma > 0:
        rng = np.random.default_rng(rng_seed)
        ranges = ranges + rng.normal(0.0, cfg.range_noise_sigma, cfg.n_beams)
        ranges = np.clip(ranges, 1e-9, cfg.range_max)
    return LaserScan(cfg, robot_pose, ranges)


def scan_endpoints(scan: LaserScan) -> np.ndarray:
    """World (x, y) endpoint of every beam, including non-returning ones."""
    angles = scan.origin.theta + scan.config.beam_angles()
    return np.stack(
        [scan.origin.x + scan.ranges * np.cos(angles),
         scan.origin.y + scan.ranges * np.sin(angles)],
        axis=1,
    )


def _cluster_width(points: np.ndarray) -> float:
    return float(pdist(points).max())


def cluster_scan(scan: LaserScan, jump_threshold: float = DEFAULT_JUMP_THRESHOLD) -> list[ScanCluster]:
    """Group consecutive returning beams into clusters of nearby endpoints.

    Beams at range_max break clusters, as does an endpoint jump of
    `jump_threshold` or more. Contiguity is modular: the first and last
    clusters of a scan merge when they meet across the beam seam. Clusters
    with fewer than three points are discarded.
    """
    n = scan.config.n_beams
    returning = scan.ranges < scan.config.range_max
    points = scan_endpoints(scan)
    runs: list[tuple[int, int]] = []
    run_start = None
    prev = None
    for i in range(n):
        if not returning[i]:
            if run_start is not None:
                runs.append((run_start, i - 1))
                run_start = None
            continue
        if run_start is None:
            run_start = i
        elif math.hypot(points[i, 0] - prev[0], points[i, 1] - prev[1]) >= jump_threshold:
            runs.append((run_start, i - 1))
            run_start = i
        prev = (points[i, 0], points[i, 1])
    if run_start is not None:
        runs.append((run_start, n - 1))

    wrapped = None
    if (len(runs) >= 2 and runs[0][0] == 0 and runs[-1][1] == n - 1
            and math.hypot(points[0, 0] - points[n - 1, 0],
                           points[0, 1] - points[n - 1, 1]) < jump_threshold):
        wrapped = (runs[-1][0], runs[0][1])
        runs = runs[1:-1]

    out = []
    for start, end in runs:
        if end - start + 1 < MIN_CLUSTER_POINTS:
            continue
        pts = points[start:end + 1].copy()
        out.append(ScanCluster(start, end, pts, _cluster_width(pts)))
    if wrapped is not None:
        start, end = wrapped
        if (n - start) + end + 1 >= MIN_CLUSTER_POINTS:
            pts = np.concatenate([points[start:], points[:end + 1]])
            out.append(ScanCluster(start, end, pts, _cluster_width(pts)))
    return out


def classify_leg(cluster: ScanCluster) -> float:
    """Confidence in [0, 1] that a cluster is a leg, from its width alone.

    Width inside [LEG_WIDTH_MIN, LEG_WIDTH_MAX] scores 1.0; the score decays
    linearly to 0 over LEG_WIDTH_MARGIN outside the band.
    """
    w = cluster.width
    if w < LEG_WIDTH_MIN:
        return max(0.0, 1.0 - (LEG_WIDTH_MIN - w) / LEG_WIDTH_MARGIN)
    if w > LEG_WIDTH_MAX:
        return max(0.0, 1.0 - (w - LEG_WIDTH_MAX) / LEG_WIDTH_MARGIN)
    return 1.0


def pair_legs(legs: list[tuple[tuple[float, float], float]],
              pairing_dist: float = DEFAULT_PAIRING_DIST) -> list[PersonDetection]:
    """Greedily pair leg candidates into person detections.

    Only candidates with confidence >= 0.5 take part. Pairs are matched in
    ascending distance order (ties broken by lower list index, which callers
    keep in beam order) up to `pairing_dist`; each candidate is used at most
    once. A pair yields one detection at the midpoint with the mean
    confidence; unpaired candidates become single-leg detections at half
    confidence.
    """
    candidates = [i for i, (_, conf) in enumerate(legs) if conf >= PAIR_MIN_CONFIDENCE]
    pairs = []
    for a in range(len(candidates)):
        for b in range(a + 1, len(candidates)):
            i, j = candidates[a], candidates[b]
            d = math.hypot(legs[i][0][0] - legs[j][0][0], legs[i][0][1] - legs[j][0][1])
            if d <= pairing_dist:
                pairs.append((d, i, j))
    pairs.sort()

    used = set()
    detections = []
    for d, i, j in pairs:
        if i in used or j in used:
            continue
        used.add(i)
        used.add(j)
        (xi, yi), ci = legs[i]
        (xj, yj), cj = legs[j]
        detections.append(
            PersonDetection(((xi + xj) / 2.0, (yi + yj) / 2.0), (ci + cj) / 2.0,
                            DetectionSource.LEG_PAIR)
        )
    for i in candidates:
        if i not in used:
            (x, y), conf = legs[i]
            detections.append(PersonDetection((x, y), conf / 2.0, DetectionSource.SINGLE_LEG))
    return detections


def detect_people(scan: LaserScan) -> list[PersonDetection]:
    """Full pipeline with module defaults: cluster, classify, pair."""
    clusters = cluster_scan(scan)
    legs = [(c.centroid(), classify_leg(c)) for c in clusters]
    return pair_legs(legs)


def scan_to_csv_rows(scan: LaserScan) -> list[tuple[int, float, float]]:
    """(beam_index, angle, range) rows for debug dumps; angles in robot frame."""
    angles = scan.config.beam_angles()
    return [(i, float(angles[i]), float(scan.ranges[i])) for i in range(scan.config.n_beams)]
