"""Per-timestep human-safety measurements and per-run aggregates.

The social individual index (SII) is a Gaussian proximity measure with
sigma = r_p / 2, where r_p is the person's true personal-space radius. Under
that convention the index crosses exp(-2) exactly at distance r_p, so the
physiological-safety predicate (distance below personal space) and the SII
threshold test agree everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .world import Pedestrian, Pose2D, Scenario, proxemic_radius

SII_THRESHOLD = math.exp(-2.0)


class EmptyRun(Exception):
    """A run with no recorded timesteps cannot be summarized."""


def sii(robot: tuple[float, float], person: tuple[float, float], r_p: float) -> float:
    """Gaussian encroachment index in (0, 1]; 1 at zero distance."""
    if r_p <= 0:
        raise ValueError("r_p must be positive")
    d = math.hypot(robot[0] - person[0], robot[1] - person[1])
    sigma = r_p / 2.0
    return math.exp(-(d * d) / (2.0 * sigma * sigma))


def sii_threshold() -> float:
    """SII value at the personal-space boundary: sii > threshold iff d < r_p."""
    return SII_THRESHOLD


def physical_violation(d: float, robot_r: float, person_r: float) -> bool:
    """True when the bodies' circles would overlap (strict inequality)."""
    if robot_r <= 0 or person_r <= 0:
        raise ValueError("radii must be positive")
    return d < robot_r + person_r


def physiological_violation(d: float, r_p: float) -> bool:
    """True when the robot is inside the person's true personal space."""
    if r_p <= 0:
        raise ValueError("r_p must be positive")
    return d < r_p


def path_length(poses: list[Pose2D]) -> float:
    """Sum of consecutive segment lengths, 0 for fewer than two poses."""
    total = 0.0
    for a, b in zip(poses, poses[1:]):
        total += math.hypot(b.x - a.x, b.y - a.y)
    return total


@dataclass(frozen=True)
class PersonSafety:
    person_id: str
    distance: float
    sii: float
    sii_threshold: float
    physical_violation: bool
    physiological_violation: bool


@dataclass(frozen=True)
class SafetyRecord:
    t: float
    people: tuple[PersonSafety, ...]


@dataclass(frozen=True)
class PersonSummary:
    person_id: str
    min_distance: float
    sii_peak: float
    physiological_violation_steps: int
    physical_violation_steps: int


@dataclass(frozen=True)
class RunSummary:
    success: bool
    path_length: float
    duration: float
    people: tuple[PersonSummary, ...]
    sii_peak: float
    physiological_violation_steps: int
    physical_violation_steps: int


def measure_safety(robot_pose: Pose2D, robot_radius: float,
                   peds: list[Pedestrian], t: float) -> SafetyRecord:
    """Safety entries for one timestep against the true pedestrian states."""
    entries = []
    for ped in peds:
        d = math.hypot(robot_pose.x - ped.pose.x, robot_pose.y - ped.pose.y)
        r_true = proxemic_radius(ped.emotion)
        entries.append(
            PersonSafety(
                person_id=ped.id,
                distance=d,
                sii=sii((robot_pose.x, robot_pose.y), (ped.pose.x, ped.pose.y), r_true),
                sii_threshold=SII_THRESHOLD,
                physical_violation=physical_violation(d, robot_radius, ped.body_radius),
                physiological_violation=physiological_violation(d, r_true),
            )
        )
    return SafetyRecord(t, tuple(entries))


def summarize_run(records: list[SafetyRecord], poses: list[Pose2D],
                  scenario: Scenario) -> RunSummary:
    """Aggregate a time-ordered record stream into per-run metrics.

    sii_peak is the maximum over all timesteps and people, 0 by convention
    when the scenario has no pedestrians.
    """
    if not records or not poses:
        raise EmptyRun("no recorded timesteps")

    last = poses[-1]
    success = math.hypot(last.x - scenario.goal[0], last.y - scenario.goal[1]) \
        <= scenario.goal_tolerance

    by_person: dict[str, list[PersonSafety]] = {}
    for rec in records:
        for entry in rec.people:
            by_person.setdefault(entry.person_id, []).append(entry)

    people = []
    for ped in scenario.pedestrians:
        entries = by_person.get(ped.id, [])
        if not entries:
            continue
        people.append(
            PersonSummary(
                person_id=ped.id,
                min_distance=min(e.distance for e in entries),
                sii_peak=max(e.sii for e in entries),
                physiological_violation_steps=sum(e.physiological_violation for e in entries),
                physical_violation_steps=sum(e.physical_violation for e in entries),
            )
        )

    return RunSummary(
        success=success,
        path_length=path_length(poses),
        duration=records[-1].t,
        people=tuple(people),
        sii_peak=max((p.sii_peak for p in people), default=0.0),
        physiological_violation_steps=sum(p.physiological_violation_steps for p in people),
        physical_violation_steps=sum(p.physical_violation_steps for p in people),
    )


def summary_to_dict(summary: RunSummary) -> dict:
    """Metrics JSON payload with fixed key order."""
    return {
        "success": summary.success,
        "path_length_m": round(summary.path_length, 6),
        "duration_s": round(summary.duration, 6),
        "per_person": [
            {
                "id": p.person_id,
                "min_distance_m": round(p.min_distance, 6),
                "sii_peak": round(p.sii_peak, 6),
                "physiological_violation_steps": p.physiological_violation_steps,
                "physical_violation_steps": p.physical_violation_steps,
            }
            for p in summary.people
        ],
        "sii_threshold": round(SII_THRESHOLD, 6),
    }
