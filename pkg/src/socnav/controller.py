"""Closed-loop simulation: sense, detect, compose costmaps, plan, act, record.

Each timestep runs the full pipeline at the simulation rate. The initial
global plan is a goal-rooted Dijkstra field over the static global costmap
(static walls plus inflation, people excluded). Every second of simulated
time, or after two consecutive local-planner recoveries, the plan is
refreshed over a whole-map costmap rebuilt from the current scan with all
four layers, so the refreshed path routes around detected people at their
emotion-scaled personal-space distance and the local planner mainly tracks
it. Without the social layer in replans, a straight-through path pins the
dynamic-window planner against the person's cost bump and the robot freezes.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from . import costmap as costmap_mod
from . import metrics, planning, sensing
from .costmap import DEFAULT_LOCAL_WINDOW, LayerParams
from .metrics import RunSummary, SafetyRecord
from .planning import DWAConfig, GoalField, GlobalPath, PlanningError
from .sensing import LaserScan, PersonDetection, ScanConfig
from .world import (
    Emotion,
    Pose2D,
    RobotState,
    Scenario,
    Velocity,
    step_pedestrians,
    step_robot,
)

EMOTION_MATCH_RADIUS = 0.5   # m, detection-to-pedestrian emotion association
REPLAN_PERIOD = 1.0          # s of simulated time between global replans
RECOVERY_REPLAN_COUNT = 2    # consecutive recoveries that force a replan

_EPS = 1e-9


class PlanningFailed(Exception):
    """No initial global path exists for the scenario."""


@dataclass
class RunLog:
    """Time-aligned streams, one entry per recorded timestep (spacing sim_dt).

    global_path holds the most recent global plan (the initial one until the
    first replan). Scans are kept only when requested; they are large.
    """

    poses: list[Pose2D] = field(default_factory=list)
    commands: list[Velocity] = field(default_factory=list)
    detections: list[list[PersonDetection]] = field(default_factory=list)
    safety: list[SafetyRecord] = field(default_factory=list)
    replan_events: list[float] = field(default_factory=list)
    global_path: GlobalPath | None = None
    scans: list[LaserScan] = field(default_factory=list)
    record_scans: bool = False


@dataclass(frozen=True)
class ComparisonRecord:
    """Paired adaptation-on / adaptation-off runs of one scenario."""

    known: RunSummary
    unknown: RunSummary
    deltas: dict


def _associate_emotions(detections: list[PersonDetection], peds) -> list[Emotion]:
    """Emotion of the nearest true pedestrian within range, else neutral."""
    out = []
    for det in detections:
        best = None
        best_d = EMOTION_MATCH_RADIUS
        for ped in peds:
            d = math.hypot(det.position[0] - ped.pose.x, det.position[1] - ped.pose.y)
            if d <= best_d:
                best = ped.emotion
                best_d = d
        out.append(best if best is not None else Emotion.NEUTRAL)
    return out


def run(scenario: Scenario, layer_params: LayerParams = LayerParams(),
        dwa: DWAConfig = DWAConfig(), scan_config: ScanConfig = ScanConfig(),
        local_window: float = DEFAULT_LOCAL_WINDOW,
        record_scans: bool = False) -> tuple[RunLog, RunSummary]:
    """Simulate one scenario to the goal or timeout.

    Raises PlanningFailed when no initial global path exists. The returned log
    holds one row per timestep; safety records are measured against the true
    pedestrian states, not the detections.
    """
    grid = scenario.map
    global_cm = costmap_mod.compose_global(grid, layer_params)
    try:
        field = GoalField(global_cm, scenario.goal, layer_params.cost_weight)
        path = field.path_from((scenario.robot_start.x, scenario.robot_start.y))
    except PlanningError as e:
        raise PlanningFailed(str(e)) from e

    state = RobotState(scenario.robot_start, Velocity(0.0, 0.0), scenario.footprint_radius)
    peds = list(scenario.pedestrians)
    dt = scenario.sim_dt
    max_steps = math.floor(scenario.max_sim_time / dt + _EPS)
    replan_steps = max(1, round(REPLAN_PERIOD / dt))

    log = RunLog(global_path=path, record_scans=record_scans)
    last_replan_step = 0
    recovery_streak = 0
    success = False

    for k in range(max_steps + 1):
        t = k * dt
        reached = math.hypot(state.pose.x - scenario.goal[0],
                             state.pose.y - scenario.goal[1]) <= scenario.goal_tolerance

        scan = sensing.simulate_scan(grid, state.pose, peds, scan_config,
                                     rng_seed=(scenario.seed, k))
        detections = sensing.detect_people(scan)

        if reached or k == max_steps:
            cmd = Velocity(0.0, 0.0)
        else:
            emotions = _associate_emotions(detections, peds)
            if (k - last_replan_step >= replan_steps
                    or recovery_streak >= RECOVERY_REPLAN_COUNT):
                agents = [costmap_mod.emotion_to_agent(d, e, scenario.adaptation_enabled)
                          for d, e in zip(detections, emotions)]
                replan_cm = costmap_mod.apply_social_layer(
                    costmap_mod.apply_inflation_layer(
                        costmap_mod.apply_obstacle_layer(
                            costmap_mod.build_static_layer(grid), scan, static_map=grid),
                        layer_params),
                    agents, layer_params)
                try:
                    field = GoalField(replan_cm, scenario.goal, layer_params.cost_weight)
                    path = field.path_from((state.pose.x, state.pose.y))
                    log.replan_events.append(t)
                    log.global_path = path
                except PlanningError:
                    pass  # keep the previous path; DWA still avoids locally
                last_replan_step = k
                recovery_streak = 0
            local_cm = costmap_mod.compose_local(grid, scan, detections, emotions,
                                                 scenario.adaptation_enabled,
                                                 layer_params, local_window)
            cmd, recovered = planning._choose_command(state.pose, state.velocity, path,
                                                      local_cm, dwa, dt)
            recovery_streak = recovery_streak + 1 if recovered else 0

        log.poses.append(state.pose)
        log.commands.append(cmd)
        log.detections.append(detections)
        log.safety.append(metrics.measure_safety(state.pose, state.footprint_radius, peds, t))
        if record_scans:
            log.scans.append(scan)

        if reached:
            success = True
            break
        if k == max_steps:
            break
        state = step_robot(state, cmd, dt)
        peds = step_pedestrians(peds, dt)

    summary = metrics.summarize_run(log.safety, log.poses, scenario)
    assert summary.success == success
    return log, summary


def run_pair(scenario: Scenario, layer_params: LayerParams = LayerParams(),
             dwa: DWAConfig = DWAConfig(), scan_config: ScanConfig = ScanConfig(),
             local_window: float = DEFAULT_LOCAL_WINDOW) -> ComparisonRecord:
    """Run a scenario twice, adaptation forced on then off, and report deltas.

    Deltas are known minus unknown. min_distance is the overall minimum over
    people (None when the scenario has no pedestrians).
    """
    known_scenario = dataclasses.replace(scenario, adaptation_enabled=True)
    unknown_scenario = dataclasses.replace(scenario, adaptation_enabled=False)
    _, known = run(known_scenario, layer_params, dwa, scan_config, local_window)
    _, unknown = run(unknown_scenario, layer_params, dwa, scan_config, local_window)

    def min_distance(s: RunSummary):
        return min((p.min_distance for p in s.people), default=None)

    dk, du = min_distance(known), min_distance(unknown)
    deltas = {
        "path_length_m": known.path_length - unknown.path_length,
        "sii_peak": known.sii_peak - unknown.sii_peak,
        "physiological_violation_steps":
            known.physiological_violation_steps - unknown.physiological_violation_steps,
        "physical_violation_steps":
            known.physical_violation_steps - unknown.physical_violation_steps,
        "min_distance_m": (dk - du) if dk is not None and du is not None else None,
    }
    return ComparisonRecord(known=known, unknown=unknown, deltas=deltas)
