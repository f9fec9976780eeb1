"""Global Dijkstra planning over costmaps and dynamic-window local planning.

The global planner searches the 8-connected cell graph with edge cost
step_length * (1 + cost_weight * target_cell_cost / 254); cells at or above
INSCRIBED (253) are impassable. The local planner samples velocity commands
reachable within one control period, rolls each out at constant velocity, and
scores the rollouts for goal heading, path adherence, clearance, and speed.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .costmap import INSCRIBED, Costmap
from .world import Pose2D, Velocity, normalize_angle

SQRT2 = math.sqrt(2.0)
RECOVERY_ANGULAR = 0.5  # rad/s rotate-in-place when no rollout is feasible
PATH_DIST_SATURATION = 2.0  # m, path-adherence error saturates here

_CELL_EPS = 1e-9

# (dcol, drow, step length in cells), fixed relaxation order
_NEIGHBORS = (
    (-1, -1, SQRT2), (0, -1, 1.0), (1, -1, SQRT2),
    (-1, 0, 1.0), (1, 0, 1.0),
    (-1, 1, SQRT2), (0, 1, 1.0), (1, 1, SQRT2),
)


class PlanningError(Exception):
    pass


class NoPath(PlanningError):
    pass


class StartBlocked(PlanningError):
    pass


class GoalBlocked(PlanningError):
    pass


@dataclass(frozen=True)
class GlobalPath:
    """Cell-center waypoints from start to goal and the accumulated edge cost."""

    waypoints: tuple[tuple[float, float], ...]
    total_cost: float


@dataclass(frozen=True)
class DWAConfig:
    v_max: float = 0.5
    v_min: float = 0.0
    w_max: float = 1.0
    accel_v: float = 1.0
    accel_w: float = 2.0
    sim_time: float = 2.0
    rollout_dt: float = 0.1
    n_v_samples: int = 11
    n_w_samples: int = 21
    weight_goal_heading: float = 0.5
    weight_path_adherence: float = 1.5
    weight_clearance: float = 2.0
    weight_speed: float = 1.0

    def __post_init__(self) -> None:
        if self.v_max <= 0 or self.sim_time <= 0 or self.rollout_dt <= 0:
            raise ValueError("v_max, sim_time, and rollout_dt must be positive")
        if self.n_v_samples < 2 or self.n_w_samples < 2:
            raise ValueError("sample counts must be at least 2")
        for w in (self.weight_goal_heading, self.weight_path_adherence,
                  self.weight_clearance, self.weight_speed):
            if w < 0:
                raise ValueError("weights must be non-negative")


@dataclass(frozen=True)
class TrajectoryCandidate:
    command: Velocity
    poses: tuple[Pose2D, ...]
    score: float | None = None
    feasible: bool | None = None


def _cell_of(cm: Costmap, p: tuple[float, float]) -> tuple[int, int]:
    col = math.floor((p[0] - cm.origin[0]) / cm.resolution + _CELL_EPS)
    row = math.floor((p[1] - cm.origin[1]) / cm.resolution + _CELL_EPS)
    return col, row


def _cell_center(cm: Costmap, col: int, row: int) -> tuple[float, float]:
    return (cm.origin[0] + (col + 0.5) * cm.resolution,
            cm.origin[1] + (row + 0.5) * cm.resolution)


def _edge_factors(cm: Costmap, cost_weight: float) -> list[float]:
    return (1.0 + cost_weight * cm.costs.astype(np.float64) / 254.0).ravel().tolist()


def plan_global(cm: Costmap, start: tuple[float, float], goal: tuple[float, float],
                cost_weight: float = 3.0) -> GlobalPath:
    """Minimum-cost 8-connected path between the cells containing start and goal.

    Dijkstra with ties popped by (cost, row-major cell index). Raises
    StartBlocked/GoalBlocked when an endpoint cell is impassable or outside the
    map, NoPath when the goal is unreachable.
    """
    width, height = cm.width, cm.height
    try:
        sc, sr = _cell_of(cm, start)
        if not (0 <= sc < width and 0 <= sr < height):
            raise StartBlocked(f"start {start} outside costmap")
    except StartBlocked:
        raise
    gc, gr = _cell_of(cm, goal)
    if not (0 <= gc < width and 0 <= gr < height):
        raise GoalBlocked(f"goal {goal} outside costmap")
    flat_costs = cm.costs.ravel()
    s = sr * width + sc
    g = gr * width + gc
    if flat_costs[s] >= INSCRIBED:
        raise StartBlocked(f"start cell ({sc},{sr}) has cost {flat_costs[s]}")
    if flat_costs[g] >= INSCRIBED:
        raise GoalBlocked(f"goal cell ({gc},{gr}) has cost {flat_costs[g]}")

    if s == g:
        return GlobalPath((_cell_center(cm, sc, sr),), 0.0)

    factor = _edge_factors(cm, cost_weight)
    passable = (cm.costs < INSCRIBED).ravel().tolist()
    dist = [math.inf] * (width * height)
    parent = [-1] * (width * height)
    dist[s] = 0.0
    heap = [(0.0, s)]
    pop = heapq.heappop
    push = heapq.heappush
    while heap:
        d, u = pop(heap)
        if d > dist[u]:
            continue
        if u == g:
            break
        ur, uc = divmod(u, width)
        for dc, dr, step in _NEIGHBORS:
            vc = uc + dc
            vr = ur + dr
            if not (0 <= vc < width and 0 <= vr < height):
                continue
            v = vr * width + vc
            if not passable[v]:
                continue
            nd = d + step * factor[v]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                push(heap, (nd, v))
    if not math.isfinite(dist[g]):
        raise NoPath(f"goal cell ({gc},{gr}) unreachable from ({sc},{sr})")

    cells = []
    u = g
    while u != -1:
        cells.append(u)
        u = parent[u]
    cells.reverse()
    waypoints = tuple(_cell_center(cm, u % width, u // width) for u in cells)
    return GlobalPath(waypoints, dist[g])


@njit(cache=True)
def _goal_field_kernel(costs, cost_weight, goal_flat):  # pragma: no cover
    """Goal-rooted Dijkstra over the reversed 8-connected cell graph.

    Returns (dist, next) flat arrays: the cost from each cell to the goal and
    the flat index of the next cell toward it. The heap pops by
    (distance, flat index), matching plan_global's tie-breaking.
    """
    height, width = costs.shape
    n = height * width
    flat = costs.ravel()
    dist = np.full(n, np.inf)
    nxt = np.full(n, -1, dtype=np.int64)
    dist[goal_flat] = 0.0

    cap = 8 * n + 8
    heap_d = np.empty(cap)
    heap_i = np.empty(cap, dtype=np.int64)
    heap_d[0] = 0.0
    heap_i[0] = goal_flat
    size = 1

    dcs = np.array([-1, 0, 1, -1, 1, -1, 0, 1], dtype=np.int64)
    drs = np.array([-1, -1, -1, 0, 0, 1, 1, 1], dtype=np.int64)
    sqrt2 = math.sqrt(2.0)

    while size > 0:
        d = heap_d[0]
        u = heap_i[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_i[0] = heap_i[size]
        i = 0
        while True:
            left = 2 * i + 1
            if left >= size:
                break
            right = left + 1
            child = left
            if right < size and (heap_d[right] < heap_d[left]
                                 or (heap_d[right] == heap_d[left]
                                     and heap_i[right] < heap_i[left])):
                child = right
            if (heap_d[child] < heap_d[i]
                    or (heap_d[child] == heap_d[i] and heap_i[child] < heap_i[i])):
                heap_d[i], heap_d[child] = heap_d[child], heap_d[i]
                heap_i[i], heap_i[child] = heap_i[child], heap_i[i]
                i = child
            else:
                break

        if d > dist[u]:
            continue
        ur = u // width
        uc = u % width
        # The forward edge v -> u prices the target cell u, the settled one.
        w_into_u = 1.0 + cost_weight * flat[u] / 254.0
        for k in range(8):
            vc = uc + dcs[k]
            vr = ur + drs[k]
            if vc < 0 or vc >= width or vr < 0 or vr >= height:
                continue
            v = vr * width + vc
            if flat[v] >= 253:
                continue
            step = 1.0 if (dcs[k] == 0 or drs[k] == 0) else sqrt2
            nd = d + step * w_into_u
            if nd < dist[v]:
                dist[v] = nd
                nxt[v] = u
                heap_d[size] = nd
                heap_i[size] = v
                i = size
                size += 1
                while i > 0:
                    p = (i - 1) >> 1
                    if (heap_d[p] > heap_d[i]
                            or (heap_d[p] == heap_d[i] and heap_i[p] > heap_i[i])):
                        heap_d[p], heap_d[i] = heap_d[i], heap_d[p]
                        heap_i[p], heap_i[i] = heap_i[i], heap_i[p]
                        i = p
                    else:
                        break
    return dist, nxt


class GoalField:
    """Shortest-path field to a fixed goal, for cheap replans from any cell.

    A single goal-rooted Dijkstra over the (reversed) cell graph records, for
    every reachable cell, its cost to the goal and the next cell to step to.
    Extracting a path from any start is then linear in the path length. Edge
    weights and tie-breaking match plan_global; reported path costs are
    re-accumulated start-to-goal.
    """

    def __init__(self, cm: Costmap, goal: tuple[float, float], cost_weight: float = 3.0):
        self.cm = cm
        gc, gr = _cell_of(cm, goal)
        if not (0 <= gc < cm.width and 0 <= gr < cm.height):
            raise GoalBlocked(f"goal {goal} outside costmap")
        g = gr * cm.width + gc
        if cm.costs.ravel()[g] >= INSCRIBED:
            raise GoalBlocked(f"goal cell ({gc},{gr}) has cost {cm.costs.ravel()[g]}")
        self._dist, self._next = _goal_field_kernel(cm.costs, float(cost_weight), g)
        self._factor = 1.0 + cost_weight * cm.costs.ravel().astype(np.float64) / 254.0
        self._goal_flat = g

    def path_from(self, start: tuple[float, float]) -> GlobalPath:
        cm = self.cm
        width = cm.width
        sc, sr = _cell_of(cm, start)
        if not (0 <= sc < width and 0 <= sr < cm.height):
            raise StartBlocked(f"start {start} outside costmap")
        s = sr * width + sc
        if cm.costs.ravel()[s] >= INSCRIBED:
            raise StartBlocked(f"start cell ({sc},{sr}) has cost {cm.costs.ravel()[s]}")
        if not math.isfinite(self._dist[s]):
            raise NoPath(f"goal unreachable from cell ({sc},{sr})")

        cells = [s]
        u = s
        while u != self._goal_flat:
            u = int(self._next[u])
            cells.append(u)
        total = 0.0
        for a, b in zip(cells, cells[1:]):
            ar, ac = divmod(a, width)
            br, bc = divmod(b, width)
            step = 1.0 if ar == br or ac == bc else SQRT2
            total += step * float(self._factor[b])
        waypoints = tuple(_cell_center(cm, u % width, u // width) for u in cells)
        return GlobalPath(waypoints, total)


def dynamic_window(current: Velocity, cfg: DWAConfig,
                   control_dt: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Velocity ranges reachable within one control period."""
    if control_dt <= 0:
        raise ValueError("control_dt must be positive")
    v_lo = max(cfg.v_min, current.linear - cfg.accel_v * control_dt)
    v_hi = min(cfg.v_max, current.linear + cfg.accel_v * control_dt)
    w_lo = max(-cfg.w_max, current.angular - cfg.accel_w * control_dt)
    w_hi = min(cfg.w_max, current.angular + cfg.accel_w * control_dt)
    return (v_lo, v_hi), (w_lo, w_hi)


def _rollout_steps(cfg: DWAConfig) -> int:
    return math.floor(cfg.sim_time / cfg.rollout_dt + _CELL_EPS)


def _rollout_batch(pose: Pose2D, v: np.ndarray, w: np.ndarray, n_steps: int,
                   dt: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Constant-velocity unicycle rollouts for a batch of commands.

    Returns x, y, theta arrays of shape (len(v), n_steps + 1); theta is left
    unwrapped. The per-step update matches world.step_pose.
    """
    n = len(v)
    xs = np.empty((n, n_steps + 1))
    ys = np.empty((n, n_steps + 1))
    ths = np.empty((n, n_steps + 1))
    x = np.full(n, pose.x)
    y = np.full(n, pose.y)
    th = np.full(n, pose.theta)
    xs[:, 0], ys[:, 0], ths[:, 0] = x, y, th

    straight = np.abs(w) < 1e-6
    w_safe = np.where(straight, 1.0, w)
    r = v / w_safe
    sin_th = np.sin(th)
    cos_th = np.cos(th)
    for k in range(1, n_steps + 1):
        th1 = th + w * dt
        sin_th1 = np.sin(th1)
        cos_th1 = np.cos(th1)
        x = x + np.where(straight, v * cos_th * dt, r * (sin_th1 - sin_th))
        y = y + np.where(straight, v * sin_th * dt, -r * (cos_th1 - cos_th))
        th = th1
        sin_th, cos_th = sin_th1, cos_th1
        xs[:, k], ys[:, k], ths[:, k] = x, y, th
    return xs, ys, ths


def rollout(pose: Pose2D, cmd: Velocity, cfg: DWAConfig) -> list[Pose2D]:
    """Forward-simulate a command at rollout_dt over sim_time; includes the start."""
    n_steps = _rollout_steps(cfg)
    xs, ys, ths = _rollout_batch(pose, np.array([cmd.linear]), np.array([cmd.angular]),
                                 n_steps, cfg.rollout_dt)
    return [Pose2D(float(xs[0, k]), float(ys[0, k]), normalize_angle(float(ths[0, k])))
            for k in range(n_steps + 1)]


def _score_batch(xs: np.ndarray, ys: np.ndarray, ths: np.ndarray, v_cmd: np.ndarray,
                 path: GlobalPath, goal: tuple[float, float], cm: Costmap,
                 cfg: DWAConfig) -> tuple[np.ndarray, np.ndarray]:
    """Scores and feasibility for a batch of rollouts.

    Cells outside the (clipped) local costmap are treated as free. Feasible
    means every pose's cell cost stays below INSCRIBED.
    """
    cols = np.floor((xs - cm.origin[0]) / cm.resolution + _CELL_EPS).astype(np.int64)
    rows = np.floor((ys - cm.origin[1]) / cm.resolution + _CELL_EPS).astype(np.int64)
    inside = (cols >= 0) & (cols < cm.width) & (rows >= 0) & (rows < cm.height)
    gathered = cm.costs[rows.clip(0, cm.height - 1), cols.clip(0, cm.width - 1)]
    cell_costs = np.where(inside, gathered, 0).astype(np.float64)
    max_cost = cell_costs.max(axis=1)
    feasible = (cell_costs < INSCRIBED).all(axis=1)

    ex, ey, eth = xs[:, -1], ys[:, -1], ths[:, -1]
    bearing = np.arctan2(goal[1] - ey, goal[0] - ex)
    heading_err = np.abs(np.mod(bearing - eth + math.pi, math.tau) - math.pi)

    wp = np.asarray(path.waypoints)
    d2 = (ex[:, None] - wp[None, :, 0]) ** 2 + (ey[:, None] - wp[None, :, 1]) ** 2
    d_path = np.sqrt(d2.min(axis=1))

    score = (
        cfg.weight_goal_heading * (1.0 - heading_err / math.pi)
        + cfg.weight_path_adherence * (1.0 - np.minimum(d_path, PATH_DIST_SATURATION) / PATH_DIST_SATURATION)
        + cfg.weight_clearance * (1.0 - max_cost / 252.0)
        + cfg.weight_speed * (v_cmd / cfg.v_max)
    )
    return score, feasible


def score_trajectory(t: TrajectoryCandidate, path: GlobalPath, goal: tuple[float, float],
                     local_cm: Costmap, cfg: DWAConfig) -> TrajectoryCandidate:
    """Attach the weighted score and feasibility flag to a rollout candidate."""
    xs = np.array([[p.x for p in t.poses]])
    ys = np.array([[p.y for p in t.poses]])
    ths = np.array([[p.theta for p in t.poses]])
    score, feasible = _score_batch(xs, ys, ths, np.array([t.command.linear]),
                                   path, goal, local_cm, cfg)
    if not feasible[0]:
        return replace(t, score=None, feasible=False)
    return replace(t, score=float(score[0]), feasible=True)


def _choose_command(state_pose: Pose2D, current: Velocity, path: GlobalPath,
                    local_cm: Costmap, cfg: DWAConfig,
                    control_dt: float) -> tuple[Velocity, bool]:
    """Best feasible sampled command, or the rotate-in-place recovery.

    Returns (command, used_recovery). Ties prefer lower |w|, then lower v,
    then earlier sample order (v ascending outer, w ascending inner).
    """
    (v_lo, v_hi), (w_lo, w_hi) = dynamic_window(current, cfg, control_dt)
    vs = np.linspace(v_lo, v_hi, cfg.n_v_samples)
    ws = np.linspace(w_lo, w_hi, cfg.n_w_samples)
    v_grid = np.repeat(vs, cfg.n_w_samples)
    w_grid = np.tile(ws, cfg.n_v_samples)

    goal = path.waypoints[-1]
    xs, ys, ths = _rollout_batch(state_pose, v_grid, w_grid, _rollout_steps(cfg),
                                 cfg.rollout_dt)
    scores, feasible = _score_batch(xs, ys, ths, v_grid, path, goal, local_cm, cfg)

    best = -1
    best_key = None
    for i in range(len(v_grid)):
        if not feasible[i]:
            continue
        key = (-scores[i], abs(w_grid[i]), v_grid[i])
        if best_key is None or key < best_key:
            best = i
            best_key = key
    if best < 0:
        return Velocity(0.0, RECOVERY_ANGULAR), True
    return Velocity(float(v_grid[best]), float(w_grid[best])), False


def plan_local(state, path: GlobalPath, local_cm: Costmap, cfg: DWAConfig,
               control_dt: float) -> Velocity:
    """DWA command for the current state; rotate-in-place when nothing is feasible."""
    if not path.waypoints:
        raise ValueError("global path is empty")
    cmd, _ = _choose_command(state.pose, state.velocity, path, local_cm, cfg, control_dt)
    return cmd
