"""Ray traversal over occupancy grids plus analytic ray-circle hits.

All rays share one start point. Grid traversal (Amanatides-Woo DDA) steps cell
boundaries in order of increasing distance, ties stepping the x axis first, so
reported grid hits are the exact distance at which a ray enters the first
occupied cell. The per-beam inner loops are numba-compiled; they are the
hottest code in the simulator.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

_BOUNDARY_EPS = 1e-9


def _start_cell(start: tuple[float, float], origin: tuple[float, float],
                resolution: float) -> tuple[int, int]:
    col = math.floor((start[0] - origin[0]) / resolution + _BOUNDARY_EPS)
    row = math.floor((start[1] - origin[1]) / resolution + _BOUNDARY_EPS)
    return col, row


@njit(cache=True)
def _grid_ranges_kernel(occ, resolution, ox, oy, sx, sy, angles, max_range, out):  # pragma: no cover
    height, width = occ.shape
    col0 = int(np.floor((sx - ox) / resolution + _BOUNDARY_EPS))
    row0 = int(np.floor((sy - oy) / resolution + _BOUNDARY_EPS))
    fx = (sx - ox) / resolution - col0
    fy = (sy - oy) / resolution - row0
    if occ[row0, col0]:
        out[:] = 0.0
        return
    for i in range(angles.size):
        dx = np.cos(angles[i])
        dy = np.sin(angles[i])
        step_x = 1 if dx > 0 else -1
        step_y = 1 if dy > 0 else -1
        t_delta_x = resolution / abs(dx) if dx != 0.0 else np.inf
        t_delta_y = resolution / abs(dy) if dy != 0.0 else np.inf
        t_max_x = ((1.0 - fx) if dx > 0 else fx) * t_delta_x if dx != 0.0 else np.inf
        t_max_y = ((1.0 - fy) if dy > 0 else fy) * t_delta_y if dy != 0.0 else np.inf
        ix, iy = col0, row0
        hit = np.inf
        while True:
            if t_max_x <= t_max_y:
                t_next = t_max_x
                ix += step_x
                t_max_x += t_delta_x
            else:
                t_next = t_max_y
                iy += step_y
                t_max_y += t_delta_y
            if t_next > max_range:
                break
            if ix < 0 or ix >= width or iy < 0 or iy >= height:
                break
            if occ[iy, ix]:
                hit = t_next
                break
        out[i] = hit


@njit(cache=True)
def _traversed_kernel(mask, resolution, ox, oy, sx, sy, angles, stop):  # pragma: no cover
    height, width = mask.shape
    col0 = int(np.floor((sx - ox) / resolution + _BOUNDARY_EPS))
    row0 = int(np.floor((sy - oy) / resolution + _BOUNDARY_EPS))
    fx = (sx - ox) / resolution - col0
    fy = (sy - oy) / resolution - row0
    for i in range(angles.size):
        dx = np.cos(angles[i])
        dy = np.sin(angles[i])
        step_x = 1 if dx > 0 else -1
        step_y = 1 if dy > 0 else -1
        t_delta_x = resolution / abs(dx) if dx != 0.0 else np.inf
        t_delta_y = resolution / abs(dy) if dy != 0.0 else np.inf
        t_max_x = ((1.0 - fx) if dx > 0 else fx) * t_delta_x if dx != 0.0 else np.inf
        t_max_y = ((1.0 - fy) if dy > 0 else fy) * t_delta_y if dy != 0.0 else np.inf
        ix, iy = col0, row0
        while True:
            if ix < 0 or ix >= width or iy < 0 or iy >= height:
                break
            t_next = min(t_max_x, t_max_y)
            # The current cell counts only if the ray exits it before stopping,
            # which excludes the cell containing the stop point itself.
            if t_next >= stop[i]:
                break
            mask[iy, ix] = True
            if t_max_x <= t_max_y:
                ix += step_x
                t_max_x += t_delta_x
            else:
                iy += step_y
                t_max_y += t_delta_y


def grid_ranges(occupied: np.ndarray, resolution: float, origin: tuple[float, float],
                start: tuple[float, float], angles: np.ndarray,
                max_range: float) -> np.ndarray:
    """Distance along each ray to the first occupied cell, or +inf.

    `start` must lie inside the grid. Rays leaving the grid or exceeding
    `max_range` report +inf.
    """
    out = np.empty(len(angles))
    _grid_ranges_kernel(occupied, float(resolution), float(origin[0]), float(origin[1]),
                        float(start[0]), float(start[1]),
                        np.ascontiguousarray(angles, dtype=np.float64),
                        float(max_range), out)
    return out


def traversed_cells(shape: tuple[int, int], resolution: float, origin: tuple[float, float],
                    start: tuple[float, float], angles: np.ndarray,
                    stop: np.ndarray) -> np.ndarray:
    """Boolean mask of cells fully traversed by any ray before its stop distance.

    A cell counts as traversed only if the ray exits it before reaching
    `stop[i]`, so the cell containing the stop point itself is excluded.
    Traversal stops at the grid edge; the start point must lie inside.
    """
    mask = np.zeros(shape, dtype=np.bool_)
    _traversed_kernel(mask, float(resolution), float(origin[0]), float(origin[1]),
                      float(start[0]), float(start[1]),
                      np.ascontiguousarray(angles, dtype=np.float64),
                      np.ascontiguousarray(stop, dtype=np.float64))
    return mask


def circle_ranges(start: tuple[float, float], angles: np.ndarray,
                  centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Smallest positive distance along each ray to any of the circles, or +inf.

    `centers` is (m, 2) and `radii` (m,); an empty set returns all +inf.
    """
    n = len(angles)
    if len(centers) == 0:
        return np.full(n, np.inf)
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (n, 2)
    rel = np.asarray(centers, dtype=float) - np.asarray(start, dtype=float)  # (m, 2)
    b = d @ rel.T  # (n, m) projection of each center onto each ray
    cc = np.einsum("md,md->m", rel, rel) - np.asarray(radii, dtype=float) ** 2
    disc = b * b - cc[None, :]
    ok = disc >= 0.0
    root = np.sqrt(np.where(ok, disc, 0.0))
    t_near = b - root
    t_far = b + root
    t = np.where(t_near > _BOUNDARY_EPS, t_near,
                 np.where(t_far > _BOUNDARY_EPS, t_far, np.inf))
    t = np.where(ok, t, np.inf)
    return t.min(axis=1)
