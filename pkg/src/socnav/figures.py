"""Self-contained SVG figures: path plots and SII-over-time plots.

SVG is emitted directly from polyline, circle, rect, and text primitives so
the files are deterministic and diffable; there is no plotting dependency.
All coordinates are formatted with two decimals.
"""
from __future__ import annotations

import math

import numpy as np

from .controller import RunLog
from .metrics import SII_THRESHOLD
from .planning import GlobalPath
from .world import Scenario, proxemic_radius

_MARGIN_LEFT = 55.0
_MARGIN_RIGHT = 20.0
_MARGIN_TOP = 30.0
_MARGIN_BOTTOM = 45.0

_WALL_COLOR = "#333333"
_GLOBAL_PATH_COLOR = "#2b7bba"
_TRAJECTORY_COLOR = "#c0392b"
_ZONE_COLOR = "#8e44ad"
_BODY_COLOR = "#e67e22"
_THRESHOLD_COLOR = "#2b7bba"
_SII_COLOR = "#c0392b"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    """Accumulates SVG elements with a world-to-pixel transform (y up)."""

    def __init__(self, width_px: float, height_px: float):
        self.width = width_px
        self.height = height_px
        self.parts: list[str] = []

    def add(self, element: str) -> None:
        self.parts.append(element)

    def line(self, x1, y1, x2, y2, color, width=1.0, dash=None) -> None:
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{color}" stroke-width="{_fmt(width)}"{dash_attr} />'
        )

    def polyline(self, pts: list[tuple[float, float]], color, width=1.0, dash=None) -> None:
        if len(pts) < 2:
            return
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"{dash_attr} />'
        )

    def circle(self, cx, cy, r, stroke, fill="none", width=1.0, dash=None) -> None:
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="{fill}" '
            f'stroke="{stroke}" stroke-width="{_fmt(width)}"{dash_attr} />'
        )

    def rect(self, x, y, w, h, fill) -> None:
        self.add(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="{fill}" />'
        )

    def text(self, x, y, s, size=12, anchor="middle", color="#000000") -> None:
        self.add(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}" fill="{color}">{s}</text>'
        )

    def render(self) -> str:
        body = "\n".join(f"  {p}" for p in self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(self.width)}" '
            f'height="{_fmt(self.height)}" viewBox="0 0 {_fmt(self.width)} {_fmt(self.height)}">\n'
            f'  <rect x="0" y="0" width="{_fmt(self.width)}" height="{_fmt(self.height)}" '
            f'fill="#ffffff" />\n{body}\n</svg>\n'
        )


def _tick_step(extent: float) -> float:
    if extent <= 2.0:
        return 0.5
    if extent <= 6.0:
        return 1.0
    if extent <= 15.0:
        return 2.0
    return 5.0


def _wall_runs(scenario: Scenario):
    """Merge occupied cells into per-row horizontal runs to keep the SVG small."""
    occ = scenario.map.occupied
    runs = []
    for row in range(scenario.map.height):
        cols = np.flatnonzero(occ[row])
        if cols.size == 0:
            continue
        start = prev = int(cols[0])
        for c in cols[1:]:
            c = int(c)
            if c == prev + 1:
                prev = c
                continue
            runs.append((row, start, prev))
            start = prev = c
        runs.append((row, start, prev))
    return runs


def render_path_plot(scenario: Scenario, log: RunLog,
                     path: GlobalPath | None = None,
                     px_per_m: float = 60.0) -> str:
    """Top-down view: walls, global path, executed trajectory, personal zones."""
    grid = scenario.map
    world_w = grid.width * grid.resolution
    world_h = grid.height * grid.resolution
    canvas = _Canvas(_MARGIN_LEFT + world_w * px_per_m + _MARGIN_RIGHT,
                     _MARGIN_TOP + world_h * px_per_m + _MARGIN_BOTTOM)

    def X(wx: float) -> float:
        return _MARGIN_LEFT + (wx - grid.origin[0]) * px_per_m

    def Y(wy: float) -> float:
        return _MARGIN_TOP + (grid.origin[1] + world_h - wy) * px_per_m

    canvas.add(
        f'<rect x="{_fmt(X(grid.origin[0]))}" y="{_fmt(Y(grid.origin[1] + world_h))}" '
        f'width="{_fmt(world_w * px_per_m)}" height="{_fmt(world_h * px_per_m)}" '
        f'fill="none" stroke="#888888" stroke-width="1.00" />'
    )

    res_px = grid.resolution * px_per_m
    for row, c0, c1 in _wall_runs(scenario):
        x = X(grid.origin[0] + c0 * grid.resolution)
        y = Y(grid.origin[1] + (row + 1) * grid.resolution)
        canvas.rect(x, y, (c1 - c0 + 1) * res_px, res_px, _WALL_COLOR)

    if path is None:
        path = log.global_path
    if path is not None:
        canvas.polyline([(X(x), Y(y)) for x, y in path.waypoints],
                        _GLOBAL_PATH_COLOR, width=1.0, dash="4,3")
    canvas.polyline([(X(p.x), Y(p.y)) for p in log.poses], _TRAJECTORY_COLOR, width=2.5)

    for ped in scenario.pedestrians:
        effective = (proxemic_radius(ped.emotion) if scenario.adaptation_enabled
                     else 1.0)
        canvas.circle(X(ped.pose.x), Y(ped.pose.y), ped.body_radius * px_per_m,
                      stroke=_BODY_COLOR, fill=_BODY_COLOR)
        canvas.circle(X(ped.pose.x), Y(ped.pose.y), effective * px_per_m,
                      stroke=_ZONE_COLOR, dash="6,4", width=1.5)

    start = scenario.robot_start
    canvas.circle(X(start.x), Y(start.y), 4.0, stroke="#1e8449", fill="#1e8449")
    gx, gy = scenario.goal
    canvas.line(X(gx) - 5, Y(gy) - 5, X(gx) + 5, Y(gy) + 5, "#1e8449", width=2.0)
    canvas.line(X(gx) - 5, Y(gy) + 5, X(gx) + 5, Y(gy) - 5, "#1e8449", width=2.0)

    step = _tick_step(max(world_w, world_h))
    y_axis_px = Y(grid.origin[1])
    n_x = int(math.floor(world_w / step + 1e-9))
    for i in range(n_x + 1):
        wx = grid.origin[0] + i * step
        canvas.line(X(wx), y_axis_px, X(wx), y_axis_px + 5, "#000000")
        canvas.text(X(wx), y_axis_px + 18, f"{wx:g}", size=10)
    n_y = int(math.floor(world_h / step + 1e-9))
    for i in range(n_y + 1):
        wy = grid.origin[1] + i * step
        canvas.line(X(grid.origin[0]) - 5, Y(wy), X(grid.origin[0]), Y(wy), "#000000")
        canvas.text(X(grid.origin[0]) - 9, Y(wy) + 4, f"{wy:g}", size=10, anchor="end")
    canvas.text(X(grid.origin[0] + world_w / 2), canvas.height - 8, "x [m]")
    canvas.text(14, Y(grid.origin[1] + world_h / 2), "y [m]")
    canvas.text(canvas.width / 2, 18, "robot path and personal-space zones", size=13)
    return canvas.render()


def _sii_series(log: RunLog, dt: float) -> tuple[list[float], list[float]]:
    times = []
    values = []
    for i, rec in enumerate(log.safety):
        times.append(i * dt)
        values.append(max((p.sii for p in rec.people), default=0.0))
    return times, values


def _draw_sii_panel(canvas: _Canvas, x0: float, y0: float, w: float, h: float,
                    times: list[float], values: list[float], t_max: float,
                    title: str) -> None:
    def X(t: float) -> float:
        return x0 + (t / t_max) * w if t_max > 0 else x0

    def Y(v: float) -> float:
        return y0 + h - v * h

    canvas.add(
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'fill="none" stroke="#888888" stroke-width="1.00" />'
    )
    canvas.line(X(0), Y(SII_THRESHOLD), X(t_max), Y(SII_THRESHOLD),
                _THRESHOLD_COLOR, width=1.5)
    canvas.polyline([(X(t), Y(v)) for t, v in zip(times, values)], _SII_COLOR, width=2.0)

    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        canvas.line(x0 - 5, Y(frac), x0, Y(frac), "#000000")
        canvas.text(x0 - 9, Y(frac) + 4, f"{frac:g}", size=10, anchor="end")
    t_step = _tick_step(t_max if t_max > 0 else 1.0) * 5
    n_t = int(math.floor(t_max / t_step + 1e-9)) if t_max > 0 else 0
    for i in range(n_t + 1):
        t = i * t_step
        canvas.line(X(t), y0 + h, X(t), y0 + h + 5, "#000000")
        canvas.text(X(t), y0 + h + 18, f"{t:g}", size=10)
    canvas.text(x0 + w / 2, y0 + h + 36, "t [s]", size=11)
    canvas.text(x0 - 40, y0 + h / 2, "SII", size=11)
    canvas.text(x0 + w / 2, y0 - 8, title, size=12)


def render_sii_plot(log: RunLog, dt: float, title: str = "social individual index") -> str:
    times, values = _sii_series(log, dt)
    canvas = _Canvas(640.0, 360.0)
    t_max = times[-1] if times and times[-1] > 0 else 1.0
    _draw_sii_panel(canvas, 70.0, 40.0, 540.0, 260.0, times, values, t_max, title)
    return canvas.render()


def render_sii_compare(log_known: RunLog, log_unknown: RunLog, dt: float) -> str:
    """Side-by-side SII panels: threshold in blue, measured SII in red."""
    tk, vk = _sii_series(log_known, dt)
    tu, vu = _sii_series(log_unknown, dt)
    t_max = max(tk[-1] if tk else 0.0, tu[-1] if tu else 0.0, 1e-9)
    canvas = _Canvas(980.0, 360.0)
    _draw_sii_panel(canvas, 70.0, 40.0, 380.0, 260.0, tk, vk, t_max,
                    "emotion known (adaptation on)")
    _draw_sii_panel(canvas, 540.0, 40.0, 380.0, 260.0, tu, vu, t_max,
                    "emotion unknown (adaptation off)")
    return canvas.render()
