"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""
import json
import math
import time

import numpy as np

from conftest import load_doc, straight_run_doc
from socnav import controller
from socnav.cli import main as cli_main
from socnav.costmap import social_cost
from socnav.metrics import sii, sii_threshold
from socnav.planning import NoPath, plan_global
from socnav.scenarios import canonical_scenario, write_canonical_scenarios
from socnav.sensing import ScanConfig, detect_people, simulate_scan
from socnav.world import Emotion, GridMap, Pedestrian, Pose2D, Velocity

from test_planning import bellman_ford_cost, random_costmap

E_MINUS_2 = math.exp(-2.0)


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def min_person_distance(summary):
    return summary.people[0].min_distance


def test_criterion_1_emotion_ordered_clearance(canonical_runs):
    # warm the JIT kernels outside the timed window
    controller.run(load_doc(straight_run_doc(length_m=0.5, max_time=3.0)))

    t0 = time.perf_counter()
    distances = {}
    for emotion in (Emotion.HAPPY, Emotion.NEUTRAL, Emotion.ANGRY):
        _, summary = controller.run(canonical_scenario(emotion, True))
        distances[emotion] = min_person_distance(summary)
    elapsed = time.perf_counter() - t0

    d_h, d_n, d_a = (distances[Emotion.HAPPY], distances[Emotion.NEUTRAL],
                     distances[Emotion.ANGRY])
    ok = (d_h + 0.15 <= d_n and d_n + 0.15 <= d_a and elapsed < 5.0)
    report(1, ok, f"min distances happy={d_h:.3f} < neutral={d_n:.3f} < "
                  f"angry={d_a:.3f} (gaps >= 0.15), runtime {elapsed:.2f}s < 5s")


def test_criterion_2_happy_path_shortening(canonical_runs):
    _, known = canonical_runs(Emotion.HAPPY, True)
    _, unknown = canonical_runs(Emotion.HAPPY, False)
    ok = known.path_length <= unknown.path_length - 0.2
    report(2, ok, f"happy-known path {known.path_length:.3f} m <= "
                  f"happy-unknown {unknown.path_length:.3f} m - 0.2 m")


def test_criterion_3_happy_safety(canonical_runs):
    _, known = canonical_runs(Emotion.HAPPY, True)
    _, unknown = canonical_runs(Emotion.HAPPY, False)
    ok = (known.physiological_violation_steps == 0
          and unknown.physiological_violation_steps == 0
          and known.success and unknown.success)
    report(3, ok, f"happy runs physiological violations: known="
                  f"{known.physiological_violation_steps}, "
                  f"unknown={unknown.physiological_violation_steps} (both 0)")


def test_criterion_4_angry_safety_contrast(canonical_runs):
    _, known = canonical_runs(Emotion.ANGRY, True)
    _, unknown = canonical_runs(Emotion.ANGRY, False)
    ok = (known.physiological_violation_steps == 0 and known.sii_peak < E_MINUS_2
          and unknown.physiological_violation_steps >= 1
          and unknown.sii_peak > E_MINUS_2)
    report(4, ok, f"angry-known: violations={known.physiological_violation_steps}, "
                  f"sii_peak={known.sii_peak:.4f} < e^-2; angry-unknown: "
                  f"violations={unknown.physiological_violation_steps} >= 1, "
                  f"sii_peak={unknown.sii_peak:.4f} > e^-2")


def test_criterion_5_dijkstra_optimality():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    exact, reachable = 0, 0
    for _ in range(200):
        cm = random_costmap(rng, 20, 20)
        start, goal = (0.05, 0.05), (1.95, 1.95)
        oracle = bellman_ford_cost(cm, start, goal, cost_weight=3.0)
        try:
            path = plan_global(cm, start, goal, cost_weight=3.0)
        except NoPath:
            assert not math.isfinite(oracle)
            continue
        reachable += 1
        if path.total_cost == oracle:
            exact += 1
    elapsed = time.perf_counter() - t0
    ok = exact == reachable and reachable >= 100 and elapsed < 10.0
    report(5, ok, f"{exact}/{reachable} reachable grids match the Bellman-Ford "
                  f"oracle exactly over 200 trials, {elapsed:.2f}s < 10s")


def test_criterion_6_social_cost_geometry():
    radii = np.linspace(0.2, 2.5, 100)
    boundary_ok = all(social_cost(float(r), float(r), 253) == 34 for r in radii)

    equiv_ok = True
    checked = 0
    for r in radii:
        for d in np.linspace(0.0, 3.0, 100):
            r, d = float(r), float(d)
            if abs(d - r) < 1e-12:
                continue
            checked += 1
            if (sii((d, 0.0), (0.0, 0.0), r) > sii_threshold()) != (d < r):
                equiv_ok = False
    ok = boundary_ok and equiv_ok and checked >= 9900
    report(6, ok, f"social_cost(r,r,253)=34 for 100 radii; sii>e^-2 <=> d<r over "
                  f"{checked} non-boundary (d, r) points")


def test_criterion_7_leg_detection_accuracy():
    grid = GridMap(0.05, 40, 40, (-1.0, -1.0), np.zeros((40, 40), dtype=bool))
    rng = np.random.default_rng(777)
    detected, max_err = 0, 0.0
    n = 100
    for _ in range(n):
        r = float(rng.uniform(0.5, 4.0))
        bearing = float(rng.uniform(-math.pi, math.pi))
        x, y = r * math.cos(bearing), r * math.sin(bearing)
        heading = math.atan2(-y, -x)  # facing the sensor: both legs visible
        ped = Pedestrian("p", Pose2D(x, y, heading), Velocity(0, 0), Emotion.NEUTRAL)
        scan = simulate_scan(grid, Pose2D(0, 0, 0), [ped], ScanConfig())
        dets = detect_people(scan)
        if not dets:
            continue
        err = min(math.dist(d.position, (x, y)) for d in dets)
        if err <= 0.10:
            detected += 1
        max_err = max(max_err, err)
    ok = detected == n
    report(7, ok, f"{detected}/{n} placements detected within 0.10 m "
                  f"(max error {max_err:.3f} m)")


def test_criterion_8_cmd_run_determinism(tmp_path):
    scenario_dir = tmp_path / "scenarios"
    write_canonical_scenarios(scenario_dir)
    angry = scenario_dir / "angry_known.json"
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    code_a = cli_main(["run", str(angry), "--out-dir", str(out_a), "--seed", "42"])
    code_b = cli_main(["run", str(angry), "--out-dir", str(out_b), "--seed", "42"])
    identical = all(
        (out_a / name).read_bytes() == (out_b / name).read_bytes()
        for name in ("trajectory.csv", "metrics.json", "path_plot.svg", "sii_plot.svg")
    )
    ok = identical and code_a == 0 and code_b == 0
    report(8, ok, "two cmd_run invocations on the canonical angry scenario "
                  "(seed 42) produced byte-identical CSV, JSON, and SVG outputs")


def test_criterion_9_neutral_fixed_point(tmp_path):
    scenario_dir = tmp_path / "scenarios"
    write_canonical_scenarios(scenario_dir)
    out = tmp_path / "cmp"
    code = cli_main(["compare", str(scenario_dir / "neutral.json"),
                     "--out-dir", str(out)])
    payload = json.loads((out / "comparison.json").read_text())
    zero_delta = all(v == 0 for v in payload["delta"].values())
    ok = code == 0 and zero_delta and payload["known"] == payload["unknown"]
    report(9, ok, f"cmd_compare on the neutral scenario reports zero delta in "
                  f"every field: {payload['delta']}")
