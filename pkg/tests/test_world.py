import json
import math

import numpy as np
import pytest

from socnav.world import (
    Emotion,
    GridMap,
    OutOfBounds,
    ParseError,
    Pedestrian,
    Pose2D,
    RobotState,
    ValidationError,
    Velocity,
    cell_to_world,
    leg_centers,
    load_scenario,
    normalize_angle,
    proxemic_radius,
    step_pedestrians,
    step_robot,
    world_to_cell,
)


def minimal_doc(**overrides):
    doc = {
        "map": {"resolution": 0.05, "width": 200, "height": 200},
        "robot": {"start": [1.0, 1.0, 0.0], "goal": [9.0, 9.0]},
    }
    doc.update(overrides)
    return doc


class TestLoadScenario:
    def test_minimal_document(self):
        scn = load_scenario(json.dumps(minimal_doc()))
        assert len(scn.pedestrians) == 0
        assert scn.sim_dt == 0.1
        assert scn.max_sim_time == 60.0
        assert scn.goal_tolerance == 0.2
        assert scn.seed == 0
        assert scn.adaptation_enabled is True
        assert scn.footprint_radius == 0.3

    def test_angry_pedestrian_resolves_to_large_radius(self):
        doc = minimal_doc(pedestrians=[
            {"id": "a", "pose": [5.0, 5.0, 0.0], "velocity": [0, 0], "emotion": "angry"}
        ])
        scn = load_scenario(json.dumps(doc))
        assert scn.pedestrians[0].emotion is Emotion.ANGRY
        assert proxemic_radius(scn.pedestrians[0].emotion) == 1.5

    def test_goal_inside_wall_rejected(self):
        doc = minimal_doc()
        doc["map"]["occupied"] = [[180, 180]]
        doc["robot"]["goal"] = [9.01, 9.01]
        with pytest.raises(ValidationError):
            load_scenario(json.dumps(doc))

    def test_start_out_of_bounds_rejected(self):
        doc = minimal_doc()
        doc["robot"]["start"] = [50.0, 1.0, 0.0]
        with pytest.raises(ValidationError):
            load_scenario(json.dumps(doc))

    def test_malformed_json_is_parse_error(self):
        with pytest.raises(ParseError):
            load_scenario("{not json")

    def test_missing_robot_is_parse_error(self):
        with pytest.raises(ParseError):
            load_scenario(json.dumps({"map": {"resolution": 0.05, "width": 10, "height": 10}}))

    def test_unknown_emotion_is_parse_error(self):
        doc = minimal_doc(pedestrians=[
            {"id": "a", "pose": [5, 5, 0], "velocity": [0, 0], "emotion": "ecstatic"}
        ])
        with pytest.raises(ParseError):
            load_scenario(json.dumps(doc))

    def test_nonpositive_dt_rejected(self):
        doc = minimal_doc(sim={"dt": 0.0})
        with pytest.raises(ValidationError):
            load_scenario(json.dumps(doc))

    def test_ascii_map_first_line_is_top(self):
        doc = {
            "map": {"resolution": 1.0, "ascii": ["#..", "..."]},
            "robot": {"start": [0.5, 0.5, 0.0], "goal": [2.5, 0.5]},
        }
        scn = load_scenario(json.dumps(doc))
        # the '#' is in the top row (row index 1), leftmost column
        assert bool(scn.map.occupied[1, 0]) is True
        assert scn.map.occupied.sum() == 1

    def test_ascii_bad_character(self):
        doc = {
            "map": {"resolution": 1.0, "ascii": ["x.."]},
            "robot": {"start": [0.5, 0.5, 0], "goal": [2.5, 0.5]},
        }
        with pytest.raises(ParseError):
            load_scenario(json.dumps(doc))

    def test_schema_valid_documents_never_crash(self):
        # fuzz-ish: schema-valid docs either load or raise a typed error
        rng = np.random.default_rng(7)
        for _ in range(50):
            doc = minimal_doc()
            doc["robot"]["start"] = [float(rng.uniform(-2, 12)), float(rng.uniform(-2, 12)), 0.0]
            doc["robot"]["goal"] = [float(rng.uniform(-2, 12)), float(rng.uniform(-2, 12))]
            try:
                load_scenario(json.dumps(doc))
            except (ParseError, ValidationError):
                pass


def small_grid(resolution=0.05, width=200, height=200, origin=(0.0, 0.0)):
    return GridMap(resolution, width, height, origin,
                   np.zeros((height, width), dtype=bool))


class TestGridTransforms:
    def test_origin_cell(self):
        grid = small_grid()
        assert world_to_cell((0.0, 0.0), grid) == (0, 0)

    def test_exact_arithmetic(self):
        grid = small_grid()
        assert world_to_cell((1.0, 2.0), grid) == (20, 40)

    def test_out_of_bounds(self):
        grid = small_grid()
        with pytest.raises(OutOfBounds):
            world_to_cell((-0.1, 0.0), grid)
        with pytest.raises(OutOfBounds):
            world_to_cell((10.0, 0.0), grid)  # right edge is exclusive

    def test_cell_center(self):
        grid = small_grid()
        assert cell_to_world((0, 0), grid) == (0.025, 0.025)
        assert cell_to_world((20, 40), grid) == pytest.approx((1.025, 2.025), abs=1e-12)

    def test_cell_to_world_bounds(self):
        grid = small_grid()
        with pytest.raises(OutOfBounds):
            cell_to_world((200, 0), grid)

    def test_round_trip_on_cells(self):
        grid = small_grid(origin=(-3.0, 2.0))
        rng = np.random.default_rng(3)
        for _ in range(200):
            c = (int(rng.integers(0, 200)), int(rng.integers(0, 200)))
            assert world_to_cell(cell_to_world(c, grid), grid) == c

    def test_round_trip_within_one_cell(self):
        grid = small_grid(origin=(1.5, -0.5))
        rng = np.random.default_rng(4)
        for _ in range(200):
            p = (float(rng.uniform(1.5, 11.5)), float(rng.uniform(-0.5, 9.5)))
            back = cell_to_world(world_to_cell(p, grid), grid)
            assert abs(back[0] - p[0]) <= grid.resolution
            assert abs(back[1] - p[1]) <= grid.resolution


class TestKinematics:
    def test_straight_line(self):
        s = RobotState(Pose2D(0, 0, 0), Velocity(0, 0))
        out = step_robot(s, Velocity(1.0, 0.0), 0.1)
        assert out.pose.x == pytest.approx(0.1, abs=1e-12)
        assert out.pose.y == 0.0
        assert out.pose.theta == 0.0
        assert out.velocity == Velocity(1.0, 0.0)

    def test_pure_rotation(self):
        s = RobotState(Pose2D(2.0, -1.0, 0.0), Velocity(0, 0))
        out = step_robot(s, Velocity(0.0, 1.0), math.pi)
        assert out.pose.x == 2.0
        assert out.pose.y == -1.0
        assert out.pose.theta == pytest.approx(math.pi, abs=1e-12)

    def test_arc_matches_fine_euler(self):
        # oracle: 1000-substep explicit Euler integration of the unicycle
        v, w, dt = 1.0, 1.0, 0.1
        n = 1000
        x = y = th = 0.0
        h = dt / n
        for _ in range(n):
            x += v * math.cos(th) * h
            y += v * math.sin(th) * h
            th += w * h
        out = step_robot(RobotState(Pose2D(0, 0, 0), Velocity(0, 0)), Velocity(v, w), dt)
        assert out.pose.x == pytest.approx(x, abs=1e-4)
        assert out.pose.y == pytest.approx(y, abs=1e-4)
        assert out.pose.theta == pytest.approx(th, abs=1e-6)

    def test_zero_command_is_identity_bitwise(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            pose = Pose2D(float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5)),
                          float(rng.uniform(-math.pi, math.pi)))
            s = RobotState(pose, Velocity(0.3, -0.2))
            out = step_robot(s, Velocity(0.0, 0.0), float(rng.uniform(0.01, 10.0)))
            assert out.pose.x == pose.x and out.pose.y == pose.y
            assert out.pose.theta == pose.theta

    def test_deterministic(self):
        s = RobotState(Pose2D(0.3, 0.7, 0.5), Velocity(0, 0))
        a = step_robot(s, Velocity(0.4, 0.9), 0.1)
        b = step_robot(s, Velocity(0.4, 0.9), 0.1)
        assert (a.pose.x, a.pose.y, a.pose.theta) == (b.pose.x, b.pose.y, b.pose.theta)

    def test_nonpositive_dt_rejected(self):
        s = RobotState(Pose2D(0, 0, 0), Velocity(0, 0))
        with pytest.raises(ValueError):
            step_robot(s, Velocity(0.1, 0.0), 0.0)


def make_ped(pid="p", x=0.0, y=0.0, theta=0.0, v=0.0, w=0.0, emotion=Emotion.NEUTRAL):
    return Pedestrian(pid, Pose2D(x, y, theta), Velocity(v, w), emotion)


class TestPedestrians:
    def test_stationary_identical(self):
        ped = make_ped(x=1.0, y=2.0, theta=0.3)
        out = step_pedestrians([ped], 0.5)[0]
        assert (out.pose.x, out.pose.y, out.pose.theta) == (1.0, 2.0, ped.pose.theta)

    def test_constant_velocity_advance(self):
        ped = make_ped(v=0.5)
        out = step_pedestrians([ped], 0.2)[0]
        assert out.pose.x == pytest.approx(0.1, abs=1e-12)
        assert out.pose.y == 0.0

    def test_two_pedestrians_independent_order_preserved(self):
        a = make_ped("a", x=0.0, v=0.5)
        b = make_ped("b", x=3.0, v=-0.25)
        out = step_pedestrians([a, b], 0.2)
        assert [p.id for p in out] == ["a", "b"]
        assert out[0].pose.x == pytest.approx(0.1)
        assert out[1].pose.x == pytest.approx(2.95)

    def test_emotion_and_radii_unchanged(self):
        ped = make_ped(emotion=Emotion.ANGRY, v=1.0)
        out = step_pedestrians([ped], 0.1)[0]
        assert out.emotion is Emotion.ANGRY
        assert out.body_radius == ped.body_radius

    def test_leg_centers_perpendicular_to_heading(self):
        ped = make_ped(x=2.0, y=0.0, theta=0.0)
        (ax, ay), (bx, by) = leg_centers(ped)
        assert (ax, bx) == (2.0, 2.0)
        assert sorted((ay, by)) == pytest.approx([-0.125, 0.125])

    def test_invalid_leg_geometry_rejected(self):
        with pytest.raises(ValueError):
            Pedestrian("x", Pose2D(0, 0, 0), Velocity(0, 0), Emotion.HAPPY,
                       leg_radius=0.2, leg_separation=0.3)


class TestProxemics:
    def test_emotion_radii(self):
        assert proxemic_radius(Emotion.HAPPY) == 0.5
        assert proxemic_radius(Emotion.NEUTRAL) == 1.0
        assert proxemic_radius(Emotion.ANGRY) == 1.5

    def test_strictly_monotone(self):
        assert (proxemic_radius(Emotion.HAPPY)
                < proxemic_radius(Emotion.NEUTRAL)
                < proxemic_radius(Emotion.ANGRY))


class TestAngles:
    def test_normalize_half_open_interval(self):
        assert normalize_angle(math.pi) == pytest.approx(math.pi)
        assert normalize_angle(-math.pi) == pytest.approx(math.pi)
        assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)
        for a in np.linspace(-10, 10, 101):
            n = normalize_angle(float(a))
            assert -math.pi < n <= math.pi

    def test_velocity_must_be_finite(self):
        with pytest.raises(ValueError):
            Velocity(math.inf, 0.0)
