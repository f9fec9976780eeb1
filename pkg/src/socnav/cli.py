"""Batch front end: run scenarios and emit CSV, JSON, and SVG artifacts.

Exit codes: 0 for a successful run, 2 for a run that failed (timeout or no
path), 1 for usage, parse, or I/O errors. All files are written atomically
(temp file + rename) and are byte-identical across repeated invocations with
the same inputs and seed.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import controller, figures, sensing
from .controller import ComparisonRecord, PlanningFailed, RunLog
from .metrics import RunSummary, summary_to_dict
from .world import Scenario, ScenarioError, load_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUN_FAILED = 2

OUT_DIR_ENV = "SOCNAV_OUT"


@dataclass(frozen=True)
class OutputBundle:
    trajectory_csv: Path
    metrics_json: Path
    path_svg: Path | None
    sii_svg: Path | None


def _write_atomic(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data)
    os.replace(tmp, path)


def _trajectory_csv(log: RunLog, dt: float) -> str:
    lines = ["t,x,y,theta,v,w,min_person_distance,sii_max"]
    for i, pose in enumerate(log.poses):
        cmd = log.commands[i]
        rec = log.safety[i]
        min_d = min((p.distance for p in rec.people), default=math.nan)
        sii_max = max((p.sii for p in rec.people), default=0.0)
        lines.append(
            f"{i * dt:.6f},{pose.x:.6f},{pose.y:.6f},{pose.theta:.6f},"
            f"{cmd.linear:.6f},{cmd.angular:.6f},{min_d:.6f},{sii_max:.6f}"
        )
    return "\n".join(lines) + "\n"


def _scans_csv(log: RunLog, dt: float) -> str:
    lines = ["t,beam_index,angle,range"]
    for i, scan in enumerate(log.scans):
        for beam, angle, rng in sensing.scan_to_csv_rows(scan):
            lines.append(f"{i * dt:.6f},{beam},{angle:.6f},{rng:.6f}")
    return "\n".join(lines) + "\n"


def _load_scenario_file(path: Path, args) -> Scenario:
    scenario = load_scenario(path.read_text())
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "dt", None) is not None:
        if args.dt <= 0:
            raise ScenarioError("--dt must be positive")
        overrides["sim_dt"] = args.dt
    adaptation = getattr(args, "adaptation", None)
    if adaptation in ("on", "off"):
        overrides["adaptation_enabled"] = adaptation == "on"
    return dataclasses.replace(scenario, **overrides) if overrides else scenario


def _write_run_bundle(scenario: Scenario, log: RunLog, summary: RunSummary,
                      out_dir: Path, plots: bool, dump_scans: bool) -> OutputBundle:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "trajectory.csv"
    json_path = out_dir / "metrics.json"
    _write_atomic(csv_path, _trajectory_csv(log, scenario.sim_dt))
    _write_atomic(json_path, json.dumps(summary_to_dict(summary), indent=2) + "\n")
    path_svg = sii_svg = None
    if plots:
        path_svg = out_dir / "path_plot.svg"
        sii_svg = out_dir / "sii_plot.svg"
        _write_atomic(path_svg, figures.render_path_plot(scenario, log))
        _write_atomic(sii_svg, figures.render_sii_plot(log, scenario.sim_dt))
    if dump_scans:
        _write_atomic(out_dir / "scans.csv", _scans_csv(log, scenario.sim_dt))
    return OutputBundle(csv_path, json_path, path_svg, sii_svg)


def cmd_run(args) -> int:
    path = Path(args.scenario)
    try:
        scenario = _load_scenario_file(path, args)
    except OSError as e:
        print(f"error: cannot read scenario {path}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as e:
        print(f"error: invalid scenario {path}: {e}", file=sys.stderr)
        return EXIT_USAGE

    variants: list[tuple[Scenario, Path]]
    if getattr(args, "adaptation", None) == "both":
        variants = [
            (dataclasses.replace(scenario, adaptation_enabled=True),
             Path(args.out_dir) / "adaptation_on"),
            (dataclasses.replace(scenario, adaptation_enabled=False),
             Path(args.out_dir) / "adaptation_off"),
        ]
    else:
        variants = [(scenario, Path(args.out_dir))]

    all_success = True
    for variant, out_dir in variants:
        try:
            log, summary = controller.run(variant, record_scans=args.dump_scans)
        except PlanningFailed as e:
            print(f"error: planning failed for {path}: {e}", file=sys.stderr)
            return EXIT_RUN_FAILED
        _write_run_bundle(variant, log, summary, out_dir, not args.no_plots,
                          args.dump_scans)
        if not summary.success:
            print(f"run did not reach the goal within {variant.max_sim_time} s "
                  f"({path})", file=sys.stderr)
            all_success = False
    return EXIT_OK if all_success else EXIT_RUN_FAILED


def cmd_compare(args) -> int:
    path = Path(args.scenario)
    try:
        scenario = _load_scenario_file(path, args)
    except OSError as e:
        print(f"error: cannot read scenario {path}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as e:
        print(f"error: invalid scenario {path}: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        log_known, known = controller.run(
            dataclasses.replace(scenario, adaptation_enabled=True))
        log_unknown, unknown = controller.run(
            dataclasses.replace(scenario, adaptation_enabled=False))
    except PlanningFailed as e:
        print(f"error: planning failed for {path}: {e}", file=sys.stderr)
        return EXIT_RUN_FAILED

    record = ComparisonRecord(known=known, unknown=unknown,
                              deltas=_deltas(known, unknown))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "known": summary_to_dict(record.known),
        "unknown": summary_to_dict(record.unknown),
        "delta": {k: (round(v, 6) if isinstance(v, float) else v)
                  for k, v in record.deltas.items()},
    }
    _write_atomic(out_dir / "comparison.json", json.dumps(payload, indent=2) + "\n")
    if not args.no_plots:
        _write_atomic(out_dir / "sii_compare.svg",
                      figures.render_sii_compare(log_known, log_unknown, scenario.sim_dt))
    return EXIT_OK if known.success and unknown.success else EXIT_RUN_FAILED


def _deltas(known: RunSummary, unknown: RunSummary) -> dict:
    def min_distance(s: RunSummary):
        return min((p.min_distance for p in s.people), default=None)

    dk, du = min_distance(known), min_distance(unknown)
    return {
        "path_length_m": known.path_length - unknown.path_length,
        "sii_peak": known.sii_peak - unknown.sii_peak,
        "physiological_violation_steps":
            known.physiological_violation_steps - unknown.physiological_violation_steps,
        "physical_violation_steps":
            known.physical_violation_steps - unknown.physical_violation_steps,
        "min_distance_m": (dk - du) if dk is not None and du is not None else None,
    }


def _batch_one(path: Path, out_root: Path, args) -> dict:
    row = {"scenario": path.name, "status": "ok", "success": "",
           "path_length_m": "", "duration_s": "", "sii_peak": "",
           "physiological_violation_steps": "", "physical_violation_steps": "",
           "min_distance_m": ""}
    try:
        scenario = _load_scenario_file(path, args)
        log, summary = controller.run(scenario, record_scans=False)
        _write_run_bundle(scenario, log, summary, out_root / path.stem,
                          not args.no_plots, False)
        min_d = min((p.min_distance for p in summary.people), default=math.nan)
        row.update(
            success=str(summary.success).lower(),
            path_length_m=f"{summary.path_length:.6f}",
            duration_s=f"{summary.duration:.6f}",
            sii_peak=f"{summary.sii_peak:.6f}",
            physiological_violation_steps=str(summary.physiological_violation_steps),
            physical_violation_steps=str(summary.physical_violation_steps),
            min_distance_m=f"{min_d:.6f}",
        )
        if not summary.success:
            row["status"] = "failed"
    except (OSError, ScenarioError, PlanningFailed) as e:
        row["status"] = f"error: {e}"
    return row


def cmd_batch(args) -> int:
    src = Path(args.directory)
    if not src.is_dir():
        print(f"error: {src} is not a directory", file=sys.stderr)
        return EXIT_USAGE
    files = sorted(src.glob("*.json"))
    if not files:
        print(f"error: no scenario files (*.json) in {src}", file=sys.stderr)
        return EXIT_USAGE

    out_root = Path(args.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    if args.parallelism > 1:
        with ThreadPoolExecutor(max_workers=args.parallelism) as pool:
            rows = list(pool.map(lambda p: _batch_one(p, out_root, args), files))
    else:
        rows = [_batch_one(p, out_root, args) for p in files]

    columns = ["scenario", "status", "success", "path_length_m", "duration_s",
               "sii_peak", "physiological_violation_steps",
               "physical_violation_steps", "min_distance_m"]
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row[c]).replace(",", ";") for c in columns))
    _write_atomic(out_root / "summary.csv", "\n".join(lines) + "\n")

    if any(row["status"] != "ok" for row in rows):
        return EXIT_RUN_FAILED
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socnav",
        description="Deterministic 2D social-navigation simulator with "
                    "emotion-adaptive personal-space costmaps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    default_out = os.environ.get(OUT_DIR_ENV, "socnav_out")

    def add_common(p, adaptation=False):
        p.add_argument("--out-dir", default=default_out,
                       help=f"output directory (default: ${OUT_DIR_ENV} or socnav_out)")
        p.add_argument("--seed", type=int, default=None, help="override scenario seed")
        p.add_argument("--dt", type=float, default=None, help="override simulation dt [s]")
        p.add_argument("--no-plots", action="store_true", help="skip SVG figures")
        if adaptation:
            p.add_argument("--adaptation", choices=("on", "off", "both"), default=None,
                           help="override the scenario's adaptation flag")

    p_run = sub.add_parser("run", help="simulate one scenario and write artifacts")
    p_run.add_argument("scenario", help="scenario JSON file")
    add_common(p_run, adaptation=True)
    p_run.add_argument("--dump-scans", action="store_true",
                       help="also write per-step lidar scans to scans.csv")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare",
                           help="run with adaptation on and off, write the comparison")
    p_cmp.add_argument("scenario", help="scenario JSON file")
    add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_batch = sub.add_parser("batch", help="run every scenario in a directory")
    p_batch.add_argument("directory", help="directory of scenario JSON files")
    add_common(p_batch)
    p_batch.add_argument("-j", "--parallelism", type=int, default=1,
                         help="number of scenarios to run concurrently")
    p_batch.set_defaults(func=cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    return args.func(args)


def console_main() -> None:
    sys.exit(main())
