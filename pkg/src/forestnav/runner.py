"""Scenario execution, offline replay, and measurement reports.

One run is a fixed-step loop: scan (on its own schedule), detect trees,
update the database with the odometry pose, identify the labeled tree once,
step the mission, integrate the robot. Artifacts are written with fixed
decimal formatting so a rerun with the same scenario and seed reproduces
every file byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, TextIO

import numpy as np

from .database import RobotPose, TreeDatabase, to_world
from .fit import detect_trees
from .navigation import MissionConfig, MissionState, Phase, TargetLost, mission_step
from .scan import parse_scan_record
from .scenario import Scenario
from .sim import SimState, WorldConfig, integrate, raycast_scan, sense_label


class MissionAbort(RuntimeError):
    """The mission lost its target tree; the run stopped early."""


class ParseError(ValueError):
    """A replay log line could not be parsed; carries the line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class DiameterRow:
    tree_id: int
    estimated: float
    true: float

    @property
    def error(self) -> float:
        return abs(self.estimated - self.true)


@dataclass(frozen=True)
class DiameterReport:
    """Per-tree diameter errors against ground truth, plus mismatch counts."""

    rows: tuple[DiameterRow, ...]
    unmatched_truth: int
    spurious: int

    @property
    def mean_error(self) -> float:
        return sum(r.error for r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def max_error(self) -> float:
        return max((r.error for r in self.rows), default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "estimated_diameter", "true_diameter", "error"])
        for r in self.rows:
            w.writerow([r.tree_id, f"{r.estimated:.6f}", f"{r.true:.6f}", f"{r.error:.6f}"])
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {
            "rows": [
                {"id": r.tree_id, "estimated": r.estimated, "true": r.true, "error": r.error}
                for r in self.rows
            ],
            "mean_error": self.mean_error,
            "max_error": self.max_error,
            "unmatched_truth": self.unmatched_truth,
            "spurious": self.spurious,
        }


def diameter_metrics(
    db: TreeDatabase,
    world: WorldConfig,
    min_votes: int = 1,
    gate: Optional[float] = None,
) -> DiameterReport:
    """Match confirmed trees to ground truth and tabulate diameter errors.

    Matching is greedy by ascending center distance inside the association
    gate (the database gate unless overridden). Confirmed trees that match
    nothing are counted as spurious; unmatched ground-truth trees are counted
    separately rather than dropped.
    """
    gate = db.thre_dist if gate is None else gate
    confirmed = db.confirmed_trees(min_votes)
    pairs = []
    for t in confirmed:
        for j, truth in enumerate(world.trees):
            d = math.hypot(t.x - truth.x, t.y - truth.y)
            if d < gate:
                pairs.append((d, t.id, j, t))
    pairs.sort(key=lambda p: (p[0], p[1], p[2]))
    used_tree: set[int] = set()
    used_truth: set[int] = set()
    rows = []
    for d, tid, j, t in pairs:
        if tid in used_tree or j in used_truth:
            continue
        used_tree.add(tid)
        used_truth.add(j)
        rows.append(DiameterRow(tid, 2.0 * t.r, 2.0 * world.trees[j].radius))
    rows.sort(key=lambda r: r.tree_id)
    return DiameterReport(
        rows=tuple(rows),
        unmatched_truth=len(world.trees) - len(used_truth),
        spurious=len(confirmed) - len(used_tree),
    )


@dataclass(frozen=True)
class RunReport:
    steps: int
    scans: int
    visited: int
    phase: str
    db: TreeDatabase
    diameters: DiameterReport


class _Logs:
    """Deterministically formatted artifact writers."""

    TRAJ_HEADER = ("t,true_x,true_y,true_yaw,odom_x,odom_y,odom_yaw,"
                   "cmd_vx,cmd_vy,cmd_vz,cmd_vyaw\n")

    def __init__(self, out_dir: Optional[Path]):
        self.out_dir = out_dir
        self._files: list[TextIO] = []
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            self.traj = self._open("trajectory.csv")
            self.traj.write(self.TRAJ_HEADER)
            self.mission = self._open("mission.jsonl")
            self.detections = self._open("detections.jsonl")
        else:
            self.traj = self.mission = self.detections = None

    def _open(self, name: str) -> TextIO:
        f = open(self.out_dir / name, "w", encoding="utf-8", newline="")
        self._files.append(f)
        return f

    def traj_row(self, t, true_pose, odom_pose, cmd):
        if self.traj is None:
            return
        vals = (t, true_pose.x, true_pose.y, true_pose.yaw,
                odom_pose.x, odom_pose.y, odom_pose.yaw,
                cmd.vx, cmd.vy, cmd.vz, cmd.vyaw)
        self.traj.write(",".join(f"{v:.6f}" for v in vals) + "\n")

    def mission_event(self, t: float, event: dict):
        if self.mission is not None:
            self.mission.write(json.dumps({"t": round(t, 6), **event}, sort_keys=True) + "\n")

    def detection(self, t: float, obs):
        if self.detections is not None:
            self.detections.write(json.dumps(obs.to_json_obj(round(t, 6))) + "\n")

    def write_text(self, name: str, text: str):
        if self.out_dir is not None:
            (self.out_dir / name).write_text(text, encoding="utf-8")

    def close(self):
        for f in self._files:
            f.close()
        self._files.clear()


def run_scenario(scenario: Scenario, out_dir: Optional[str | Path] = None) -> RunReport:
    """Execute a scenario; optionally write all artifacts into ``out_dir``.

    Raises MissionAbort if the mission target disappears from the database.
    The loop ends after the configured duration or as soon as the mission
    reports done.
    """
    rng = np.random.default_rng(scenario.seed)
    state = SimState(scenario.start, scenario.start, 0.0, scenario.seed)
    db = TreeDatabase(scenario.db.thre_dist)
    mission = MissionState()
    mcfg = MissionConfig(
        controller=scenario.controller,
        search_method=scenario.search.method,
        area_radius=scenario.search.area_radius,
        origin=(scenario.start.x, scenario.start.y),
        min_votes=scenario.db.min_votes,
    )
    logs = _Logs(Path(out_dir) if out_dir is not None else None)
    scans_done = 0
    steps_done = 0
    label_found = False

    try:
        for i in range(scenario.n_steps):
            if mission.phase is Phase.DONE:
                break
            t = i * scenario.dt
            if t + 1e-9 >= scans_done / scenario.scan_rate:
                scan = raycast_scan(scenario.world, state.true_pose, scenario.sensor, rng)
                observations = detect_trees(scan, scenario.filters, scenario.discrimination)
                db.update(observations, state.odom_pose)
                for obs in observations:
                    logs.detection(t, obs)
                if not label_found and observations:
                    idx = sense_label(scenario.world, state.true_pose, observations,
                                      scenario.search.max_label_range,
                                      gate=scenario.db.thre_dist)
                    if idx is not None:
                        anchor = db.nearest_tree(to_world(observations[idx], state.odom_pose))
                        if anchor is not None:
                            db.mark_labeled(anchor.id)
                            mission = mission.with_target(anchor.id)
                            label_found = True
                            logs.mission_event(t, {"event": "target", "id": anchor.id,
                                                   "reason": "labeled"})
                scans_done += 1

            try:
                mission, cmd, events = mission_step(mission, db, state.odom_pose, mcfg)
            except TargetLost as exc:
                raise MissionAbort(str(exc)) from exc
            for ev in events:
                logs.mission_event(t, ev)
            logs.traj_row(t, state.true_pose, state.odom_pose, cmd)
            state = integrate(state, cmd, scenario.dt, rng, scenario.drift)
            steps_done += 1

        report = diameter_metrics(db, scenario.world, scenario.db.min_votes,
                                  gate=scenario.db.thre_dist)
        logs.write_text("db.json", db.to_json() + "\n")
        logs.write_text("db.csv", db.to_csv())
        logs.write_text("report.csv", report.to_csv())
        logs.write_text("report.json", json.dumps(report.to_json_obj(), sort_keys=True) + "\n")
    finally:
        logs.close()

    return RunReport(
        steps=steps_done,
        scans=scans_done,
        visited=len(mission.visited),
        phase=mission.phase.value,
        db=db,
        diameters=report,
    )


def replay(
    scans_path: str | Path,
    out_dir: Optional[str | Path] = None,
    scenario: Optional[Scenario] = None,
) -> tuple[int, TreeDatabase]:
    """Run detection and database updates over a recorded scan log.

    The log is line oriented: ``pose <t> <x> <y> <z> <yaw>`` updates the
    current pose, ``scan <t> <angle_min> <angle_step> <n> r...`` runs the
    pipeline with the most recent pose (identity if none yet). Blank lines
    and ``#`` comments are skipped. Returns (scans processed, database).
    """
    params = scenario or Scenario()
    db = TreeDatabase(params.db.thre_dist)
    pose = RobotPose(0.0, 0.0, 0.0, 0.0)
    logs = _Logs(Path(out_dir) if out_dir is not None else None)
    n_scans = 0
    try:
        with open(scans_path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                kind = line.split(None, 1)[0]
                if kind == "pose":
                    parts = line.split()
                    if len(parts) != 6:
                        raise ParseError(lineno, "pose record needs 5 numbers")
                    try:
                        _, x, y, z, yaw = (float(v) for v in parts[1:])
                    except ValueError as exc:
                        raise ParseError(lineno, str(exc)) from exc
                    try:
                        pose = RobotPose(x, y, z, yaw)
                    except ValueError as exc:
                        raise ParseError(lineno, str(exc)) from exc
                elif kind == "scan":
                    try:
                        t, scan = parse_scan_record(line)
                    except ValueError as exc:
                        raise ParseError(lineno, str(exc)) from exc
                    observations = detect_trees(scan, params.filters, params.discrimination)
                    db.update(observations, pose)
                    for obs in observations:
                        logs.detection(t, obs)
                    n_scans += 1
                else:
                    raise ParseError(lineno, f"unknown record type {kind!r}")
        logs.write_text("db.json", db.to_json() + "\n")
        logs.write_text("db.csv", db.to_csv())
    finally:
        logs.close()
    return n_scans, db
