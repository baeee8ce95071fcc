"""Orbit controller and tree-to-tree search mission.

The measurement maneuver keeps the robot on a circle of radius ``d_ref``
around the target trunk, body x axis pointed at the trunk, translating
sideways at constant speed V. The yaw command combines a proportional term
on the bearing error with the feedforward rate -V/d_ref that a perfect
circular orbit requires. On the nominal circle with perfect heading the
command is exactly (0, V, 0, -V/d_ref).

Target order comes from one of two searchers: "narrow" walks trees
counterclockwise inside a disc around the labeled tree, "deep" always moves
to the nearest tree strictly farther from the mission origin than the last
one. The mission itself is a four-phase machine: approach, orbit until a
full revolution of bearing has been swept, select the next target, done.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .database import RobotPose, Tree, TreeDatabase, wrap_angle


class DegenerateGeometry(ValueError):
    """Robot exactly at the target center; no orbit direction exists."""


class TargetLost(RuntimeError):
    """The mission target vanished from the database; abort."""


@dataclass(frozen=True)
class ControllerParams:
    """Gains, speeds, and tolerances for approach and orbit control."""

    k_x: float = 1.0
    k_z: float = 1.0
    k_phi: float = 2.0
    v: float = 0.3
    d_ref: float = 1.1
    z_ref: float = 1.5
    max_xy: float = 1.0
    max_z: float = 1.0
    max_yaw: float = 1.5
    arrival_tol: float = 0.05
    heading_tol: float = 0.1

    def __post_init__(self):
        if min(self.k_x, self.k_z, self.k_phi, self.v, self.d_ref, self.z_ref) <= 0:
            raise ValueError("gains, speed, and references must be positive")


@dataclass(frozen=True)
class VelocityCommand:
    """Body-frame velocity command: vx, vy, vz in m/s, vyaw in rad/s."""

    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    vyaw: float = 0.0

    def __post_init__(self):
        if not all(map(math.isfinite, (self.vx, self.vy, self.vz, self.vyaw))):
            raise ValueError("velocity command must be finite")


HOVER = VelocityCommand()


def _clamp(v: float, lim: float) -> float:
    return max(-lim, min(lim, v))


def _bearing_error(pose: RobotPose, tree: Tree) -> tuple[float, float]:
    """(distance, bearing of the tree center from the body +x axis)."""
    dx, dy = tree.x - pose.x, tree.y - pose.y
    d = math.hypot(dx, dy)
    return d, wrap_angle(math.atan2(dy, dx) - pose.yaw)


def circular_velocity(pose: RobotPose, tree: Tree, p: ControllerParams) -> VelocityCommand:
    """Velocity command for constant-speed circling at d_ref around a tree.

    Radial feedback drives the center distance to d_ref along the body x
    axis (which faces the tree), vy is the constant tangential speed, vz
    holds altitude, and vyaw adds the orbit-rate feedforward -v/d_ref to the
    bearing-error feedback.
    """
    d, dtheta = _bearing_error(pose, tree)
    if d == 0:
        raise DegenerateGeometry("robot is at the target center")
    return VelocityCommand(
        vx=_clamp(p.k_x * (d - p.d_ref), p.max_xy),
        vy=_clamp(p.v, p.max_xy),
        vz=_clamp(p.k_z * (p.z_ref - pose.z), p.max_z),
        vyaw=_clamp(p.k_phi * dtheta - p.v / p.d_ref, p.max_yaw),
    )


def approach_velocity(pose: RobotPose, tree: Tree, p: ControllerParams) -> VelocityCommand:
    """Drive toward the tree until d_ref away, yaw servoing onto it."""
    d, dtheta = _bearing_error(pose, tree)
    return VelocityCommand(
        vx=_clamp(p.k_x * (d - p.d_ref), p.max_xy),
        vy=0.0,
        vz=_clamp(p.k_z * (p.z_ref - pose.z), p.max_z),
        vyaw=_clamp(p.k_phi * dtheta, p.max_yaw),
    )


def arrived(pose: RobotPose, tree: Tree, p: ControllerParams) -> bool:
    d, dtheta = _bearing_error(pose, tree)
    return abs(d - p.d_ref) < p.arrival_tol and abs(dtheta) < p.heading_tol


def next_target_narrow(
    db: TreeDatabase,
    labeled: Tree,
    visited: frozenset[int],
    area_radius: float,
    current_angle: float,
    min_votes: int = 1,
) -> Optional[Tree]:
    """Next unvisited tree counterclockwise around the labeled tree.

    Candidates are confirmed trees (other than the labeled one) inside the
    search disc; the winner has the smallest positive angular advance past
    ``current_angle``, wrapping at a full turn.
    """
    best = None
    best_key = None
    for t in db.confirmed_trees(min_votes):
        if t.id in visited or t.id == labeled.id:
            continue
        if math.hypot(t.x - labeled.x, t.y - labeled.y) >= area_radius:
            continue
        ang = math.atan2(t.y - labeled.y, t.x - labeled.x)
        advance = (ang - current_angle) % (2.0 * math.pi)
        if advance == 0.0:
            advance = 2.0 * math.pi
        key = (advance, t.id)
        if best_key is None or key < best_key:
            best, best_key = t, key
    return best


def next_target_deep(
    db: TreeDatabase,
    prev: Tree,
    origin: tuple[float, float],
    visited: frozenset[int],
    min_votes: int = 1,
) -> Optional[Tree]:
    """Nearest unvisited tree strictly deeper (farther from origin) than prev."""
    prev_depth = math.hypot(prev.x - origin[0], prev.y - origin[1])
    best = None
    best_key = None
    for t in db.confirmed_trees(min_votes):
        if t.id in visited:
            continue
        if math.hypot(t.x - origin[0], t.y - origin[1]) <= prev_depth:
            continue
        key = (math.hypot(t.x - prev.x, t.y - prev.y), t.id)
        if best_key is None or key < best_key:
            best, best_key = t, key
    return best


class Phase(Enum):
    APPROACH = "approach"
    ORBIT = "orbit"
    SELECT_NEXT = "select_next"
    DONE = "done"


@dataclass(frozen=True)
class MissionConfig:
    controller: ControllerParams
    search_method: str = "narrow"  # "narrow" or "deep"
    area_radius: float = 8.0
    origin: tuple[float, float] = (0.0, 0.0)
    min_votes: int = 1

    def __post_init__(self):
        if self.search_method not in ("narrow", "deep"):
            raise ValueError("search_method must be 'narrow' or 'deep'")


@dataclass(frozen=True)
class MissionState:
    """Evolving mission bookkeeping; the runner owns exactly one of these."""

    phase: Phase = Phase.APPROACH
    target: Optional[int] = None
    orbit_progress: float = 0.0
    visited: frozenset[int] = frozenset()
    last_bearing: Optional[float] = None

    def with_target(self, tree_id: int) -> "MissionState":
        return replace(self, phase=Phase.APPROACH, target=tree_id,
                       orbit_progress=0.0, last_bearing=None)


def _polar_angle(pose: RobotPose, tree: Tree) -> float:
    return math.atan2(pose.y - tree.y, pose.x - tree.x)


def mission_step(
    state: MissionState,
    db: TreeDatabase,
    pose: RobotPose,
    cfg: MissionConfig,
) -> tuple[MissionState, VelocityCommand, list[dict]]:
    """Advance the mission one control tick.

    Returns the successor state, the velocity command for this tick, and any
    log events (phase transitions, target selections, orbit completions).
    Raises TargetLost when the current target id is missing from the
    database before the mission is done.
    """
    events: list[dict] = []

    if state.phase is Phase.DONE:
        return state, HOVER, events

    if state.target is None:
        # waiting for the labeled tree to be identified
        return state, HOVER, events

    tree = db.get(state.target)
    if tree is None:
        raise TargetLost(f"tree {state.target} not in database")

    if state.phase is Phase.APPROACH:
        if arrived(pose, tree, cfg.controller):
            new = replace(state, phase=Phase.ORBIT, orbit_progress=0.0,
                          last_bearing=_polar_angle(pose, tree))
            events.append({"event": "phase", "from": state.phase.value,
                           "to": new.phase.value, "target": tree.id})
            return new, circular_velocity(pose, tree, cfg.controller), events
        return state, approach_velocity(pose, tree, cfg.controller), events

    if state.phase is Phase.ORBIT:
        bearing = _polar_angle(pose, tree)
        swept = state.orbit_progress
        if state.last_bearing is not None:
            swept += wrap_angle(bearing - state.last_bearing)
        if abs(swept) >= 2.0 * math.pi:
            events.append({"event": "orbit_complete", "target": tree.id,
                           "angle": abs(swept)})
            new = replace(state, phase=Phase.SELECT_NEXT, orbit_progress=swept,
                          last_bearing=bearing, visited=state.visited | {tree.id})
            events.append({"event": "phase", "from": state.phase.value,
                           "to": new.phase.value, "target": tree.id})
            return new, circular_velocity(pose, tree, cfg.controller), events
        new = replace(state, orbit_progress=swept, last_bearing=bearing)
        return new, circular_velocity(pose, tree, cfg.controller), events

    # SELECT_NEXT
    if cfg.search_method == "narrow":
        labeled = db.labeled_tree()
        if labeled is None:
            raise TargetLost("labeled tree missing from database")
        nxt = next_target_narrow(db, labeled, state.visited, cfg.area_radius,
                                 _polar_angle(pose, labeled), cfg.min_votes)
    else:
        nxt = next_target_deep(db, tree, cfg.origin, state.visited, cfg.min_votes)

    if nxt is None:
        new = replace(state, phase=Phase.DONE, target=None, last_bearing=None)
        events.append({"event": "phase", "from": state.phase.value, "to": new.phase.value})
        return new, HOVER, events

    new = state.with_target(nxt.id)
    events.append({"event": "target", "id": nxt.id, "reason": cfg.search_method})
    events.append({"event": "phase", "from": state.phase.value, "to": new.phase.value,
                   "target": nxt.id})
    return new, HOVER, events
