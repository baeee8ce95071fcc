"""World-frame tree database with vote-based reliability.

Detections arrive in the sensor frame; the robot pose rotates and translates
them into the world frame. Each new observation either matches the nearest
existing tree (center distance under the association gate) and refines it, or
starts a new entry. A tree's vote count is the number of observations behind
it, so votes double as a reliability score. Position and radius are running
means over those votes, which tolerates slow odometry drift: consecutive
scans land well inside the gate even when the absolute frame has wandered.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .fit import TreeObservation


class UnknownId(KeyError):
    """No tree with the requested id exists in the database."""


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    return math.pi - (math.pi - a) % (2.0 * math.pi)


@dataclass(frozen=True)
class RobotPose:
    """Planar pose with altitude: x, y, z in meters, yaw in radians."""

    x: float
    y: float
    z: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError("altitude must be non-negative")
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))


@dataclass
class Tree:
    """One database entry: world position, radius, votes, label flag."""

    id: int
    x: float
    y: float
    r: float
    votes: int = 1
    labeled: bool = False


class UpdateSummary(NamedTuple):
    matched: int
    inserted: int


def to_world(obs: TreeObservation, pose: RobotPose) -> tuple[float, float]:
    """Sensor-frame observation center -> world frame via the robot pose."""
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    ox, oy = obs.center
    return (pose.x + c * ox - s * oy, pose.y + s * ox + c * oy)


class TreeDatabase:
    """Set of known trees plus the association gate ``thre_dist``."""

    def __init__(self, thre_dist: float = 0.5):
        if thre_dist <= 0:
            raise ValueError("thre_dist must be positive")
        self.thre_dist = thre_dist
        self.trees: list[Tree] = []
        self._next_id = 0

    def __len__(self) -> int:
        return len(self.trees)

    def get(self, tree_id: int) -> Optional[Tree]:
        for t in self.trees:
            if t.id == tree_id:
                return t
        return None

    def nearest_tree(self, point: tuple[float, float]) -> Optional[Tree]:
        """Tree minimizing center distance to ``point``; ties go to lowest id."""
        best = None
        best_key = None
        for t in self.trees:
            key = (math.hypot(t.x - point[0], t.y - point[1]), t.id)
            if best_key is None or key < best_key:
                best, best_key = t, key
        return best

    def update(self, observations: list[TreeObservation], pose: RobotPose) -> UpdateSummary:
        """Associate or insert one scan's observations, in scan order.

        A matched tree's position and radius move by the increment of a
        running mean over its votes; votes then increment. Unmatched
        observations insert fresh unlabeled trees with one vote.
        """
        matched = inserted = 0
        for obs in observations:
            wx, wy = to_world(obs, pose)
            near = self.nearest_tree((wx, wy))
            if near is not None and math.hypot(near.x - wx, near.y - wy) < self.thre_dist:
                k = near.votes + 1
                near.x += (wx - near.x) / k
                near.y += (wy - near.y) / k
                near.r += (obs.radius - near.r) / k
                near.votes = k
                matched += 1
            else:
                self.trees.append(Tree(self._next_id, wx, wy, obs.radius))
                self._next_id += 1
                inserted += 1
        return UpdateSummary(matched, inserted)

    def confirmed_trees(self, min_votes: int = 1) -> list[Tree]:
        """Trees with at least ``min_votes`` votes, ordered by id."""
        if min_votes < 1:
            raise ValueError("min_votes must be >= 1")
        return sorted((t for t in self.trees if t.votes >= min_votes), key=lambda t: t.id)

    def labeled_tree(self) -> Optional[Tree]:
        for t in self.trees:
            if t.labeled:
                return t
        return None

    def mark_labeled(self, tree_id: int) -> None:
        """Flag one tree as the labeled reference; re-marking moves the flag."""
        target = self.get(tree_id)
        if target is None:
            raise UnknownId(tree_id)
        for t in self.trees:
            t.labeled = False
        target.labeled = True

    def total_votes(self) -> int:
        return sum(t.votes for t in self.trees)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "trees": [
                {"id": t.id, "x": t.x, "y": t.y, "r": t.r, "votes": t.votes, "labeled": t.labeled}
                for t in sorted(self.trees, key=lambda t: t.id)
            ]
        })

    @classmethod
    def from_json(cls, text: str, thre_dist: float = 0.5) -> "TreeDatabase":
        db = cls(thre_dist)
        data = json.loads(text)
        for row in data["trees"]:
            db.trees.append(Tree(int(row["id"]), float(row["x"]), float(row["y"]),
                                 float(row["r"]), int(row["votes"]), bool(row["labeled"])))
        db._next_id = 1 + max((t.id for t in db.trees), default=-1)
        return db

    def to_csv(self) -> str:
        """Table-style export: id, x, y, diameter, votes, labeled."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "x", "y", "diameter", "votes", "labeled"])
        for t in sorted(self.trees, key=lambda t: t.id):
            w.writerow([t.id, f"{t.x:.6f}", f"{t.y:.6f}", f"{2 * t.r:.6f}", t.votes, int(t.labeled)])
        return buf.getvalue()
