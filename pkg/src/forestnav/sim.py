"""Synthetic forest world and robot kinematics.

The world is two-dimensional: trunks are circles, optional walls are line
segments, and the sensor sweeps infinitely thin beams. Beams return the
nearest positive intersection, capped (and invalidated) at max range, with
additive Gaussian range noise and independent per-beam dropouts. The robot is
a velocity-controlled rigid body integrated with fixed-step Euler; a second
pose integrates the same commands plus random-walk increments to model
drifting odometry.

Everything is deterministic given the world, the command sequence, and the
generator handed in by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .database import RobotPose, to_world, wrap_angle
from .fit import TreeObservation
from .navigation import VelocityCommand
from .scan import DEG, LaserScan


@dataclass(frozen=True)
class Cylinder:
    """Ground-truth trunk: center, radius, and whether it carries the label."""

    x: float
    y: float
    radius: float
    labeled: bool = False


@dataclass(frozen=True)
class Wall:
    """Line-segment obstacle, useful as a non-tree negative."""

    x1: float
    y1: float
    x2: float
    y2: float


@dataclass(frozen=True)
class WorldConfig:
    trees: tuple[Cylinder, ...] = ()
    walls: tuple[Wall, ...] = ()
    bounds: tuple[float, float, float, float] = (-50.0, -50.0, 50.0, 50.0)

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "walls", tuple(self.walls))
        if any(t.radius <= 0 for t in self.trees):
            raise ValueError("tree radii must be positive")
        if sum(t.labeled for t in self.trees) > 1:
            raise ValueError("at most one labeled tree")
        for i, a in enumerate(self.trees):
            for b in self.trees[i + 1:]:
                if math.hypot(a.x - b.x, a.y - b.y) <= a.radius + b.radius:
                    raise ValueError("trees must not overlap")
        x0, y0, x1, y1 = self.bounds
        if not (x0 < x1 and y0 < y1):
            raise ValueError("bounds must be a non-empty rectangle")

    def labeled_tree(self) -> Optional[Cylinder]:
        for t in self.trees:
            if t.labeled:
                return t
        return None


@dataclass(frozen=True)
class SensorConfig:
    """Beam fan geometry and noise model of the range sensor."""

    angle_min: float = -135.0 * DEG
    angle_span: float = 270.0 * DEG
    angle_step: float = 0.25 * DEG
    max_range: float = 20.0
    noise_sigma: float = 0.0
    dropout_prob: float = 0.0

    def __post_init__(self):
        if self.angle_step <= 0 or self.angle_span <= 0:
            raise ValueError("angle_span and angle_step must be positive")
        ratio = self.angle_span / self.angle_step
        if abs(ratio - round(ratio)) > 1e-6:
            raise ValueError("angle_span must be an integer multiple of angle_step")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0 <= self.dropout_prob < 1:
            raise ValueError("dropout_prob must be in [0, 1)")

    @property
    def n_beams(self) -> int:
        return int(round(self.angle_span / self.angle_step)) + 1


@dataclass(frozen=True)
class OdometryDrift:
    """Per-axis random-walk increment scales, in units per sqrt(second)."""

    sigma_xy: float = 0.0
    sigma_z: float = 0.0
    sigma_yaw: float = 0.0


@dataclass(frozen=True)
class SimState:
    true_pose: RobotPose
    odom_pose: RobotPose
    time: float = 0.0
    rng_seed: int = 0


def ray_circle(origin, direction, center, radius: float) -> Optional[float]:
    """Distance along a unit-direction ray to the nearest circle hit, or None."""
    dx, dy = center[0] - origin[0], center[1] - origin[1]
    proj = dx * direction[0] + dy * direction[1]
    disc = proj * proj - (dx * dx + dy * dy - radius * radius)
    if disc < 0:
        return None
    root = math.sqrt(disc)
    for t in (proj - root, proj + root):
        if t > 1e-9:
            return t
    return None


def ray_segment(origin, direction, a, b) -> Optional[float]:
    """Distance along a unit-direction ray to a segment hit, or None."""
    ex, ey = b[0] - a[0], b[1] - a[1]
    denom = direction[0] * ey - direction[1] * ex
    if abs(denom) < 1e-12:
        return None
    qx, qy = a[0] - origin[0], a[1] - origin[1]
    t = (qx * ey - qy * ex) / denom
    s = (qx * direction[1] - qy * direction[0]) / denom
    if t > 1e-9 and 0.0 <= s <= 1.0:
        return t
    return None


def raycast_scan(
    world: WorldConfig,
    true_pose: RobotPose,
    sensor: SensorConfig,
    rng: np.random.Generator,
) -> LaserScan:
    """Simulate one scan from the true pose.

    Beams that hit nothing are capped at max range and invalid. Hit ranges
    get additive Gaussian noise; each beam independently drops out with the
    configured probability. Exactly two draws per beam are consumed from
    ``rng`` regardless of the noise settings, so streams stay aligned across
    parameter changes.
    """
    x0, y0, x1, y1 = world.bounds
    if not (x0 <= true_pose.x <= x1 and y0 <= true_pose.y <= y1):
        raise ValueError("robot pose outside world bounds")

    n = sensor.n_beams
    ang = true_pose.yaw + sensor.angle_min + sensor.angle_step * np.arange(n)
    ux, uy = np.cos(ang), np.sin(ang)
    dist = np.full(n, sensor.max_range)

    for tr in world.trees:
        dx, dy = tr.x - true_pose.x, tr.y - true_pose.y
        proj = dx * ux + dy * uy
        disc = proj * proj - (dx * dx + dy * dy - tr.radius * tr.radius)
        hit = disc >= 0
        root = np.sqrt(np.where(hit, disc, 0.0))
        near = proj - root
        far = proj + root
        t = np.where(near > 1e-9, near, far)
        t = np.where(hit & (t > 1e-9), t, np.inf)
        dist = np.minimum(dist, t)

    for w in world.walls:
        ex, ey = w.x2 - w.x1, w.y2 - w.y1
        denom = ux * ey - uy * ex
        qx, qy = w.x1 - true_pose.x, w.y1 - true_pose.y
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qx * ey - qy * ex) / denom
            s = (qx * uy - qy * ux) / denom
        ok = (np.abs(denom) > 1e-12) & (t > 1e-9) & (s >= 0.0) & (s <= 1.0)
        dist = np.minimum(dist, np.where(ok, t, np.inf))

    hit = dist < sensor.max_range
    noise = rng.standard_normal(n) * sensor.noise_sigma
    drop = rng.random(n) < sensor.dropout_prob

    ranges = np.where(hit, np.maximum(dist + noise, 1e-9), sensor.max_range)
    ranges = np.where(drop, np.nan, ranges)
    valid = hit & ~drop
    return LaserScan(sensor.angle_min, sensor.angle_step, ranges, valid)


def integrate(
    state: SimState,
    cmd: VelocityCommand,
    dt: float,
    rng: Optional[np.random.Generator] = None,
    drift: Optional[OdometryDrift] = None,
) -> SimState:
    """Euler-integrate one control step.

    Body-frame (vx, vy) are rotated by each pose's own yaw; odometry adds
    zero-mean Gaussian random-walk increments scaled by sqrt(dt). With zero
    drift sigmas the odometry reproduces the true pose bit for bit.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")

    def step(p: RobotPose, yaw_used: float, extra=(0.0, 0.0, 0.0, 0.0)) -> RobotPose:
        c, s = math.cos(yaw_used), math.sin(yaw_used)
        return RobotPose(
            p.x + (cmd.vx * c - cmd.vy * s) * dt + extra[0],
            p.y + (cmd.vx * s + cmd.vy * c) * dt + extra[1],
            max(0.0, p.z + cmd.vz * dt + extra[2]),
            wrap_angle(p.yaw + cmd.vyaw * dt + extra[3]),
        )

    true_new = step(state.true_pose, state.true_pose.yaw)
    if rng is not None:
        d = drift or OdometryDrift()
        sq = math.sqrt(dt)
        n = rng.standard_normal(4)
        extra = (d.sigma_xy * sq * n[0], d.sigma_xy * sq * n[1],
                 d.sigma_z * sq * n[2], d.sigma_yaw * sq * n[3])
    else:
        extra = (0.0, 0.0, 0.0, 0.0)
    odom_new = step(state.odom_pose, state.odom_pose.yaw, extra)
    return SimState(true_new, odom_new, state.time + dt, state.rng_seed)


def _occluded(world: WorldConfig, pose: RobotPose, target: Cylinder) -> bool:
    """True when something else intersects the center ray before the target."""
    dx, dy = target.x - pose.x, target.y - pose.y
    dist = math.hypot(dx, dy)
    if dist < 1e-9:
        return False
    u = (dx / dist, dy / dist)
    surface = dist - target.radius
    for tr in world.trees:
        if tr is target:
            continue
        t = ray_circle((pose.x, pose.y), u, (tr.x, tr.y), tr.radius)
        if t is not None and t < surface - 1e-9:
            return True
    for w in world.walls:
        t = ray_segment((pose.x, pose.y), u, (w.x1, w.y1), (w.x2, w.y2))
        if t is not None and t < surface - 1e-9:
            return True
    return False


def sense_label(
    world: WorldConfig,
    true_pose: RobotPose,
    observations: Sequence[TreeObservation],
    max_label_range: float,
    gate: float = 0.5,
) -> Optional[int]:
    """Index of the observation that corresponds to the labeled tree.

    Stand-in for an onboard label detector: fires only when the labeled tree
    is within ``max_label_range`` of the robot, not occluded along the center
    ray, and some observation's world-frame center lies within ``gate`` of
    the true labeled position. Returns None otherwise.
    """
    target = world.labeled_tree()
    if target is None or not observations:
        return None
    if math.hypot(target.x - true_pose.x, target.y - true_pose.y) >= max_label_range:
        return None
    if _occluded(world, true_pose, target):
        return None
    best_i, best_d = None, gate
    for i, obs in enumerate(observations):
        wx, wy = to_world(obs, true_pose)
        d = math.hypot(wx - target.x, wy - target.y)
        if d < best_d:
            best_i, best_d = i, d
    return best_i
