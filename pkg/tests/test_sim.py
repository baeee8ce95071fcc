"""Raycasting, kinematic integration, drift, determinism, label sensing."""

import math

import numpy as np
import pytest

from forestnav import (
    Cylinder,
    DiscriminationParams,
    OdometryDrift,
    RobotPose,
    ScanFilterParams,
    SensorConfig,
    SimState,
    TreeObservation,
    VelocityCommand,
    Wall,
    WorldConfig,
    detect_trees,
    integrate,
    raycast_scan,
    sense_label,
)

DEG = math.pi / 180.0


def narrow_sensor(n=9, step=0.25 * DEG, **kw):
    return SensorConfig(angle_min=-(n - 1) / 2 * step, angle_span=(n - 1) * step,
                        angle_step=step, **kw)


class TestWorldConfig:
    def test_rejects_overlapping_trees(self):
        with pytest.raises(ValueError):
            WorldConfig(trees=(Cylinder(0, 0, 0.5), Cylinder(0.6, 0, 0.5)))

    def test_rejects_two_labels(self):
        with pytest.raises(ValueError):
            WorldConfig(trees=(Cylinder(0, 0, 0.2, True), Cylinder(3, 0, 0.2, True)))


class TestRaycast:
    def test_center_beam_range(self):
        world = WorldConfig(trees=(Cylinder(2.0, 0.0, 0.5),))
        scan = raycast_scan(world, RobotPose(0, 0), narrow_sensor(),
                            np.random.default_rng(0))
        mid = len(scan) // 2
        assert scan.valid[mid]
        assert scan.ranges[mid] == pytest.approx(1.5, abs=1e-12)

    def test_empty_world_all_invalid(self):
        scan = raycast_scan(WorldConfig(), RobotPose(0, 0), narrow_sensor(),
                            np.random.default_rng(0))
        assert not scan.valid.any()
        assert (scan.ranges == 20.0).all()

    def test_tangent_epsilon_misses(self):
        # single beam aimed just above the tangent direction must miss;
        # just below must hit (closed-form tangent angle oracle)
        tangent = math.asin(0.5 / 2.0)
        world = WorldConfig(trees=(Cylinder(2.0, 0.0, 0.5),))
        for eps, hits in [(1e-6, False), (-1e-6, True)]:
            sensor = SensorConfig(angle_min=tangent + eps, angle_span=0.25 * DEG,
                                  angle_step=0.25 * DEG)
            scan = raycast_scan(world, RobotPose(0, 0), sensor, np.random.default_rng(0))
            assert bool(scan.valid[0]) is hits

    def test_matches_quadratic_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            trees = []
            while len(trees) < 4:
                cand = Cylinder(rng.uniform(-8, 8), rng.uniform(-8, 8),
                                rng.uniform(0.1, 0.6))
                if all(math.hypot(cand.x - t.x, cand.y - t.y) > cand.radius + t.radius
                       for t in trees):
                    trees.append(cand)
            world = WorldConfig(trees=tuple(trees))
            pose = RobotPose(rng.uniform(-2, 2), rng.uniform(-2, 2), 1.0,
                             rng.uniform(-3, 3))
            sensor = narrow_sensor(n=61, step=1.5 * DEG)
            scan = raycast_scan(world, pose, sensor, np.random.default_rng(0))
            for i in range(len(scan)):
                ang = pose.yaw + sensor.angle_min + i * sensor.angle_step
                best = sensor.max_range
                for t in world.trees:
                    dx, dy = t.x - pose.x, t.y - pose.y
                    b = dx * math.cos(ang) + dy * math.sin(ang)
                    disc = b * b - (dx * dx + dy * dy - t.radius ** 2)
                    if disc >= 0:
                        root = b - math.sqrt(disc)
                        if root > 1e-9:
                            best = min(best, root)
                assert scan.ranges[i] == pytest.approx(best, abs=1e-9)

    def test_wall_hit(self):
        world = WorldConfig(walls=(Wall(1.0, -2.0, 1.0, 2.0),))
        scan = raycast_scan(world, RobotPose(0, 0), narrow_sensor(),
                            np.random.default_rng(0))
        mid = len(scan) // 2
        assert scan.valid[mid]
        assert scan.ranges[mid] == pytest.approx(1.0, abs=1e-12)

    def test_noise_and_dropout_are_deterministic(self):
        world = WorldConfig(trees=(Cylinder(3.0, 0.5, 0.3),))
        sensor = SensorConfig(noise_sigma=0.02, dropout_prob=0.05)
        a = raycast_scan(world, RobotPose(0, 0), sensor, np.random.default_rng(42))
        b = raycast_scan(world, RobotPose(0, 0), sensor, np.random.default_rng(42))
        assert np.array_equal(a.valid, b.valid)
        assert np.array_equal(a.ranges, b.ranges, equal_nan=True)
        assert np.isnan(a.ranges[~a.valid]).any() or (~a.valid).sum() == (a.ranges == 20.0).sum()

    def test_pose_outside_bounds_rejected(self):
        world = WorldConfig(bounds=(-1, -1, 1, 1))
        with pytest.raises(ValueError):
            raycast_scan(world, RobotPose(5, 0), narrow_sensor(), np.random.default_rng(0))

    def test_detection_within_two_percent_up_close(self):
        # noise-free end to end: the fitted radius lands within 2 percent
        filt = ScanFilterParams()
        disc = DiscriminationParams()
        for d in (1.5, 3.0, 5.0):
            world = WorldConfig(trees=(Cylinder(d, 0.0, 0.15),))
            scan = raycast_scan(world, RobotPose(0, 0), SensorConfig(),
                                np.random.default_rng(0))
            obs = detect_trees(scan, filt, disc)
            assert len(obs) == 1
            assert obs[0].radius == pytest.approx(0.15, rel=0.02)


class TestIntegrate:
    def test_forward_step(self):
        s = SimState(RobotPose(0, 0, 1, 0), RobotPose(0, 0, 1, 0))
        out = integrate(s, VelocityCommand(vx=1.0), 0.1)
        assert out.true_pose.x == pytest.approx(0.1)
        assert out.true_pose.y == 0.0
        assert out.time == pytest.approx(0.1)

    def test_yaw_wraps_into_half_open_interval(self):
        s = SimState(RobotPose(0, 0, 1, 0), RobotPose(0, 0, 1, 0))
        out = integrate(s, VelocityCommand(vyaw=math.pi / 0.1), 0.1)
        assert out.true_pose.yaw == pytest.approx(math.pi)
        out2 = integrate(out, VelocityCommand(vyaw=0.1 / 0.1), 0.1)
        assert -math.pi < out2.true_pose.yaw <= math.pi
        assert out2.true_pose.yaw == pytest.approx(-math.pi + 0.1)

    def test_body_y_maps_by_yaw(self):
        s = SimState(RobotPose(0, 0, 1, math.pi / 2), RobotPose(0, 0, 1, math.pi / 2))
        out = integrate(s, VelocityCommand(vy=1.0), 0.1)
        assert out.true_pose.x == pytest.approx(-0.1)
        assert abs(out.true_pose.y) < 1e-12

    def test_zero_drift_keeps_odometry_exact(self):
        rng = np.random.default_rng(1)
        s = SimState(RobotPose(0, 0, 1.5, 0.3), RobotPose(0, 0, 1.5, 0.3))
        for _ in range(200):
            cmd = VelocityCommand(*rng.uniform(-1, 1, 4))
            s = integrate(s, cmd, 0.02, rng, OdometryDrift())
            assert s.odom_pose == s.true_pose

    def test_drift_wanders(self):
        rng = np.random.default_rng(1)
        s = SimState(RobotPose(0, 0, 1.5, 0.0), RobotPose(0, 0, 1.5, 0.0))
        for _ in range(500):
            s = integrate(s, VelocityCommand(vx=0.5), 0.02, rng,
                          OdometryDrift(sigma_xy=0.05, sigma_yaw=0.01))
        assert s.odom_pose != s.true_pose
        assert math.dist((s.odom_pose.x, s.odom_pose.y),
                         (s.true_pose.x, s.true_pose.y)) > 1e-3

    def test_altitude_floors_at_zero(self):
        s = SimState(RobotPose(0, 0, 0.05, 0), RobotPose(0, 0, 0.05, 0))
        out = integrate(s, VelocityCommand(vz=-10.0), 0.1)
        assert out.true_pose.z == 0.0


class TestSenseLabel:
    FILT = ScanFilterParams()
    DISC = DiscriminationParams()

    def observe(self, world, pose):
        scan = raycast_scan(world, pose, SensorConfig(), np.random.default_rng(0))
        return detect_trees(scan, self.FILT, self.DISC)

    def test_clear_view_returns_matching_index(self):
        world = WorldConfig(trees=(Cylinder(2.0, 0.0, 0.15, True),
                                   Cylinder(2.0, 3.0, 0.15)))
        pose = RobotPose(0, 0)
        obs = self.observe(world, pose)
        assert len(obs) == 2
        idx = sense_label(world, pose, obs, max_label_range=5.0)
        assert idx is not None
        assert obs[idx].center[1] == pytest.approx(0.0, abs=0.02)

    def test_no_labeled_tree(self):
        world = WorldConfig(trees=(Cylinder(2.0, 0.0, 0.15),))
        pose = RobotPose(0, 0)
        assert sense_label(world, pose, self.observe(world, pose), 5.0) is None

    def test_out_of_range(self):
        world = WorldConfig(trees=(Cylinder(8.0, 0.0, 0.15, True),))
        pose = RobotPose(0, 0)
        assert sense_label(world, pose, self.observe(world, pose), 5.0) is None

    def test_occluded_by_nearer_tree(self):
        # a second trunk sits on the center ray: the label may not fire even
        # though a (partial) observation of the labeled tree could exist
        world = WorldConfig(trees=(Cylinder(4.0, 0.0, 0.15, True),
                                   Cylinder(2.0, 0.0, 0.2)))
        pose = RobotPose(0, 0)
        obs = self.observe(world, pose)
        assert sense_label(world, pose, obs, 5.0) is None
