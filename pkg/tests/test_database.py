"""World-frame transform, association, votes, and serialization."""

import json
import math

import numpy as np
import pytest

from forestnav import (
    RobotPose,
    TreeDatabase,
    TreeObservation,
    UnknownId,
    to_world,
    wrap_angle,
)


def obs(x, y, r=0.15):
    return TreeObservation(center=(x, y), radius=r, cv=0.0, view_angle_gap=0.0)


class TestToWorld:
    def test_quarter_turn(self):
        assert to_world(obs(1, 0), RobotPose(0, 0, 0, math.pi / 2)) == pytest.approx((0, 1))

    def test_origin_maps_to_translation(self):
        assert to_world(obs(0, 0), RobotPose(3, -2, 0, 1.234)) == pytest.approx((3, -2))

    def test_half_turn_with_translation(self):
        assert to_world(obs(1, 1), RobotPose(1, 0, 0, math.pi)) == pytest.approx((0, -1))

    def test_isometry(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            pose = RobotPose(*rng.uniform(-5, 5, 2), rng.uniform(0, 3), rng.uniform(-4, 4))
            pts = [obs(*rng.uniform(-3, 3, 2)) for _ in range(6)]
            world = [to_world(o, pose) for o in pts]
            for i in range(6):
                for j in range(i):
                    d_sensor = math.dist(pts[i].center, pts[j].center)
                    d_world = math.dist(world[i], world[j])
                    assert d_world == pytest.approx(d_sensor, abs=1e-9)


class TestUpdate:
    def test_insert_into_empty(self):
        db = TreeDatabase(0.5)
        summary = db.update([obs(1, 0)], RobotPose(0, 0))
        assert (summary.matched, summary.inserted) == (0, 1)
        assert len(db) == 1
        assert db.trees[0].votes == 1
        assert not db.trees[0].labeled

    def test_repeated_observation_running_mean(self):
        rng = np.random.default_rng(3)
        db = TreeDatabase(0.5)
        xs, ys, rs = [], [], []
        for _ in range(10):
            x, y, r = 2 + rng.normal(0, 0.02), rng.normal(0, 0.02), 0.15 + rng.normal(0, 0.005)
            xs.append(x)
            ys.append(y)
            rs.append(r)
            db.update([obs(x, y, r)], RobotPose(0, 0))
        assert len(db) == 1
        t = db.trees[0]
        assert t.votes == 10
        assert t.x == pytest.approx(np.mean(xs), abs=1e-12)
        assert t.y == pytest.approx(np.mean(ys), abs=1e-12)
        assert t.r == pytest.approx(np.mean(rs), abs=1e-12)

    def test_second_observation_matches_first_insert(self):
        # hand trace: first observation inserts; the second lies 0.1 m away,
        # inside the 0.5 m gate of the tree just inserted, so it matches
        db = TreeDatabase(0.5)
        summary = db.update([obs(2.0, 0.0), obs(2.0, 0.1)], RobotPose(0, 0))
        assert (summary.matched, summary.inserted) == (1, 1)
        assert len(db) == 1
        assert db.trees[0].votes == 2
        assert db.trees[0].y == pytest.approx(0.05)

    def test_far_observation_inserts(self):
        db = TreeDatabase(0.5)
        db.update([obs(2, 0)], RobotPose(0, 0))
        summary = db.update([obs(4, 0)], RobotPose(0, 0))
        assert summary.inserted == 1
        assert len(db) == 2

    def test_votes_conservation(self):
        rng = np.random.default_rng(17)
        db = TreeDatabase(0.5)
        total = 0
        for _ in range(60):
            observations = [obs(*rng.uniform(-6, 6, 2)) for _ in range(rng.integers(0, 5))]
            pose = RobotPose(*rng.uniform(-1, 1, 2), 0, rng.uniform(-3, 3))
            db.update(observations, pose)
            total += len(observations)
        assert db.total_votes() == total

    def test_gate_locality(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            db = TreeDatabase(0.5)
            pose = RobotPose(0, 0)
            for _ in range(rng.integers(1, 8)):
                db.update([obs(*rng.uniform(-4, 4, 2))], pose)
            snapshot = [(t.x, t.y) for t in db.trees]
            o = obs(*rng.uniform(-4, 4, 2))
            dists = [math.dist((o.center), p) for p in snapshot]
            before = len(db)
            summary = db.update([o], pose)
            if min(dists) < 0.5:
                assert summary.matched == 1 and len(db) == before
            else:
                assert summary.inserted == 1 and len(db) == before + 1

    def test_drift_tolerated_frame_to_frame(self):
        # odometry wanders as a random walk with per-scan steps under a tenth
        # of the gate; the stationary tree keeps matching its single entry
        rng = np.random.default_rng(5)
        db = TreeDatabase(0.5)
        tree_true = np.array([3.0, 1.0])
        odom = np.array([0.0, 0.0])
        yaw = 0.0
        for _ in range(100):
            odom = odom + rng.normal(0, 0.02, 2)
            yaw = wrap_angle(yaw + rng.normal(0, 0.005))
            c, s = math.cos(yaw), math.sin(yaw)
            rel = tree_true - odom  # sensed in the drifted frame
            local = (c * rel[0] + s * rel[1], -s * rel[0] + c * rel[1])
            db.update([obs(*local)], RobotPose(odom[0], odom[1], 0, yaw))
        assert len(db) == 1
        assert db.trees[0].votes == 100


class TestQueries:
    def test_nearest_empty(self):
        assert TreeDatabase(0.5).nearest_tree((0, 0)) is None

    def test_nearest_picks_closest(self):
        db = TreeDatabase(0.5)
        db.update([obs(0, 0)], RobotPose(0, 0))
        db.update([obs(5, 0)], RobotPose(0, 0))
        assert db.nearest_tree((1, 0)).id == 0

    def test_nearest_tie_breaks_by_id(self):
        db = TreeDatabase(0.5)
        db.update([obs(-1, 0)], RobotPose(0, 0))
        db.update([obs(1, 0)], RobotPose(0, 0))
        assert db.nearest_tree((0, 0)).id == 0

    def test_confirmed_thresholds(self):
        db = TreeDatabase(0.5)
        for x, k in [(0.0, 1), (3.0, 3), (6.0, 7)]:
            for _ in range(k):
                db.update([obs(x, 0)], RobotPose(0, 0))
        assert [t.votes for t in db.confirmed_trees(1)] == [1, 3, 7]
        assert [t.votes for t in db.confirmed_trees(3)] == [3, 7]
        assert db.confirmed_trees(100) == []

    def test_mark_labeled_moves_flag(self):
        db = TreeDatabase(0.5)
        for x in (0.0, 3.0, 6.0):
            db.update([obs(x, 0)], RobotPose(0, 0))
        db.mark_labeled(1)
        assert [t.labeled for t in db.trees] == [False, True, False]
        db.mark_labeled(2)
        assert [t.labeled for t in db.trees] == [False, False, True]
        assert db.labeled_tree().id == 2

    def test_mark_labeled_unknown_id(self):
        with pytest.raises(UnknownId):
            TreeDatabase(0.5).mark_labeled(9)


class TestSerialization:
    def build(self):
        db = TreeDatabase(0.5)
        db.update([obs(1.25, -2.5, 0.147)], RobotPose(0, 0))
        db.update([obs(4.0, 0.5, 0.11)], RobotPose(0, 0))
        db.mark_labeled(1)
        return db

    def test_json_round_trip(self):
        db = self.build()
        back = TreeDatabase.from_json(db.to_json())
        assert [(t.id, t.x, t.y, t.r, t.votes, t.labeled) for t in back.trees] == \
               [(t.id, t.x, t.y, t.r, t.votes, t.labeled) for t in db.trees]

    def test_json_shape(self):
        data = json.loads(self.build().to_json())
        assert set(data) == {"trees"}
        assert set(data["trees"][0]) == {"id", "x", "y", "r", "votes", "labeled"}

    def test_csv_diameter_column(self):
        lines = self.build().to_csv().splitlines()
        assert lines[0] == "id,x,y,diameter,votes,labeled"
        row0 = lines[1].split(",")
        row1 = lines[2].split(",")
        assert float(row0[3]) == pytest.approx(2 * 0.147)
        assert (row0[5], row1[5]) == ("0", "1")
