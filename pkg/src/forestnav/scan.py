"""Laser scan filtering and clustering.

A raw 2D scan is a sweep of range samples at a fixed angular step. Before
anything can be fitted to it, unreliable samples have to go: readings outside
the sensor's trustworthy range band, and the near-collinear "veiling" points
that appear at depth discontinuities. What survives is grouped into clusters
of consecutive valid points, each a candidate object.

Filters never resurrect a sample: validity flags only move Valid -> Invalid,
so applying a filter twice equals applying it once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEG = math.pi / 180.0


@dataclass(frozen=True)
class LaserScan:
    """One revolution of polar range samples.

    Sample i lies at angle ``angle_min + i * angle_step`` (sensor frame,
    radians). ``valid`` flags which samples may be used downstream; invalid
    samples keep their range value (or nan for dropouts) but are ignored.
    """

    angle_min: float
    angle_step: float
    ranges: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        ranges = np.asarray(self.ranges, dtype=float)
        valid = np.asarray(self.valid, dtype=bool)
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "valid", valid)
        if ranges.ndim != 1 or valid.shape != ranges.shape or len(ranges) < 2:
            raise ValueError("ranges and valid must be equal-length 1-D arrays of length >= 2")
        if not self.angle_step > 0:
            raise ValueError("angle_step must be positive")
        if self.angle_step * (len(ranges) - 1) > 2.0 * math.pi + 1e-9:
            raise ValueError("total sweep exceeds 2*pi")
        bad = valid & ~(np.isfinite(ranges) & (ranges > 0))
        if bad.any():
            raise ValueError("valid samples must have finite positive ranges")

    def __len__(self) -> int:
        return len(self.ranges)

    @property
    def angles(self) -> np.ndarray:
        """Beam angles in the sensor frame, one per sample."""
        return self.angle_min + self.angle_step * np.arange(len(self.ranges))

    def points(self) -> np.ndarray:
        """Cartesian (x, y) of every sample; invalid samples yield nan rows."""
        ang = self.angles
        r = np.where(self.valid, self.ranges, np.nan)
        return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)


@dataclass(frozen=True)
class ScanFilterParams:
    """Range band, shadow-angle window, and minimum cluster size.

    ``thre_l``/``thre_h`` bound acceptable ranges (strict comparisons).
    ``theta_min``/``theta_max`` bound the angle between a point's ray and the
    segment to its neighbour; angles near 0 or pi mark veiling points.
    """

    thre_l: float = 0.06
    thre_h: float = 20.0
    theta_min: float = 10.0 * DEG
    theta_max: float = 170.0 * DEG
    min_cluster_size: int = 5

    def __post_init__(self):
        if not 0 <= self.thre_l < self.thre_h:
            raise ValueError("need 0 <= thre_l < thre_h")
        if not 0 < self.theta_min < self.theta_max < math.pi:
            raise ValueError("need 0 < theta_min < theta_max < pi")
        if self.min_cluster_size < 3:
            raise ValueError("min_cluster_size must be >= 3 (circle fit needs 3 points)")


@dataclass(frozen=True)
class PointCluster:
    """A maximal run of consecutive valid scan points, in sensor-frame xy."""

    points: np.ndarray
    first_index: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise ValueError("cluster needs an (N, 2) array with N >= 3")

    @property
    def count(self) -> int:
        return len(self.points)


def range_filter(scan: LaserScan, params: ScanFilterParams) -> LaserScan:
    """Invalidate samples outside the (thre_l, thre_h) band.

    Non-finite readings (sensor dropouts) are invalid regardless of the band.
    Comparisons are strict, so boundary-equal samples are invalid.
    """
    r = scan.ranges
    ok = np.isfinite(r) & (r > params.thre_l) & (r < params.thre_h)
    return LaserScan(scan.angle_min, scan.angle_step, r, scan.valid & ok)


def shadow_filter(scan: LaserScan, params: ScanFilterParams) -> LaserScan:
    """Invalidate veiling points at depth discontinuities.

    For each index-adjacent pair of valid samples, the angle between the ray
    to a point and the segment joining the pair is evaluated at both
    endpoints; if either angle falls outside (theta_min, theta_max), or the
    points coincide, both endpoints are invalidated. All pair decisions are
    made against the incoming validity in a single pass, which keeps the
    filter idempotent and symmetric under reversing scan order.
    """
    valid = scan.valid
    pts = scan.points()
    p, q = pts[:-1], pts[1:]
    seg = q - p
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    both = valid[:-1] & valid[1:]

    with np.errstate(invalid="ignore", divide="ignore"):
        norm_p = np.hypot(p[:, 0], p[:, 1])
        norm_q = np.hypot(q[:, 0], q[:, 1])
        # angle at the first endpoint: between (origin - p) and (q - p)
        cos_a = np.einsum("ij,ij->i", -p, seg) / (norm_p * seg_len)
        # angle at the second endpoint: between (origin - q) and (p - q)
        cos_b = np.einsum("ij,ij->i", -q, -seg) / (norm_q * seg_len)
        ang_a = np.arccos(np.clip(cos_a, -1.0, 1.0))
        ang_b = np.arccos(np.clip(cos_b, -1.0, 1.0))

    in_window = (
        (ang_a > params.theta_min) & (ang_a < params.theta_max)
        & (ang_b > params.theta_min) & (ang_b < params.theta_max)
    )
    bad_pair = both & ((seg_len == 0) | ~in_window)

    out = valid.copy()
    out[:-1] &= ~bad_pair
    out[1:] &= ~bad_pair
    return LaserScan(scan.angle_min, scan.angle_step, scan.ranges, out)


def extract_clusters(scan: LaserScan, params: ScanFilterParams) -> list[PointCluster]:
    """Partition maximal runs of consecutive valid samples into clusters.

    Runs shorter than ``min_cluster_size`` are dropped. Clusters come out
    ordered by their first scan index, points converted to sensor-frame xy.
    """
    v = scan.valid
    if not v.any():
        return []
    padded = np.concatenate([[False], v, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    starts, stops = edges[::2], edges[1::2]

    ang = scan.angles
    clusters = []
    for i, j in zip(starts, stops):
        if j - i < params.min_cluster_size:
            continue
        r = scan.ranges[i:j]
        a = ang[i:j]
        pts = np.stack([r * np.cos(a), r * np.sin(a)], axis=1)
        clusters.append(PointCluster(pts, int(i)))
    return clusters


def format_scan_record(scan: LaserScan, t: float) -> str:
    """Serialize a scan to one line: ``scan <t> <angle_min> <angle_step> <n> r0 ...``.

    Invalid samples are written as nan, so the record is also the dropout mask.
    """
    vals = np.where(scan.valid, scan.ranges, np.nan)
    body = " ".join(repr(float(v)) for v in vals)
    return f"scan {t!r} {scan.angle_min!r} {scan.angle_step!r} {len(scan)} {body}"


def parse_scan_record(line: str) -> tuple[float, LaserScan]:
    """Parse a line produced by :func:`format_scan_record`.

    Returns (t, scan); raises ValueError on malformed input.
    """
    parts = line.split()
    if len(parts) < 5 or parts[0] != "scan":
        raise ValueError("not a scan record")
    t = float(parts[1])
    angle_min = float(parts[2])
    angle_step = float(parts[3])
    n = int(parts[4])
    if len(parts) != 5 + n:
        raise ValueError(f"expected {n} range samples, found {len(parts) - 5}")
    ranges = np.array([float(v) for v in parts[5:]], dtype=float)
    valid = np.isfinite(ranges) & (ranges > 0)
    return t, LaserScan(angle_min, angle_step, ranges, valid)
