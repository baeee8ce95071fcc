"""Circle fitting and tree discrimination.

Each cluster is fitted with an algebraic least-squares circle: writing the
circle as x^2 + y^2 + A x + B y + C = 0, the residual

    S = sum_i ((x_i - a)^2 + (y_i - b)^2 - r^2)^2

is quadratic in (A, B, C), so the minimizer comes from one 3x3 normal system
and (a, b, r) are recovered from A = -2a, B = -2b, C = a^2 + b^2 - r^2.

Whether a fitted cluster is a tree trunk is then decided from three features:
the scale-free residual CV = sqrt(S / (N r^4)), the agreement between the
cluster's measured angular extent and the angular size a circle of the fitted
radius would subtend at the fitted distance, and a plausible-radius band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scan import DEG, LaserScan, PointCluster, ScanFilterParams, extract_clusters, range_filter, shadow_filter


class CircleFitError(ValueError):
    """A cluster admits no usable circle; treat it as not a tree."""


class SingularSystem(CircleFitError):
    """Normal system is rank deficient (collinear or duplicate points)."""


class NegativeRadicand(CircleFitError):
    """Recovered r^2 is not positive; the fit is numerically degenerate."""


class OutsideDomain(ValueError):
    """Sensor lies on or inside the fitted circle; view angles are undefined."""


@dataclass(frozen=True)
class CircleFit:
    """Fitted circle with its residual sum S and coefficient of variation."""

    a: float
    b: float
    r: float
    s: float
    cv: float


@dataclass(frozen=True)
class DiscriminationParams:
    """Acceptance gates for tree candidates."""

    thre_cv: float = 0.05
    thre_theta_view: float = 10.0 * DEG
    r_min: float = 0.05
    r_max: float = 0.5

    def __post_init__(self):
        if min(self.thre_cv, self.thre_theta_view, self.r_min, self.r_max) <= 0:
            raise ValueError("all discrimination parameters must be positive")
        if not self.r_min < self.r_max:
            raise ValueError("need r_min < r_max")


@dataclass(frozen=True)
class TreeObservation:
    """A cluster accepted as a tree: sensor-frame center, radius, fit quality."""

    center: tuple[float, float]
    radius: float
    cv: float
    view_angle_gap: float

    def to_json_obj(self, t: float) -> dict:
        return {
            "t": t,
            "x": self.center[0],
            "y": self.center[1],
            "r": self.radius,
            "cv": self.cv,
            "gap": self.view_angle_gap,
        }


def _solve3(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting on a 3x3 system.

    Raises SingularSystem when a pivot falls below 1e-12 times the largest
    entry of the original matrix.
    """
    aug = np.concatenate([m.astype(float), rhs.reshape(3, 1).astype(float)], axis=1)
    tiny = 1e-12 * np.abs(m).max()
    for col in range(3):
        p = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[p, col]) <= tiny:
            raise SingularSystem("pivot below conditioning threshold")
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        aug[col] /= aug[col, col]
        for row in range(3):
            if row != col:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, 3]


def fit_circle(points) -> CircleFit:
    """Least-squares circle through >= 3 non-collinear points.

    Raises SingularSystem for collinear/degenerate input and NegativeRadicand
    when the recovered squared radius is not positive. Either way the caller
    must treat the cluster as not a tree.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("need an (N, 2) array with N >= 3")
    x, y = pts[:, 0], pts[:, 1]
    x2, y2 = x * x, y * y
    sx, sy = x.sum(), y.sum()
    sxy = (x * y).sum()
    m = np.array([
        [x2.sum(), sxy, sx],
        [sxy, y2.sum(), sy],
        [sx, sy, float(len(pts))],
    ])
    rhs = -np.array([
        (x * (x2 + y2)).sum(),
        (y * (x2 + y2)).sum(),
        (x2 + y2).sum(),
    ])
    A, B, C = _solve3(m, rhs)
    a, b = -A / 2.0, -B / 2.0
    r2 = a * a + b * b - C
    if r2 <= 0:
        raise NegativeRadicand("a^2 + b^2 - C <= 0")
    r = math.sqrt(r2)
    s = float((((x - a) ** 2 + (y - b) ** 2 - r2) ** 2).sum())
    cv = math.sqrt(s / (len(pts) * r2 * r2))
    return CircleFit(float(a), float(b), r, s, cv)


def view_angles(cluster: PointCluster, fit: CircleFit, angle_step: float) -> tuple[float, float]:
    """Measured vs. implied angular extent of a cluster.

    theta1 = N * angle_step is the angular width the sensor actually swept
    over the cluster; theta2 = 2 * arcsin(r / d) is the angle a circle of the
    fitted radius subtends at the fitted center distance d. The two agree for
    a cylinder seen in full.
    """
    d = math.hypot(fit.a, fit.b)
    if d <= fit.r:
        raise OutsideDomain(f"sensor at distance {d:.3f} not outside fitted radius {fit.r:.3f}")
    theta1 = cluster.count * angle_step
    theta2 = 2.0 * math.asin(fit.r / d)
    return theta1, theta2


def discriminate(
    fit: CircleFit, theta1: float, theta2: float, params: DiscriminationParams
) -> bool:
    """Tree iff CV, view-angle gap, and radius all pass their gates."""
    return (
        fit.cv < params.thre_cv
        and abs(theta1 - theta2) < params.thre_theta_view
        and params.r_min < fit.r < params.r_max
    )


def detect_trees(
    scan: LaserScan,
    filt: ScanFilterParams,
    disc: DiscriminationParams,
) -> list[TreeObservation]:
    """Full per-scan pipeline: filter, cluster, fit, discriminate.

    Clusters whose fit degenerates (or whose fitted circle contains the
    sensor) are skipped silently; one observation is emitted per accepted
    cluster, in scan order.
    """
    filtered = shadow_filter(range_filter(scan, filt), filt)
    observations = []
    for cl in extract_clusters(filtered, filt):
        try:
            fit = fit_circle(cl.points)
            theta1, theta2 = view_angles(cl, fit, scan.angle_step)
        except (CircleFitError, OutsideDomain):
            continue
        if discriminate(fit, theta1, theta2, disc):
            observations.append(
                TreeObservation(
                    center=(fit.a, fit.b),
                    radius=fit.r,
                    cv=fit.cv,
                    view_angle_gap=abs(theta1 - theta2),
                )
            )
    return observations
