"""
Circle fitting and tree discrimination
======================================

Fit circles to three kinds of clusters: a clean trunk arc, a noisy trunk
arc, and a flat wall segment. The residual CV, the measured-vs-implied view
angles, and the radius band together decide which clusters count as trees.

Run from the repository root:  python demos/02_circle_fit.py
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from forestnav import (
    Cylinder,
    DiscriminationParams,
    RobotPose,
    ScanFilterParams,
    SensorConfig,
    WorldConfig,
    Wall,
    discriminate,
    extract_clusters,
    fit_circle,
    range_filter,
    raycast_scan,
    shadow_filter,
    view_angles,
)

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)
DEG = math.pi / 180.0

cases = {
    "clean trunk": (WorldConfig(trees=(Cylinder(2.0, 0.0, 0.15),)), 0.0),
    "noisy trunk": (WorldConfig(trees=(Cylinder(2.0, 0.0, 0.15),)), 0.004),
    "flat wall": (WorldConfig(walls=(Wall(2.0, -1.0, 2.0, 1.0),)), 0.004),
}
filt = ScanFilterParams(theta_min=3 * DEG, theta_max=177 * DEG, min_cluster_size=8)
disc = DiscriminationParams(thre_cv=0.12, thre_theta_view=10 * DEG,
                            r_min=0.05, r_max=0.5)

fig, axes = plt.subplots(1, 3, figsize=(13, 4.2))
for ax, (name, (world, sigma)) in zip(axes, cases.items()):
    sensor = SensorConfig(noise_sigma=sigma)
    scan = raycast_scan(world, RobotPose(0, 0), sensor, np.random.default_rng(1))
    filtered = shadow_filter(range_filter(scan, filt), filt)
    (cluster,) = extract_clusters(filtered, filt)
    ax.plot(cluster.points[:, 0], cluster.points[:, 1], ".", ms=3)
    try:
        fit = fit_circle(cluster.points)
        theta1, theta2 = view_angles(cluster, fit, scan.angle_step)
        is_tree = discriminate(fit, theta1, theta2, disc)
        print(f"{name:12s} r={fit.r:7.3f}  cv={fit.cv:7.4f}  "
              f"view gap={abs(theta1 - theta2) / DEG:6.2f} deg  tree={is_tree}")
        ax.add_patch(plt.Circle((fit.a, fit.b), fit.r, fill=False, color="tab:red"))
        ax.set_title(f"{name}: tree={is_tree}")
    except ValueError as exc:
        # perfectly straight clusters admit no circle at all
        print(f"{name:12s} no circle ({type(exc).__name__})  tree=False")
        ax.set_title(f"{name}: tree=False (degenerate)")
    ax.set_aspect("equal")
fig.savefig(out_dir / "circle_fit.png", dpi=120, bbox_inches="tight")
print(f"figure -> {out_dir / 'circle_fit.png'}")
