"""
Scan filtering walkthrough
==========================

A noisy 2D scan of two trunks (one partly hiding the other) next to a wall.
Watch the range filter drop out-of-band readings, the shadow filter cut the
near-collinear points at the occlusion boundary, and the clusterer split the
survivors into per-object candidates.

Run from the repository root:  python demos/01_scan_filtering.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from forestnav import (
    Cylinder,
    RobotPose,
    ScanFilterParams,
    SensorConfig,
    Wall,
    WorldConfig,
    extract_clusters,
    range_filter,
    raycast_scan,
    shadow_filter,
)

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

# A front trunk at 2 m; a rear trunk at 4 m peeks out beside it, so adjacent
# beams straddle a 2 m depth jump at the occlusion boundary. Plus a wall.
world = WorldConfig(
    trees=(Cylinder(2.0, 0.15, 0.16), Cylinder(4.0, 0.75, 0.2)),
    walls=(Wall(-1.0, -2.5, 6.0, -2.5),),
)
sensor = SensorConfig(noise_sigma=0.005, dropout_prob=0.01)
pose = RobotPose(0.0, 0.0, 1.5, 0.0)
scan = raycast_scan(world, pose, sensor, np.random.default_rng(3))
print(f"raw scan: {int(scan.valid.sum())} valid of {len(scan)} beams")

# The shadow window accepts pair angles well away from 0 and 180 degrees.
params = ScanFilterParams(thre_l=0.06, thre_h=8.0, min_cluster_size=5)
after_range = range_filter(scan, params)
after_shadow = shadow_filter(after_range, params)
print(f"after range filter:  {int(after_range.valid.sum())} valid")
print(f"after shadow filter: {int(after_shadow.valid.sum())} valid")

clusters = extract_clusters(after_shadow, params)
print(f"clusters: {[c.count for c in clusters]} points each")

fig, axes = plt.subplots(1, 2, figsize=(11, 5), sharex=True, sharey=True)
raw_pts = scan.points()
axes[0].plot(raw_pts[scan.valid, 0], raw_pts[scan.valid, 1], ".", ms=2, color="gray")
axes[0].set_title("raw valid returns")
for cl in clusters:
    axes[1].plot(cl.points[:, 0], cl.points[:, 1], ".", ms=3,
                 label=f"cluster @{cl.first_index} (n={cl.count})")
axes[1].set_title("filtered clusters")
axes[1].legend(fontsize=8)
for ax in axes:
    for t in world.trees:
        ax.add_patch(plt.Circle((t.x, t.y), t.radius, fill=False, color="green"))
    ax.plot(0, 0, "r^", ms=8)
    ax.set_aspect("equal")
fig.savefig(out_dir / "scan_filtering.png", dpi=120, bbox_inches="tight")
print(f"figure -> {out_dir / 'scan_filtering.png'}")
