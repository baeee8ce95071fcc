"""
Full survey mission
===================

The complete stack on the ten-tree scenario: scan, detect, vote, identify
the labeled trunk, then orbit every tree counterclockwise and report the
measured diameters against ground truth. Takes ten-ish seconds.

Run from the repository root:  python demos/05_full_mission.py
"""

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from forestnav import load_scenario, run_scenario

root = Path(__file__).parent.parent
out_dir = Path(__file__).parent / "out"
run_dir = out_dir / "mission_artifacts"
out_dir.mkdir(exist_ok=True)

scenario = load_scenario(root / "scenarios" / "forest10.yaml")
report = run_scenario(scenario, run_dir)

print(f"visited {report.visited} trees in {report.steps} steps, phase={report.phase}")
print("id   est[m]  true[m]  err[m]")
for row in report.diameters.rows:
    print(f"{row.tree_id:2d}  {row.estimated:.4f}  {row.true:.4f}  {row.error:.4f}")
print(f"mean error {report.diameters.mean_error:.4f}  "
      f"max error {report.diameters.max_error:.4f}")

traj = np.loadtxt(run_dir / "trajectory.csv", delimiter=",", skiprows=1)
events = [json.loads(l) for l in (run_dir / "mission.jsonl").read_text().splitlines()]
orbit_times = [e["t"] for e in events if e["event"] == "orbit_complete"]

fig, ax = plt.subplots(figsize=(7, 7))
ax.plot(traj[:, 1], traj[:, 2], lw=0.6, color="tab:blue", label="flown path")
for t in scenario.world.trees:
    ax.add_patch(plt.Circle((t.x, t.y), t.radius, color="green", alpha=0.7))
for entry in report.db.trees:
    ax.annotate(f"{2 * entry.r:.3f}", (entry.x, entry.y), fontsize=7,
                textcoords="offset points", xytext=(5, 5))
lab = scenario.world.labeled_tree()
ax.add_patch(plt.Circle((lab.x, lab.y), lab.radius, color="red", alpha=0.8))
ax.plot(scenario.start.x, scenario.start.y, "k^", ms=9, label="start")
ax.set_aspect("equal")
ax.set_title(f"{report.visited} trees orbited, {len(orbit_times)} orbits logged")
ax.legend(fontsize=8)
fig.savefig(out_dir / "full_mission.png", dpi=120, bbox_inches="tight")
print(f"figure -> {out_dir / 'full_mission.png'}")
print(f"artifacts -> {run_dir}")
