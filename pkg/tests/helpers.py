"""Shared test utilities: independent oracles and scan builders.

The circle-fit oracle minimizes the residual S by brute force: a coarse 3-D
grid over (a, b, r) followed by repeated zoom-in around the incumbent. It
never touches the closed-form normal equations, so it can sit in judgment
over them.
"""

from __future__ import annotations

import math

import numpy as np

from forestnav import LaserScan


def residual_s(points: np.ndarray, a: float, b: float, r: float) -> float:
    """S = sum(((x-a)^2 + (y-b)^2 - r^2)^2), the quantity both sides minimize."""
    d2 = (points[:, 0] - a) ** 2 + (points[:, 1] - b) ** 2
    return float(((d2 - r * r) ** 2).sum())


def grid_min_circle(points: np.ndarray, span: float = 2.0, n: int = 11,
                    iters: int = 45, shrink: float = 0.65) -> tuple[float, float, float]:
    """Brute-force minimizer of S over (a, b, r) by zooming grid search.

    The initial grid is centered on the data centroid with half-width
    ``span`` in a and b, and r from near zero to span. Each iteration
    re-grids around the incumbent with the cell size shrunk geometrically;
    the final cell is ~span * shrink**iters, far below 1e-3.
    """
    pts = np.asarray(points, float)
    cx, cy = pts.mean(axis=0)
    rad0 = float(np.hypot(pts[:, 0] - cx, pts[:, 1] - cy).mean())
    center = np.array([cx, cy, max(rad0, 0.05)])
    half = np.array([span, span, span])
    best = center.copy()
    for _ in range(iters):
        axes = [np.linspace(best[i] - half[i], best[i] + half[i], n) for i in range(3)]
        ga, gb, gr = np.meshgrid(*axes, indexing="ij")
        gr = np.maximum(gr, 1e-9)
        d2 = ((pts[:, 0][:, None] - ga.ravel()[None, :]) ** 2
              + (pts[:, 1][:, None] - gb.ravel()[None, :]) ** 2)
        s = (((d2 - (gr.ravel() ** 2)[None, :]) ** 2).sum(axis=0))
        k = int(np.argmin(s))
        best = np.array([ga.ravel()[k], gb.ravel()[k], gr.ravel()[k]])
        half *= shrink
    return float(best[0]), float(best[1]), float(best[2])


def circle_ranges(angle_min: float, angle_step: float, n: int,
                  cx: float, cy: float, radius: float,
                  max_range: float = 20.0) -> np.ndarray:
    """Analytic first-hit ranges of a beam fan against one circle."""
    ang = angle_min + angle_step * np.arange(n)
    ux, uy = np.cos(ang), np.sin(ang)
    proj = cx * ux + cy * uy
    disc = proj * proj - (cx * cx + cy * cy - radius * radius)
    out = np.full(n, max_range)
    hit = disc >= 0
    t = proj - np.sqrt(np.where(hit, disc, 0.0))
    good = hit & (t > 1e-9)
    out[good] = t[good]
    return out


def scan_of_circle(cx: float, cy: float, radius: float,
                   angle_min: float = math.radians(-135.0),
                   angle_step: float = math.radians(0.25),
                   n: int = 1081, max_range: float = 20.0) -> LaserScan:
    """Noise-free synthetic scan of a single cylinder."""
    r = circle_ranges(angle_min, angle_step, n, cx, cy, radius, max_range)
    return LaserScan(angle_min, angle_step, r, r < max_range)


def pair_angle_oracle(o, p, q) -> float:
    """Angle at vertex p of triangle o-p-q via the law of cosines."""
    po = math.dist(p, o)
    pq = math.dist(p, q)
    oq = math.dist(o, q)
    cos_t = (po * po + pq * pq - oq * oq) / (2.0 * po * pq)
    return math.acos(max(-1.0, min(1.0, cos_t)))
