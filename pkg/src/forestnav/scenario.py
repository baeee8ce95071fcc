"""Scenario files: everything one deterministic run needs, in YAML.

A scenario bundles the world, sensor and noise models, filter and
discrimination parameters, controller gains, search method, database gates,
the start pose, and the seed. Angles are written in degrees (``*_deg`` keys)
and converted on load; distances are meters. Unknown keys and out-of-range
values fail fast with the offending field path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .database import RobotPose
from .fit import DiscriminationParams
from .navigation import ControllerParams
from .scan import DEG, ScanFilterParams
from .sim import Cylinder, OdometryDrift, SensorConfig, Wall, WorldConfig


class ConfigError(ValueError):
    """Invalid scenario; the message names the field path."""


@dataclass(frozen=True)
class SearchConfig:
    method: str = "narrow"
    area_radius: float = 8.0
    max_label_range: float = 5.0

    def __post_init__(self):
        if self.method not in ("narrow", "deep"):
            raise ValueError("method must be 'narrow' or 'deep'")
        if self.area_radius <= 0 or self.max_label_range <= 0:
            raise ValueError("radii must be positive")


@dataclass(frozen=True)
class DbConfig:
    thre_dist: float = 0.5
    min_votes: int = 3

    def __post_init__(self):
        if self.thre_dist <= 0:
            raise ValueError("thre_dist must be positive")
        if self.min_votes < 1:
            raise ValueError("min_votes must be >= 1")


@dataclass(frozen=True)
class Scenario:
    world: WorldConfig = field(default_factory=WorldConfig)
    sensor: SensorConfig = field(default_factory=SensorConfig)
    drift: OdometryDrift = field(default_factory=OdometryDrift)
    filters: ScanFilterParams = field(default_factory=ScanFilterParams)
    discrimination: DiscriminationParams = field(default_factory=DiscriminationParams)
    controller: ControllerParams = field(default_factory=ControllerParams)
    search: SearchConfig = field(default_factory=SearchConfig)
    db: DbConfig = field(default_factory=DbConfig)
    start: RobotPose = field(default_factory=lambda: RobotPose(0.0, 0.0, 1.5, 0.0))
    seed: int = 0
    dt: float = 0.02
    scan_rate: float = 40.0
    duration: float = 60.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scan_rate <= 0:
            raise ValueError("scan_rate must be positive")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


def _require_mapping(obj: Any, path: str) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a mapping")
    return obj


def _take(section: dict, key: str, path: str, default=None, required: bool = False):
    if key not in section:
        if required:
            raise ConfigError(f"{path}.{key}: missing required field")
        return default
    return section.pop(key)


def _number(val: Any, path: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {val!r}")
    return float(val)


def _check_consumed(section: dict, path: str) -> None:
    if section:
        raise ConfigError(f"{path}.{sorted(section)[0]}: unknown field")


def _build(cls, kwargs: dict, path: str):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_scenario(data: dict) -> Scenario:
    """Build a validated Scenario from a parsed YAML mapping."""
    data = dict(_require_mapping(data, "scenario"))

    sec = _require_mapping(_take(data, "world", "scenario"), "world")
    trees = []
    for i, row in enumerate(_take(sec, "trees", "world", default=[]) or []):
        p = f"world.trees[{i}]"
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise ConfigError(f"{p}: expected [x, y, radius, labeled]")
        if not isinstance(row[3], bool):
            raise ConfigError(f"{p}: labeled flag must be a boolean")
        trees.append(Cylinder(_number(row[0], p), _number(row[1], p),
                              _number(row[2], p), row[3]))
    walls = []
    for i, row in enumerate(_take(sec, "walls", "world", default=[]) or []):
        p = f"world.walls[{i}]"
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise ConfigError(f"{p}: expected [x1, y1, x2, y2]")
        walls.append(Wall(*(_number(v, p) for v in row)))
    bounds = _take(sec, "bounds", "world", default=[-50.0, -50.0, 50.0, 50.0])
    if not isinstance(bounds, (list, tuple)) or len(bounds) != 4:
        raise ConfigError("world.bounds: expected [xmin, ymin, xmax, ymax]")
    _check_consumed(sec, "world")
    world = _build(WorldConfig, dict(trees=tuple(trees), walls=tuple(walls),
                                     bounds=tuple(float(b) for b in bounds)), "world")

    sec = _require_mapping(_take(data, "sensor", "scenario"), "sensor")
    sensor_kwargs = {}
    for key, attr, conv in [
        ("angle_min_deg", "angle_min", DEG), ("angle_span_deg", "angle_span", DEG),
        ("angle_step_deg", "angle_step", DEG), ("max_range", "max_range", 1.0),
        ("noise_sigma", "noise_sigma", 1.0), ("dropout_prob", "dropout_prob", 1.0),
    ]:
        if key in sec:
            sensor_kwargs[attr] = _number(_take(sec, key, "sensor"), f"sensor.{key}") * conv
    _check_consumed(sec, "sensor")
    sensor = _build(SensorConfig, sensor_kwargs, "sensor")

    sec = _require_mapping(_take(data, "drift", "scenario"), "drift")
    drift_kwargs = {k: _number(_take(sec, k, "drift"), f"drift.{k}")
                    for k in ("sigma_xy", "sigma_z", "sigma_yaw") if k in sec}
    _check_consumed(sec, "drift")
    drift = _build(OdometryDrift, drift_kwargs, "drift")

    sec = _require_mapping(_take(data, "filters", "scenario"), "filters")
    filt_kwargs = {}
    for key, attr, conv in [
        ("thre_l", "thre_l", 1.0), ("thre_h", "thre_h", 1.0),
        ("theta_min_deg", "theta_min", DEG), ("theta_max_deg", "theta_max", DEG),
    ]:
        if key in sec:
            filt_kwargs[attr] = _number(_take(sec, key, "filters"), f"filters.{key}") * conv
    if "min_cluster_size" in sec:
        v = _take(sec, "min_cluster_size", "filters")
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError("filters.min_cluster_size: expected an integer")
        filt_kwargs["min_cluster_size"] = v
    _check_consumed(sec, "filters")
    filters = _build(ScanFilterParams, filt_kwargs, "filters")

    sec = _require_mapping(_take(data, "discrimination", "scenario"), "discrimination")
    disc_kwargs = {}
    for key, attr, conv in [
        ("thre_cv", "thre_cv", 1.0), ("thre_theta_view_deg", "thre_theta_view", DEG),
        ("r_min", "r_min", 1.0), ("r_max", "r_max", 1.0),
    ]:
        if key in sec:
            disc_kwargs[attr] = _number(_take(sec, key, "discrimination"),
                                        f"discrimination.{key}") * conv
    _check_consumed(sec, "discrimination")
    disc = _build(DiscriminationParams, disc_kwargs, "discrimination")

    sec = _require_mapping(_take(data, "controller", "scenario"), "controller")
    ctrl_kwargs = {k: _number(_take(sec, k, "controller"), f"controller.{k}")
                   for k in ("k_x", "k_z", "k_phi", "v", "d_ref", "z_ref", "max_xy",
                             "max_z", "max_yaw", "arrival_tol", "heading_tol") if k in sec}
    _check_consumed(sec, "controller")
    controller = _build(ControllerParams, ctrl_kwargs, "controller")

    sec = _require_mapping(_take(data, "search", "scenario"), "search")
    search_kwargs = {}
    if "method" in sec:
        search_kwargs["method"] = str(_take(sec, "method", "search"))
    for k in ("area_radius", "max_label_range"):
        if k in sec:
            search_kwargs[k] = _number(_take(sec, k, "search"), f"search.{k}")
    _check_consumed(sec, "search")
    search = _build(SearchConfig, search_kwargs, "search")

    sec = _require_mapping(_take(data, "db", "scenario"), "db")
    db_kwargs = {}
    if "thre_dist" in sec:
        db_kwargs["thre_dist"] = _number(_take(sec, "thre_dist", "db"), "db.thre_dist")
    if "min_votes" in sec:
        v = _take(sec, "min_votes", "db")
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError("db.min_votes: expected an integer")
        db_kwargs["min_votes"] = v
    _check_consumed(sec, "db")
    db = _build(DbConfig, db_kwargs, "db")

    sec = _require_mapping(_take(data, "start", "scenario"), "start")
    start_kwargs = {"x": 0.0, "y": 0.0, "z": 1.5, "yaw": 0.0}
    for k in ("x", "y", "z"):
        if k in sec:
            start_kwargs[k] = _number(_take(sec, k, "start"), f"start.{k}")
    if "yaw_deg" in sec:
        start_kwargs["yaw"] = _number(_take(sec, "yaw_deg", "start"), "start.yaw_deg") * DEG
    _check_consumed(sec, "start")
    start = _build(RobotPose, start_kwargs, "start")

    seed = _take(data, "seed", "scenario", default=0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed: expected an integer")
    dt = _number(_take(data, "dt", "scenario", default=0.02), "dt")
    scan_rate = _number(_take(data, "scan_rate", "scenario", default=40.0), "scan_rate")
    duration = _number(_take(data, "duration", "scenario", default=60.0), "duration")
    _check_consumed(data, "scenario")

    scenario = _build(Scenario, dict(world=world, sensor=sensor, drift=drift,
                                     filters=filters, discrimination=disc,
                                     controller=controller, search=search, db=db,
                                     start=start, seed=seed, dt=dt, scan_rate=scan_rate,
                                     duration=duration), "scenario")

    x0, y0, x1, y1 = scenario.world.bounds
    if not (x0 <= start.x <= x1 and y0 <= start.y <= y1):
        raise ConfigError("start: pose lies outside world.bounds")
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario YAML file."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError(f"scenario: YAML parse failure: {exc}") from exc
    return parse_scenario(data or {})
