"""Forest sensing and navigation: scan filtering, trunk measurement by
least-squares circle fitting, a voting landmark database, orbit control,
tree-to-tree search, and a deterministic synthetic-forest simulator."""

__version__ = "0.1.0"

from .database import RobotPose, Tree, TreeDatabase, UnknownId, UpdateSummary, to_world, wrap_angle
from .fit import (
    CircleFit,
    CircleFitError,
    DiscriminationParams,
    NegativeRadicand,
    OutsideDomain,
    SingularSystem,
    TreeObservation,
    detect_trees,
    discriminate,
    fit_circle,
    view_angles,
)
from .navigation import (
    ControllerParams,
    DegenerateGeometry,
    MissionConfig,
    MissionState,
    Phase,
    TargetLost,
    VelocityCommand,
    approach_velocity,
    circular_velocity,
    mission_step,
    next_target_deep,
    next_target_narrow,
)
from .runner import (
    DiameterReport,
    DiameterRow,
    MissionAbort,
    ParseError,
    RunReport,
    diameter_metrics,
    replay,
    run_scenario,
)
from .scan import (
    LaserScan,
    PointCluster,
    ScanFilterParams,
    extract_clusters,
    format_scan_record,
    parse_scan_record,
    range_filter,
    shadow_filter,
)
from .scenario import ConfigError, DbConfig, Scenario, SearchConfig, load_scenario, parse_scenario
from .sim import (
    Cylinder,
    OdometryDrift,
    SensorConfig,
    SimState,
    Wall,
    WorldConfig,
    integrate,
    ray_circle,
    ray_segment,
    raycast_scan,
    sense_label,
)

__all__ = [name for name in dir() if not name.startswith("_")]
