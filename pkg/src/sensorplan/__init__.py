"""Coverage planning for a robot with a panning sensor on a decaying priority map."""

from .config import PlannerConfig, load_config, save_config
from .coverage_map import CoverageMap, load_map, save_map
from .footprint import SensorGeometry, footprint_cells
from .lattice import PrimitiveLibrary, RobotState, generate_primitives
from .splash import NoPathError, PlanContext, splash
from .split import split
from .baseline import joint_baseline
from .trajectory import Trajectory, load_trajectory, save_trajectory

__all__ = [
    "PlannerConfig", "load_config", "save_config", "CoverageMap", "load_map", "save_map",
    "SensorGeometry", "footprint_cells", "PrimitiveLibrary", "RobotState", "generate_primitives",
    "NoPathError", "PlanContext", "splash", "split", "joint_baseline", "Trajectory",
    "load_trajectory", "save_trajectory",
]
__version__ = "0.1.0"
