"""Smoothed particle-swarm path planning over an improved potential field."""

from .core import (
    IpfParams,
    KinematicLimits,
    Knowledge,
    Obstacle,
    RobotState,
    SingularConfiguration,
    Workspace,
    distance,
    perp_rotate,
    vec2,
    wrap_angle,
)
from .fileio import ParseError, load_scenario
from .ipf import FieldSample, adaptive_d0, total_field
from .metrics import ComparisonTable, PathMetrics, compare, compute_metrics
from .objective import EpochContext, SearchBounds, enforce_kinematics, fitness, search_bounds
from .scenario import InvalidScenario, ObstacleSpec, Scenario, ValidationError
from .sim import Algorithm, NoFeasibleCandidate, PlanTrace, Termination, plan_epoch, run, step_obstacles
from .spso import PsoParams, SwarmResult, optimize

__version__ = "0.1.0"
