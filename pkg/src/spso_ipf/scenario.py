"""Scenario description: workspace, robot, obstacles and planner settings."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import (
    DEFAULT_ROBOT_RADIUS,
    IpfParams,
    KinematicLimits,
    Knowledge,
    Obstacle,
    Vec2,
    Workspace,
    distance,
    vec2,
)
from .spso import PsoParams

MOTIONS = ("static", "velocity", "waypoints")


class ValidationError(ValueError):
    """A scenario violates one of its invariants."""


InvalidScenario = ValidationError


@dataclass(frozen=True, eq=False)
class ObstacleSpec:
    """Initial disc plus its motion script.

    ``motion`` is ``"static"``, ``"velocity"`` (constant ``velocity``,
    bouncing off the workspace walls) or ``"waypoints"`` (polyline through
    ``waypoints`` at ``speed``, starting from ``position``).
    """

    position: Vec2
    radius: float
    motion: str = "static"
    velocity: Vec2 = field(default_factory=lambda: np.zeros(2))
    waypoints: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    speed: float = 0.0
    knowledge: Knowledge = Knowledge.EXACT
    max_speed: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "position", vec2(self.position))
        object.__setattr__(self, "velocity", vec2(self.velocity))
        object.__setattr__(self, "waypoints", np.asarray(self.waypoints, dtype=float).reshape(-1, 2))
        if self.motion not in MOTIONS:
            raise ValidationError(f"unknown obstacle motion {self.motion!r}")
        if self.radius < 0:
            raise ValidationError("obstacle radius must be non-negative")
        if self.motion == "waypoints" and (len(self.waypoints) == 0 or self.speed < 0):
            raise ValidationError("waypoint motion needs at least one waypoint and a non-negative speed")

    def initial_velocity(self) -> Vec2:
        if self.motion == "velocity":
            return self.velocity
        if self.motion == "waypoints":
            return _toward(self.position, self.waypoints[0], self.speed)
        return np.zeros(2)

    def initial_obstacle(self) -> Obstacle:
        return Obstacle(
            self.position, self.radius, self.initial_velocity(), self.knowledge, self.max_speed
        )


def _toward(a, b, speed) -> Vec2:
    d = distance(a, b)
    if d == 0:
        return np.zeros(2)
    return (np.asarray(b) - np.asarray(a)) / d * speed


@dataclass(frozen=True, eq=False)
class Scenario:
    workspace: Workspace
    start: Vec2
    goal: Vec2
    goal_tolerance: float = 0.1
    robot_radius: float = DEFAULT_ROBOT_RADIUS
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    obstacles: Sequence[ObstacleSpec] = ()
    ipf: IpfParams = field(default_factory=IpfParams)
    pso: PsoParams = field(default_factory=PsoParams)
    dt: float = 0.1
    max_epochs: int = 500
    one_sided_penalty: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "start", vec2(self.start))
        object.__setattr__(self, "goal", vec2(self.goal))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        self.validate()

    def validate(self):
        if not self.workspace.contains(self.start):
            raise ValidationError("start outside workspace")
        if not self.workspace.contains(self.goal):
            raise ValidationError("goal outside workspace")
        if not self.goal_tolerance > 0:
            raise ValidationError("goal_tolerance must be positive")
        if self.robot_radius < 0:
            raise ValidationError("robot radius must be non-negative")
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be >= 1")
        for obs in self.obstacles:
            if distance(self.start, obs.position) < obs.radius + self.robot_radius:
                raise ValidationError("start in collision")

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, pso=replace(self.pso, seed=int(seed)))
