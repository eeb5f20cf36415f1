"""Shared geometry and configuration types.

Vectors are plain ``numpy`` arrays whose last axis has length 2, so every
function below accepts a single point of shape ``(2,)`` or a batch of shape
``(..., 2)`` interchangeably.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

Vec2 = NDArray[np.float64]

DEFAULT_V_MAX = 0.8
DEFAULT_OMEGA_MAX = math.pi / 6
DEFAULT_ROBOT_RADIUS = 0.15


class SingularConfiguration(ValueError):
    """Raised when a field term is evaluated at a point where it is undefined."""


def vec2(x: float | ArrayLike, y: float | None = None) -> Vec2:
    """Build a finite 2-vector from ``(x, y)`` or from one length-2 sequence."""
    arr = np.asarray(x if y is None else (x, y), dtype=float)
    if arr.shape != (2,):
        raise ValueError(f"expected a 2-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite vector component: {arr}")
    return arr


def distance(a: ArrayLike, b: ArrayLike) -> float | NDArray[np.float64]:
    """Euclidean distance, broadcast over leading axes."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.hypot(diff[..., 0], diff[..., 1])


def perp_rotate(v: ArrayLike) -> Vec2:
    """Rotate by +90 degrees: ``(x, y) -> (-y, x)``."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def wrap_angle(a):
    """Wrap an angle (or array of angles) into ``(-pi, pi]``."""
    w = np.mod(np.asarray(a, dtype=float) + np.pi, 2 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True)
class KinematicLimits:
    v_max: float = DEFAULT_V_MAX
    omega_max: float = DEFAULT_OMEGA_MAX

    def __post_init__(self):
        if not (self.v_max > 0 and self.omega_max > 0):
            raise ValueError("kinematic limits must be positive")


class Knowledge(enum.Enum):
    """What the planner knows about an obstacle's velocity."""

    EXACT = "exact"
    MAX_SPEED = "max_speed"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class Obstacle:
    """Disc obstacle.

    With ``Knowledge.EXACT`` the planner sees ``velocity`` itself, so the
    known and the true velocity can never disagree. ``max_speed`` is only
    read for ``Knowledge.MAX_SPEED``.
    """

    position: Vec2
    radius: float
    velocity: Vec2 = field(default_factory=lambda: np.zeros(2))
    knowledge: Knowledge = Knowledge.EXACT
    max_speed: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "position", vec2(self.position))
        object.__setattr__(self, "velocity", vec2(self.velocity))
        if self.radius < 0:
            raise ValueError("obstacle radius must be non-negative")
        if self.knowledge is Knowledge.MAX_SPEED and (self.max_speed is None or self.max_speed < 0):
            raise ValueError("MAX_SPEED knowledge needs a non-negative max_speed")


@dataclass(frozen=True, eq=False)
class RobotState:
    position: Vec2
    velocity: Vec2 = field(default_factory=lambda: np.zeros(2))
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", vec2(self.position))
        object.__setattr__(self, "velocity", vec2(self.velocity))
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def speed(self) -> float:
        return float(np.hypot(*self.velocity))


@dataclass(frozen=True)
class IpfParams:
    """Potential-field gains.

    ``epsilon`` and ``eta`` are the attractive and repulsive gains, ``n`` the
    goal-distance exponent of the repulsive term, ``d_goal_star`` the
    quadratic/conic switch distance, ``d01`` the constant safety margin added
    to the adaptive influence radius and ``epsilon0`` the guard in the
    angular-rate denominator.

    The attractive gain has to dominate the turn-rate penalty of the fitness
    (about ``2 * omega_max * v_max / d`` per metre of sideways motion): with
    ``epsilon = 1`` the planner orbits instead of closing in, hence 10.
    """

    epsilon: float = 10.0
    eta: float = 2.0
    n: float = 2.0
    d_goal_star: float = 3.0
    d01: float = 1.0
    epsilon0: float = 1e-6

    def __post_init__(self):
        if not (self.epsilon > 0 and self.eta > 0 and self.n >= 1
                and self.d_goal_star > 0 and self.d01 >= 0 and self.epsilon0 > 0):
            raise ValueError(f"invalid IpfParams: {self}")


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned rectangle ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"degenerate workspace: {self}")

    @property
    def lower(self) -> Vec2:
        return np.array([self.xmin, self.ymin])

    @property
    def upper(self) -> Vec2:
        return np.array([self.xmax, self.ymax])

    def contains(self, q):
        q = np.asarray(q, dtype=float)
        return np.all((q >= self.lower) & (q <= self.upper), axis=-1)
