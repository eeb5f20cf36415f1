"""Smoothness-augmented fitness evaluated on one-epoch candidate waypoints.

A candidate is a position the robot could occupy one epoch ``dt`` from now.
Its implied velocity is ``(candidate - position) / dt``; the fitness adds
squared deviations of the implied turn rate and speed from their limits to
the field potential at the candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .core import (
    IpfParams,
    KinematicLimits,
    Obstacle,
    RobotState,
    Vec2,
    Workspace,
    perp_rotate,
    vec2,
    wrap_angle,
)
from .ipf import adaptive_d0, attractive_potential, repulsion_terms

# Displacements shorter than this are snapped to "hold position": below it the
# direction of the step is dominated by float rounding of the positions.
MIN_STEP = 1e-4

# Relative slack when deciding that a candidate already satisfies the limits.
_FEASIBLE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class EpochContext:
    robot: RobotState
    q_goal: Vec2
    obstacles: Sequence[Obstacle] = ()
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    params: IpfParams = field(default_factory=IpfParams)
    dt: float = 0.1
    goal_velocity: Vec2 = field(default_factory=lambda: np.zeros(2))
    workspace: Workspace | None = None
    robot_radius: float = 0.0
    one_sided: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "q_goal", vec2(self.q_goal))
        object.__setattr__(self, "goal_velocity", vec2(self.goal_velocity))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @cached_property
    def obstacle_arrays(self):
        """Centres ``(K, 2)``, radii ``(K,)`` and influence radii ``(K,)``."""
        obs = self.obstacles
        centers = np.array([o.position for o in obs]).reshape(-1, 2)
        radii = np.array([o.radius for o in obs], dtype=float)
        speed = self.robot.speed
        d0 = np.array([adaptive_d0(speed, o, self.limits, self.params) for o in obs], dtype=float)
        return centers, radii, d0


@dataclass(frozen=True, eq=False)
class SearchBounds:
    lower: Vec2
    upper: Vec2

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")


def candidate_velocity(q_candidate, ctx: EpochContext):
    return (np.asarray(q_candidate, dtype=float) - ctx.robot.position) / ctx.dt


def angular_velocity(q, q_dot, ctx: EpochContext):
    """Rate at which the bearing to the goal rotates for motion ``q_dot`` at ``q``."""
    q = np.asarray(q, dtype=float)
    to_goal = ctx.q_goal - q
    rel = ctx.goal_velocity - np.asarray(q_dot, dtype=float)
    num = np.sum(rel * perp_rotate(to_goal), axis=-1)
    den = np.sum(to_goal * to_goal, axis=-1) + ctx.params.epsilon0
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def infeasible_mask(q, ctx: EpochContext):
    """True where a candidate is outside the workspace or overlaps an obstacle."""
    q = np.asarray(q, dtype=float)
    bad = np.zeros(q.shape[:-1], dtype=bool)
    if ctx.workspace is not None:
        bad |= ~ctx.workspace.contains(q)
    centers, radii, _ = ctx.obstacle_arrays
    if len(radii):
        diff = q[..., None, :] - centers
        center_d = np.hypot(diff[..., 0], diff[..., 1])
        d_obs = center_d - radii
        bad |= np.any((d_obs <= 0) | (d_obs < ctx.robot_radius), axis=-1)
    return bad


def potential(q, ctx: EpochContext):
    """Total field potential; infeasible candidates get ``inf``."""
    q = np.asarray(q, dtype=float)
    bad = infeasible_mask(q, ctx)
    u = np.asarray(attractive_potential(q, ctx.q_goal, ctx.params), dtype=float)
    centers, radii, d0 = ctx.obstacle_arrays
    if len(radii):
        rep, _ = repulsion_terms(q, centers, radii, ctx.q_goal, d0, ctx.params, with_force=False)
        u = u + rep.sum(axis=-1)
    return np.where(bad, np.inf, u)


def fitness_terms(q, ctx: EpochContext):
    """Return ``(potential, turn_penalty, speed_penalty)`` for candidate(s) ``q``."""
    q = np.asarray(q, dtype=float)
    q_dot = candidate_velocity(q, ctx)
    theta_dot = np.asarray(angular_velocity(q, q_dot, ctx))
    speed = np.hypot(q_dot[..., 0], q_dot[..., 1])
    lim = ctx.limits
    if ctx.one_sided:
        turn = np.maximum(np.abs(theta_dot) - lim.omega_max, 0.0) ** 2
        speed_pen = np.maximum(speed - lim.v_max, 0.0) ** 2
    else:
        turn = (theta_dot - lim.omega_max) ** 2
        speed_pen = (speed - lim.v_max) ** 2
    return potential(q, ctx), turn, speed_pen


def fitness(q_candidate, ctx: EpochContext):
    u, turn, speed_pen = fitness_terms(q_candidate, ctx)
    out = np.where(np.isinf(u), np.inf, u + turn + speed_pen)
    return float(out) if out.ndim == 0 else out


def search_bounds(ctx: EpochContext) -> SearchBounds:
    reach = ctx.limits.v_max * ctx.dt
    q = ctx.robot.position
    lower, upper = q - reach, q + reach
    if ctx.workspace is not None:
        lower = np.clip(lower, ctx.workspace.lower, ctx.workspace.upper)
        upper = np.clip(upper, ctx.workspace.lower, ctx.workspace.upper)
    return SearchBounds(lower, upper)


def enforce_kinematics(q_candidate, ctx: EpochContext):
    """Project candidate(s) onto the set reachable in one epoch.

    The step is shortened to at most ``v_max * dt`` and its direction is
    turned toward the current heading until the heading change is at most
    ``omega_max * dt``. Feasible candidates are returned untouched, which
    makes the projection idempotent.
    """
    q = np.asarray(q_candidate, dtype=float)
    p = ctx.robot.position
    disp = q - p
    length = np.hypot(disp[..., 0], disp[..., 1])
    max_len = ctx.limits.v_max * ctx.dt
    max_turn = ctx.limits.omega_max * ctx.dt
    h0 = ctx.robot.heading
    turn = np.asarray(wrap_angle(np.arctan2(disp[..., 1], disp[..., 0]) - h0))

    ok_len = length <= max_len * (1 + _FEASIBLE_SLACK)
    ok_turn = np.abs(turn) <= max_turn * (1 + _FEASIBLE_SLACK)
    hold = length < MIN_STEP

    new_len = np.minimum(length, max_len)
    new_heading = h0 + np.clip(turn, -max_turn, max_turn)
    projected = p + new_len[..., None] * np.stack([np.cos(new_heading), np.sin(new_heading)], axis=-1)
    out = np.where((ok_len & ok_turn)[..., None], q, projected)
    return np.where(hold[..., None], p, out)
