"""Improved potential field: attractive/repulsive potentials and their forces.

Obstacle distance is measured to the disc surface (centre distance minus
radius), so a zero-radius obstacle reduces to the classic point form. All
forces are the exact negative gradients of the matching potentials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    IpfParams,
    KinematicLimits,
    Knowledge,
    Obstacle,
    SingularConfiguration,
    Vec2,
    distance,
)


@dataclass(frozen=True, eq=False)
class FieldSample:
    potential: float
    force: Vec2


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def attractive_potential(q, q_goal, params: IpfParams):
    """Quadratic within ``d_goal_star`` of the goal, conic beyond it."""
    d = distance(q, q_goal)
    eps, ds = params.epsilon, params.d_goal_star
    return _scalar(np.where(d <= ds, 0.5 * eps * d**2, ds * eps * d - 0.5 * eps * ds**2))


def attractive_force(q, q_goal, params: IpfParams):
    q = np.asarray(q, dtype=float)
    diff = q - np.asarray(q_goal, dtype=float)
    d = np.asarray(distance(q, q_goal))[..., None]
    eps, ds = params.epsilon, params.d_goal_star
    far = d > ds
    # far branch only ever divides by d > ds > 0
    scale = np.where(far, ds * eps / np.where(far, d, 1.0), eps)
    return -scale * diff


def repulsion_terms(q, centers, radii, q_goal, d0, params: IpfParams, with_force=True):
    """Per-obstacle repulsive potential (and force) without singularity checks.

    ``q`` has shape ``(..., 2)``, ``centers`` ``(K, 2)``, ``radii`` and ``d0``
    ``(K,)``. Returns potential of shape ``(..., K)`` and, if requested, force
    of shape ``(..., K, 2)``. Entries where the surface distance is not
    positive, or where the force is requested at the goal itself, come out
    as garbage; callers are responsible for masking or rejecting them.
    """
    q = np.asarray(q, dtype=float)
    diff = q[..., None, :] - centers
    center_d = np.hypot(diff[..., 0], diff[..., 1])
    d_obs = center_d - radii
    inside = (d_obs <= d0) & (d_obs > 0)
    safe_d = np.where(inside, d_obs, 1.0)
    a = np.where(inside, 1.0 / safe_d - 1.0 / d0, 0.0)
    goal_diff = q - np.asarray(q_goal, dtype=float)
    g = np.hypot(goal_diff[..., 0], goal_diff[..., 1])[..., None]
    gn = g**params.n
    potential = 0.5 * params.eta * a**2 * gn
    if not with_force:
        return potential, None
    safe_c = np.where(center_d > 0, center_d, 1.0)[..., None]
    safe_g = np.where(g > 0, g, 1.0)
    away = diff / safe_c
    to_goal = goal_diff[..., None, :] / safe_g[..., None]
    f1 = (params.eta * a * gn / safe_d**2)[..., None] * away
    f2 = -(0.5 * params.n * params.eta * a**2 * safe_g ** (params.n - 1))[..., None] * to_goal
    return potential, f1 + f2


def _check_repulsion(q, obstacle: Obstacle, q_goal, d0, need_goal: bool):
    d_obs = distance(q, obstacle.position) - obstacle.radius
    if d_obs <= 0:
        raise SingularConfiguration(f"point {q} lies inside obstacle at {obstacle.position}")
    if need_goal and d_obs <= d0 and distance(q, q_goal) == 0:
        raise SingularConfiguration("repulsive force undefined at the goal inside an influence zone")


def repulsive_potential(q, obstacle: Obstacle, q_goal, d0: float, params: IpfParams) -> float:
    _check_repulsion(q, obstacle, q_goal, d0, need_goal=False)
    pot, _ = repulsion_terms(
        q, obstacle.position[None], np.array([obstacle.radius]), q_goal, np.array([d0]), params,
        with_force=False,
    )
    return float(pot[0])


def repulsive_force(q, obstacle: Obstacle, q_goal, d0: float, params: IpfParams) -> Vec2:
    _check_repulsion(q, obstacle, q_goal, d0, need_goal=True)
    _, force = repulsion_terms(
        q, obstacle.position[None], np.array([obstacle.radius]), q_goal, np.array([d0]), params,
    )
    return force[0]


def adaptive_d0(robot_speed: float, obstacle: Obstacle, limits: KinematicLimits, params: IpfParams) -> float:
    """Influence radius that grows with the closing speed."""
    if robot_speed < 0:
        raise ValueError("robot_speed must be non-negative")
    if obstacle.knowledge is Knowledge.EXACT:
        return robot_speed + float(np.hypot(*obstacle.velocity)) + params.d01
    if obstacle.knowledge is Knowledge.MAX_SPEED:
        return robot_speed + obstacle.max_speed + params.d01
    return 2 * limits.v_max + params.d01


def total_field(
    q,
    q_goal,
    obstacles: Sequence[Obstacle],
    robot_speed: float,
    limits: KinematicLimits,
    params: IpfParams,
) -> FieldSample:
    potential = attractive_potential(q, q_goal, params)
    force = attractive_force(q, q_goal, params)
    for obs in obstacles:
        d0 = adaptive_d0(robot_speed, obs, limits, params)
        potential += repulsive_potential(q, obs, q_goal, d0, params)
        force = force + repulsive_force(q, obs, q_goal, d0, params)
    return FieldSample(float(potential), force)
