"""Compiled swarm loop used by the planner.

:func:`optimize_projected` runs the same algorithm as
:func:`spso_ipf.spso.optimize` with each particle scored at its kinematically
projected position, but in one compiled loop. It consumes the seeded random
stream in exactly the order the generic optimizer does, so both produce the
same swarm trajectory; the numpy functions in :mod:`spso_ipf.objective` and
:mod:`spso_ipf.spso` are the reference and the test suite holds this module
to them.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .objective import _FEASIBLE_SLACK, MIN_STEP, EpochContext, SearchBounds
from .spso import PsoParams, SwarmResult

MODE_SPSO = 0
MODE_SPSO_ONE_SIDED = 1
MODE_POTENTIAL = 2
MODE_PLAIN = 3

_TWO_PI = 2.0 * math.pi

# slots of the packed parameter vector
(PX, PY, H0, MAX_LEN, MAX_TURN, GX, GY, GVX, GVY, DT, EPS, ETA, N, DSTAR, EPS0,
 VMAX, WMAX, BOUNDED, XMIN, YMIN, XMAX, YMAX, ROBOT_R, D01, PENALTY) = range(25)


@njit(cache=True)
def _wrap(a):
    w = (a + math.pi) % _TWO_PI - math.pi
    if w == -math.pi:
        w = math.pi
    return w


@njit(cache=True)
def _score_one(x, y, P, centers, radii, d0, mode):
    px, py, h0 = P[PX], P[PY], P[H0]
    dx = x - px
    dy = y - py
    length = math.hypot(dx, dy)
    if length < MIN_STEP:
        qx, qy = px, py
    else:
        turn = _wrap(math.atan2(dy, dx) - h0)
        max_len, max_turn = P[MAX_LEN], P[MAX_TURN]
        if length <= max_len * (1 + _FEASIBLE_SLACK) and abs(turn) <= max_turn * (1 + _FEASIBLE_SLACK):
            qx, qy = x, y
        else:
            step = min(length, max_len)
            h = h0 + min(max(turn, -max_turn), max_turn)
            qx = px + step * math.cos(h)
            qy = py + step * math.sin(h)

    if P[BOUNDED] != 0 and (qx < P[XMIN] or qx > P[XMAX] or qy < P[YMIN] or qy > P[YMAX]):
        return np.inf

    tgx = P[GX] - qx
    tgy = P[GY] - qy
    g = math.hypot(tgx, tgy)
    eps, dstar = P[EPS], P[DSTAR]
    if mode == MODE_PLAIN:
        cost = g
    elif g <= dstar:
        cost = 0.5 * eps * g * g
    else:
        cost = dstar * eps * g - 0.5 * eps * dstar * dstar

    gn = g ** P[N]
    for k in range(radii.shape[0]):
        d_obs = math.hypot(qx - centers[k, 0], qy - centers[k, 1]) - radii[k]
        if d_obs <= 0 or d_obs < P[ROBOT_R]:
            return np.inf
        if mode == MODE_PLAIN:
            if d_obs - P[ROBOT_R] < P[D01]:
                cost += P[PENALTY]
        elif d_obs <= d0[k]:
            a = 1.0 / d_obs - 1.0 / d0[k]
            cost += 0.5 * P[ETA] * a * a * gn

    if mode == MODE_SPSO or mode == MODE_SPSO_ONE_SIDED:
        vx = (qx - px) / P[DT]
        vy = (qy - py) / P[DT]
        # (goal_vel - v) . perp(goal - q), perp(x, y) = (-y, x)
        theta_dot = ((P[GVX] - vx) * (-tgy) + (P[GVY] - vy) * tgx) / (tgx * tgx + tgy * tgy + P[EPS0])
        speed = math.hypot(vx, vy)
        if mode == MODE_SPSO:
            cost += (theta_dot - P[WMAX]) ** 2 + (speed - P[VMAX]) ** 2
        else:
            cost += max(abs(theta_dot) - P[WMAX], 0.0) ** 2 + max(speed - P[VMAX], 0.0) ** 2
    return cost


@njit(cache=True)
def _score(qs, P, centers, radii, d0, mode):
    out = np.empty(qs.shape[0])
    for i in range(qs.shape[0]):
        out[i] = _score_one(qs[i, 0], qs[i, 1], P, centers, radii, d0, mode)
    return out


@njit(cache=True)
def _swarm(lo, hi, u_pos, u_vel, rs, w, c1, c2, target, has_target, P, centers, radii, d0, mode):
    n = u_pos.shape[0]
    k = rs.shape[3]
    pos = np.empty((n, 2))
    vel = np.empty((n, 2))
    best = np.empty((n, 2))
    best_f = np.empty(n)
    for i in range(n):
        for a in range(2):
            span = hi[a] - lo[a]
            pos[i, a] = min(max(lo[a] + span * u_pos[i, a], lo[a]), hi[a])
            vel[i, a] = span * (2 * u_vel[i, a] - 1)
            best[i, a] = pos[i, a]
        f = _score_one(pos[i, 0], pos[i, 1], P, centers, radii, d0, mode)
        best_f[i] = np.inf if math.isnan(f) else f
    g = np.argmin(best_f)
    history = np.empty(rs.shape[0] + 1)
    history[0] = best_f[g]
    it = 0
    while it < rs.shape[0] and not (has_target and history[it] <= target):
        gx, gy = best[g, 0], best[g, 1]
        for i in range(n):
            r1x = rs[it, 0, i, 0]
            r2x = rs[it, 1, i, 0]
            r1y = rs[it, 0, i, k - 1]
            r2y = rs[it, 1, i, k - 1]
            vx = w * vel[i, 0] + c1 * r1x * (best[i, 0] - pos[i, 0]) + c2 * r2x * (gx - pos[i, 0])
            vy = w * vel[i, 1] + c1 * r1y * (best[i, 1] - pos[i, 1]) + c2 * r2y * (gy - pos[i, 1])
            x = pos[i, 0] + vx
            y = pos[i, 1] + vy
            vel[i, 0] = 0.0 if (x < lo[0] or x > hi[0]) else vx
            vel[i, 1] = 0.0 if (y < lo[1] or y > hi[1]) else vy
            pos[i, 0] = min(max(x, lo[0]), hi[0])
            pos[i, 1] = min(max(y, lo[1]), hi[1])
            f = _score_one(pos[i, 0], pos[i, 1], P, centers, radii, d0, mode)
            if math.isnan(f):
                f = np.inf
            if f < best_f[i]:
                best_f[i] = f
                best[i, 0] = pos[i, 0]
                best[i, 1] = pos[i, 1]
        g = np.argmin(best_f)
        it += 1
        history[it] = best_f[g]
    return best[g].copy(), it, history[: it + 1]


def pack(ctx: EpochContext, penalty: float = 1e6):
    """Flatten an epoch context into the kernel's argument arrays."""
    centers, radii, d0 = ctx.obstacle_arrays
    ws = ctx.workspace
    prm, lim = ctx.params, ctx.limits
    P = np.array([
        ctx.robot.position[0], ctx.robot.position[1], ctx.robot.heading,
        lim.v_max * ctx.dt, lim.omega_max * ctx.dt,
        ctx.q_goal[0], ctx.q_goal[1], ctx.goal_velocity[0], ctx.goal_velocity[1], ctx.dt,
        prm.epsilon, prm.eta, prm.n, prm.d_goal_star, prm.epsilon0,
        lim.v_max, lim.omega_max,
        ws is not None,
        *((ws.xmin, ws.ymin, ws.xmax, ws.ymax) if ws is not None else (0.0, 0.0, 0.0, 0.0)),
        ctx.robot_radius, prm.d01, penalty,
    ], dtype=float)
    as_f = lambda a: np.ascontiguousarray(a, dtype=float)  # noqa: E731
    return P, as_f(centers).reshape(-1, 2), as_f(radii), as_f(d0)


def projected_scorer(ctx: EpochContext, mode: int, penalty: float = 1e6):
    """Batch scorer ``f(qs) -> fitness`` evaluating each point at its projection."""
    P, centers, radii, d0 = pack(ctx, penalty)

    def score(qs):
        return _score(np.ascontiguousarray(qs, dtype=float), P, centers, radii, d0, mode)

    return score


def optimize_projected(
    bounds: SearchBounds, params: PsoParams, ctx: EpochContext, mode: int, penalty: float = 1e6
) -> SwarmResult:
    rng = np.random.default_rng(params.seed)
    n = params.num_particles
    u_pos = rng.random((n, 2))
    u_vel = rng.random((n, 2))
    rs = rng.random((params.max_iterations, 2, n, 2 if params.per_dimension else 1))
    target = params.target_fitness
    best, iters, history = _swarm(
        bounds.lower, bounds.upper, u_pos, u_vel, rs,
        float(params.w), float(params.c1), float(params.c2),
        0.0 if target is None else float(target), target is not None,
        *pack(ctx, penalty), mode,
    )
    return SwarmResult(best, float(history[-1]), int(iters), history.tolist())
