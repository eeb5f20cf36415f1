"""Discrete-time world and the one-swarm-per-epoch planner loop."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import fast
from .core import Obstacle, RobotState, Vec2, Workspace, distance, wrap_angle
from .objective import EpochContext, enforce_kinematics, fitness, infeasible_mask, potential, search_bounds
from .scenario import ObstacleSpec, Scenario
from .spso import PsoParams, SwarmResult

PLAIN_PENALTY = 1e6
COLLISION_SAMPLES = 10
STUCK_EPOCHS = 20
STUCK_FITNESS_TOL = 1e-6
STUCK_STEP_TOL = 1e-4


class Algorithm(enum.Enum):
    SPSO_IPF = "SPSO_IPF"
    PSO_IPF_NONSMOOTH = "PSO_IPF_NONSMOOTH"
    PSO_PLAIN = "PSO_PLAIN"

    @classmethod
    def parse(cls, name: str) -> "Algorithm":
        key = name.strip().upper().replace("-", "_")
        aliases = {"PSO_IFF_NONSMOOTH": "PSO_IPF_NONSMOOTH", "NONSMOOTH": "PSO_IPF_NONSMOOTH", "PSO": "PSO_PLAIN"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown algorithm {name!r}; choose from {[a.value for a in cls]}") from None


class Termination(enum.Enum):
    REACHED_GOAL = "ReachedGoal"
    COLLISION = "Collision"
    EPOCH_BUDGET_EXHAUSTED = "EpochBudgetExhausted"
    STUCK = "Stuck"


class NoFeasibleCandidate(RuntimeError):
    """Every particle landed on an infeasible waypoint."""


@dataclass(frozen=True, eq=False)
class MovingObstacle:
    spec: ObstacleSpec
    obstacle: Obstacle
    next_waypoint: int = 0


@dataclass(frozen=True, eq=False)
class EpochRecord:
    epoch: int
    robot: RobotState
    waypoint: Vec2
    fitness: float
    obstacle_positions: np.ndarray


@dataclass(eq=False)
class PlanTrace:
    records: list[EpochRecord] = field(default_factory=list)
    termination: Termination | None = None
    algorithm: Algorithm = Algorithm.SPSO_IPF
    seed: int = 0

    @property
    def positions(self) -> np.ndarray:
        return np.array([r.robot.position for r in self.records])

    @property
    def epochs(self) -> int:
        return len(self.records) - 1


def _plain_fitness(q, ctx: EpochContext):
    q = np.asarray(q, dtype=float)
    cost = np.asarray(distance(q, ctx.q_goal), dtype=float)
    centers, radii, _ = ctx.obstacle_arrays
    if len(radii):
        diff = q[..., None, :] - centers
        clearance = np.hypot(diff[..., 0], diff[..., 1]) - radii - ctx.robot_radius
        cost = cost + PLAIN_PENALTY * np.sum(clearance < ctx.params.d01, axis=-1)
    return np.where(infeasible_mask(q, ctx), np.inf, cost)


def algorithm_fitness(algorithm: Algorithm):
    if algorithm is Algorithm.SPSO_IPF:
        return fitness
    if algorithm is Algorithm.PSO_IPF_NONSMOOTH:
        return potential
    return _plain_fitness


def reference_scorer(ctx: EpochContext, algorithm: Algorithm):
    """Pure-numpy twin of the compiled scorer used by :func:`optimize_epoch`."""
    score = algorithm_fitness(algorithm)
    return lambda qs: score(enforce_kinematics(qs, ctx), ctx)


_MODES = {
    Algorithm.SPSO_IPF: lambda ctx: fast.MODE_SPSO_ONE_SIDED if ctx.one_sided else fast.MODE_SPSO,
    Algorithm.PSO_IPF_NONSMOOTH: lambda ctx: fast.MODE_POTENTIAL,
    Algorithm.PSO_PLAIN: lambda ctx: fast.MODE_PLAIN,
}


def optimize_epoch(ctx: EpochContext, pso: PsoParams, algorithm: Algorithm = Algorithm.SPSO_IPF) -> SwarmResult:
    """Run one swarm over the reachable box.

    Particles are scored at their kinematically projected position, so the
    swarm optimizes over the points the robot can actually reach.
    """
    return fast.optimize_projected(search_bounds(ctx), pso, ctx, _MODES[algorithm](ctx), PLAIN_PENALTY)


def plan_epoch(ctx: EpochContext, pso: PsoParams, algorithm: Algorithm = Algorithm.SPSO_IPF) -> Vec2:
    result = optimize_epoch(ctx, pso, algorithm)
    if not math.isfinite(result.best_fitness):
        raise NoFeasibleCandidate("no particle found a feasible waypoint")
    return enforce_kinematics(result.best_position, ctx)


def _reflect(pos: Vec2, vel: Vec2, radius: float, workspace: Workspace | None):
    if workspace is None:
        return pos, vel
    pos, vel = pos.copy(), vel.copy()
    lo = workspace.lower + radius
    hi = workspace.upper - radius
    for ax in range(2):
        if lo[ax] > hi[ax]:
            continue
        if pos[ax] < lo[ax] and vel[ax] < 0:
            pos[ax] = 2 * lo[ax] - pos[ax]
            vel[ax] = -vel[ax]
        elif pos[ax] > hi[ax] and vel[ax] > 0:
            pos[ax] = 2 * hi[ax] - pos[ax]
            vel[ax] = -vel[ax]
        pos[ax] = min(max(pos[ax], lo[ax]), hi[ax])
    return pos, vel


def _follow_waypoints(pos: Vec2, points: np.ndarray, idx: int, travel: float):
    pos = pos.copy()
    while idx < len(points) and travel > 0:
        gap = distance(pos, points[idx])
        if gap <= travel:
            pos = points[idx].copy()
            travel -= gap
            idx += 1
        else:
            pos = pos + (points[idx] - pos) / gap * travel
            travel = 0.0
    return pos, idx


def step_obstacles(
    obstacles: Sequence[MovingObstacle], dt: float, workspace: Workspace | None = None
) -> list[MovingObstacle]:
    """Advance every obstacle by one epoch of its motion script."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    out = []
    for mo in obstacles:
        spec, obs = mo.spec, mo.obstacle
        idx = mo.next_waypoint
        if spec.motion == "velocity":
            pos, vel = _reflect(obs.position + obs.velocity * dt, obs.velocity, obs.radius, workspace)
        elif spec.motion == "waypoints":
            pos, idx = _follow_waypoints(obs.position, spec.waypoints, idx, spec.speed * dt)
            vel = np.zeros(2) if idx >= len(spec.waypoints) else _unit(spec.waypoints[idx] - pos) * spec.speed
        else:
            pos, vel = obs.position, obs.velocity
        out.append(MovingObstacle(spec, replace(obs, position=pos, velocity=vel), idx))
    return out


def _unit(v):
    n = np.hypot(*v)
    return v / n if n > 0 else np.zeros(2)


def initial_obstacles(scenario: Scenario) -> list[MovingObstacle]:
    return [MovingObstacle(spec, spec.initial_obstacle()) for spec in scenario.obstacles]


def segment_collides(p0, p1, obs0, obs1, radii, robot_radius, samples=COLLISION_SAMPLES) -> bool:
    """Check the robot's straight move against linearly moving discs."""
    if len(radii) == 0:
        return False
    s = np.linspace(0.0, 1.0, samples + 1)[:, None]
    robot = p0 + s * (p1 - p0)
    centers = obs0[None] + s[..., None] * (obs1 - obs0)[None]
    gap = np.hypot(*(robot[:, None, :] - centers).transpose(2, 0, 1))
    return bool(np.any(gap < radii + robot_radius))


def epoch_seed(seed: int, epoch: int) -> int:
    return int(np.random.SeedSequence([seed, epoch]).generate_state(1, np.uint64)[0])


def epoch_context(scenario: Scenario, robot: RobotState, obstacles: Sequence[MovingObstacle]) -> EpochContext:
    return EpochContext(
        robot=robot,
        q_goal=scenario.goal,
        obstacles=[mo.obstacle for mo in obstacles],
        limits=scenario.limits,
        params=scenario.ipf,
        dt=scenario.dt,
        workspace=scenario.workspace,
        robot_radius=scenario.robot_radius,
        one_sided=scenario.one_sided_penalty,
    )


def run(scenario: Scenario, algorithm: Algorithm = Algorithm.SPSO_IPF) -> PlanTrace:
    scenario.validate()
    seed = scenario.pso.seed
    start, goal = scenario.start, scenario.goal
    heading = math.atan2(goal[1] - start[1], goal[0] - start[0]) if distance(start, goal) > 0 else 0.0
    robot = RobotState(start, np.zeros(2), heading)
    obstacles = initial_obstacles(scenario)
    radii = np.array([mo.obstacle.radius for mo in obstacles], dtype=float)

    def positions(obs):
        return np.array([mo.obstacle.position for mo in obs]).reshape(-1, 2)

    trace = PlanTrace(algorithm=algorithm, seed=seed)
    trace.records.append(EpochRecord(0, robot, start.copy(), math.nan, positions(obstacles)))
    if distance(start, goal) <= scenario.goal_tolerance:
        trace.termination = Termination.REACHED_GOAL
        return trace

    stall, stall_best = 0, math.inf
    for epoch in range(1, scenario.max_epochs + 1):
        ctx = epoch_context(scenario, robot, obstacles)
        pso = replace(scenario.pso, seed=epoch_seed(seed, epoch))
        result = optimize_epoch(ctx, pso, algorithm)
        if not math.isfinite(result.best_fitness):
            trace.termination = Termination.STUCK
            break
        waypoint = enforce_kinematics(result.best_position, ctx)

        old_pos = positions(obstacles)
        obstacles = step_obstacles(obstacles, scenario.dt, scenario.workspace)
        new_pos = positions(obstacles)

        disp = waypoint - robot.position
        moved = float(np.hypot(*disp))
        heading = math.atan2(disp[1], disp[0]) if moved > 0 else robot.heading
        collided = segment_collides(robot.position, waypoint, old_pos, new_pos, radii, scenario.robot_radius)
        robot = RobotState(waypoint, disp / scenario.dt, heading)
        trace.records.append(EpochRecord(epoch, robot, waypoint.copy(), result.best_fitness, new_pos))

        if collided:
            trace.termination = Termination.COLLISION
            break
        if distance(waypoint, goal) <= scenario.goal_tolerance:
            trace.termination = Termination.REACHED_GOAL
            break
        if moved < STUCK_STEP_TOL and result.best_fitness > stall_best - STUCK_FITNESS_TOL:
            stall += 1
            stall_best = min(stall_best, result.best_fitness)
        else:
            stall, stall_best = 0, result.best_fitness
        if stall >= STUCK_EPOCHS:
            trace.termination = Termination.STUCK
            break
    else:
        trace.termination = Termination.EPOCH_BUDGET_EXHAUSTED
    return trace
