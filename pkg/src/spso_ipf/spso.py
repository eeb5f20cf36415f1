"""Seeded particle swarm optimizer over a 2-D box.

The fitness function is called on the whole swarm at once: it receives an
``(N, 2)`` array of positions and must return ``N`` fitness values. Use
:func:`batched` to adapt a function of a single point. Random numbers are
drawn in a fixed order per iteration (all ``r1`` then all ``r2``), so the
result is fully determined by the seed regardless of how the fitness
function evaluates its batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Vec2
from .objective import SearchBounds

FitnessFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PsoParams:
    num_particles: int = 50
    max_iterations: int = 100
    w: float = 0.7
    c1: float = 2.0
    c2: float = 2.0
    target_fitness: float | None = None
    seed: int = 0
    # one r1/r2 per particle (scalar) by default; True draws one per axis
    per_dimension: bool = False

    def __post_init__(self):
        if self.num_particles < 1 or self.max_iterations < 1:
            raise ValueError("num_particles and max_iterations must be >= 1")
        if self.w < 0:
            raise ValueError("inertia weight must be non-negative")
        if not (0 <= self.c1 <= 2 and 0 <= self.c2 <= 2):
            raise ValueError("acceleration coefficients must lie in [0, 2]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Particle:
    position: Vec2
    velocity: Vec2
    best_position: Vec2
    best_fitness: float


@dataclass
class Swarm:
    positions: np.ndarray
    velocities: np.ndarray
    fitness: np.ndarray
    best_positions: np.ndarray
    best_fitness: np.ndarray
    rng: np.random.Generator
    gbest_index: int = 0

    @property
    def gbest_position(self) -> Vec2:
        return self.best_positions[self.gbest_index]

    @property
    def gbest_fitness(self) -> float:
        return float(self.best_fitness[self.gbest_index])

    def particle(self, i: int) -> Particle:
        return Particle(
            self.positions[i].copy(),
            self.velocities[i].copy(),
            self.best_positions[i].copy(),
            float(self.best_fitness[i]),
        )


@dataclass(frozen=True)
class SwarmResult:
    best_position: Vec2
    best_fitness: float
    iterations_used: int
    fitness_history: list[float] = field(default_factory=list)


def batched(fn: Callable[[np.ndarray], float]) -> FitnessFn:
    """Lift a single-point fitness to the batch interface."""

    def wrapper(qs):
        return np.array([fn(q) for q in qs], dtype=float)

    return wrapper


def _evaluate(fitness_fn: FitnessFn, positions):
    f = np.asarray(fitness_fn(positions), dtype=float).reshape(len(positions))
    return np.where(np.isnan(f), np.inf, f)


def update_bests(swarm: Swarm) -> Swarm:
    """Personal bests move only on strict improvement; ties keep the lowest index."""
    improved = swarm.fitness < swarm.best_fitness
    swarm.best_positions[improved] = swarm.positions[improved]
    swarm.best_fitness[improved] = swarm.fitness[improved]
    swarm.gbest_index = int(np.argmin(swarm.best_fitness))
    return swarm


def initialize_swarm(bounds: SearchBounds, params: PsoParams, fitness_fn: FitnessFn) -> Swarm:
    rng = np.random.default_rng(params.seed)
    n = params.num_particles
    lo, hi = np.asarray(bounds.lower, dtype=float), np.asarray(bounds.upper, dtype=float)
    span = hi - lo
    positions = lo + span * rng.random((n, 2))
    velocities = span * (2 * rng.random((n, 2)) - 1)
    positions = np.clip(positions, lo, hi)
    fit = _evaluate(fitness_fn, positions)
    swarm = Swarm(
        positions=positions,
        velocities=velocities,
        fitness=fit,
        best_positions=positions.copy(),
        best_fitness=fit.copy(),
        rng=rng,
    )
    swarm.gbest_index = int(np.argmin(fit))
    return swarm


def step(swarm: Swarm, params: PsoParams, bounds: SearchBounds, fitness_fn: FitnessFn) -> Swarm:
    n = len(swarm.positions)
    r1, r2 = swarm.rng.random((2, n, 2 if params.per_dimension else 1))
    x = swarm.positions
    v = (
        params.w * swarm.velocities
        + params.c1 * r1 * (swarm.best_positions - x)
        + params.c2 * r2 * (swarm.gbest_position - x)
    )
    x = x + v
    lo, hi = bounds.lower, bounds.upper
    out = (x < lo) | (x > hi)
    swarm.positions = np.minimum(np.maximum(x, lo), hi)
    swarm.velocities = np.where(out, 0.0, v)
    swarm.fitness = _evaluate(fitness_fn, swarm.positions)
    return update_bests(swarm)


def optimize(bounds: SearchBounds, params: PsoParams, fitness_fn: FitnessFn) -> SwarmResult:
    swarm = initialize_swarm(bounds, params, fitness_fn)
    history = [swarm.gbest_fitness]
    iterations = 0
    target = params.target_fitness
    while iterations < params.max_iterations and not (target is not None and history[-1] <= target):
        step(swarm, params, bounds, fitness_fn)
        iterations += 1
        history.append(swarm.gbest_fitness)
    return SwarmResult(swarm.gbest_position.copy(), history[-1], iterations, history)
