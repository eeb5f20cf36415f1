"""The compiled scorer and swarm loop must agree with the numpy reference."""

import numpy as np
import pytest

from spso_ipf import fast
from spso_ipf.core import IpfParams, KinematicLimits, Knowledge, Obstacle, RobotState, Workspace
from spso_ipf.objective import EpochContext, search_bounds
from spso_ipf.sim import PLAIN_PENALTY, Algorithm, _MODES, reference_scorer
from spso_ipf.spso import PsoParams, optimize


def contexts():
    rng = np.random.default_rng(11)
    ws = Workspace(0, 0, 10, 10)
    for i in range(12):
        p = rng.uniform(0.5, 9.5, 2)
        obstacles = [
            Obstacle(p + rng.uniform(-1.5, 1.5, 2), rng.uniform(0.05, 0.5), velocity=rng.uniform(-0.3, 0.3, 2),
                     knowledge=list(Knowledge)[k % 3], max_speed=0.4 if k % 3 == 1 else None)
            for k in range(i % 5)
        ]
        obstacles = [o for o in obstacles if np.hypot(*(p - o.position)) > o.radius + 0.2]
        yield EpochContext(
            RobotState(p, rng.uniform(-0.5, 0.5, 2), rng.uniform(-np.pi, np.pi)),
            rng.uniform(0, 10, 2), obstacles, KinematicLimits(), IpfParams(),
            workspace=ws if i % 2 else None, robot_radius=0.15 * (i % 3 > 0), one_sided=i % 4 == 3,
        )


@pytest.mark.parametrize("algorithm", list(Algorithm))
def test_scorer_matches_reference(algorithm):
    rng = np.random.default_rng(2)
    for ctx in contexts():
        b = search_bounds(ctx)
        qs = b.lower + (b.upper - b.lower) * rng.random((400, 2))
        qs[:5] = ctx.robot.position + rng.normal(0, 1e-5, (5, 2))  # snapped to hold position
        ref = reference_scorer(ctx, algorithm)(qs)
        got = fast.projected_scorer(ctx, _MODES[algorithm](ctx), PLAIN_PENALTY)(qs)
        np.testing.assert_array_equal(np.isinf(got), np.isinf(ref))
        ok = np.isfinite(ref)
        np.testing.assert_allclose(got[ok], ref[ok], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("per_dimension", [False, True])
def test_swarm_loop_matches_generic_optimizer(per_dimension):
    for k, ctx in enumerate(contexts()):
        pso = PsoParams(num_particles=15, max_iterations=25, seed=100 + k, per_dimension=per_dimension)
        ref = optimize(search_bounds(ctx), pso, reference_scorer(ctx, Algorithm.SPSO_IPF))
        got = fast.optimize_projected(search_bounds(ctx), pso, ctx, _MODES[Algorithm.SPSO_IPF](ctx))
        assert got.iterations_used == ref.iterations_used
        np.testing.assert_allclose(got.best_position, ref.best_position, rtol=0, atol=1e-12)
        np.testing.assert_allclose(got.fitness_history, ref.fitness_history, rtol=1e-12)


def test_swarm_loop_target_fitness():
    ctx = next(contexts())
    pso = PsoParams(num_particles=10, max_iterations=50, seed=1, target_fitness=1e9)
    res = fast.optimize_projected(search_bounds(ctx), pso, ctx, fast.MODE_SPSO)
    assert res.iterations_used == 0 and len(res.fitness_history) == 1
