"""Compare analytic field forces with central finite differences.

    python scripts/gradient_check.py --configs 1000 --h 1e-6
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from spso_ipf import IpfParams, KinematicLimits, Knowledge, Obstacle, adaptive_d0, total_field


def central_gradient(f, q, h):
    e = np.eye(2) * h
    return np.array([(f(q + e[i]) - f(q - e[i])) / (2 * h) for i in range(2)])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--configs", type=int, default=1000)
    ap.add_argument("--h", type=float, default=1e-6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    lim = KinematicLimits()
    errs, active = [], 0
    t0 = time.perf_counter()
    while len(errs) < args.configs:
        p = IpfParams(epsilon=rng.uniform(0.5, 10), eta=rng.uniform(0.5, 5), n=rng.uniform(1, 3),
                      d_goal_star=rng.uniform(1, 5), d01=rng.uniform(0, 1))
        goal, speed = rng.uniform(0, 10, 2), rng.uniform(0, 0.8)
        obs = [Obstacle(rng.uniform(0, 10, 2), rng.uniform(0, 1), velocity=rng.uniform(-0.3, 0.3, 2),
                        knowledge=rng.choice(list(Knowledge)), max_speed=0.5) for _ in range(rng.integers(1, 4))]
        a = rng.uniform(0, 2 * np.pi)
        q = obs[0].position + (obs[0].radius + rng.uniform(0.1, 2)) * np.array([np.cos(a), np.sin(a)])
        d_goal = np.hypot(*(q - goal))
        d_obs = np.array([np.hypot(*(q - o.position)) - o.radius for o in obs])
        d0 = np.array([adaptive_d0(speed, o, lim, p) for o in obs])
        if d_goal <= 0.1 or abs(d_goal - p.d_goal_star) < 10 * args.h or np.any(d_obs <= 0.1) \
                or np.any(np.abs(d_obs - d0) < 10 * args.h):
            continue
        active += bool(np.any(d_obs < d0))
        force = total_field(q, goal, obs, speed, lim, p).force
        fd = -central_gradient(lambda x: total_field(x, goal, obs, speed, lim, p).potential, q, args.h)
        errs.append(np.linalg.norm(force - fd) / np.linalg.norm(force))
    errs = np.array(errs)
    print(f"{len(errs)} configurations ({active} with active repulsion) in {time.perf_counter() - t0:.2f}s")
    print(f"relative error: max {errs.max():.2e}  median {np.median(errs):.2e}  99th pct {np.quantile(errs, 0.99):.2e}")


if __name__ == "__main__":
    main()
