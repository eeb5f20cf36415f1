"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Thresholds are the stated ones; nothing here is tuned to make a run pass.
Comparison artifacts are written under ``artifacts/acceptance/``.
"""

from __future__ import annotations

import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from spso_ipf.cli import main as cli_main
from spso_ipf.core import IpfParams, KinematicLimits, Knowledge, Obstacle, RobotState
from spso_ipf.fileio import BUILTIN_SCENARIOS, load_scenario
from spso_ipf.ipf import adaptive_d0, attractive_potential, repulsive_potential, total_field
from spso_ipf.metrics import compare, compute_metrics
from spso_ipf.objective import EpochContext, SearchBounds, angular_velocity
from spso_ipf.sim import Algorithm, Termination, run
from spso_ipf.spso import PsoParams, optimize

ARTIFACTS = Path(__file__).resolve().parents[1] / "artifacts" / "acceptance"
SEEDS = range(100)
H = 1e-6

_runs: dict[tuple[str, Algorithm], list] = {}


def bench(name: str, algorithm: Algorithm, seeds=SEEDS):
    """Cached ``(trace, metrics)`` per seed for a benchmark scenario."""
    key = (name, algorithm)
    if key not in _runs:
        sc = load_scenario(name)
        out = []
        for s in seeds:
            sc_s = sc.with_seed(s)
            trace = run(sc_s, algorithm)
            out.append((trace, compute_metrics(trace, sc_s)))
        _runs[key] = out
    return _runs[key]


def test_gradient_oracle(acceptance_report):
    rng = np.random.default_rng(0)
    lim = KinematicLimits()
    t0 = time.perf_counter()
    worst, n = 0.0, 0
    while n < 1000:
        p = IpfParams(epsilon=rng.uniform(0.5, 10), eta=rng.uniform(0.5, 5), n=rng.uniform(1, 3),
                      d_goal_star=rng.uniform(1, 5), d01=rng.uniform(0, 1))
        goal, speed = rng.uniform(0, 10, 2), rng.uniform(0, 0.8)
        obs = [Obstacle(rng.uniform(0, 10, 2), rng.uniform(0, 1), velocity=rng.uniform(-0.3, 0.3, 2),
                        knowledge=Knowledge.EXACT) for _ in range(rng.integers(1, 4))]
        # put q near the first obstacle so repulsion is usually active
        a = rng.uniform(0, 2 * np.pi)
        q = obs[0].position + (obs[0].radius + rng.uniform(0.1, 2)) * np.array([np.cos(a), np.sin(a)])
        d_goal = np.hypot(*(q - goal))
        if d_goal <= 0.1 or abs(d_goal - p.d_goal_star) < 10 * H:
            continue
        d_obs = [np.hypot(*(q - o.position)) - o.radius for o in obs]
        d0 = [adaptive_d0(speed, o, lim, p) for o in obs]
        if any(d <= 0.1 or abs(d - r) < 10 * H for d, r in zip(d_obs, d0)):
            continue
        force = total_field(q, goal, obs, speed, lim, p).force
        fd = -oracles.central_gradient(lambda x: total_field(x, goal, obs, speed, lim, p).potential, q, H)
        worst = max(worst, np.linalg.norm(force - fd) / np.linalg.norm(force))
        n += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 5
    acceptance_report("gradient oracle", ok, f"1000 configs, max rel err {worst:.2e} (<=1e-5), {elapsed:.2f}s (<5s)")
    assert ok


def test_branch_continuity(acceptance_report):
    delta = 1e-8
    worst = 0.0
    rng = np.random.default_rng(1)
    for _ in range(200):
        # a smooth function still moves by slope * 2 delta across the probe; the
        # attractive slope at d* is epsilon * d*, so gains stay at or below the defaults
        p = IpfParams(epsilon=rng.uniform(0.5, 10), eta=rng.uniform(0.5, 5), d_goal_star=rng.uniform(1, 3))
        u = np.array([np.cos(a := rng.uniform(0, 2 * np.pi)), np.sin(a)])
        goal = rng.uniform(0, 10, 2)
        jump = abs(attractive_potential(goal + (p.d_goal_star - delta) * u, goal, p)
                   - attractive_potential(goal + (p.d_goal_star + delta) * u, goal, p))
        worst = max(worst, jump)
        obs = Obstacle(rng.uniform(0, 10, 2), rng.uniform(0, 1))
        d0 = rng.uniform(0.3, 2)
        inner = repulsive_potential(obs.position + (obs.radius + d0 - delta) * u, obs, goal, d0, p)
        outer = repulsive_potential(obs.position + (obs.radius + d0 + delta) * u, obs, goal, d0, p)
        worst = max(worst, abs(inner - outer))
    ok = worst <= 1e-6
    acceptance_report("branch continuity", ok, f"max jump {worst:.2e} at delta=1e-8 (<=1e-6)")
    assert ok


def test_adaptive_d0_table(acceptance_report):
    lim, p = KinematicLimits(v_max=0.8), IpfParams(d01=0.2)
    got = [
        adaptive_d0(0.5, Obstacle((0, 0), 0.1, velocity=(0.0, 0.3)), lim, p),
        adaptive_d0(0.5, Obstacle((0, 0), 0.1, knowledge=Knowledge.MAX_SPEED, max_speed=0.6), lim, p),
        adaptive_d0(0.5, Obstacle((0, 0), 0.1, knowledge=Knowledge.UNKNOWN), lim, p),
    ]
    err = max(abs(g - e) for g, e in zip(got, (1.0, 1.3, 1.8)))
    ok = err <= 1e-12
    acceptance_report("adaptive d0 table", ok, f"{got} vs [1.0, 1.3, 1.8], max err {err:.1e}")
    assert ok


def test_bearing_rate_oracle(acceptance_report):
    ctx = EpochContext(RobotState((0, 0)), (1, 0), [], KinematicLimits(), IpfParams(epsilon0=1e-6))
    perp = angular_velocity((0, 0), (0, 1), ctx)
    radial = angular_velocity((0, 0), (0.6, 0), ctx)
    ok = abs(perp - (-1 / (1 + 1e-6))) <= 1e-9 and radial == 0.0
    acceptance_report("bearing-rate oracle", ok, f"perpendicular {perp!r}, radial {radial!r}")
    assert ok


def test_pso_sanity(acceptance_report):
    target = np.array([1.3, -2.1])
    box = SearchBounds((-5.0, -5.0), (5.0, 5.0))
    fn = lambda qs: np.sum((qs - target) ** 2, axis=1)  # noqa: E731
    hits, monotone, worst = 0, True, 0.0
    for seed in range(100):
        res = optimize(box, PsoParams(num_particles=30, max_iterations=200, seed=seed), fn)
        err = float(np.linalg.norm(res.best_position - target))
        worst = max(worst, err)
        hits += err <= 1e-2 and res.iterations_used <= 200
        h = res.fitness_history
        monotone &= all(b <= a for a, b in zip(h, h[1:]))
    ok = hits == 100 and monotone
    acceptance_report("PSO sanity", ok, f"{hits}/100 within 1e-2 (worst {worst:.1e}), history monotone={monotone}")
    assert ok


def test_static_success(acceptance_report):
    t0 = time.perf_counter()
    counts = {}
    for name in ("bench-static-3", "bench-static-5"):
        runs = bench(name, Algorithm.SPSO_IPF)
        counts[name] = sum(t.termination is Termination.REACHED_GOAL and m.min_clearance >= 0 for t, m in runs)
    elapsed = time.perf_counter() - t0
    ok = all(c >= 95 for c in counts.values()) and elapsed < 60
    acceptance_report("static success", ok, f"{counts} (>=95 each), {elapsed:.1f}s (<60s)")
    assert ok


def test_dynamic_safety(acceptance_report):
    runs = bench("bench-dynamic-1", Algorithm.SPSO_IPF)
    ok_runs = sum(t.termination is Termination.REACHED_GOAL and m.min_clearance >= 0 for t, m in runs)
    collisions = sum(t.termination is Termination.COLLISION for t, _ in runs)
    ok = ok_runs >= 90
    acceptance_report("dynamic safety", ok, f"{ok_runs}/100 reached goal safely (>=90), {collisions} collisions")
    assert ok


def test_obstacle_free_efficiency(acceptance_report):
    sc = load_scenario("bench-empty")
    straight = math.dist(sc.start, sc.goal)
    runs = bench("bench-empty", Algorithm.SPSO_IPF)
    good = sum(t.termination is Termination.REACHED_GOAL and m.length <= 1.15 * straight for t, m in runs)
    mean_ratio = np.mean([m.length / straight for _, m in runs])
    ok = good >= 95
    acceptance_report("obstacle-free efficiency", ok, f"{good}/100 within 15% of {straight:.3f} m (mean ratio {mean_ratio:.4f})")
    assert ok


def test_direction_against_nonsmooth(acceptance_report):
    out = ARTIFACTS / "static5_spso_vs_nonsmooth"
    code = cli_main(["compare", "--scenario", "bench-static-5", "--algos", "SPSO_IPF,PSO_IFF_NONSMOOTH",
                     "--seeds", "0..29", "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())["algorithms"]
    s, b = summary["SPSO_IPF"], summary["PSO_IPF_NONSMOOTH"]
    smooth_ok = s["smoothness"]["mean"] < b["smoothness"]["mean"]
    length_ok = s["length"]["mean"] <= 1.05 * b["length"]["mean"]
    ok = code == 0 and smooth_ok and length_ok and (out / "comparison.csv").exists()
    acceptance_report(
        "smoothness/length direction", ok,
        f"smoothness {s['smoothness']['mean']:.3f} vs {b['smoothness']['mean']:.3f}, "
        f"length {s['length']['mean']:.3f} vs {b['length']['mean']:.3f} (<=105%), table at {out.relative_to(ARTIFACTS.parents[1])}",
    )
    assert ok


def test_kinematic_constraints(acceptance_report):
    violations, epochs, n_runs = 0, 0, 0
    for name in BUILTIN_SCENARIOS:
        sc = load_scenario(name)
        for alg in Algorithm:
            for trace, _ in bench(name, alg):
                pos = trace.positions
                speed = np.hypot(*np.diff(pos, axis=0).T) / sc.dt
                headings = np.array([r.robot.heading for r in trace.records])
                rate = np.abs((np.diff(headings) + np.pi) % (2 * np.pi) - np.pi) / sc.dt
                violations += int(np.sum(speed > 0.8 + 1e-9) + np.sum(rate > math.pi / 6 + 1e-9))
                epochs += len(speed)
                n_runs += 1
    ok = violations == 0
    acceptance_report("kinematic constraints", ok, f"{violations} violating epochs over {n_runs} runs / {epochs} epochs")
    assert ok


def test_determinism(acceptance_report, tmp_path):
    same = True
    for name, alg in (("bench-dynamic-1", "SPSO_IPF"), ("bench-static-8", "PSO_IPF_NONSMOOTH")):
        dirs = [tmp_path / f"{name}-{alg}-{k}" for k in range(2)]
        for d in dirs:
            cli_main(["run", "--scenario", name, "--algo", alg, "--seed", "17", "--out", str(d)])
        for f in ("trace.csv", "metrics.json"):
            same &= (dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes()
    sc = load_scenario("bench-static-3")
    workers = max(4, os.cpu_count() or 1)
    serial = compare(sc, list(Algorithm), range(6), workers=1)
    parallel = compare(sc, list(Algorithm), range(6), workers=workers)
    same_table = serial.rows == parallel.rows and serial.summary == parallel.summary
    ok = same and same_table
    acceptance_report("determinism", ok, f"byte-identical reruns={same}, serial == {workers}-process compare: {same_table}")
    assert ok
