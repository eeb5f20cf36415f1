"""Path metrics and multi-seed comparisons between planners."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .core import wrap_angle
from .scenario import Scenario
from .sim import Algorithm, PlanTrace, Termination, run

THREADS_ENV = "SPSO_IPF_THREADS"
METRIC_FIELDS = ("length", "smoothness", "max_turn_rate", "min_clearance", "epochs")


@dataclass(frozen=True)
class PathMetrics:
    length: float
    smoothness: float
    max_turn_rate: float
    min_clearance: float
    epochs: int
    success: bool


def segment_headings(positions: np.ndarray) -> np.ndarray:
    """Directions of the non-zero segments of a polyline."""
    d = np.diff(np.asarray(positions, dtype=float), axis=0)
    d = d[np.hypot(d[:, 0], d[:, 1]) > 0]
    return np.arctan2(d[:, 1], d[:, 0])


def heading_changes(positions: np.ndarray) -> np.ndarray:
    """Wrapped heading change between consecutive moving segments.

    Epochs where the robot holds still keep the previous heading, so each
    change happens within a single epoch.
    """
    h = segment_headings(positions)
    return np.abs(wrap_angle(np.diff(h))) if len(h) > 1 else np.zeros(0)


def path_length(positions: np.ndarray) -> float:
    d = np.diff(np.asarray(positions, dtype=float), axis=0)
    return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


def compute_metrics(trace: PlanTrace, scenario: Scenario) -> PathMetrics:
    if not trace.records:
        raise ValueError("empty trace")
    pos = trace.positions
    turns = heading_changes(pos)
    clearance = math.inf
    radii = np.array([o.radius for o in scenario.obstacles], dtype=float)
    if len(radii):
        for rec in trace.records:
            gap = np.hypot(*(rec.obstacle_positions - rec.robot.position).T) - radii - scenario.robot_radius
            clearance = min(clearance, float(gap.min()))
    return PathMetrics(
        length=path_length(pos),
        smoothness=float(turns.sum()),
        max_turn_rate=float(turns.max() / scenario.dt) if len(turns) else 0.0,
        min_clearance=clearance,
        epochs=trace.epochs,
        success=trace.termination is Termination.REACHED_GOAL,
    )


@dataclass
class ComparisonTable:
    """Per-cell rows plus per-algorithm aggregates.

    ``rows`` holds one dict per (algorithm, seed) in sweep order. ``summary``
    maps algorithm name to ``{"runs", "success_rate", "<metric>": {"mean",
    "min", "max"}}``.
    """

    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)


def _cell(args):
    scenario, algorithm, seed = args
    try:
        trace = run(scenario.with_seed(seed), algorithm)
    except Exception as exc:  # a failing cell must not abort the sweep
        return {"algorithm": algorithm.value, "seed": seed, "termination": f"Error: {exc}"}, None
    row = {"algorithm": algorithm.value, "seed": seed, "termination": trace.termination.value}
    row.update(asdict(compute_metrics(trace, scenario)))
    return row, trace


def _aggregate(rows: list[dict]) -> dict:
    out = {"runs": len(rows), "success_rate": sum(bool(r.get("success")) for r in rows) / max(len(rows), 1)}
    for name in METRIC_FIELDS:
        vals = np.array([r[name] for r in rows if name in r], dtype=float)
        if len(vals) == 0:
            out[name] = {"mean": math.nan, "min": math.nan, "max": math.nan}
        else:
            out[name] = {"mean": float(np.mean(vals)), "min": float(vals.min()), "max": float(vals.max())}
    return out


def default_workers() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    return max(1, min(n, int(cap))) if cap else n


def compare(
    scenario: Scenario,
    algorithms: Sequence[Algorithm],
    seeds: Sequence[int],
    workers: int | None = None,
    keep_traces: bool = False,
) -> ComparisonTable:
    """Run every (algorithm, seed) cell; the table does not depend on scheduling."""
    if not seeds:
        raise ValueError("need at least one seed")
    cells = [(scenario, Algorithm(a) if not isinstance(a, Algorithm) else a, int(s)) for a in algorithms for s in seeds]
    workers = default_workers() if workers is None else max(1, workers)
    if workers == 1 or len(cells) == 1:
        results = list(map(_cell, cells))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell, cells, chunksize=max(1, len(cells) // (4 * workers))))

    table = ComparisonTable(rows=[row for row, _ in results])
    for (_, alg, seed), (_, trace) in zip(cells, results):
        if keep_traces and trace is not None:
            table.traces[(alg.value, seed)] = trace
    for alg in dict.fromkeys(c[1] for c in cells):
        table.summary[alg.value] = _aggregate([r for r in table.rows if r["algorithm"] == alg.value])
    return table
