import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from spso_ipf.core import RobotState
from spso_ipf.fileio import load_scenario
from spso_ipf.metrics import compare, compute_metrics, heading_changes, path_length
from spso_ipf.sim import Algorithm, EpochRecord, PlanTrace, Termination, run


def fake_trace(points, termination=Termination.REACHED_GOAL):
    recs = [EpochRecord(i, RobotState(p), np.asarray(p, float), 0.0, np.zeros((0, 2))) for i, p in enumerate(points)]
    return PlanTrace(recs, termination)


def test_straight_and_right_angle_paths():
    sc = load_scenario("bench-empty")
    m = compute_metrics(fake_trace([(0, 0), (1, 0), (2, 0)]), sc)
    assert m.length == 2 and m.smoothness == 0
    m = compute_metrics(fake_trace([(0, 0), (1, 0), (1, 1)]), sc)
    assert m.length == 2 and m.smoothness == pytest.approx(math.pi / 2)
    assert m.max_turn_rate == pytest.approx(math.pi / 2 / sc.dt)
    assert m.min_clearance == math.inf


pts = st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=30)


@given(pts)
def test_metrics_match_oracle(points):
    turns = heading_changes(np.array(points))
    assert np.all(turns >= 0)
    assert turns.sum() == pytest.approx(sum(oracles.turn_angles(points)), abs=1e-9)
    assert path_length(points) == pytest.approx(sum(math.dist(a, b) for a, b in zip(points, points[1:])), rel=1e-12)


def test_successful_trace_respects_triangle_inequality_and_is_pure():
    sc = load_scenario("bench-static-3").with_seed(4)
    trace = run(sc)
    a, b = compute_metrics(trace, sc), compute_metrics(trace, sc)
    assert a == b
    assert a.success and a.length >= math.dist(sc.start, sc.goal)


def test_compare_singleton_and_duplicates():
    sc = load_scenario("bench-static-3")
    table = compare(sc, [Algorithm.SPSO_IPF], [7], workers=1)
    assert len(table.rows) == 1
    m = compute_metrics(run(sc.with_seed(7)), sc)
    assert table.rows[0]["length"] == m.length and table.rows[0]["smoothness"] == m.smoothness
    assert table.summary["SPSO_IPF"]["length"]["mean"] == m.length

    table = compare(sc, [Algorithm.SPSO_IPF, Algorithm.SPSO_IPF], [1, 2], workers=1)
    assert table.rows[:2] == table.rows[2:]


def test_compare_parallel_matches_serial():
    sc = load_scenario("bench-dynamic-1")
    algs = list(Algorithm)
    serial = compare(sc, algs, [0, 1, 2], workers=1)
    parallel = compare(sc, algs, [0, 1, 2], workers=3)
    assert serial.rows == parallel.rows
    assert serial.summary == parallel.summary


def test_compare_records_cell_errors(monkeypatch):
    import spso_ipf.metrics as metrics

    def boom(scenario, algorithm):
        if algorithm is Algorithm.PSO_PLAIN:
            raise RuntimeError("boom")
        return run(scenario, algorithm)

    monkeypatch.setattr(metrics, "run", boom)
    table = compare(load_scenario("bench-empty"), [Algorithm.PSO_PLAIN, Algorithm.SPSO_IPF], [0], workers=1)
    assert table.rows[0]["termination"] == "Error: boom"
    assert table.rows[1]["success"] is True
    assert table.summary["PSO_PLAIN"]["success_rate"] == 0.0


def test_compare_needs_seeds():
    with pytest.raises(ValueError):
        compare(load_scenario("bench-empty"), [Algorithm.SPSO_IPF], [])
