"""Command-line entry point: ``validate``, ``run`` and ``compare``.

Every output file is rendered in memory first and written only once the
computation has finished, so a failed command leaves no partial outputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import fileio
from .metrics import compare, compute_metrics
from .scenario import ValidationError
from .sim import Algorithm, Termination, run

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_COLLISION = 2
EXIT_INCOMPLETE = 3

EXIT_CODES = {
    Termination.REACHED_GOAL: EXIT_OK,
    Termination.COLLISION: EXIT_COLLISION,
    Termination.EPOCH_BUDGET_EXHAUSTED: EXIT_INCOMPLETE,
    Termination.STUCK: EXIT_INCOMPLETE,
}


class UsageError(ValueError):
    pass


def parse_seed_range(text: str) -> list[int]:
    """``"M..N"`` (inclusive), ``"N"`` or ``"a,b,c"``."""
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split("..", 1))
            seeds = list(range(lo, hi + 1))
        else:
            seeds = [int(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"bad seed range {text!r}; expected M..N") from None
    if not seeds or any(s < 0 or s >= 2**64 for s in seeds):
        raise UsageError(f"bad seed range {text!r}")
    return seeds


def _load(args):
    overrides = dict(fileio.parse_override(item) for item in getattr(args, "set", None) or [])
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    scenario = fileio.load_scenario(args.scenario, overrides)
    scenario.validate()
    return scenario, overrides


def cmd_validate(args) -> int:
    scenario, _ = _load(args)
    print(f"{scenario.name}: ok ({len(scenario.obstacles)} obstacles, "
          f"start {scenario.start.tolist()}, goal {scenario.goal.tolist()})")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario, overrides = _load(args)
    algorithm = Algorithm.parse(args.algo)
    trace = run(scenario, algorithm)
    metrics = compute_metrics(trace, scenario)
    files = {
        "trace.csv": fileio.trace_csv(trace, len(scenario.obstacles)),
        "metrics.json": fileio.dumps_json(fileio.metrics_document(trace, metrics, scenario, overrides)),
        "path.svg": fileio.path_svg(trace, scenario),
    }
    fileio.write_outputs(args.out, files)
    print(f"{scenario.name} {algorithm.value} seed={trace.seed}: {trace.termination.value} "
          f"epochs={metrics.epochs} length={metrics.length:.3f} smoothness={metrics.smoothness:.3f} "
          f"min_clearance={metrics.min_clearance:.3f}")
    return EXIT_CODES[trace.termination]


def cmd_compare(args) -> int:
    scenario, overrides = _load(args)
    algorithms = [Algorithm.parse(a) for a in args.algos.split(",") if a.strip()]
    if not algorithms:
        raise UsageError("need at least one algorithm")
    seeds = parse_seed_range(args.seeds)
    table = compare(scenario, algorithms, seeds, workers=args.workers, keep_traces=True)
    first = {alg.value: table.traces[(alg.value, seeds[0])]
             for alg in dict.fromkeys(algorithms) if (alg.value, seeds[0]) in table.traces}
    summary = {"scenario": scenario.name, "seeds": [seeds[0], seeds[-1]], "overrides": overrides,
               "algorithms": table.summary}
    files = {
        "comparison.csv": fileio.comparison_csv(table.rows),
        "summary.json": fileio.dumps_json(summary),
        "overlay.svg": fileio.overlay_svg(first, scenario),
    }
    fileio.write_outputs(args.out, files)
    parts = [f"{name} success={s['success_rate']:.2f} length={s['length']['mean']:.3f} "
             f"smoothness={s['smoothness']['mean']:.3f}" for name, s in table.summary.items()]
    print(f"{scenario.name} seeds={len(seeds)}: " + "; ".join(parts))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spso-ipf", description="Smoothed PSO potential-field path planner")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("--scenario", required=True, help="scenario JSON file or bundled benchmark name")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="parameter override, e.g. pso.num_particles=40")

    p = sub.add_parser("validate", help="parse and check a scenario without running it")
    scenario_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="plan one path and write trace.csv, metrics.json and path.svg")
    scenario_args(p)
    p.add_argument("--algo", default=Algorithm.SPSO_IPF.value)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="sweep algorithms x seeds and write comparison.csv, summary.json, overlay.svg")
    scenario_args(p)
    p.add_argument("--algos", required=True, help="comma-separated algorithm names")
    p.add_argument("--seeds", required=True, help="inclusive range M..N")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--workers", type=int, default=None, help="process count (default: SPSO_IPF_THREADS or all cores)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (fileio.ParseError, ValidationError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
