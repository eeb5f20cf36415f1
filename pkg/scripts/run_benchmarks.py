"""Sweep the bundled benchmark scenarios and print per-algorithm summaries.

    python scripts/run_benchmarks.py --seeds 0..99
    python scripts/run_benchmarks.py --scenarios bench-static-5 --algos SPSO_IPF --set ipf.eta=1 --out results/
"""

from __future__ import annotations

import argparse
import time
from collections import Counter
from pathlib import Path

from spso_ipf import fileio
from spso_ipf.cli import parse_seed_range
from spso_ipf.metrics import compare
from spso_ipf.sim import Algorithm


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scenarios", default=",".join(fileio.BUILTIN_SCENARIOS))
    ap.add_argument("--algos", default=",".join(a.value for a in Algorithm))
    ap.add_argument("--seeds", default="0..99")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", type=Path, default=None, help="also write comparison.csv/summary.json per scenario")
    args = ap.parse_args()

    overrides = dict(fileio.parse_override(s) for s in args.set)
    algorithms = [Algorithm.parse(a) for a in args.algos.split(",")]
    seeds = parse_seed_range(args.seeds)
    for name in args.scenarios.split(","):
        sc = fileio.load_scenario(name, overrides)
        t0 = time.perf_counter()
        table = compare(sc, algorithms, seeds, workers=args.workers)
        print(f"== {sc.name} ({len(seeds)} seeds, {time.perf_counter() - t0:.1f}s)")
        for alg, s in table.summary.items():
            terms = Counter(r["termination"] for r in table.rows if r["algorithm"] == alg)
            print(f"  {alg:<18} success {s['success_rate']:.2f}  length {s['length']['mean']:7.3f}  "
                  f"smoothness {s['smoothness']['mean']:7.3f}  min clearance {s['min_clearance']['min']:6.3f}  "
                  f"epochs {s['epochs']['mean']:6.1f}  {dict(terms)}")
        if args.out:
            fileio.write_outputs(args.out / sc.name, {
                "comparison.csv": fileio.comparison_csv(table.rows),
                "summary.json": fileio.dumps_json({"scenario": sc.name, "overrides": overrides,
                                                   "algorithms": table.summary}),
            })


if __name__ == "__main__":
    main()
