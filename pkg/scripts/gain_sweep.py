"""Attractive-gain sweep on an obstacle-free 5 m run.

Shows why the default attractive gain is 10: the turn-rate term of the
fitness pulls every step sideways, and with a weak attractive field the
robot orbits the goal instead of reaching it.

    python scripts/gain_sweep.py --gains 1,2,3,5,10,20 --seeds 10
"""

from __future__ import annotations

import argparse

import numpy as np

from spso_ipf import IpfParams, PsoParams, Scenario, Workspace, compute_metrics, run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--gains", default="1,2,3,5,10,20")
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    for eps in (float(g) for g in args.gains.split(",")):
        epochs, lengths, reached = [], [], 0
        for seed in range(args.seeds):
            sc = Scenario(Workspace(0, 0, 10, 10), (2, 5), (7, 5), ipf=IpfParams(epsilon=eps),
                          pso=PsoParams(seed=seed), max_epochs=300)
            trace = run(sc)
            m = compute_metrics(trace, sc)
            reached += m.success
            epochs.append(m.epochs)
            lengths.append(m.length)
        print(f"epsilon {eps:5.1f}: reached {reached}/{args.seeds}  epochs {np.mean(epochs):6.1f}  "
              f"length {np.mean(lengths):6.2f} (straight 5.00)")


if __name__ == "__main__":
    main()
