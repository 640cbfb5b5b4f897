#!/usr/bin/env python3
"""Two-step decoherence probe: equal couplings versus jittered couplings.

Runs the same seeds with jitter 0 and a finite jitter on a long grid.  With
equal couplings the bath total spin is conserved and the oscillation
amplitude plateaus; coupling spread switches on bath dynamics and drags the
late-time amplitude below the plateau.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

from spinbath.experiments import ExperimentConfig, run_random_coupling
from spinbath.hilbert import HamiltonianSpec
from spinbath.propagator import TimeGrid


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-bath", type=int, default=13)
    parser.add_argument("--j0", type=float, default=8.0)
    parser.add_argument("--j", type=float, default=0.128)
    parser.add_argument("--jitter", type=float, default=0.3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--realizations", type=int, default=6)
    parser.add_argument("--envelope-times", type=float, default=4.0,
                        help="grid length in units of the envelope-minimum time")
    parser.add_argument("--out-dir", type=Path, default=Path("jitter_out"))
    args = parser.parse_args()

    spec = HamiltonianSpec.equal(2, args.j0, args.j, args.n_bath)
    t_env = math.sqrt(3.0 / args.n_bath) / args.j
    period = math.pi / abs(args.j0 - args.j)
    t_max = args.envelope_times * t_env
    grid = TimeGrid(t_max, math.ceil(20 * t_max / period) + 1)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    report = {}
    for jitter in (0.0, args.jitter):
        config = ExperimentConfig(
            "random_coupling",
            spec,
            seed=args.seed,
            realizations=args.realizations,
            grid=grid,
            jitter=jitter,
        )
        run = run_random_coupling(config)
        tag = f"jitter_{jitter:g}"
        run.series.write_csv(args.out_dir / f"{tag}.csv")
        s2 = run.bath_spin_sq.values
        report[tag] = {
            "tail_mean": run.envelope.tail_mean,
            "bath_spin_sq_drift": float(np.max(np.abs(s2 - s2[0]))),
        }
    (args.out_dir / "summary.json").write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
