#!/usr/bin/env python3
"""Compare the oscillation envelope for 1-, 2- and 3-spin central systems.

The two-spin (integer total spin) system keeps a 1/3 plateau; the three-spin
(half-integer) system loses its oscillation amplitude entirely.  Writes one
series CSV per entry and prints the tail statistics and their ratio.
"""

import argparse
import json
import math
from pathlib import Path

from spinbath.experiments import ExperimentConfig, default_grid, run_parity_sweep
from spinbath.hilbert import HamiltonianSpec
from spinbath.propagator import TimeGrid


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-bath", type=int, default=13)
    parser.add_argument("--j0", type=float, default=8.0)
    parser.add_argument("--j", type=float, default=0.128)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--realizations", type=int, default=8)
    parser.add_argument("--out-dir", type=Path, default=Path("parity_out"))
    args = parser.parse_args()

    spec = HamiltonianSpec.equal(2, args.j0, args.j, args.n_bath)
    base = default_grid(spec)
    period = math.pi / abs(args.j0 - args.j)
    grid = TimeGrid(base.t_max, math.ceil(20 * base.t_max / period) + 1)
    config = ExperimentConfig(
        "parity_sweep", spec, seed=args.seed, realizations=args.realizations, grid=grid
    )
    results = run_parity_sweep(config)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for n_central, entry in sorted(results.items()):
        entry.series.write_csv(args.out_dir / f"central_{n_central}.csv")
        summary[n_central] = (
            None if entry.envelope is None else entry.envelope.tail_mean
        )
    ratio = summary[3] / summary[2] if summary.get(2) else None
    report = {"tail_means": summary, "odd_to_even_tail_ratio": ratio}
    (args.out_dir / "summary.json").write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
