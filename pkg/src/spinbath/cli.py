"""Command line runner.

Subcommands: simulate (equal or jittered couplings), analytic (closed-form
curve), parity (1/2/3 central spins), weights (total-spin table), envelope
(peak extraction from an existing CSV).  Values given in a --config JSON
file override the corresponding flags.  Every run writes a .meta.json
sidecar with the resolved configuration, seed and package version.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import AnalyticParams, sigma1z_closed_form
from .experiments import (
    EnvelopeResult,
    ExperimentConfig,
    default_grid,
    emit_weights,
    extract_envelope,
    run_equal_coupling,
    run_parity_sweep,
    run_random_coupling,
)
from .hilbert import HamiltonianSpec
from .propagator import PropagationError, TimeGrid, TimeSeries

_COMMON_FLAGS = (
    ("--n-bath", dict(type=int, default=13, help="number of bath spins N")),
    ("--n-central", dict(type=int, default=2, help="number of central spins")),
    ("--j0", dict(type=float, default=8.0, help="central coupling J0")),
    ("--j", dict(type=float, default=0.128, help="bath coupling J")),
    ("--jitter", dict(type=float, default=0.0, help="relative coupling spread delta")),
    ("--seed", dict(type=int, default=0, help="random seed")),
    ("--realizations", dict(type=int, default=20, help="bath realizations to average")),
    ("--t-max", dict(type=float, default=None, help="time span (default: auto)")),
    ("--samples", dict(type=int, default=None, help="number of grid samples")),
    ("--measure", dict(choices=("haar", "basis"), default="haar", help="bath state measure")),
    ("--out", dict(type=str, default=None, help="output CSV path")),
    ("--config", dict(type=str, default=None, help="JSON config overriding flags")),
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinbath", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("simulate", "propagate and average the central-spin polarization"),
        ("analytic", "sample the closed-form curve"),
        ("parity", "sweep 1/2/3 central spins at equal coupling"),
        ("weights", "total-spin weight table (exact and Gaussian)"),
        ("envelope", "extract the oscillation envelope from a series CSV"),
    ):
        p = sub.add_parser(name, help=doc)
        if name == "envelope":
            p.add_argument("csv", type=str, help="input CSV with t,sigma1z columns")
            p.add_argument("--period", type=float, required=True, help="oscillation period")
            p.add_argument("--out", type=str, default=None, help="output JSON path")
        else:
            for flag, kwargs in _COMMON_FLAGS:
                p.add_argument(flag, **kwargs)
    return parser


def _apply_config_file(args: argparse.Namespace) -> None:
    if getattr(args, "config", None) is None:
        return
    with open(args.config) as fh:
        overrides = json.load(fh)
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"unknown config key {key!r}")
        setattr(args, attr, value)


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    spec = HamiltonianSpec.equal(args.n_central, args.j0, args.j, args.n_bath)
    grid = None
    if args.t_max is not None or args.samples is not None:
        base = default_grid(spec)
        t_max = args.t_max if args.t_max is not None else base.t_max
        n_samples = args.samples if args.samples is not None else base.n_samples
        grid = TimeGrid(t_max, n_samples)
    experiment = "random_coupling" if args.jitter > 0 else "equal_coupling"
    if args.command == "parity":
        experiment = "parity_sweep"
    elif args.command == "analytic":
        experiment = "analytic_curve"
    elif args.command == "weights":
        experiment = "weights"
    return ExperimentConfig(
        experiment=experiment,
        spec=spec,
        seed=args.seed,
        realizations=args.realizations,
        grid=grid,
        bath_state_measure=args.measure,
        jitter=args.jitter,
        out_path=args.out,
    )


def _config_dict(config: ExperimentConfig, grid: TimeGrid) -> dict:
    return {
        "experiment": config.experiment,
        "spec": asdict(config.spec),
        "seed": config.seed,
        "realizations": config.realizations,
        "grid": {"t_max": grid.t_max, "n_samples": grid.n_samples},
        "bath_state_measure": config.bath_state_measure,
        "jitter": config.jitter,
        "version": __version__,
    }


def _envelope_dict(env: EnvelopeResult | None) -> dict | None:
    if env is None:
        return None
    return {
        "peak_times": list(env.peak_times),
        "peak_values": list(env.peak_values),
        "tail_mean": env.tail_mean,
        "tail_stddev": env.tail_stddev,
    }


def _write_sidecar(out: str, payload: dict) -> None:
    with open(f"{out}.meta.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _require_out(args: argparse.Namespace) -> str:
    if args.out is None:
        raise ValueError("--out is required for this command")
    return args.out


def _cmd_simulate(args: argparse.Namespace) -> None:
    config = _resolve(args)
    out = _require_out(args)
    grid = config.grid or default_grid(config.spec)
    if config.jitter > 0:
        run = run_random_coupling(config)
        series, env = run.series, run.envelope
        extra = {
            "drawn_couplings": list(run.couplings),
            "bath_spin_sq_first": float(run.bath_spin_sq.values[0]),
            "bath_spin_sq_drift": float(
                np.max(np.abs(run.bath_spin_sq.values - run.bath_spin_sq.values[0]))
            ),
        }
    else:
        run = run_equal_coupling(config)
        series, env = run.numeric, run.envelope
        analytic_path = f"{Path(out).with_suffix('')}_analytic.csv"
        run.analytic.write_csv(analytic_path)
        extra = {"analytic_csv": analytic_path}
    series.write_csv(out)
    payload = _config_dict(config, grid)
    payload["envelope"] = _envelope_dict(env)
    payload.update(extra)
    _write_sidecar(out, payload)


def _cmd_analytic(args: argparse.Namespace) -> None:
    config = _resolve(args)
    out = _require_out(args)
    grid = config.grid or default_grid(config.spec)
    spec = config.spec
    j = spec.bath_couplings[0] if spec.n_bath else 0.0
    params = AnalyticParams(spec.n_bath, j, spec.j0)
    series = TimeSeries(grid.times(), sigma1z_closed_form(params, grid.times()))
    series.write_csv(out)
    _write_sidecar(out, _config_dict(config, grid))


def _cmd_parity(args: argparse.Namespace) -> None:
    config = _resolve(args)
    out = _require_out(args)
    grid = config.grid or default_grid(config.spec)
    results = run_parity_sweep(config)
    stem = Path(out).with_suffix("")
    payload = _config_dict(config, grid)
    payload["entries"] = {}
    for n_central, entry in sorted(results.items()):
        path = f"{stem}_nc{n_central}.csv"
        entry.series.write_csv(path)
        payload["entries"][str(n_central)] = {
            "csv": path,
            "envelope": _envelope_dict(entry.envelope),
        }
    _write_sidecar(out, payload)


def _cmd_weights(args: argparse.Namespace) -> None:
    config = _resolve(args)
    out = _require_out(args)
    with open(out, "w") as fh:
        fh.write(emit_weights(config.spec.n_bath))
    payload = {
        "experiment": "weights",
        "n_bath": config.spec.n_bath,
        "version": __version__,
    }
    _write_sidecar(out, payload)


def _cmd_envelope(args: argparse.Namespace) -> None:
    series = TimeSeries.from_csv(args.csv)
    env = extract_envelope(series, args.period)
    text = json.dumps(_envelope_dict(env), indent=2, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "analytic": _cmd_analytic,
    "parity": _cmd_parity,
    "weights": _cmd_weights,
    "envelope": _cmd_envelope,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command != "envelope":
            _apply_config_file(args)
        _COMMANDS[args.command](args)
    except PropagationError as err:
        print(f"numerical failure: {err} (residual {err.residual:.3g})", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
