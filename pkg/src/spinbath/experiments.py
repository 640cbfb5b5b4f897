"""Experiment runners: decay curves, coupling jitter, parity sweep, weight tables.

Every run is driven by an ExperimentConfig and is deterministic for a fixed
seed: the seed sequence is split into one child stream for coupling draws
and one per realization for bath states, so a jitter of zero reduces
bit-for-bit to the equal-coupling run.  Realizations are averaged in index
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import uniform_filter1d

from .analytic import AnalyticParams, sigma1z_closed_form
from .hilbert import (
    HamiltonianSpec,
    basis_bloch_angles,
    build_initial_state,
    default_central_pattern,
    haar_bloch_angles,
    spin_squared_operator,
)
from .propagator import PropagatorConfig, TimeGrid, TimeSeries, iterate_trajectory
from .spin_algebra import allowed_bath_spins, weight_exact, weight_gaussian

#: largest bath size served by the weight-table experiment
WEIGHTS_MAX_N = 60

__all__ = [
    "ExperimentConfig",
    "EnvelopeResult",
    "EqualCouplingRun",
    "RandomCouplingRun",
    "ParityEntry",
    "default_grid",
    "run_equal_coupling",
    "run_random_coupling",
    "run_parity_sweep",
    "extract_envelope",
    "oscillating_component",
    "emit_weights",
]

EXPERIMENT_KINDS = (
    "equal_coupling",
    "random_coupling",
    "parity_sweep",
    "weights",
    "analytic_curve",
)

#: grid defaults for the decay-curve reproduction
SAMPLES_PER_PERIOD = 40
T_MAX_ENVELOPE_FACTOR = 3.0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    spec: HamiltonianSpec
    seed: int = 0
    realizations: int = 20
    grid: TimeGrid | None = None
    bath_state_measure: str = "haar"
    jitter: float = 0.0
    out_path: str | None = None
    central_pattern: tuple[str, ...] | None = None
    propagator: PropagatorConfig = field(default_factory=PropagatorConfig)

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations}")
        if self.bath_state_measure not in ("haar", "basis"):
            raise ValueError(f"unknown measure {self.bath_state_measure!r}")
        if self.jitter < 0:
            raise ValueError(f"jitter must be >= 0, got {self.jitter}")


@dataclass
class EnvelopeResult:
    """Oscillation peaks and plateau statistics over the final third of the grid."""

    peak_times: np.ndarray
    peak_values: np.ndarray
    tail_mean: float
    tail_stddev: float


@dataclass
class EqualCouplingRun:
    numeric: TimeSeries
    analytic: TimeSeries
    envelope: EnvelopeResult | None


@dataclass
class RandomCouplingRun:
    series: TimeSeries
    envelope: EnvelopeResult | None
    couplings: tuple[float, ...]
    bath_spin_sq: TimeSeries


@dataclass
class ParityEntry:
    series: TimeSeries
    envelope: EnvelopeResult | None


def oscillation_period(spec: HamiltonianSpec) -> float | None:
    """Period of the coherent two-central-spin oscillation, None when frozen."""
    j = spec.bath_couplings[0] if spec.n_bath else 0.0
    freq = 2.0 * abs(spec.j0 - j)
    return 2.0 * math.pi / freq if freq > 1e-12 else None


def default_grid(spec: HamiltonianSpec) -> TimeGrid:
    """Grid covering decay, transient and plateau, resolving the fast oscillation.

    t_max is three times the envelope-minimum time sqrt(3/N)/J, sampled at
    SAMPLES_PER_PERIOD points per oscillation period.
    """
    j = abs(spec.bath_couplings[0]) if spec.n_bath else 0.0
    period = oscillation_period(spec)
    if spec.n_bath == 0 or j == 0.0:
        base = period if period is not None else 2.0 * math.pi / max(abs(spec.j0), 1.0)
        t_max = 5.0 * base
    else:
        t_max = T_MAX_ENVELOPE_FACTOR * math.sqrt(3.0 / spec.n_bath) / j
    if period is not None:
        n_samples = math.ceil(SAMPLES_PER_PERIOD * t_max / period) + 1
    else:
        n_samples = 40 * int(T_MAX_ENVELOPE_FACTOR) + 1
    return TimeGrid(t_max, max(n_samples, 2))


def _bath_sampler(measure: str) -> Callable:
    return haar_bloch_angles if measure == "haar" else basis_bloch_angles


def _initial_states(
    spec: HamiltonianSpec,
    config: ExperimentConfig,
    state_seeds: Sequence[np.random.SeedSequence],
) -> np.ndarray:
    sampler = _bath_sampler(config.bath_state_measure)
    pattern = config.central_pattern or default_central_pattern(spec.n_central)
    columns = []
    for seed in state_seeds:
        rng = np.random.default_rng(seed)
        bath = sampler(rng, spec.n_bath)
        columns.append(build_initial_state(spec, bath, pattern).amplitudes)
    return np.column_stack(columns)


def _sigma_z_signs_for(spec: HamiltonianSpec, site: int) -> np.ndarray:
    idx = np.arange(spec.dim)
    return (((idx >> site) & 1) * 2 - 1).astype(np.float64)


def _bath_spin_sq_operator(spec: HamiltonianSpec):
    bath_sites = range(spec.n_central, spec.n_spins)
    return spin_squared_operator(spec.n_spins, list(bath_sites))


def _averaged_run(
    spec: HamiltonianSpec,
    config: ExperimentConfig,
    grid: TimeGrid,
    state_seeds: Sequence[np.random.SeedSequence],
    track_bath_s2: bool = False,
) -> tuple[TimeSeries, TimeSeries | None]:
    """Realization-averaged <sigma_1^z> series, optionally with bath <S^2>."""
    states = _initial_states(spec, config, state_seeds)
    signs = _sigma_z_signs_for(spec, 0)
    n_steps = grid.n_samples
    stride = max(1, (n_steps - 1) // 32) if track_bath_s2 else None
    s2_op = _bath_spin_sq_operator(spec) if track_bath_s2 else None
    sigma = np.empty(n_steps)
    s2_times, s2_values = [], []
    for i, amps in enumerate(iterate_trajectory(spec, states, grid, config.propagator)):
        sigma[i] = float(np.mean((np.abs(amps) ** 2).T @ signs))
        if stride is not None and (i % stride == 0 or i == n_steps - 1):
            s2_times.append(grid.times()[i])
            s2_values.append(float(np.mean(s2_op.expectation(amps))))
    metadata = {
        "spec_digest": spec.digest(),
        "seed": config.seed,
        "realizations": config.realizations,
        "measure": config.bath_state_measure,
    }
    series = TimeSeries(grid.times(), sigma, metadata=metadata)
    s2_series = (
        TimeSeries(np.array(s2_times), np.array(s2_values), metadata=dict(metadata))
        if track_bath_s2
        else None
    )
    return series, s2_series


def run_equal_coupling(config: ExperimentConfig) -> EqualCouplingRun:
    """Averaged numeric decay curve, its closed-form companion, and the envelope."""
    spec = config.spec
    if spec.n_central != 2:
        raise ValueError(
            "run_equal_coupling models the two-central-spin experiment; "
            "use run_parity_sweep for other central sizes"
        )
    if not spec.equal_coupling:
        raise ValueError("run_equal_coupling requires all bath couplings equal")
    grid = config.grid or default_grid(spec)
    seeds = np.random.SeedSequence(config.seed).spawn(config.realizations + 1)
    numeric, _ = _averaged_run(spec, config, grid, seeds[1:])
    j = spec.bath_couplings[0] if spec.n_bath else 0.0
    params = AnalyticParams(spec.n_bath, j, spec.j0)
    analytic = TimeSeries(
        grid.times(),
        sigma1z_closed_form(params, grid.times()),
        metadata={"spec_digest": spec.digest(), "kind": "closed_form"},
    )
    period = oscillation_period(spec)
    env = extract_envelope(numeric, period) if period is not None else None
    return EqualCouplingRun(numeric, analytic, env)


def run_random_coupling(config: ExperimentConfig) -> RandomCouplingRun:
    """Jittered-coupling run: couplings uniform in [J(1-d), J(1+d)], d = jitter.

    The base spec must be equal-coupling; at jitter 0 the run reduces exactly
    to run_equal_coupling with the same seed.  The returned bath <S^2> series
    (coarse subgrid) diagnoses whether the bath has dynamics of its own.
    """
    spec = config.spec
    if spec.n_central != 2:
        raise ValueError("run_random_coupling models the two-central-spin experiment")
    if not spec.equal_coupling:
        raise ValueError("run_random_coupling draws around an equal-coupling base spec")
    if spec.n_bath == 0:
        raise ValueError("random couplings need at least one bath spin")
    grid = config.grid or default_grid(spec)
    seeds = np.random.SeedSequence(config.seed).spawn(config.realizations + 1)
    j = spec.bath_couplings[0]
    rng = np.random.default_rng(seeds[0])
    draws = rng.uniform(j * (1.0 - config.jitter), j * (1.0 + config.jitter), spec.n_bath)
    drawn_spec = replace(spec, bath_couplings=tuple(draws))
    series, s2 = _averaged_run(drawn_spec, config, grid, seeds[1:], track_bath_s2=True)
    period = oscillation_period(spec)
    env = extract_envelope(series, period) if period is not None else None
    return RandomCouplingRun(series, env, drawn_spec.bath_couplings, s2)


def run_parity_sweep(
    config: ExperimentConfig, n_values: tuple[int, ...] = (1, 2, 3)
) -> dict[int, ParityEntry]:
    """Equal-coupling runs for 1-, 2- and 3-spin central systems on one grid.

    The two-spin system oscillates at 2(J0-J) and its oscillation amplitude
    plateaus; the three-spin system (half-integer total spin) has no
    protected channel, so its oscillation amplitude decays away; the single
    spin has no splitting and just reports the polarization trace (no
    envelope).  Odd-parity signals keep a static polarization offset, so
    every envelope here is extracted from the oscillating component of the
    series (baseline removed); the returned series stay raw.  Bath
    realizations are shared across entries for a matched comparison.
    """
    if any(n not in (1, 2, 3) for n in n_values):
        raise ValueError(f"parity sweep supports n_central in {{1, 2, 3}}, got {n_values}")
    base = config.spec
    if not base.equal_coupling:
        raise ValueError("run_parity_sweep requires equal couplings")
    grid = config.grid or default_grid(replace(base, n_central=2))
    seeds = np.random.SeedSequence(config.seed).spawn(config.realizations + 1)
    results: dict[int, ParityEntry] = {}
    for n_central in n_values:
        spec = replace(base, n_central=n_central)
        cfg = replace(config, central_pattern=default_central_pattern(n_central))
        series, _ = _averaged_run(spec, cfg, grid, seeds[1:])
        if n_central == 1:
            env = None
        else:
            if n_central == 2:
                period = oscillation_period(spec)
            else:
                # dominant splitting of the three-spin cluster: 3 J0
                period = 2.0 * math.pi / (3.0 * abs(spec.j0)) if spec.j0 else None
            env = (
                extract_envelope(oscillating_component(series, period), period)
                if period is not None
                else None
            )
        results[n_central] = ParityEntry(series, env)
    return results


def oscillating_component(series: TimeSeries, period: float) -> TimeSeries:
    """Series minus its centered moving average over one oscillation period.

    Removes any slowly varying baseline so the envelope of the coherent
    oscillation can be read off signals that carry a static polarization
    offset (odd central-spin parity).  For a zero-mean oscillation the
    subtraction is a near-identity.
    """
    dt = series.times[1] - series.times[0]
    window = max(3, int(round(period / dt)) | 1)
    baseline = uniform_filter1d(series.values, size=window, mode="nearest")
    return TimeSeries(series.times, series.values - baseline, metadata=dict(series.metadata))


def extract_envelope(series: TimeSeries, oscillation_period: float) -> EnvelopeResult:
    """Peaks of |signal| separated by at least 0.4 periods, plus tail statistics.

    The grid must resolve the period with at least 8 samples.  Tail statistics
    cover peaks in the final third of the time grid.
    """
    times, values = series.times, series.values
    if len(times) < 3:
        raise ValueError("series too short for envelope extraction")
    dt = times[1] - times[0]
    if oscillation_period / dt < 8.0:
        raise ValueError(
            f"grid spacing {dt:g} does not resolve the period {oscillation_period:g}"
        )
    absv = np.abs(values)
    interior = (absv[1:-1] >= absv[:-2]) & (absv[1:-1] > absv[2:])
    candidates = np.nonzero(interior)[0] + 1
    if candidates.size == 0:
        raise ValueError("no oscillation peaks found")
    min_gap = 0.4 * oscillation_period
    order = candidates[np.argsort(absv[candidates])[::-1]]
    accepted: list[int] = []
    for idx in order:
        if all(abs(times[idx] - times[j]) >= min_gap for j in accepted):
            accepted.append(idx)
    accepted.sort()
    if len(accepted) < 3:
        raise ValueError(f"found only {len(accepted)} peaks, need at least 3")
    peak_times = times[accepted]
    peak_values = absv[accepted]
    tail_start = times[0] + 2.0 * (times[-1] - times[0]) / 3.0
    tail = peak_values[peak_times >= tail_start]
    if tail.size == 0:
        raise ValueError("no peaks in the final third of the grid")
    return EnvelopeResult(
        peak_times, peak_values, float(np.mean(tail)), float(np.std(tail))
    )


def emit_weights(n_bath: int) -> str:
    """CSV with exact and Gaussian weight columns side by side, S descending."""
    if not 1 <= n_bath <= WEIGHTS_MAX_N:
        raise ValueError(f"n_bath must be in [1, {WEIGHTS_MAX_N}], got {n_bath}")
    lines = ["twice_S,weight_exact,weight_gaussian"]
    for s in allowed_bath_spins(n_bath):
        exact = weight_exact(n_bath, s)
        gauss = weight_gaussian(n_bath, s.value)
        lines.append(f"{s.twice_value},{exact:.17g},{gauss:.17g}")
    return "\n".join(lines) + "\n"
