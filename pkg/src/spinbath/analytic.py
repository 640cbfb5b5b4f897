"""Closed-form and semi-analytic evaluation of the equal-coupling signal.

For N equal couplings J (central coupling J0) the polarization of the first
central spin factorizes into a slow envelope times a coherent oscillation:

    <sigma_1^z(t)> = A(t) cos(2 (J0 - J) t),
    A(t) = 1/3 + (2/3) (1 - N J^2 t^2) exp(-N J^2 t^2 / 2),

exact in the many-bath-spin limit.  The combination N J^2 t^2 is invariant
under the rescaling (J0, J, t) -> (1, J/J0, t J0), so all functions accept
raw time and raw couplings.

The semi-analytic evaluator keeps N finite: it averages the per-sector
signal over exact total-spin weights and exact Clebsch-Gordan channel
amplitudes, giving an ensemble curve that is exact at any N (up to CG
numerics) and an independent oracle for the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spin_algebra import (
    CgTriple,
    HalfIntSpin,
    allowed_bath_spins,
    cg_exact_multiplet,
    weight_exact,
)

__all__ = [
    "AnalyticParams",
    "envelope",
    "sigma1z_closed_form",
    "sigma1z_sector",
    "sigma1z_semianalytic",
]


@dataclass(frozen=True)
class AnalyticParams:
    """Equal-coupling parameters: bath size N, coupling j, central coupling j0."""

    n_bath: int
    j: float
    j0: float = 1.0

    def __post_init__(self) -> None:
        if self.n_bath < 0:
            raise ValueError(f"n_bath must be >= 0, got {self.n_bath}")
        if self.j0 == 0:
            raise ValueError("j0 must be nonzero")


def envelope(params: AnalyticParams, t):
    """Decoherence envelope A(t); accepts scalar or array time (raw units)."""
    t = np.asarray(t, dtype=np.float64)
    x = params.n_bath * (params.j * t) ** 2
    result = 1.0 / 3.0 + (2.0 / 3.0) * (1.0 - x) * np.exp(-x / 2.0)
    return result if result.ndim else float(result)


def sigma1z_closed_form(params: AnalyticParams, t):
    """Envelope times the coherent oscillation cos(2 (j0 - j) t)."""
    t = np.asarray(t, dtype=np.float64)
    result = envelope(params, t) * np.cos(2.0 * (params.j0 - params.j) * t)
    return result if np.ndim(result) else float(result)


def sigma1z_sector(
    s: HalfIntSpin,
    sz: HalfIntSpin,
    j: float,
    t,
    cg: CgTriple,
    exact_phases: bool = True,
):
    """Single-(S, Sz) sector signal in rescaled units (j0 = 1).

    With the exact channel phases the three total-spin channels beat as

        p cos(A) + q cos(A + 2 j (S+1) t) + r cos(A - 2 j S t),

    A = 2 (1-j) t, with (r, p, q) the squared (L = S-1, S, S+1) amplitudes.
    With exact_phases=False both side channels use the large-S phase 2 j S t,
    which collapses to the familiar factorized form
    cos(A) * [(1 - (Sz/S)^2) cos(2 j S t) + (Sz/S)^2] when combined with the
    large-S amplitudes.  Only squared amplitudes enter, so the value is even
    in Sz.

    S = 0 is the bath-singlet case: only the L = S+1 channel exists and the
    signal is the undamped bare oscillation cos(2t); cg is ignored there.
    """
    if sz.twice_value > s.twice_value:
        raise ValueError(f"|Sz|={sz} exceeds S={s}")
    t = np.asarray(t, dtype=np.float64)
    if s.twice_value == 0:
        result = np.cos(2.0 * t)
        return result if result.ndim else float(result)
    r = cg.amp_lower**2
    p = cg.amp_same**2
    q = cg.amp_upper**2
    a = 2.0 * (1.0 - j) * t
    ts = s.twice_value
    phase_up = j * (ts + 2.0) * t if exact_phases else j * ts * t
    phase_dn = j * ts * t
    result = p * np.cos(a) + q * np.cos(a + phase_up) + r * np.cos(a - phase_dn)
    return result if result.ndim else float(result)


@lru_cache(maxsize=None)
def _mean_channel_squares(twice_s: int) -> tuple[float, float, float]:
    """Multiplet-averaged squared channel amplitudes (r, p, q) for one S."""
    table = cg_exact_multiplet(HalfIntSpin(twice_s))
    sq = np.mean(table**2, axis=0)
    return float(sq[0]), float(sq[1]), float(sq[2])


def sigma1z_semianalytic(params: AnalyticParams, t):
    """Finite-N ensemble signal: exact weights, exact CG channels, exact phases.

    Sums the sector signal over all total bath spins S (weighted by the exact
    P(S)) and uniformly over Sz inside each multiplet.  The channel phases do
    not depend on Sz, so each multiplet contributes through its mean squared
    amplitudes.  Converges to sigma1z_closed_form as N grows; at t=0 the
    weights close to 1 exactly.
    """
    t = np.asarray(t, dtype=np.float64)
    jr = params.j / params.j0
    tau = t * params.j0
    a = 2.0 * (1.0 - jr) * tau
    total = np.zeros_like(tau)
    if params.n_bath == 0:
        total = np.cos(2.0 * tau)
        return total if total.ndim else float(total)
    for s in allowed_bath_spins(params.n_bath):
        w = weight_exact(params.n_bath, s)
        ts = s.twice_value
        if ts == 0:
            # bath singlet: only the L = S+1 channel exists, undamped
            total += w * np.cos(a + 2.0 * jr * tau)
            continue
        r, p, q = _mean_channel_squares(ts)
        total += w * (
            p * np.cos(a)
            + q * np.cos(a + jr * (ts + 2.0) * tau)
            + r * np.cos(a - jr * ts * tau)
        )
    return total if total.ndim else float(total)
