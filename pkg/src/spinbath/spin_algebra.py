"""Exact combinatorics of spin-1/2 addition and the spin-1 (x) spin-S coupling family.

Spin quantum numbers are stored as twice their value so that half-integers
stay exact and hashable.  The module provides multiplet counting for N added
spin-1/2 entities, the probability distribution of total spin in a uniformly
random product state (exact and Gaussian forms), and Clebsch-Gordan
amplitudes for coupling a spin-1 to a spin-S, both in the large-S limit and
exactly at finite S.

Sign convention for the exact Clebsch-Gordan amplitudes: within each
total-spin-L multiplet, the highest-weight state carries a positive
amplitude on the product component with maximal spin-S projection.  This
makes the L = S channel amplitude equal +Sz/sqrt(S(S+1)), matching the sign
structure of the large-S limit form.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MAX_EXACT_N",
    "HalfIntSpin",
    "WeightTable",
    "CgTriple",
    "binomial",
    "multiplet_degeneracy",
    "allowed_bath_spins",
    "weight_exact",
    "weight_gaussian",
    "cg_decompose_large_s",
    "cg_decompose_exact",
    "cg_exact_multiplet",
    "subspace_probability_third",
]

#: Largest N for which binomial coefficients are served (kept exact with headroom).
MAX_EXACT_N = 64


@dataclass(frozen=True, order=True)
class HalfIntSpin:
    """A non-negative integer or half-integer spin, stored as twice its value."""

    twice_value: int

    def __post_init__(self) -> None:
        if not isinstance(self.twice_value, (int, np.integer)) or isinstance(
            self.twice_value, bool
        ):
            raise TypeError(f"twice_value must be an integer, got {self.twice_value!r}")
        if self.twice_value < 0:
            raise ValueError(f"spin must be non-negative, got {self.twice_value}/2")

    @classmethod
    def from_value(cls, value: float) -> "HalfIntSpin":
        twice = round(2 * value)
        if abs(twice - 2 * value) > 1e-9:
            raise ValueError(f"{value} is not an integer or half-integer")
        return cls(twice)

    @property
    def value(self) -> float:
        return self.twice_value / 2

    @property
    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    @property
    def multiplicity(self) -> int:
        """Number of projection states, 2S+1."""
        return self.twice_value + 1

    def __str__(self) -> str:
        if self.is_integer:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient C(n, k) for 0 <= k <= n <= MAX_EXACT_N."""
    if not 0 <= n <= MAX_EXACT_N:
        raise ValueError(f"n must be in [0, {MAX_EXACT_N}], got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must be in [0, {n}], got {k}")
    return math.comb(n, k)


def multiplet_degeneracy(n_spins: int, k: int) -> int:
    """Number of total-spin multiplets with S = n_spins/2 - k among n_spins spin-1/2.

    Equals C(n, k) - C(n, k-1); satisfies sum_k g(k) * (2S+1) = 2**n.
    """
    if n_spins < 0:
        raise ValueError(f"n_spins must be non-negative, got {n_spins}")
    if not 0 <= k <= n_spins // 2:
        raise ValueError(f"k must be in [0, {n_spins // 2}], got {k}")
    lower = binomial(n_spins, k - 1) if k >= 1 else 0
    return binomial(n_spins, k) - lower


def allowed_bath_spins(n_bath: int) -> tuple[HalfIntSpin, ...]:
    """Total-spin values of n_bath spin-1/2, descending from n_bath/2 to 0 or 1/2."""
    if n_bath < 0:
        raise ValueError(f"n_bath must be non-negative, got {n_bath}")
    return tuple(
        HalfIntSpin(twice) for twice in range(n_bath, n_bath % 2 - 1, -2) if twice >= 0
    )


def _weight_fraction(n_bath: int, twice_s: int) -> Fraction:
    # 2^-N * C(N, N/2-S) * (2S+1)^2 / (N/2+S+1), with twice-value arithmetic;
    # exact rational arithmetic, so no size cap beyond cost
    comb = math.comb(n_bath, (n_bath - twice_s) // 2)
    return Fraction(comb * (twice_s + 1) ** 2 * 2, (n_bath + twice_s + 2)) / (
        2**n_bath
    )


def weight_exact(n_bath: int, s: HalfIntSpin) -> float:
    """Probability that a uniformly random product state of n_bath spins has total spin s."""
    if n_bath < 1:
        raise ValueError(f"n_bath must be >= 1, got {n_bath}")
    if s.twice_value % 2 != n_bath % 2:
        raise ValueError(f"S={s} has the wrong parity for {n_bath} spins")
    if s.twice_value > n_bath:
        raise ValueError(f"S={s} exceeds the maximum {n_bath}/2")
    return float(_weight_fraction(n_bath, s.twice_value))


def weight_gaussian(n_bath: int, s: float) -> float:
    """Continuum Gaussian form of the total-spin weight, (8S^2/N)/sqrt(2 pi D) e^(-S^2/2D).

    D = N/4.  Normalized so the integral over S in [0, inf) is exactly 1.
    """
    if n_bath < 1:
        raise ValueError(f"n_bath must be >= 1, got {n_bath}")
    if s < 0:
        raise ValueError(f"S must be >= 0, got {s}")
    d = n_bath / 4.0
    return (8.0 * s * s / n_bath) / math.sqrt(2.0 * math.pi * d) * math.exp(
        -s * s / (2.0 * d)
    )


@dataclass(frozen=True)
class WeightTable:
    """Exact total-spin weights P(S) over all allowed S for a bath of n_bath spins."""

    n_bath: int
    entries: tuple[tuple[HalfIntSpin, float], ...]

    @classmethod
    def build(cls, n_bath: int) -> "WeightTable":
        spins = allowed_bath_spins(n_bath)
        fractions = [_weight_fraction(n_bath, s.twice_value) for s in spins]
        if sum(fractions) != 1:
            raise AssertionError(f"weights for N={n_bath} do not close to 1")
        return cls(n_bath, tuple((s, float(f)) for s, f in zip(spins, fractions)))

    def weight(self, s: HalfIntSpin) -> float:
        for spin, w in self.entries:
            if spin == s:
                return w
        raise KeyError(f"S={s} not present for N={self.n_bath}")

    def to_csv(self) -> str:
        lines = ["twice_S,weight"]
        lines += [f"{s.twice_value},{w:.17g}" for s, w in self.entries]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CgTriple:
    """Amplitudes of |1,0> (x) |S,Sz> on total spin L = S-1, S, S+1 (in that order)."""

    amp_lower: float
    amp_same: float
    amp_upper: float

    def __post_init__(self) -> None:
        if abs(self.sum_of_squares() - 1.0) > 1e-9:
            raise ValueError(f"amplitudes are not normalized: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.amp_lower, self.amp_same, self.amp_upper])

    def sum_of_squares(self) -> float:
        return self.amp_lower**2 + self.amp_same**2 + self.amp_upper**2


def cg_decompose_large_s(s: HalfIntSpin, sz: HalfIntSpin) -> CgTriple:
    """Large-S limit of the 1 (x) S decomposition of |1,0>|S,Sz>.

    Amplitudes (-sqrt((1-x^2)/2), x, +sqrt((1-x^2)/2)) with x = Sz/S.
    """
    if s.twice_value < 2:
        raise ValueError(f"S must be >= 1, got {s}")
    if sz.twice_value > s.twice_value:
        raise ValueError(f"|Sz|={sz} exceeds S={s}")
    x = sz.twice_value / s.twice_value
    side = math.sqrt(max(0.0, (1.0 - x * x) / 2.0))
    return CgTriple(-side, x, side)


_SQRT2 = math.sqrt(2.0)


def _bath_lower_factor(twice_s: int, twice_m2: int) -> float:
    # sqrt(S(S+1) - m2(m2-1)) in twice-value arithmetic
    val = twice_s * (twice_s + 2) - twice_m2 * (twice_m2 - 2)
    return math.sqrt(val) / 2.0 if val > 0 else 0.0


def _top_state(twice_s: int, twice_l: int) -> np.ndarray:
    """Highest-weight |L, m=L> over product slots m1 = (+1, 0, -1), bath m2 = L - m1."""
    ts = twice_s
    if twice_l == ts + 2:
        return np.array([1.0, 0.0, 0.0])
    if twice_l == ts:
        s_val = ts / 2.0
        vec = np.array([-1.0, math.sqrt(s_val), 0.0])
        return vec / math.sqrt(s_val + 1.0)
    if twice_l == ts - 2:
        up = _lowered_state(ts, ts + 2, ts - 2)
        mid = _lowered_state(ts, ts, ts - 2)
        vec = np.cross(up, mid)
        vec /= np.linalg.norm(vec)
        if vec[2] < 0:  # maximal bath projection slot positive
            vec = -vec
        return vec
    raise ValueError(f"twice_l={twice_l} is not in the 1 (x) S family of S={ts}/2")


def _lowered_state(twice_s: int, twice_l: int, twice_m: int) -> np.ndarray:
    """Components of |L, m> on the slots m1 = (+1, 0, -1) by repeated lowering."""
    vec = _top_state(twice_s, twice_l)
    tm = twice_l
    while tm > twice_m:
        vec = _lower_once(twice_s, twice_l, tm, vec)
        tm -= 2
    return vec


def _lower_once(twice_s: int, twice_l: int, twice_m: int, vec: np.ndarray) -> np.ndarray:
    ell = math.sqrt(twice_l * (twice_l + 2) - twice_m * (twice_m - 2)) / 2.0
    out = np.zeros(3)
    for idx, tm1 in enumerate((2, 0, -2)):
        acc = vec[idx] * _bath_lower_factor(twice_s, twice_m - tm1)
        if idx >= 1:
            acc += vec[idx - 1] * _SQRT2  # spin-1 lowering from m1+1
        out[idx] = acc / ell
    return out


def cg_decompose_exact(s: HalfIntSpin, sz: HalfIntSpin) -> CgTriple:
    """Exact 1 (x) S Clebsch-Gordan amplitudes of |1,0>|S,Sz>, built by ladder recursion.

    Valid for any S >= 1/2; channels that do not exist (L = S-1 at S = 1/2, or
    |Sz| > L) enter with amplitude zero.  Converges to cg_decompose_large_s as
    S grows, with the same sign convention.
    """
    if s.twice_value < 1:
        raise ValueError(f"S must be >= 1/2, got {s}")
    if sz.twice_value > s.twice_value:
        raise ValueError(f"|Sz|={sz} exceeds S={s}")
    amps = []
    for twice_l in (s.twice_value - 2, s.twice_value, s.twice_value + 2):
        if twice_l < 0 or sz.twice_value > twice_l:
            amps.append(0.0)
        else:
            amps.append(float(_lowered_state(s.twice_value, twice_l, sz.twice_value)[1]))
    return CgTriple(*amps)


@lru_cache(maxsize=None)
def cg_exact_multiplet(s: HalfIntSpin) -> np.ndarray:
    """Exact amplitudes for every projection of one S: array (2S+1, 3).

    Row i holds the (L = S-1, S, S+1) amplitudes at Sz = S - i.  One downward
    ladder sweep per channel, so the whole multiplet costs O(S).
    """
    if s.twice_value < 1:
        raise ValueError(f"S must be >= 1/2, got {s}")
    ts = s.twice_value
    n_rows = ts + 1
    table = np.zeros((n_rows, 3))
    for col, twice_l in enumerate((ts - 2, ts, ts + 2)):
        if twice_l < 0:
            continue
        vec = _top_state(ts, twice_l)
        tm = twice_l
        while tm > ts:  # L = S+1 starts above the table range
            vec = _lower_once(ts, twice_l, tm, vec)
            tm -= 2
        while True:
            if tm <= ts:
                table[(ts - tm) // 2, col] = vec[1]
            if tm <= -twice_l or tm - 2 < -ts:
                break
            vec = _lower_once(ts, twice_l, tm, vec)
            tm -= 2
    table.flags.writeable = False  # cached and shared
    return table


def subspace_probability_third(s_values: Sequence[HalfIntSpin] | Iterable[HalfIntSpin]) -> float:
    """Projection-averaged weight of the L = S channel, <(Sz/S)^2>, over the given spins.

    For each S the average over Sz in {-S..S} of (Sz/S)^2 equals (S+1)/(3S)
    exactly, which tends to 1/3 from above as S grows.  The result is the
    mean over the supplied S values.  Defined for the integer-total-spin
    (two-central-spin) channel only, hence S >= 1 is required.
    """
    values = list(s_values)
    if not values:
        raise ValueError("need at least one S value")
    total = Fraction(0)
    for s in values:
        if s.twice_value < 2:
            raise ValueError(f"S must be >= 1, got {s}")
        total += Fraction(s.twice_value + 2, 3 * s.twice_value)
    return float(total / len(values))
