"""Bit-encoded many-spin Hilbert space and the matrix-free Hamiltonian kernel.

Basis convention: a basis state is an integer whose bit i gives the
orientation of spin i (1 = up, so basis index 1 of a single spin is "up").
Central spins occupy the lowest bits 0..n_central-1, bath spins follow.

The Hamiltonian is

    H = J0 * C^2 + 2 * sum_k J_k (C . s_k),      C = sum of central spins,

applied without ever materializing a matrix.  Every Heisenberg pair term is
reduced with the spin-1/2 identity 2 s_i . s_j = SWAP_ij - 1/2, so the whole
action is a constant diagonal shift plus one bit-transposition per coupled
pair:

    H = c0 * I + sum_pairs w * SWAP_ij,
    c0 = 0.75 * J0 * n_central - (sum of pair weights) / 2.

All operations are pure; nothing here mutates shared state, so concurrent
callers are safe.  The kernel is deterministic for fixed input.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "MAX_SPINS",
    "PAIR_TABLE_MAX_SPINS",
    "HamiltonianSpec",
    "StateVector",
    "BlochAngles",
    "PairSwapOperator",
    "HamiltonianAction",
    "build_initial_state",
    "apply_hamiltonian",
    "expectation_sigma_z",
    "expectation_spin_squared",
    "spin_squared_operator",
    "total_sz_sector",
    "hamiltonian_norm_bound",
    "haar_bloch_angles",
    "basis_bloch_angles",
    "default_central_pattern",
]

#: Default cap on the total spin count (2^24 amplitudes, 256 MB complex).
MAX_SPINS = 24


@dataclass(frozen=True)
class HamiltonianSpec:
    """Couplings of the model: n_central central spins, J0, and bath couplings J_k."""

    n_central: int
    j0: float
    bath_couplings: tuple[float, ...]
    max_spins: int = MAX_SPINS

    def __post_init__(self) -> None:
        object.__setattr__(self, "bath_couplings", tuple(float(j) for j in self.bath_couplings))
        if self.n_central < 1:
            raise ValueError(f"n_central must be >= 1, got {self.n_central}")
        if self.n_spins > self.max_spins:
            raise ValueError(
                f"{self.n_spins} spins exceed the configured maximum {self.max_spins}"
            )

    @classmethod
    def equal(cls, n_central: int, j0: float, j: float, n_bath: int) -> "HamiltonianSpec":
        return cls(n_central, j0, (float(j),) * n_bath)

    @property
    def n_bath(self) -> int:
        return len(self.bath_couplings)

    @property
    def n_spins(self) -> int:
        return self.n_central + self.n_bath

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    @property
    def equal_coupling(self) -> bool:
        if self.n_bath == 0:
            return True
        first = self.bath_couplings[0]
        return all(abs(j - first) <= 1e-15 for j in self.bath_couplings)

    def digest(self) -> str:
        """Short stable identifier of the couplings, for run metadata."""
        text = f"{self.n_central};{self.j0!r};{self.bath_couplings!r}"
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass
class StateVector:
    """Complex amplitudes over the 2^n_spins product basis.

    Proper states are unit vectors; constructors and propagators keep the norm
    within 1e-10 of 1.  Intermediate vectors such as H |psi> are carried by the
    same type without that guarantee.
    """

    n_spins: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_spins,):
            raise ValueError(
                f"expected {1 << self.n_spins} amplitudes for {self.n_spins} spins, "
                f"got shape {self.amplitudes.shape}"
            )
        self.amplitudes = amps

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_spins, self.amplitudes.copy())

    def to_bytes(self) -> bytes:
        """Snapshot: 8-byte little-endian spin count, then (re, im) float64 pairs."""
        return struct.pack("<Q", self.n_spins) + self.amplitudes.astype("<c16").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "StateVector":
        (n_spins,) = struct.unpack("<Q", blob[:8])
        amps = np.frombuffer(blob[8:], dtype="<c16").astype(np.complex128)
        return cls(int(n_spins), amps)


@dataclass(frozen=True)
class BlochAngles:
    """Single-spin state cos(theta/2)|up> + e^(i phi) sin(theta/2)|down>."""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must be in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must be in [0, 2 pi), got {self.phi}")

    def amplitudes(self) -> np.ndarray:
        """(down, up) amplitudes in basis-index order."""
        return np.array(
            [math.sin(self.theta / 2.0) * np.exp(1j * self.phi), math.cos(self.theta / 2.0)],
            dtype=np.complex128,
        )


def haar_bloch_angles(rng: np.random.Generator, n: int) -> list[BlochAngles]:
    """n independent Haar-uniform single-spin states."""
    cos_theta = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return [BlochAngles(math.acos(c), min(p, np.nextafter(2 * math.pi, 0))) for c, p in zip(cos_theta, phi)]


def basis_bloch_angles(rng: np.random.Generator, n: int) -> list[BlochAngles]:
    """n independent up/down coin flips (classical basis-state measure)."""
    flips = rng.integers(0, 2, size=n)
    return [BlochAngles(0.0 if f else math.pi, 0.0) for f in flips]


def default_central_pattern(n_central: int) -> tuple[str, ...]:
    """Alternating (up, down, up, ...) initial orientation of the central spins."""
    return tuple("up" if i % 2 == 0 else "down" for i in range(n_central))


def build_initial_state(
    spec: HamiltonianSpec,
    bath_states: Sequence[BlochAngles],
    central_pattern: Sequence[str] | None = None,
) -> StateVector:
    """Product state of oriented central spins and the given bath single-spin states."""
    if central_pattern is None:
        central_pattern = default_central_pattern(spec.n_central)
    if len(central_pattern) != spec.n_central:
        raise ValueError(
            f"central_pattern has {len(central_pattern)} entries for {spec.n_central} central spins"
        )
    if len(bath_states) != spec.n_bath:
        raise ValueError(f"got {len(bath_states)} bath states for {spec.n_bath} bath spins")

    factors: list[np.ndarray] = []
    for orient in central_pattern:
        if orient not in ("up", "down"):
            raise ValueError(f"central pattern entries must be 'up' or 'down', got {orient!r}")
        factors.append(
            np.array([0.0, 1.0] if orient == "up" else [1.0, 0.0], dtype=np.complex128)
        )
    factors.extend(b.amplitudes() for b in bath_states)

    amps = np.ones(1, dtype=np.complex128)
    for f in reversed(factors):  # highest spin index = most significant bit
        amps = np.kron(amps, f)
    return StateVector(spec.n_spins, amps)


try:
    from ._kernels import apply_pair_swaps as _numba_apply
except ImportError:  # pragma: no cover - numba is a regular dependency
    _numba_apply = None

#: per-pair index tables are precomputed up to this many spins (memory bound)
PAIR_TABLE_MAX_SPINS = 20


class PairSwapOperator:
    """Matrix-free operator c0 * I + sum_p w_p * SWAP(i_p, j_p).

    Every Heisenberg pair interaction in this package reduces to this form.
    Accepts amplitude arrays of shape (dim,) or (dim, batch); all batch
    columns go through identical arithmetic, so grouping does not affect
    results.  Up to PAIR_TABLE_MAX_SPINS the differing-bit index tables are
    precomputed and a compiled kernel does one fused pass; beyond that a
    plain numpy gather per pair is used.
    """

    def __init__(self, n_spins: int, pairs: Sequence[tuple[int, int, float]], constant: float):
        self.n_spins = n_spins
        self.dim = 1 << n_spins
        self.pairs = [(int(i), int(j), float(w)) for i, j, w in pairs]
        self.constant = float(constant)
        for i, j, _ in self.pairs:
            if not (0 <= i < n_spins and 0 <= j < n_spins and i != j):
                raise ValueError(f"bad pair ({i}, {j}) for {n_spins} spins")
        self._tables = None
        if n_spins <= PAIR_TABLE_MAX_SPINS:
            self._build_tables()

    def _build_tables(self) -> None:
        idx = np.arange(self.dim)
        diag = np.full(self.dim, self.constant)
        diffs, partners, weights = [], [], []
        itype = np.int32 if self.n_spins < 31 else np.int64
        for i, j, w in self.pairs:
            differ = ((idx >> i) & 1) != ((idx >> j) & 1)
            diag += np.where(differ, 0.0, w)
            d = idx[differ].astype(itype)
            diffs.append(d)
            partners.append((d ^ ((1 << i) | (1 << j))).astype(itype))
            weights.append(w)
        offsets = np.cumsum([0] + [len(d) for d in diffs]).astype(np.int64)
        diff_idx = np.concatenate(diffs) if diffs else np.empty(0, dtype=itype)
        partner_idx = np.concatenate(partners) if partners else np.empty(0, dtype=itype)
        self._tables = (diag, diff_idx, partner_idx, np.asarray(weights, dtype=np.float64), offsets)

    def __call__(self, amps: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        single = amps.ndim == 1
        x = amps[:, None] if single else amps
        x = np.ascontiguousarray(x, dtype=np.complex128)
        if out is None:
            out = np.empty_like(x)
        view = out[:, None] if out.ndim == 1 else out
        if self._tables is not None and _numba_apply is not None:
            diag, diff_idx, partner_idx, weights, offsets = self._tables
            _numba_apply(x, view, diag, diff_idx, partner_idx, weights, offsets)
        elif self._tables is not None:
            diag, diff_idx, partner_idx, weights, offsets = self._tables
            np.multiply(diag[:, None], x, out=view)
            for p in range(len(weights)):
                sl = slice(offsets[p], offsets[p + 1])
                view[diff_idx[sl]] += weights[p] * x[partner_idx[sl]]
        else:
            idx = np.arange(self.dim)
            np.multiply(self.constant, x, out=view)
            for i, j, w in self.pairs:
                differ = ((idx >> i) & 1) != ((idx >> j) & 1)
                perm = np.where(differ, idx ^ ((1 << i) | (1 << j)), idx)
                view += w * x[perm]
        return out[:, 0] if (single and out.ndim == 2) else out

    def expectation(self, amps: np.ndarray) -> np.ndarray | float:
        """<psi| O |psi> per column (real part)."""
        applied = self(amps)
        if amps.ndim == 1:
            return float(np.vdot(amps, applied).real)
        return np.einsum("db,db->b", amps.conj(), applied).real


class HamiltonianAction(PairSwapOperator):
    """The model Hamiltonian (optionally scaled) as a PairSwapOperator.

    H = J0 C^2 + 2 sum_k J_k C.s_k
      = [0.75 J0 n_c - (sum of pair weights)/2] I + sum_pairs w SWAP, where the
    pairs are every central-central pair at weight J0 and every
    (central, bath-k) pair at weight J_k.
    """

    def __init__(self, spec: HamiltonianSpec, scale: float = 1.0):
        self.spec = spec
        pairs: list[tuple[int, int, float]] = []
        for i in range(spec.n_central):
            for j in range(i + 1, spec.n_central):
                pairs.append((i, j, spec.j0 * scale))
        for k, jk in enumerate(spec.bath_couplings):
            for i in range(spec.n_central):
                pairs.append((i, spec.n_central + k, jk * scale))
        constant = 0.75 * spec.j0 * spec.n_central * scale - 0.5 * sum(
            w for _, _, w in pairs
        )
        super().__init__(spec.n_spins, pairs, constant)


def apply_hamiltonian(spec: HamiltonianSpec, psi: StateVector) -> StateVector:
    """H |psi| as a new vector (not normalized; H is not unitary)."""
    if psi.n_spins != spec.n_spins:
        raise ValueError(f"state has {psi.n_spins} spins, spec has {spec.n_spins}")
    return StateVector(spec.n_spins, HamiltonianAction(spec)(psi.amplitudes))


def expectation_sigma_z(psi: StateVector, site: int) -> float:
    """<sigma_z> of one spin: sum of |amp|^2 weighted +1 (bit set) / -1."""
    if not 0 <= site < psi.n_spins:
        raise ValueError(f"site {site} out of range for {psi.n_spins} spins")
    probs = np.abs(psi.amplitudes) ** 2
    signs = _sigma_z_signs(psi.n_spins, site)
    return float(probs @ signs)


def _sigma_z_signs(n_spins: int, site: int) -> np.ndarray:
    idx = np.arange(1 << n_spins)
    return (((idx >> site) & 1) * 2 - 1).astype(np.float64)


def spin_squared_operator(n_spins: int, sites: Sequence[int]) -> PairSwapOperator:
    """(sum of spins at sites)^2 = [0.75 m - n_pairs/2] I + sum_{i<j} SWAP_ij."""
    sites = list(sites)
    if any(not 0 <= s < n_spins for s in sites):
        raise ValueError(f"sites {sites} out of range for {n_spins} spins")
    if len(set(sites)) != len(sites):
        raise ValueError("sites must be distinct")
    m = len(sites)
    pairs = [(sites[a], sites[b], 1.0) for a in range(m) for b in range(a + 1, m)]
    return PairSwapOperator(n_spins, pairs, 0.75 * m - 0.5 * len(pairs))


def expectation_spin_squared(psi: StateVector, sites: Sequence[int]) -> float:
    """<(sum of spins at sites)^2> of a state."""
    return float(spin_squared_operator(psi.n_spins, sites).expectation(psi.amplitudes))


def total_sz_sector(basis_index: int, n_spins: int) -> int:
    """Magnetization sector label of a basis state: its popcount (number of up spins)."""
    if not 0 <= basis_index < (1 << n_spins):
        raise ValueError(f"basis index {basis_index} out of range for {n_spins} spins")
    return int(basis_index).bit_count()


def hamiltonian_norm_bound(spec: HamiltonianSpec) -> float:
    """Rigorous upper bound on the spectral radius of H.

    |H| <= |J0| Cmax(Cmax+1) + (Cmax+1) sum|J_k|, since each C.s_k term has
    spectrum within [-(Cmax+1)/2, Cmax/2].
    """
    c_max = spec.n_central / 2.0
    return abs(spec.j0) * c_max * (c_max + 1.0) + (c_max + 1.0) * sum(
        abs(j) for j in spec.bath_couplings
    )
