"""Shared dense-matrix oracle helpers, independent of the package kernels.

Everything here builds operators from explicit Kronecker products of textbook
ladder-operator matrices, so tests compare the bit-swap kernels and the CG
ladder recursion against a genuinely different construction.
"""

import numpy as np
import pytest


def spin_matrices(two_j: int):
    """(sz, sp, sm) for a spin j = two_j/2, basis ordered m = -j ... +j.

    The ordering matches the package's bit convention for j = 1/2 (index 0 is
    "down", index 1 is "up").
    """
    dim = two_j + 1
    m = (np.arange(dim) - two_j / 2.0).astype(np.float64)
    sz = np.diag(m).astype(np.complex128)
    sp = np.zeros((dim, dim), dtype=np.complex128)
    j = two_j / 2.0
    for a in range(dim - 1):
        sp[a + 1, a] = np.sqrt(j * (j + 1) - m[a] * (m[a] + 1))
    return sz, sp, sp.conj().T


def site_operator(op: np.ndarray, site: int, n_spins: int) -> np.ndarray:
    """Embed a single-spin operator at a bit position (bit = spin index)."""
    return np.kron(np.kron(np.eye(1 << (n_spins - 1 - site)), op), np.eye(1 << site))


def dense_spin_squared(n_spins: int, sites) -> np.ndarray:
    """(sum of spin-1/2 at sites)^2 as a dense matrix."""
    sz1, sp1, sm1 = spin_matrices(1)
    sx1 = (sp1 + sm1) / 2.0
    sy1 = (sp1 - sm1) / 2.0j
    total = np.zeros((1 << n_spins, 1 << n_spins), dtype=np.complex128)
    for comp in (sx1, sy1, sz1):
        acc = sum(site_operator(comp, s, n_spins) for s in sites)
        total = total + acc @ acc
    return total


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return amps / np.linalg.norm(amps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240814)
