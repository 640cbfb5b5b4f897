import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from spinbath.analytic import (
    AnalyticParams,
    envelope,
    sigma1z_closed_form,
    sigma1z_sector,
    sigma1z_semianalytic,
)
from spinbath.hilbert import HamiltonianSpec, build_initial_state, haar_bloch_angles
from spinbath.propagator import TimeGrid, evolve_sigma_z_batch
from spinbath.spin_algebra import CgTriple, HalfIntSpin, cg_decompose_exact, cg_decompose_large_s
from conftest import spin_matrices

ENVELOPE_FLOOR = 1.0 / 3.0 - (4.0 / 3.0) * math.exp(-1.5)


def test_params_validation():
    with pytest.raises(ValueError):
        AnalyticParams(-1, 0.1)
    with pytest.raises(ValueError):
        AnalyticParams(4, 0.1, 0.0)
    AnalyticParams(0, 0.0)  # bare central pair is allowed


# ---------------------------------------------------------------------------
# envelope


def test_envelope_starts_at_one():
    assert envelope(AnalyticParams(13, 0.128, 8.0), 0.0) == 1.0


def test_envelope_levels_at_one_third():
    p = AnalyticParams(13, 0.128, 8.0)
    t_late = 40.0 / (math.sqrt(13) * 0.128)
    assert envelope(p, t_late) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_envelope_crosses_one_third_exactly_dyadic():
    # N J^2 = 1 exactly, so the (1 - N J^2 t^2) factor is exactly zero at t=1
    p = AnalyticParams(16, 0.25, 1.0)
    assert envelope(p, 1.0) == 1.0 / 3.0


def test_envelope_crossing_generic_parameters():
    p = AnalyticParams(13, 0.128, 8.0)
    t_cross = 1.0 / (math.sqrt(13) * 0.128)
    assert envelope(p, t_cross) == pytest.approx(1.0 / 3.0, abs=1e-13)


def test_envelope_minimum_location_and_value():
    p = AnalyticParams(13, 0.128, 8.0)
    res = minimize_scalar(
        lambda t: envelope(p, t), bounds=(0.5, 6.0), method="bounded",
        options={"xatol": 1e-12},
    )
    assert res.fun == pytest.approx(ENVELOPE_FLOOR, abs=1e-9)
    x_min = 13 * (0.128 * res.x) ** 2
    assert x_min == pytest.approx(3.0, abs=1e-4)


@settings(max_examples=200)
@given(
    st.integers(min_value=1, max_value=1000),
    st.floats(min_value=1e-3, max_value=10.0),
    st.floats(min_value=0.0, max_value=1e3),
)
def test_envelope_bounds_property(n, j, t):
    value = envelope(AnalyticParams(n, j), t)
    assert ENVELOPE_FLOOR - 1e-12 < value <= 1.0


# ---------------------------------------------------------------------------
# closed form


def test_closed_form_at_zero():
    assert sigma1z_closed_form(AnalyticParams(13, 0.128, 8.0), 0.0) == 1.0


def test_closed_form_equal_couplings_is_pure_envelope():
    p = AnalyticParams(9, 1.0, 1.0)
    t = np.linspace(0.0, 3.0, 100)
    assert np.array_equal(sigma1z_closed_form(p, t), envelope(p, t))


@settings(max_examples=100)
@given(
    st.integers(min_value=1, max_value=200),
    st.floats(min_value=1e-3, max_value=2.0),
    st.floats(min_value=0.1, max_value=16.0),
    st.floats(min_value=0.0, max_value=30.0),
)
def test_closed_form_scaling_invariance(n, j, j0, t):
    raw = sigma1z_closed_form(AnalyticParams(n, j, j0), t)
    rescaled = sigma1z_closed_form(AnalyticParams(n, j / j0, 1.0), t * j0)
    assert raw == pytest.approx(rescaled, abs=1e-12)


@settings(max_examples=100)
@given(
    st.integers(min_value=1, max_value=200),
    st.floats(min_value=1e-3, max_value=2.0),
    st.floats(min_value=0.0, max_value=50.0),
)
def test_closed_form_bounded_by_envelope(n, j, t):
    p = AnalyticParams(n, j)
    assert abs(sigma1z_closed_form(p, t)) <= envelope(p, t) + 1e-12


# ---------------------------------------------------------------------------
# per-sector signal


def test_sector_stretched_projection_is_undamped():
    s, sz = HalfIntSpin(40), HalfIntSpin(40)
    cg = cg_decompose_large_s(s, sz)
    t = np.linspace(0.0, 5.0, 50)
    got = sigma1z_sector(s, sz, 0.2, t, cg)
    assert got == pytest.approx(np.cos(2 * (1 - 0.2) * t), abs=1e-12)


def test_sector_zero_projection_factorizes():
    s, sz = HalfIntSpin(40), HalfIntSpin(0)
    cg = cg_decompose_large_s(s, sz)
    t = np.linspace(0.0, 5.0, 50)
    got = sigma1z_sector(s, sz, 0.1, t, cg, exact_phases=False)
    expected = np.cos(2 * 0.9 * t) * np.cos(2 * 0.1 * 20 * t)
    assert got == pytest.approx(expected, abs=1e-12)


def test_sector_large_s_factorized_identity():
    # with symmetric phases the general three-channel form factorizes
    s, sz = HalfIntSpin(12), HalfIntSpin(4)
    cg = cg_decompose_large_s(s, sz)
    x = (sz.twice_value / s.twice_value) ** 2
    j = 0.17
    t = np.linspace(0.0, 8.0, 120)
    got = sigma1z_sector(s, sz, j, t, cg, exact_phases=False)
    expected = np.cos(2 * (1 - j) * t) * ((1 - x) * np.cos(j * 12 * t) + x)
    assert got == pytest.approx(expected, abs=1e-12)


def test_sector_bath_singlet_is_bare_oscillation():
    t = np.linspace(0.0, 4.0, 40)
    cg = CgTriple(0.0, 0.0, 1.0)
    got = sigma1z_sector(HalfIntSpin(0), HalfIntSpin(0), 0.3, t, cg)
    assert got == pytest.approx(np.cos(2 * t), abs=1e-15)


def test_sector_domain():
    with pytest.raises(ValueError):
        sigma1z_sector(
            HalfIntSpin(2), HalfIntSpin(4), 0.1, 0.0, CgTriple(0.0, 1.0, 0.0)
        )


def _sector_overlap_oracle(twice_s, twice_sz, j, times):
    """Re<t| exp(-iHt) |t> on the spin-1 (x) spin-S coupled space, dense."""
    sz1, sp1, sm1 = spin_matrices(2)
    szs, sps, sms = spin_matrices(twice_s)
    d1, ds = 3, twice_s + 1
    def tot(a, b):
        return np.kron(a, np.eye(ds)) + np.kron(np.eye(d1), b)
    lz, lp = tot(sz1, szs), tot(sp1, sps)
    lsq = lp @ lp.conj().T + lz @ lz - lz
    s_val = twice_s / 2.0
    # (1-j) C^2 + j (L^2 - S(S+1)), with C^2 = 2 in this space
    ham = (1 - j) * 2.0 * np.eye(d1 * ds) + j * (lsq - s_val * (s_val + 1) * np.eye(d1 * ds))
    state = np.zeros(d1 * ds, dtype=complex)
    state[1 * ds + (twice_sz + twice_s) // 2] = 1.0
    return np.array(
        [np.vdot(state, expm(-1j * ham * t) @ state).real for t in times]
    )


@pytest.mark.parametrize("twice_s,twice_sz", [(4, 0), (4, 2), (3, 1), (1, 1)])
def test_sector_exact_cg_matches_dense_evolution(twice_s, twice_sz):
    j = 0.23
    times = np.linspace(0.0, 6.0, 31)
    s, sz = HalfIntSpin(twice_s), HalfIntSpin(twice_sz)
    cg = cg_decompose_exact(s, sz)
    got = sigma1z_sector(s, sz, j, times, cg)
    oracle = _sector_overlap_oracle(twice_s, twice_sz, j, times)
    assert got == pytest.approx(oracle, abs=1e-10)


# ---------------------------------------------------------------------------
# semianalytic finite-N ensemble curve


def test_semianalytic_starts_at_one():
    for n in (1, 6, 13, 14):
        p = AnalyticParams(n, 0.128, 8.0)
        assert sigma1z_semianalytic(p, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_semianalytic_scalar_matches_array():
    p = AnalyticParams(7, 0.2, 2.0)
    t = np.array([0.0, 0.4, 1.3])
    arr = sigma1z_semianalytic(p, t)
    assert arr == pytest.approx([sigma1z_semianalytic(p, ti) for ti in t], abs=1e-15)


def test_semianalytic_bare_pair():
    p = AnalyticParams(0, 0.0, 2.0)
    t = np.linspace(0, 3, 30)
    assert sigma1z_semianalytic(p, t) == pytest.approx(np.cos(4 * t), abs=1e-12)


def test_semianalytic_converges_to_closed_form():
    # frozen from this implementation: sup gaps at matched N J^2
    nj2 = 13 * 0.128**2
    gaps = []
    for n in (50, 100, 200, 400):
        j = math.sqrt(nj2 / n)
        p = AnalyticParams(n, j, 8.0)
        t = np.linspace(0.0, 3.0 * math.sqrt(3.0 / n) / j, 400)
        gaps.append(
            float(np.max(np.abs(sigma1z_semianalytic(p, t) - sigma1z_closed_form(p, t))))
        )
    assert all(a > b for a, b in zip(gaps, gaps[1:]))  # monotone in N
    assert gaps[2] == pytest.approx(0.0645, abs=5e-3)  # N=200
    assert gaps[3] < 0.05  # N=400


def test_semianalytic_matches_simulator_ensemble():
    # the simulator realization mean converges to the semianalytic curve
    spec = HamiltonianSpec.equal(2, 8.0, 0.4, 6)
    grid = TimeGrid(3.0, 121)
    n_states = 200
    rng = np.random.default_rng(7)
    cols = [
        build_initial_state(spec, haar_bloch_angles(rng, 6), ("up", "down")).amplitudes
        for _ in range(n_states)
    ]
    values = evolve_sigma_z_batch(spec, np.column_stack(cols), grid, 0)
    mean = values.mean(axis=1)
    se = values.std(axis=1) / math.sqrt(n_states)
    curve = sigma1z_semianalytic(AnalyticParams(6, 0.4, 8.0), grid.times())
    gap = np.abs(mean - curve)
    assert float(np.max(gap - 4.0 * se)) <= 1e-12
    assert float(np.max(gap)) < 0.03


def test_semianalytic_frozen_flat_coupling_case():
    # j = j0 freezes the carrier: no coherent swing to -1, and the curve
    # hovers around the 1/3 level (small N shows quasi-periodic revivals)
    p = AnalyticParams(8, 1.0, 1.0)
    t = np.linspace(0.0, 4.0, 200)
    curve = sigma1z_semianalytic(p, t)
    assert curve[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(curve > -0.2)
    late = curve[t > 2.0]
    assert abs(float(np.mean(late)) - 1 / 3) < 0.05
