"""Tests for synthesis phase generation: derivatives, propagation, locking.

The derivative and propagation posts are checked three ways: against an
exact-bin cosine whose phase advance is known in closed form, against a
candidate-search oracle that never computes a principal value, and
through the algebraic round trip at stretch factor 1, which must
reproduce the analysis phases modulo full turns for any phase matrix
whatsoever.
"""

import numpy as np
import pytest

from selebi.gabor import UniformGrid, dgt, make_hann
from selebi.percussion import principal
from selebi.phase import (
    identity_phase_lock,
    phase_time_derivative,
    propagate_phase,
    stretched_gaps,
)

from oracles import direct_peak_regions, direct_phase_derivative


def cosine_phases(bin_index=96, signal_length=4096, hop=32):
    grid = UniformGrid(
        signal_length=signal_length, hop=hop, window_length=512, channels=1024
    )
    l = np.arange(signal_length)
    x = np.cos(2.0 * np.pi * bin_index * l / grid.channels)
    X = dgt(x, make_hann(grid.window_length), grid)
    return np.angle(X), grid


# ---------------------------------------------------------------------------
# phase_time_derivative


def test_derivative_first_column_is_center_bank():
    rng = np.random.default_rng(11)
    phi = rng.uniform(-np.pi, np.pi, size=(48, 6))
    out = phase_time_derivative(phi, np.full(5, 19), 48)
    assert np.array_equal(out[:, 0], 2.0 * np.pi * np.arange(48) / 48)


def test_derivative_exact_bin_cosine_sits_on_center():
    # Every frame of an exact-bin cosine advances the bin's phase by
    # precisely hop cycles of its center frequency, so the wrapped
    # difference vanishes and the derivative equals 2*pi*m/M everywhere.
    phi, grid = cosine_phases(bin_index=96)
    out = phase_time_derivative(phi, np.full(grid.frames - 1, grid.hop), grid.channels)
    center = 2.0 * np.pi * 96 / grid.channels
    assert np.allclose(out[96, :], center, atol=1e-9)


def test_derivative_bin_zero_of_constant_signal():
    phi = np.zeros((16, 8))
    out = phase_time_derivative(phi, np.full(7, 5), 16)
    assert np.allclose(out[0, :], 0.0, atol=1e-12)


def test_derivative_matches_candidate_search_oracle():
    rng = np.random.default_rng(23)
    phi = rng.uniform(-np.pi, np.pi, size=(32, 12))
    gaps = rng.integers(3, 40, size=11)
    out = phase_time_derivative(phi, gaps, 32)
    want = direct_phase_derivative(phi, gaps, 32)
    assert np.allclose(out, want, atol=1e-9)


def test_derivative_accepts_full_hop_vector():
    # Grids carry one hop per frame, the last closing the circle; the
    # trailing entry must be ignored.
    rng = np.random.default_rng(31)
    phi = rng.uniform(-np.pi, np.pi, size=(16, 9))
    gaps = rng.integers(2, 30, size=8)
    full = np.concatenate([gaps, [999]])
    assert np.array_equal(
        phase_time_derivative(phi, gaps, 16),
        phase_time_derivative(phi, full, 16),
    )


def test_derivative_single_column():
    phi = np.zeros((8, 1))
    out = phase_time_derivative(phi, np.empty(0, dtype=int), 8)
    assert np.array_equal(out[:, 0], 2.0 * np.pi * np.arange(8) / 8)


def test_derivative_rejects_bad_inputs():
    phi = np.zeros((8, 4))
    with pytest.raises(ValueError):
        phase_time_derivative(phi, np.full(3, 7), 16)
    with pytest.raises(ValueError):
        phase_time_derivative(phi, np.full(2, 7), 8)
    with pytest.raises(ValueError):
        phase_time_derivative(phi, np.array([7, 0, 7]), 8)


# ---------------------------------------------------------------------------
# propagate_phase


def test_propagate_zero_derivative_holds_seed():
    seed = np.linspace(-2.0, 2.0, 24)
    out = propagate_phase(np.zeros((24, 10)), 2.0, np.full(9, 13), seed)
    assert np.allclose(out, seed[:, None], atol=0.0)


def test_propagate_identity_at_unit_stretch():
    # With alpha = 1 the integration telescopes: each step adds back the
    # wrapped inter-frame difference, so the result matches the input
    # phases up to whole turns.
    rng = np.random.default_rng(47)
    phi = rng.uniform(-np.pi, np.pi, size=(40, 60))
    gaps = rng.integers(5, 90, size=59)
    delta = phase_time_derivative(phi, gaps, 40)
    out = propagate_phase(delta, 1.0, gaps, phi[:, 0])
    assert np.max(np.abs(principal(out - phi))) < 1e-8


def test_propagate_exact_bin_cosine_closed_form():
    phi, grid = cosine_phases(bin_index=96)
    gaps = np.full(grid.frames - 1, grid.hop)
    delta = phase_time_derivative(phi, gaps, grid.channels)
    out = propagate_phase(delta, 2.0, gaps, phi[:, 0])
    n = np.arange(grid.frames)
    want = phi[96, 0] + n * 2 * grid.hop * 2.0 * np.pi * 96 / grid.channels
    assert np.allclose(out[96, :], want, atol=1e-6)


def test_propagate_is_affine_in_the_derivative():
    rng = np.random.default_rng(59)
    delta = rng.normal(size=(20, 30))
    seed = rng.uniform(-np.pi, np.pi, size=20)
    gaps = rng.integers(4, 50, size=29)
    lhs = propagate_phase(0.37 * delta, 3.0, gaps, seed)
    rhs = seed[:, None] + 0.37 * (propagate_phase(delta, 3.0, gaps, seed) - seed[:, None])
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


def test_propagate_matches_stepwise_loop():
    rng = np.random.default_rng(61)
    delta = rng.normal(size=(12, 17))
    seed = rng.uniform(-np.pi, np.pi, size=12)
    gaps = rng.integers(3, 41, size=16)
    out = propagate_phase(delta, 1.75, gaps, seed)
    col = seed.astype(float).copy()
    for n in range(1, 17):
        col = col + int(np.ceil(1.75 * gaps[n - 1])) * delta[:, n]
        assert np.allclose(out[:, n], col, rtol=1e-12, atol=1e-9)


def test_propagate_single_column_returns_seed():
    seed = np.arange(6.0)
    out = propagate_phase(np.zeros((6, 1)), 4.0, np.empty(0, dtype=int), seed)
    assert np.array_equal(out, seed[:, None])


def test_propagate_rejects_mismatched_seed():
    with pytest.raises(ValueError):
        propagate_phase(np.zeros((6, 4)), 2.0, np.full(3, 8), np.zeros(5))


def test_stretched_gaps_round_up_and_binary_guard():
    assert np.array_equal(stretched_gaps(np.array([3, 8]), 1.5), [5, 12])
    # 1.1 * 50 lands a hair above 55 in binary; the guard keeps the
    # integer product from rounding to 56.
    assert stretched_gaps(np.array([50]), 1.1)[0] == 55
    assert np.array_equal(stretched_gaps(np.array([64, 31]), 1.0), [64, 31])
    with pytest.raises(ValueError):
        stretched_gaps(np.array([10]), 0.9)


# ---------------------------------------------------------------------------
# identity_phase_lock


def lock_fixture(seed, shape=(64, 20)):
    rng = np.random.default_rng(seed)
    mag = rng.random(shape)
    phi = rng.uniform(-np.pi, np.pi, size=shape)
    prop = rng.uniform(-40.0, 40.0, size=shape)
    return mag, phi, prop


def test_lock_matches_region_oracle():
    mag, phi, prop = lock_fixture(67)
    theta = 0.25
    out = identity_phase_lock(mag, phi, prop, theta_mag=theta)
    floor = theta * mag.max()
    for n in range(mag.shape[1]):
        peaks, anchor = direct_peak_regions(mag[:, n], floor)
        if not peaks:
            want = prop[:, n]
        else:
            want = prop[anchor, n] + (phi[:, n] - phi[anchor, n])
        assert np.array_equal(out[:, n], want)


def test_lock_keeps_propagated_phase_at_peaks():
    mag, phi, prop = lock_fixture(71)
    out = identity_phase_lock(mag, phi, prop, theta_mag=0.25)
    floor = 0.25 * mag.max()
    for n in range(mag.shape[1]):
        peaks, _ = direct_peak_regions(mag[:, n], floor)
        for p in peaks:
            assert out[p, n] == prop[p, n]


def test_lock_explicit_two_peak_valley_split():
    mag = np.array([1.0, 5.0, 2.0, 1.0, 3.0, 9.0, 2.0])[:, None]
    phi = np.linspace(0.0, 1.2, 7)[:, None]
    prop = np.linspace(10.0, 16.0, 7)[:, None]
    out = identity_phase_lock(mag, phi, prop, theta_mag=0.01)
    # Valley at bin 3 joins the left peak's region.
    anchor = np.array([1, 1, 1, 1, 5, 5, 5])
    want = prop[anchor, 0] + (phi[:, 0] - phi[anchor, 0])
    assert np.array_equal(out[:, 0], want)


def test_lock_leaves_subfloor_columns_alone():
    mag = np.zeros((32, 3))
    mag[10, 0] = 1.0
    mag[:, 1] = 1e-4
    rng = np.random.default_rng(73)
    phi = rng.uniform(-np.pi, np.pi, size=(32, 3))
    prop = rng.uniform(-5.0, 5.0, size=(32, 3))
    out = identity_phase_lock(mag, phi, prop, theta_mag=0.01)
    assert np.array_equal(out[:, 1], prop[:, 1])
    assert np.array_equal(out[:, 2], prop[:, 2])
    assert not np.array_equal(out[:, 0], prop[:, 0])


def test_lock_all_zero_magnitude_is_identity():
    _, phi, prop = lock_fixture(79, shape=(16, 4))
    out = identity_phase_lock(np.zeros((16, 4)), phi, prop)
    assert np.array_equal(out, prop)


def test_lock_single_peak_rotates_column_rigidly():
    # One region means one anchor: every bin keeps its analysis phase
    # plus a shared rotation, so out - phi is constant over bins.
    bins = np.arange(48)
    mag = np.exp(-0.5 * ((bins - 20.0) / 4.0) ** 2)[:, None]
    rng = np.random.default_rng(83)
    phi = rng.uniform(-np.pi, np.pi, size=(48, 1))
    prop = rng.uniform(-30.0, 30.0, size=(48, 1))
    out = identity_phase_lock(mag, phi, prop, theta_mag=0.01)
    rotation = out[:, 0] - phi[:, 0]
    assert np.ptp(rotation) < 1e-9
    assert abs(rotation[20] - (prop[20, 0] - phi[20, 0])) == 0.0


def test_lock_preserves_in_region_phase_offsets():
    mag, phi, prop = lock_fixture(89)
    out = identity_phase_lock(mag, phi, prop, theta_mag=0.25)
    floor = 0.25 * mag.max()
    for n in range(mag.shape[1]):
        _, anchor = direct_peak_regions(mag[:, n], floor)
        if anchor[0] < 0:
            continue
        got = out[:, n] - out[anchor, n]
        want = phi[:, n] - phi[anchor, n]
        assert np.allclose(got, want, atol=1e-9)


def test_lock_rejects_bad_inputs():
    good = np.ones((4, 2))
    with pytest.raises(ValueError):
        identity_phase_lock(np.ones((4, 3)), good, good)
    with pytest.raises(ValueError):
        identity_phase_lock(good, good, good, theta_mag=0.0)


# ---------------------------------------------------------------------------
# seeded fuzz over the whole chain


@pytest.mark.parametrize("seed", range(8))
def test_fuzz_derivative_oracle_and_identity(seed):
    rng = np.random.default_rng(1000 + seed)
    rows = int(rng.integers(8, 48))
    cols = int(rng.integers(2, 24))
    phi = rng.uniform(-np.pi, np.pi, size=(rows, cols))
    gaps = rng.integers(1, 70, size=cols - 1)
    delta = phase_time_derivative(phi, gaps, rows)
    assert np.allclose(delta, direct_phase_derivative(phi, gaps, rows), atol=1e-9)
    back = propagate_phase(delta, 1.0, gaps, phi[:, 0])
    assert np.max(np.abs(principal(back - phi))) < 1e-8
