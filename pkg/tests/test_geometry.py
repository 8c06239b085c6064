import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import resample

from pabeam.errors import OutOfRange
from pabeam.geometry import (
    DelayTable, ImageGrid, SensorArray, compute_delays, extract_delayed_snapshot,
    interpolate_channels,
)
from pabeam.signal import AnalyticDataset

C, FS = 1540.0, 25e6


def test_array_positions_uniform_and_centred():
    arr = SensorArray(128, 0.3e-3)
    x = arr.element_positions
    assert x.size == 128
    assert np.all(np.diff(x) > 0)
    np.testing.assert_allclose(np.diff(x), 0.3e-3, atol=1e-12)
    assert abs(x.mean()) < 1e-15


@pytest.mark.parametrize("m", [0, 3, 2.5])
def test_array_rejects_small_counts(m):
    with pytest.raises(ValueError):
        SensorArray(m, 1e-4)


def test_grid_corners_hit_extents():
    g = ImageGrid(-0.01, 0.01, 0.005, 0.07, 201, 651)
    assert g.pixel(0, 0) == (-0.01, 0.005)
    assert g.pixel(200, 650) == (0.01, 0.07)
    # affine in the index
    np.testing.assert_allclose(np.diff(g.lateral, 2), 0, atol=1e-15)
    np.testing.assert_allclose(np.diff(g.axial, 2), 0, atol=1e-15)


def test_grid_rejects_pixels_behind_array():
    with pytest.raises(ValueError):
        ImageGrid(-1e-3, 1e-3, 0.0, 1e-2, 3, 3)


def test_delay_on_axis_closed_form():
    arr = SensorArray(5, 1e-3)  # element 2 sits at lateral 0
    g = ImageGrid(0.0, 0.0, 0.025, 0.025, 1, 1)
    d = compute_delays(g, arr, C, FS)
    assert d[0, 0][2] == pytest.approx(0.025 / 1540 * 25e6, rel=1e-14)
    assert d[0, 0][2] == pytest.approx(405.844, abs=5e-4)


def test_delay_off_axis_against_high_precision_scalar():
    arr = SensorArray(5, 5e-3)  # elements at -10, -5, 0, 5, 10 mm
    g = ImageGrid(0.005, 0.005, 0.03, 0.03, 1, 1)
    d = compute_delays(g, arr, C, FS)[0, 0][1]
    mpmath.mp.dps = 40
    ref = mpmath.sqrt(mpmath.mpf("0.01") ** 2 + mpmath.mpf("0.03") ** 2) / 1540 * mpmath.mpf(25e6)
    assert d == pytest.approx(float(ref), rel=1e-14)


def test_delay_symmetry_and_lower_bound():
    arr = SensorArray(16, 0.2e-3)
    g = ImageGrid(-2e-3, 2e-3, 0.01, 0.02, 5, 11)
    d = compute_delays(g, arr, C, FS)
    centre = d[2]  # lateral 0
    np.testing.assert_array_equal(centre, centre[:, ::-1])
    assert d.delays.min() >= 0.01 * FS / C
    # mirrored pixels see mirrored delays
    np.testing.assert_allclose(d[0], d[4][:, ::-1], rtol=1e-14)


def test_delay_strictly_increases_with_depth():
    arr = SensorArray(8, 0.3e-3)
    g = ImageGrid(-1e-3, 1e-3, 0.005, 0.05, 3, 200)
    d = compute_delays(g, arr, C, FS).delays
    assert np.all(np.diff(d, axis=1) > 0)


def test_delay_table_is_read_only():
    d = compute_delays(ImageGrid(0, 0, 0.01, 0.01, 1, 1), SensorArray(4, 1e-4), C, FS)
    assert isinstance(d, DelayTable)
    with pytest.raises(ValueError):
        d.delays[0, 0, 0] = 1.0


def test_interpolation_at_knots_and_midpoints():
    T = 32
    ramp = np.tile(np.arange(T) * 2.0, (3, 1))
    out = interpolate_channels(ramp, np.array([4.0, 7.0, 11.0]))
    np.testing.assert_array_equal(out, [8.0, 14.0, 22.0])
    out = interpolate_channels(ramp, np.array([4.5, 7.5, 0.5]))
    np.testing.assert_array_equal(out, [9.0, 15.0, 1.0])


def test_interpolation_out_of_range():
    x = np.zeros((2, 20))
    with pytest.raises(OutOfRange):
        interpolate_channels(x, np.array([1.0, 18.5]))
    with pytest.raises(OutOfRange):
        interpolate_channels(x, np.array([-0.1, 3.0]))
    interpolate_channels(x, np.array([0.0, 18.0]))


def crandn1(rng):
    return complex(rng.standard_normal(), rng.standard_normal())


def test_fractional_delay_matches_oversampled_oracle(rng):
    # periodic, heavily oversampled content: a few low FFT bins only
    T, up = 8192, 10
    n = np.arange(T)
    x = np.zeros(T, dtype=complex)
    for k in (1, 2, 3):
        x += crandn1(rng) * np.exp(2j * np.pi * k * n / T)
    fine = resample(x, T * up)
    got = interpolate_channels(x[None, :], np.array([7.3]))[0]
    ref = fine[73]
    assert abs(got - ref) / np.abs(x).max() < 1e-6


def test_extract_snapshot_for_pixel():
    arr = SensorArray(4, 1e-3)
    g = ImageGrid(0.0, 0.0, 0.01, 0.01, 1, 1)
    fs, c = 1e6, 1000.0
    table = compute_delays(g, arr, c, fs)
    T = 64
    data = AnalyticDataset(np.tile(np.arange(T, dtype=complex), (4, 1)), fs)
    snap = extract_delayed_snapshot(data, table, (0, 0))
    np.testing.assert_allclose(snap, table[0, 0], rtol=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 32 - 1))
def test_snapshot_is_linear(alpha, beta, seed):
    r = np.random.default_rng(seed)
    A = r.standard_normal((6, 40)) + 1j * r.standard_normal((6, 40))
    B = r.standard_normal((6, 40)) + 1j * r.standard_normal((6, 40))
    d = r.uniform(0, 38, 6)
    lhs = interpolate_channels(alpha * A + beta * B, d)
    rhs = alpha * interpolate_channels(A, d) + beta * interpolate_channels(B, d)
    scale = max(1.0, np.abs(lhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-13 * scale * (1 + abs(alpha) + abs(beta))

