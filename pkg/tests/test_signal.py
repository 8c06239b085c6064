import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pabeam.errors import AllZeroImage, NonFinite, ZeroSignal
from pabeam.geometry import ImageGrid
from pabeam.signal import (
    ChannelDataset, ImagePlane, add_noise_at_snr, analytic_signal, envelope, log_compress,
)

GRID = ImageGrid(-1e-3, 1e-3, 0.01, 0.02, 4, 5)


def plane(values, stage="beamformed"):
    return ImagePlane(np.asarray(values), GRID, stage)


def hilbert_kernel_oracle(x):
    """Direct linear convolution with the ideal discrete Hilbert kernel 2/(pi n), n odd."""
    n = np.arange(-(x.size - 1), x.size)
    h = np.zeros(n.size)
    odd = n % 2 != 0
    h[odd] = 2.0 / (np.pi * n[odd])
    return np.convolve(x, h)[x.size - 1: 2 * x.size - 1]


def bandpass_burst(rng, T):
    """Sum of Gaussian-windowed tones well inside the band, decaying to zero at the ends."""
    t = np.arange(T)
    x = np.zeros(T)
    for _ in range(4):
        f = rng.uniform(0.08, 0.3)
        centre = rng.uniform(0.4, 0.6) * T
        width = rng.uniform(0.04, 0.08) * T
        x += rng.standard_normal() * np.exp(-0.5 * ((t - centre) / width) ** 2) * np.cos(
            2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    return x


def test_cosine_becomes_complex_exponential():
    T, f0 = 1024, 64 / 1024  # integer number of cycles
    t = np.arange(T)
    a = analytic_signal(ChannelDataset(np.cos(2 * np.pi * f0 * t)[None, :], 1.0)).samples[0]
    mid = slice(T // 4, 3 * T // 4)
    np.testing.assert_allclose(a[mid], np.exp(2j * np.pi * f0 * t[mid]), atol=1e-6)
    np.testing.assert_allclose(np.abs(a[mid]), 1.0, atol=1e-6)


def test_zero_channel_stays_zero():
    a = analytic_signal(ChannelDataset(np.zeros((3, 64)), 1.0)).samples
    assert a.dtype.kind == "c"
    assert np.all(a == 0)


def test_imaginary_part_matches_hilbert_kernel(rng):
    T = 2048
    x = bandpass_burst(rng, T)
    a = analytic_signal(ChannelDataset(x[None, :], 1.0)).samples[0]
    ref = hilbert_kernel_oracle(x)
    mid = slice(T // 4, 3 * T // 4)
    err = np.abs(a.imag[mid] - ref[mid]).max() / np.abs(ref[mid]).max()
    assert err < 1e-6


def test_analytic_real_part_and_one_sided_spectrum(rng):
    x = rng.standard_normal((4, 256))
    a = analytic_signal(ChannelDataset(x, 1.0)).samples
    np.testing.assert_allclose(a.real, x, rtol=1e-9, atol=1e-12)
    mag = np.abs(np.fft.fft(a, axis=-1))
    neg = mag[:, 129:]
    assert neg.max() < 1e-9 * mag.max()


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_analytic_rejects_non_finite(bad):
    x = np.zeros((2, 32))
    x[1, 5] = bad
    with pytest.raises(NonFinite):
        analytic_signal(ChannelDataset(x, 1.0))


def test_channel_dataset_needs_16_samples():
    with pytest.raises(ValueError):
        ChannelDataset(np.zeros((4, 15)), 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2 ** 32 - 1))
def test_analytic_signal_is_linear(alpha, beta, seed):
    r = np.random.default_rng(seed)
    a, b = r.standard_normal((2, 3, 100))
    H = lambda v: analytic_signal(ChannelDataset(v, 1.0)).samples  # noqa: E731
    lhs = H(alpha * a + beta * b)
    rhs = alpha * H(a) + beta * H(b)
    assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(lhs).max())


def test_envelope_values(rng):
    v = np.zeros(GRID.shape, dtype=complex)
    v[0, 0] = 3 + 4j
    assert envelope(plane(v)).values[0, 0] == 5.0
    real = rng.standard_normal(GRID.shape)
    np.testing.assert_array_equal(envelope(plane(real.astype(complex))).values, np.abs(real))
    z = rng.standard_normal(GRID.shape) + 1j * rng.standard_normal(GRID.shape)
    env = envelope(plane(z))
    assert env.stage == "envelope"
    oracle = np.array([[abs(complex(c)) for c in row] for row in z])
    np.testing.assert_allclose(env.values, oracle, rtol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * np.pi), st.integers(0, 2 ** 32 - 1))
def test_envelope_invariant_to_global_phase(phi, seed):
    r = np.random.default_rng(seed)
    z = r.standard_normal(GRID.shape) + 1j * r.standard_normal(GRID.shape)
    a = envelope(plane(z)).values
    b = envelope(plane(z * np.exp(1j * phi))).values
    np.testing.assert_allclose(a, b, rtol=1e-14)


def test_log_compress_values():
    v = np.full(GRID.shape, 0.1)
    v[1, 2] = 1.0
    v[0, 0] = 0.0
    out = log_compress(plane(v, "envelope"))
    assert out.stage == "log_compressed"
    assert out.values.max() == 0.0
    assert out.values[1, 2] == 0.0
    assert out.values[0, 1] == pytest.approx(-20.0, abs=1e-12)
    assert out.values[0, 0] == -60.0
    assert log_compress(plane(v, "envelope"), floor_db=-15).values[0, 1] == -15.0


def test_log_compress_all_zero():
    with pytest.raises(AllZeroImage):
        log_compress(plane(np.zeros(GRID.shape), "envelope"))


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 1e6), st.integers(0, 2 ** 32 - 1))
def test_log_compress_scale_invariant(scale, seed):
    v = np.random.default_rng(seed).uniform(0, 1, GRID.shape)
    a = log_compress(plane(v, "envelope")).values
    b = log_compress(plane(v * scale, "envelope")).values
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_stage_checks():
    with pytest.raises(ValueError):
        envelope(plane(np.ones(GRID.shape), "envelope"))
    with pytest.raises(ValueError):
        log_compress(plane(np.ones(GRID.shape), "beamformed"))


def test_noise_hits_target_snr():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((64, 2000)) * np.linspace(0, 2, 2000)
    data = ChannelDataset(x, 1.0)
    noisy = add_noise_at_snr(data, 50.0, seed=7)
    noise = noisy.samples - x
    measured = 10 * np.log10(np.mean(x ** 2) / np.mean(noise ** 2))
    assert abs(measured - 50.0) < 0.5
    assert abs(noise.mean()) < 5 * noise.std() / np.sqrt(noise.size)


def test_noise_deterministic_and_inf_passthrough():
    x = np.sin(np.arange(3 * 64).reshape(3, 64))
    data = ChannelDataset(x, 1.0)
    a = add_noise_at_snr(data, 10.0, seed=3).samples
    b = add_noise_at_snr(data, 10.0, seed=3).samples
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, add_noise_at_snr(data, 10.0, seed=4).samples)
    np.testing.assert_array_equal(add_noise_at_snr(data, np.inf, seed=3).samples, x)


def test_noise_rejects_silent_data():
    with pytest.raises(ZeroSignal):
        add_noise_at_snr(ChannelDataset(np.zeros((2, 32)), 1.0), 20.0, seed=0)
