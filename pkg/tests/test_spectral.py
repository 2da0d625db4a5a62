import numpy as np
import pytest
from scipy import signal

from cohtopo.errors import DegenerateCoherenceError, InsufficientDataError, ValidationError
from cohtopo.spectral import (
    SpectralPair,
    WelchConfig,
    band_average,
    estimate_spectral_pair,
    quadrature_weights,
    residual_cost,
    wiener_response,
)


def white(seed, n):
    return np.random.default_rng(seed).standard_normal(n)


def synthetic_pair(coherence, k=64):
    om = np.pi * np.arange(1, k + 1) / k
    c = np.broadcast_to(np.asarray(coherence, dtype=float), om.shape)
    return SpectralPair.from_spectra(om, np.ones(k), np.ones(k), np.sqrt(c))


class TestWelchConfig:
    def test_defaults_give_fourteen_segments_at_1000(self):
        assert WelchConfig().n_segments(1000) == 14

    @pytest.mark.parametrize(
        "kwargs", [dict(segment_length=100), dict(segment_length=8), dict(overlap=1.0), dict(window="nope")]
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValidationError):
            WelchConfig(**kwargs)

    def test_grid(self):
        om = WelchConfig(64).omegas()
        assert om.size == 32 and om[0] > 0 and om[-1] == pytest.approx(np.pi)
        assert np.all(np.diff(om) > 0)


class TestEstimate:
    def test_self_coherence(self):
        x = white(0, 2000)
        p = estimate_spectral_pair(x, x)
        np.testing.assert_allclose(p.coherence, 1.0, atol=1e-12)

    def test_independent_noise(self):
        x, y = white(1, 2**15), white(2, 2**15)
        p = estimate_spectral_pair(x, y, WelchConfig(512, overlap=0.0))
        assert p.n_segments == 64
        assert p.coherence.mean() <= 0.05

    def test_delay_keeps_coherence(self):
        z = white(3, 2**15 + 5)
        x, y = z[5:], z[:-5]  # y(t) = x(t - 5)
        p = estimate_spectral_pair(x, y, WelchConfig(1024))
        assert p.coherence[1:-1].min() >= 0.99

    def test_matches_scipy_coherence(self):
        x = white(4, 4096)
        y = signal.lfilter([1, 0.4], [1, -0.6], x) + white(5, 4096)
        cfg = WelchConfig(256)
        p = estimate_spectral_pair(x, y, cfg)
        _, coh = signal.coherence(x, y, window="hann", nperseg=256, noverlap=128)
        np.testing.assert_allclose(p.coherence, coh[1:], rtol=1e-9, atol=1e-12)
        _, pxy = signal.csd(x, y, window="hann", nperseg=256, noverlap=128)
        _, pxx = signal.welch(x, window="hann", nperseg=256, noverlap=128)
        np.testing.assert_allclose(wiener_response(p).values, (pxy / pxx)[1:], rtol=1e-9)

    def test_symmetric_in_arguments(self):
        x = white(6, 3000)
        y = signal.lfilter([0.5, 1.0], [1.0, 0.3], x) + white(7, 3000)
        a, b = estimate_spectral_pair(x, y), estimate_spectral_pair(y, x)
        np.testing.assert_allclose(a.coherence, b.coherence, rtol=0, atol=1e-12)
        np.testing.assert_allclose(a.phi_xy, np.conj(b.phi_xy), rtol=1e-12)

    @pytest.mark.parametrize("a,b", [(3.0, 1.0), (-0.01, 250.0)])
    def test_scale_invariant(self, a, b):
        x = white(8, 3000)
        y = signal.lfilter([1.0], [1.0, -0.7], x) + white(9, 3000)
        p, q = estimate_spectral_pair(x, y), estimate_spectral_pair(a * x, b * y)
        np.testing.assert_allclose(q.coherence, p.coherence, rtol=1e-9, atol=1e-12)

    def test_filtering_input_leaves_coherence(self):
        T = 10**5
        x = white(10, T)
        y = signal.lfilter([1.0, -0.5], [1.0, -0.8, 0.3], x) + white(11, T)
        xf = signal.lfilter([1.0, 0.5], [1.0, -0.4], x)  # stable, minimum phase
        p, q = estimate_spectral_pair(x, y, WelchConfig(256)), estimate_spectral_pair(xf, y, WelchConfig(256))
        assert np.mean(np.abs(p.coherence - q.coherence)) <= 0.05

    def test_schwarz(self):
        x = white(12, 2000)
        y = np.roll(x, 3) + white(13, 2000)
        p = estimate_spectral_pair(x, y)
        assert np.all(np.abs(p.phi_xy) ** 2 <= p.phi_x * p.phi_y * (1 + 1e-12))
        assert np.all((p.coherence >= 0) & (p.coherence <= 1))

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            estimate_spectral_pair(white(0, 100), white(1, 100))

    def test_single_segment(self):
        with pytest.raises(DegenerateCoherenceError):
            estimate_spectral_pair(white(0, 150), white(1, 150))

    def test_floor_marks_dead_bins(self):
        # band-limited input: upper half of the band is empty
        spec = np.fft.rfft(white(14, 5000))
        spec[900:] = 0.0
        x = np.fft.irfft(spec, 5000)
        p = estimate_spectral_pair(x, 2 * x, WelchConfig(128, floor=1e-6))
        assert p.x_floored.any()
        w = wiener_response(p)
        assert np.all(np.isfinite(w.values))
        np.testing.assert_array_equal(w.unreliable, p.x_floored)


class TestWiener:
    def test_identity(self):
        x = white(20, 4000)
        w = wiener_response(estimate_spectral_pair(x, x))
        np.testing.assert_allclose(w.values, 1.0, atol=1e-6)

    def test_pure_gain(self):
        x = white(21, 4000)
        w = wiener_response(estimate_spectral_pair(x, 2 * x))
        np.testing.assert_allclose(w.values, 2.0, atol=1e-6)

    def test_first_order_recursive(self):
        x = white(22, 10**5)
        y = signal.lfilter([1.0], [1.0, -0.5], x)
        cfg = WelchConfig(1024)
        w = wiener_response(estimate_spectral_pair(x, y, cfg))
        _, h = signal.freqz([1.0], [1.0, -0.5], worN=w.omegas)
        rel = np.abs(np.abs(w.values) - np.abs(h)) / np.abs(h)
        assert rel[1:-1].max() <= 0.05


class TestResidualCost:
    @pytest.mark.parametrize("c,expected", [(1.0, 0.0), (0.0, 1.0), (0.75, 0.25)])
    def test_constants(self, c, expected):
        assert residual_cost(synthetic_pair(c)) == pytest.approx(expected, abs=1e-12)

    def test_weights_sum_to_one(self):
        for L in (16, 128, 1024):
            assert quadrature_weights(WelchConfig(L).omegas()).sum() == pytest.approx(1.0, abs=1e-14)

    def test_band_average_of_cosine(self):
        # (1/pi) int_0^pi cos^2 = 1/2
        om = WelchConfig(4096).omegas()
        assert band_average(np.cos(om) ** 2, om) == pytest.approx(0.5, abs=1e-4)

    def test_bounds(self, rng):
        for _ in range(50):
            p = synthetic_pair(rng.uniform(0, 1, 64))
            assert 0.0 <= residual_cost(p) <= 1.0

    def test_zero_only_for_full_coherence(self):
        c = np.ones(64)
        c[10] = 0.99
        assert residual_cost(synthetic_pair(c)) > 0.0
