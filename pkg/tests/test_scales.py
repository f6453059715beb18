import numpy as np
import pytest

from spectrain.datasets import gen_signal
from spectrain.errors import InvalidInput
from spectrain.scales import (
    SampledSignal,
    build_ladder,
    detect_frequencies_dmd,
    detect_frequencies_fft,
    freq_to_gamma,
    ladder_from_signal,
)


def make_signal(fn, n=512, a=0.0, b=2.0):
    xs = a + (b - a) * np.arange(n) / n
    return SampledSignal(xs, fn(xs))


class TestSampledSignal:
    def test_rejects_nonuniform(self):
        xs = np.array([0.0, 0.1, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7])
        with pytest.raises(InvalidInput):
            SampledSignal(xs, np.zeros(8))

    def test_rejects_short(self):
        with pytest.raises(InvalidInput):
            SampledSignal(np.arange(4.0), np.zeros(4))


class TestFftDetector:
    def test_single_tone(self):
        sig = make_signal(lambda x: np.sin(2 * np.pi * x))
        f = detect_frequencies_fft(sig, keep_fraction=0.1)
        np.testing.assert_allclose(f, [1.0])

    def test_two_tone(self):
        sig = make_signal(lambda x: np.cos(2 * np.pi * x) + np.sin(20 * np.pi * x))
        f = detect_frequencies_fft(sig, keep_fraction=0.1)
        np.testing.assert_allclose(f, [1.0, 10.0])

    def test_constant_is_empty(self):
        sig = make_signal(lambda x: np.full_like(x, 5.0))
        assert detect_frequencies_fft(sig).size == 0

    def test_trend_does_not_register_as_dc(self):
        sig = make_signal(lambda x: 3.0 + x + np.sin(20 * np.pi * x))
        f = detect_frequencies_fft(sig)
        assert 10.0 in f
        assert 0.0 not in f
        # the trend itself shows up as the coarsest retained frequency
        assert f.min() < 1.0


class TestDmdDetector:
    def test_single_tone(self):
        sig = make_signal(lambda x: np.sin(20 * np.pi * x))
        f = detect_frequencies_dmd(sig, delay=8)
        assert f.size == 1
        assert abs(f[0] - 10.0) < 0.1

    def test_constant_is_empty(self):
        sig = make_signal(lambda x: np.full_like(x, 2.0))
        assert detect_frequencies_dmd(sig).size == 0

    def test_two_tone(self):
        sig = make_signal(lambda x: np.cos(2 * np.pi * x) + np.sin(20 * np.pi * x))
        f = detect_frequencies_dmd(sig, delay=10)
        assert f.size == 2
        assert abs(f[0] - 1.0) / 1.0 < 0.01
        assert abs(f[1] - 10.0) / 10.0 < 0.01

    def test_agrees_with_fft_on_tones(self):
        for fn in (lambda x: np.sin(2 * np.pi * x),
                   lambda x: np.sin(20 * np.pi * x),
                   lambda x: np.cos(2 * np.pi * x) + np.sin(20 * np.pi * x)):
            sig = make_signal(fn)
            ff = detect_frequencies_fft(sig, keep_fraction=0.1)
            fd = detect_frequencies_dmd(sig, delay=10)
            assert ff.size == fd.size
            np.testing.assert_allclose(ff, fd, rtol=0.01)


class TestFreqToGamma:
    def test_unit_frequency(self):
        assert freq_to_gamma(1.0) == 36.0

    def test_f10(self):
        assert freq_to_gamma(10.0) == 3600.0

    def test_unit_sigma(self):
        np.testing.assert_allclose(freq_to_gamma(1.0 / 6.0), 1.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidInput):
            freq_to_gamma(0.0)

    def test_identities(self):
        # gamma * sigma^2 = 1 and 6 f sigma = 1, exactly as algebra
        rng = np.random.default_rng(0)
        for f in rng.uniform(0.01, 100, size=50):
            g = freq_to_gamma(f)
            sigma = 1.0 / (6.0 * f)
            np.testing.assert_allclose(g * sigma**2, 1.0, rtol=1e-12)

    def test_strictly_increasing(self):
        fs = np.linspace(0.1, 50, 200)
        gs = [freq_to_gamma(f) for f in fs]
        assert np.all(np.diff(gs) > 0)


class TestBuildLadder:
    def test_single_frequency_single_layer(self):
        lad = build_ladder([1.0], rho=2.0)
        assert lad.layer_count == 1
        assert lad.scales == [36.0]

    def test_empty_single_layer(self):
        lad = build_ladder([], rho=2.0)
        assert lad.layer_count == 1

    def test_rejects_rho_below_one(self):
        with pytest.raises(InvalidInput):
            build_ladder([1.0, 2.0], rho=1.0)

    def test_two_tone_two_layers(self):
        lad = build_ladder([1.0, 10.0], rho=2.0)
        assert lad.layer_count == 2
        assert lad.gamma0 == 36.0
        assert lad.gamma_max == 3600.0

    def test_scales_on_geometric_grid(self):
        lad = build_ladder([1.0, 3.0, 10.0], rho=2.0)
        for s, j in zip(lad.scales, lad.rungs):
            np.testing.assert_allclose(s, lad.gamma0 * lad.rho**j, rtol=1e-12)
        assert np.all(np.diff(lad.scales) > 0)

    def test_monotone_in_rho_and_ratio(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            f0 = rng.uniform(0.1, 10)
            ratio = rng.uniform(1.0, 50)
            rho1, rho2 = sorted(rng.uniform(1.1, 8, size=2))
            l_small_rho = build_ladder([f0, f0 * ratio], rho=rho1).layer_count
            l_big_rho = build_ladder([f0, f0 * ratio], rho=rho2).layer_count
            assert l_big_rho <= l_small_rho
            wider = build_ladder([f0, f0 * ratio * 2], rho=rho1).layer_count
            assert wider >= l_small_rho


class TestReferenceLayerCounts:
    """Layer counts for the documented test signals (FFT path, rho=2)."""

    @pytest.mark.parametrize(
        "signal_id,expected",
        [
            ("sin_2pi_x", 1),
            ("sin_20pi_x", 1),
            ("cos_2pi_x_plus_sin_20pi_x", 2),
            ("cos_20pi_x_sin_15pi_x", 2),
            ("x_plus_sin_2pi_x4", 7),
        ],
    )
    def test_layer_count(self, signal_id, expected):
        sig = gen_signal(signal_id)
        lad = ladder_from_signal(sig, method="fft", rho=2.0)
        assert lad.layer_count == expected
