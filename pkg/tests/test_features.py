import numpy as np
import pytest
from hypothesis import given, strategies as st

from fairdep.features import (
    ALPHA_BAND,
    Band,
    MultiChannelSignal,
    PsdEstimate,
    asymmetry_matrix,
    band_power_features,
    band_relative_power,
    minmax_normalize,
    segment,
    welch_psd,
    zscore,
)


def sinusoid(freq_hz, rate, seconds, amplitude=1.0, phase=0.0):
    t = np.arange(int(rate * seconds)) / rate
    return amplitude * np.sin(2 * np.pi * freq_hz * t + phase)


class TestSegment:
    def test_counts_and_sizes(self):
        sig = MultiChannelSignal(np.zeros((2, 300 * 256)), 256.0)
        windows = segment(sig, 4.0)
        assert len(windows) == 75
        assert all(w.n_samples == 1024 for w in windows)

    def test_one_second_windows(self):
        sig = MultiChannelSignal(np.zeros((1, 300 * 250)), 250.0)
        assert len(segment(sig, 1.0)) == 300

    def test_short_signal_errors(self):
        sig = MultiChannelSignal(np.zeros((1, 128)), 256.0)
        with pytest.raises(ValueError):
            segment(sig, 1.0)

    def test_concatenation_round_trip(self):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(3, 1000))
        sig = MultiChannelSignal(data, 100.0)
        windows = segment(sig, 3.0)
        rebuilt = np.concatenate([w.samples for w in windows], axis=1)
        assert np.array_equal(rebuilt, data[:, : rebuilt.shape[1]])


class TestMinmax:
    def test_affine_map(self):
        sig = MultiChannelSignal(np.array([[0.0, 2.0, 4.0]]), 10.0)
        assert minmax_normalize(sig).samples.tolist() == [[0.0, 0.5, 1.0]]

    def test_already_unit_range_unchanged(self):
        sig = MultiChannelSignal(np.array([[0.0, 0.25, 1.0]]), 10.0)
        assert np.array_equal(minmax_normalize(sig).samples, sig.samples)

    def test_constant_channel_maps_to_zeros(self):
        sig = MultiChannelSignal(np.array([[3.0, 3.0, 3.0]]), 10.0)
        out = minmax_normalize(sig).samples
        assert np.array_equal(out, np.zeros((1, 3)))
        assert np.all(np.isfinite(out))

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        sig = MultiChannelSignal(rng.normal(size=(2, 50)), 10.0)
        once = minmax_normalize(sig)
        twice = minmax_normalize(once)
        assert np.allclose(once.samples, twice.samples, atol=1e-15)


class TestZscore:
    def test_two_point_column(self):
        out = zscore(np.array([[1.0], [3.0]]))
        assert out.tolist() == [[-1.0], [1.0]]

    def test_standardized_column_unchanged(self):
        col = np.array([[-1.0], [0.0], [1.0]]) * np.sqrt(1.5)
        out = zscore(col)
        assert np.allclose(out, col / col.std(axis=0), atol=1e-9)
        assert abs(out.mean()) < 1e-9

    def test_constant_column_zeros(self):
        out = zscore(np.array([[2.0, 1.0], [2.0, 3.0]]))
        assert np.array_equal(out[:, 0], np.zeros(2))

    def test_requires_two_rows(self):
        with pytest.raises(ValueError):
            zscore(np.array([[1.0, 2.0]]))


class TestWelch:
    def test_sinusoid_peak_and_parseval(self):
        x = sinusoid(10.0, 256.0, 4.0)
        psd = welch_psd(x, 256.0, segment_length=256, overlap_fraction=0.5)
        peak = psd.frequencies[np.argmax(psd.power)]
        assert peak == pytest.approx(10.0, abs=0.5)
        total = np.trapz(psd.power, psd.frequencies)
        assert total == pytest.approx(0.5, rel=0.10)  # unit sinusoid variance

    def test_zero_series_gives_zero_psd(self):
        psd = welch_psd(np.zeros(512), 256.0, segment_length=256)
        assert np.all(psd.power == 0.0)

    def test_dc_removed(self):
        psd = welch_psd(np.full(512, 7.3), 256.0, segment_length=256)
        assert np.all(psd.power < 1e-20)

    def test_grid_resolution(self):
        psd = welch_psd(np.random.default_rng(0).normal(size=1024), 256.0, segment_length=128)
        assert np.allclose(np.diff(psd.frequencies), 256.0 / 128)
        assert psd.frequencies[0] == 0.0
        assert psd.frequencies[-1] == 128.0

    def test_scaling_quadratic_in_amplitude(self):
        x = sinusoid(10.0, 256.0, 4.0)
        a = welch_psd(x, 256.0, segment_length=256)
        b = welch_psd(3.0 * x, 256.0, segment_length=256)
        assert np.allclose(b.power, 9.0 * a.power, rtol=1e-9)

    def test_segment_too_long_errors(self):
        with pytest.raises(ValueError):
            welch_psd(np.zeros(100), 256.0, segment_length=256)

    def test_bad_overlap_rejected(self):
        with pytest.raises(ValueError):
            welch_psd(np.zeros(512), 256.0, segment_length=128, overlap_fraction=1.0)


class TestBandRelativePower:
    def test_alpha_dominates_for_alpha_sinusoid(self):
        x = sinusoid(10.0, 256.0, 4.0)
        psd = welch_psd(x, 256.0, segment_length=256, overlap_fraction=0.5)
        rel = band_relative_power(psd, Band(*ALPHA_BAND))
        assert rel >= 0.95

    def test_even_split_between_two_tones(self):
        x = sinusoid(10.0, 256.0, 8.0) + sinusoid(20.0, 256.0, 8.0, phase=1.0)
        psd = welch_psd(x, 256.0, segment_length=256)
        rel = band_relative_power(psd, Band(*ALPHA_BAND))
        assert rel == pytest.approx(0.5, abs=0.05)

    def test_flat_psd_ratio_of_widths(self):
        freqs = np.arange(0.0, 33.0)
        psd = PsdEstimate(freqs, np.ones_like(freqs))
        rel = band_relative_power(psd, Band(0.0, 16.0), Band(0.0, 32.0))
        assert rel == pytest.approx(0.5, abs=1e-6)

    def test_scale_invariance(self):
        x = sinusoid(10.0, 256.0, 4.0) + 0.1 * np.random.default_rng(2).normal(size=1024)
        a = welch_psd(x, 256.0, segment_length=256)
        b = welch_psd(5.0 * x, 256.0, segment_length=256)
        band = Band(*ALPHA_BAND)
        assert band_relative_power(a, band) == pytest.approx(
            band_relative_power(b, band), rel=1e-9
        )

    def test_zero_total_power_errors(self):
        freqs = np.arange(0.0, 33.0)
        psd = PsdEstimate(freqs, np.zeros_like(freqs))
        with pytest.raises(ValueError):
            band_relative_power(psd, Band(8.0, 13.0))

    def test_band_outside_grid_errors(self):
        psd = PsdEstimate(np.arange(0.0, 10.0), np.ones(10))
        with pytest.raises(ValueError):
            band_relative_power(psd, Band(8.0, 13.0), Band(0.0, 9.0))


class TestAsymmetry:
    def test_equal_powers_zero_matrix(self):
        assert np.array_equal(asymmetry_matrix([0.3, 0.3, 0.3]), np.zeros((3, 3)))

    def test_two_channel_example(self):
        out = asymmetry_matrix([0.2, 0.5])
        assert np.allclose(out, [[0.0, -0.3], [0.3, 0.0]])

    def test_channel_subset(self):
        out = asymmetry_matrix([0.1, 0.9, 0.4], channels=[0, 2])
        assert np.allclose(out, [[0.0, -0.3], [0.3, 0.0]])

    @given(
        st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=2, max_size=8)
    )
    def test_antisymmetric_zero_diagonal(self, powers):
        out = asymmetry_matrix(powers)
        assert np.array_equal(out, -out.T)
        assert np.all(np.diag(out) == 0.0)


def test_band_power_features_shape():
    rng = np.random.default_rng(5)
    sig = MultiChannelSignal(
        np.stack([sinusoid(10.0, 128.0, 2.0) + 0.5 * rng.normal(size=256) for _ in range(3)]),
        128.0,
    )
    feats = band_power_features(sig)
    assert feats.shape == (3,)
    assert np.all((feats >= 0) & (feats <= 1))
