"""EEG-style feature extraction.

Segmentation into fixed windows, per-channel normalisation, Welch power
spectral density, band relative power via Simpson integration, and pairwise
asymmetry matrices.

Welch defaults throughout: one-second segments, 50% overlap, Hann window,
per-segment mean removal, one-sided density scaling (power per Hz). The
alpha band is 8-13 Hz and relative powers are normalised against a
0.5-30 Hz total band unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.signal import welch

ALPHA_BAND = (8.0, 13.0)
TOTAL_BAND = (0.5, 30.0)


@dataclass(frozen=True)
class Band:
    low: float
    high: float

    def __post_init__(self):
        if not 0.0 <= self.low < self.high:
            raise ValueError(f"invalid band [{self.low}, {self.high}]")


@dataclass(frozen=True)
class MultiChannelSignal:
    """samples is channels x time; at least one channel, two samples."""

    samples: np.ndarray
    sample_rate: float
    channel_names: tuple[str, ...] = ()

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise ValueError("samples must be a channels x time matrix")
        if samples.shape[0] < 1 or samples.shape[1] < 2:
            raise ValueError("need at least 1 channel and 2 samples")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        names = self.channel_names or tuple(f"ch{i}" for i in range(samples.shape[0]))
        if len(names) != samples.shape[0]:
            raise ValueError("channel_names length must match channel count")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "channel_names", tuple(names))

    @property
    def n_channels(self) -> int:
        return int(self.samples.shape[0])

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[1])

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided PSD: frequencies strictly increasing from 0 to Nyquist."""

    frequencies: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=np.float64)
        p = np.asarray(self.power, dtype=np.float64)
        if f.shape != p.shape or f.ndim != 1:
            raise ValueError("frequencies and power must be equal-length vectors")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(p < 0):
            raise ValueError("power values must be non-negative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "power", p)


def segment(signal: MultiChannelSignal, window_seconds: float) -> list[MultiChannelSignal]:
    """Cut into floor(duration/window) non-overlapping windows, in order.

    The trailing remainder is discarded. Raises if the signal is shorter
    than one window.
    """
    window_samples = int(round(window_seconds * signal.sample_rate))
    if window_samples < 2:
        raise ValueError("window must cover at least 2 samples")
    n_windows = signal.n_samples // window_samples
    if n_windows < 1:
        raise ValueError(
            f"signal of {signal.n_samples} samples is shorter than one "
            f"{window_samples}-sample window"
        )
    return [
        MultiChannelSignal(
            samples=signal.samples[:, i * window_samples : (i + 1) * window_samples],
            sample_rate=signal.sample_rate,
            channel_names=signal.channel_names,
        )
        for i in range(n_windows)
    ]


def minmax_normalize(signal: MultiChannelSignal) -> MultiChannelSignal:
    """Affinely map each channel to [0, 1]; constant channels map to zeros."""
    samples = signal.samples
    lo = samples.min(axis=1, keepdims=True)
    hi = samples.max(axis=1, keepdims=True)
    span = hi - lo
    out = np.zeros_like(samples)
    nonconst = (span > 0).ravel()
    out[nonconst] = (samples[nonconst] - lo[nonconst]) / span[nonconst]
    return MultiChannelSignal(out, signal.sample_rate, signal.channel_names)


def zscore(feature_matrix: np.ndarray) -> np.ndarray:
    """Standardize each column to mean 0 and population std 1.

    Zero-variance columns map to zeros. Requires at least 2 rows.
    """
    X = np.asarray(feature_matrix, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("zscore needs a matrix with at least 2 rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)  # population std (ddof=0)
    out = np.zeros_like(X)
    nz = std > 0
    out[:, nz] = (X[:, nz] - mean[nz]) / std[nz]
    return out


def welch_psd(
    series: np.ndarray,
    sample_rate: float,
    segment_length: Optional[int] = None,
    overlap_fraction: float = 0.5,
) -> PsdEstimate:
    """Welch PSD: Hann window, per-segment mean removal, density scaling.

    segment_length defaults to one second worth of samples. The frequency
    grid spacing is exactly sample_rate / segment_length, and the integral
    of the PSD approximates the series variance (Parseval).
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("welch_psd expects a single-channel series")
    if segment_length is None:
        segment_length = int(round(sample_rate))
    if segment_length > x.shape[0]:
        raise ValueError(
            f"segment_length {segment_length} exceeds series length {x.shape[0]}"
        )
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError("overlap_fraction must lie in [0, 1)")
    freqs, power = welch(
        x,
        fs=sample_rate,
        window="hann",
        nperseg=segment_length,
        noverlap=int(overlap_fraction * segment_length),
        detrend="constant",
        return_onesided=True,
        scaling="density",
    )
    return PsdEstimate(frequencies=freqs, power=power)


def band_power(psd: PsdEstimate, band: Band) -> float:
    """Simpson-rule integral of the PSD over the grid points inside the band.

    Computed as a difference of the cumulative Simpson integral over the
    full grid, so that band and total-band integrals of the same PSD share
    one quadrature (a narrow spectral peak is weighted identically in both).
    """
    f = psd.frequencies
    if band.low < f[0] or band.high > f[-1]:
        raise ValueError(
            f"band [{band.low}, {band.high}] outside the frequency grid "
            f"[{f[0]}, {f[-1]}]"
        )
    sel = np.nonzero((f >= band.low) & (f <= band.high))[0]
    if sel.shape[0] < 2:
        raise ValueError("band covers fewer than 2 grid points")
    cumulative = cumulative_simpson(psd.power, x=f, initial=0.0)
    return float(cumulative[sel[-1]] - cumulative[sel[0]])


def band_relative_power(psd: PsdEstimate, band: Band, total_band: Optional[Band] = None) -> float:
    """Band power divided by total-band power (both Simpson integrals)."""
    if total_band is None:
        total_band = Band(*TOTAL_BAND)
    total = band_power(psd, total_band)
    if total <= 0.0:
        raise ValueError("total band power is zero; relative power undefined")
    return band_power(psd, band) / total


def asymmetry_matrix(
    relative_powers: Sequence[float], channels: Optional[Sequence[int]] = None
) -> np.ndarray:
    """Antisymmetric matrix of pairwise differences: out[i, j] = rp[i] - rp[j].

    ``channels`` optionally selects the channel subset (by index) to build
    the matrix over.
    """
    rp = np.asarray(relative_powers, dtype=np.float64)
    if rp.ndim != 1:
        raise ValueError("relative_powers must be a vector")
    if channels is not None:
        rp = rp[np.asarray(channels, dtype=np.intp)]
    if rp.shape[0] < 2:
        raise ValueError("need at least 2 channels")
    return rp[:, None] - rp[None, :]


def band_power_features(
    signal: MultiChannelSignal,
    band: Band = Band(*ALPHA_BAND),
    total_band: Optional[Band] = None,
    segment_length: Optional[int] = None,
    overlap_fraction: float = 0.5,
) -> np.ndarray:
    """Per-channel band relative power vector for one signal window."""
    values = []
    for ch in range(signal.n_channels):
        psd = welch_psd(
            signal.samples[ch],
            signal.sample_rate,
            segment_length=segment_length,
            overlap_fraction=overlap_fraction,
        )
        values.append(band_relative_power(psd, band, total_band))
    return np.array(values, dtype=np.float64)
